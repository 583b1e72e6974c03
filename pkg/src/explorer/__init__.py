"""Bounded exploration: computations, validity, reachability and metatheory checks."""
