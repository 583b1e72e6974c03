"""Rely-guarantee proof checking and the invariant pipeline."""
