"""Small-step semantics of programs, events and parallel event systems."""
