"""Core package entry."""

__all__ = [
    "casestudies",
    "configs",
    "core",
    "explorer",
    "parser",
    "prover",
    "semantics",
    "tools",
    "utils",
]
