"""Command-line helpers around the checker."""
