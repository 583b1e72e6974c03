"""Shared utility helpers."""
