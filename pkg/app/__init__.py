"""Hybrid model-based/data-driven channel prediction toolkit."""
