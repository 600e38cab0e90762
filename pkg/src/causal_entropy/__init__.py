"""Entropic analysis of causal structures with classical, quantum and GPT resources."""

__version__ = "0.1.0"
