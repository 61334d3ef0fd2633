"""Learned pseudo-backdoor branching priorities for mixed integer programs."""

__version__ = "0.1.0"
