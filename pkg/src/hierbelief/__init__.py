"""Belief-function calculus with fuzzy coarse semantics for two-level
hierarchical classification: focal-set budgets, mass and pignistic
transforms, the t-norm consistency loss, constrained decoding, and the
evaluation metric suite."""

__version__ = "0.1.0"
