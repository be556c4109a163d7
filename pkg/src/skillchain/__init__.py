"""skillchain: micro-skill knowledge base, macro-level chaining models, and
a human-supervised execution service."""

__version__ = "0.1.0"
