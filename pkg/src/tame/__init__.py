"""Task-aware multi-expert lifelong learning engine."""

__version__ = "0.1.0"
