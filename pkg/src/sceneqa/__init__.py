"""Question generation and evaluation over driving-scene graphs."""

__version__ = "0.1.0"
