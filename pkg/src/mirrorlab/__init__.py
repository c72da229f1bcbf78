"""Classical dynamics of a thin partially transparent cavity mirror driven by a laser."""

__version__ = "0.1.0"
