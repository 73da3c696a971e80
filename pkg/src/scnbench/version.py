"""Version information for SCN Bench."""

__version__ = "0.1.0"
