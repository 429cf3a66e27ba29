"""Parse, bind and render declarative infographic models."""

__version__ = "0.1.0"
