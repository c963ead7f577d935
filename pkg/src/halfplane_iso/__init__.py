"""Classify rational self-maps of the upper half-plane by whether their
composition operators on H^p are isometries (equivalently, similar to one)."""

__version__ = "0.1.0"
