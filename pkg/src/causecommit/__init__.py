"""Cause-commitment classification and words-vs-actions auditing."""

__version__ = "0.1.0"
