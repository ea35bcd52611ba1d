"""Hypergeometric series, local and WKB expansions, variations and MZV generating functions."""

__version__ = "0.1.0"
SCHEMA = "hyperwkb/1"
