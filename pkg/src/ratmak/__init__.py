"""Decision engine for generalized Rattray and Makeev problems over GF(2)."""

__version__ = "0.1.0"
