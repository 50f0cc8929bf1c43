"""Building-block assembly of ionizable lipids with policy-guided tree search."""

__version__ = "0.1.0"
