"""
citex: rank scholarly journals from cross-citation matrices.
"""

__version__ = "1.0.0"
