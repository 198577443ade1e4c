"""Mortar finite elements for parabolic problems on nonmatching subdomain grids."""

__version__ = "0.1.0"
