"""Historical people networks and news co-occurrence networks from Wikipedia dumps."""

__version__ = "0.1.0"
