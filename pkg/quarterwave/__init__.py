"""Quarter-plane Robin two-body solver"""

__version__ = "0.1.0"
