"""Monte Carlo laboratory for minimum wage designs that use regional variation."""

__version__ = "0.1.0"
