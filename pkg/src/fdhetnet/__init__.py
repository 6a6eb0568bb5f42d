"""Stochastic-geometry toolkit for full-duplex heterogeneous cellular networks."""

__version__ = "0.1.0"
