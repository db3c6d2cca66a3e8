"""Pseudo-spectral Maxwell-Klein-Gordon solver in Lorenz gauge on a periodic box."""

__version__ = "0.1.0"
