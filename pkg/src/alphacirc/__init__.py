"""Singular values of alpha-circulant and alpha-Toeplitz matrices."""

__version__ = "0.1.0"
