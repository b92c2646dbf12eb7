"""Numerical certification of two-spinor and extended electroweak tensor identities."""

__version__ = "0.1.0"
