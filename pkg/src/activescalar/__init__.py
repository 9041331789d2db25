"""Hilbert-velocity transport with fractional and logarithmic dissipation: solver and modulus bench."""
