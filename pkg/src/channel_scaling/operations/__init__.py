"""Numerical operations on finite channels: marginals, divergences, scalings and projections."""
