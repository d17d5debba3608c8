"""Exact constructive-real arithmetic, an exact rational simplex solver and
fuel-bounded semi-deciders for linear programs with computable coefficients."""

__version__ = "0.1.0"
