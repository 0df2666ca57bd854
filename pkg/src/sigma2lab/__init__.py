"""Numerical workbench for the sigma_2 curvature and its linearization."""

__version__ = "0.1.0"
