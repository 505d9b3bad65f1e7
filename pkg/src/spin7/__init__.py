"""Cohomogeneity-one Spin(7) metrics: flow, closed forms, curvature, spinors, harmonic forms."""

__version__ = "0.1.0"
