"""Exact symbolic verification of twisted anomaly cancellation formulas."""

from .series import GradedClass, GradedRing, HalfQSeries, Rational

__version__ = "0.1.0"

__all__ = ["GradedClass", "GradedRing", "HalfQSeries", "Rational", "__version__"]
