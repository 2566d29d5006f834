"""Certified interval verification and desk-scale experiments for biased
hyperplane rounding blueprints."""

__version__ = "0.1.0"
