"""Quakebend deformations of once-punctured-torus groups."""

__version__ = "0.1.0"
