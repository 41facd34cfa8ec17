"""Planar rigid body with circulation: added mass by panels, Lie-Poisson dynamics, checks."""

__version__ = "0.1.0"
