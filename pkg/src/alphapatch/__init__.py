"""Contour dynamics for alpha-SQG patches with splash diagnostics."""

from .curves import PatchBoundary, PatchSystem, disc, ellipse, fourier
from .evolution import EvolutionConfig, run
from .velocity import normal_velocity

__all__ = ["EvolutionConfig", "PatchBoundary", "PatchSystem", "disc", "ellipse", "fourier",
           "normal_velocity", "run"]
