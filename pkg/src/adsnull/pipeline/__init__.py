"""CLI, configuration, exporters and the solid-torus embedding."""

from .config import RunConfig, resolve
from .embed import TorusPoint, torus_coords, torus_embed

__all__ = ["RunConfig", "resolve", "TorusPoint", "torus_coords", "torus_embed"]
