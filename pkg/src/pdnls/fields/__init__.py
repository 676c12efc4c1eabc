"""Symmetry-reduced spectral representations."""
from .field import (
    HalfShell,
    LpNorm,
    PhysicalSamples,
    ShellWindow,
    SpectralField,
    SphereFunction,
    lp_norm,
    lp_norm_details,
    quad_form,
    shell_split,
    sphere_sobolev_norm,
    sphere_trace,
    symbol_on_grid,
    synthesize,
)
from .grids import (
    AxialGrid,
    BlockGrid,
    FullGrid,
    GridConfig,
    PhysConfig,
    RadialGrid,
    SpectralGrid,
    build_grid,
    coarsen,
    grid_from_descriptor,
)
from .io import load_field, save_field

__all__ = [
    "AxialGrid", "BlockGrid", "FullGrid", "GridConfig", "HalfShell", "LpNorm", "PhysConfig",
    "PhysicalSamples", "RadialGrid", "ShellWindow", "SpectralField", "SpectralGrid",
    "SphereFunction", "build_grid", "coarsen", "grid_from_descriptor", "load_field",
    "lp_norm", "lp_norm_details", "quad_form", "save_field", "shell_split",
    "sphere_sobolev_norm", "sphere_trace", "symbol_on_grid", "synthesize",
]
