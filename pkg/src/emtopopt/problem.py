"""Problem definitions, named presets and geometric helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from .exceptions import ConfigurationError
from .grid import GridSpec, lens_design_indices
from .material import DielectricSpec, PlasmonicSpec

Material = Union[DielectricSpec, PlasmonicSpec]

DEFAULT_SCALE = 1e-9


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Everything needed to evaluate the focusing figure of merit.

    ``wavelength`` and ``filter_radius`` are in element counts. With
    ``link="columns"`` there is one design variable per grid column, shared
    by all design elements of that column. ``strip`` records the
    ``(start_row, thickness)`` of a full-width design strip when the design
    domain was generated from one (``None`` otherwise).
    """

    grid: GridSpec
    wavelength: float
    filter_radius: float
    material: Material = field(default_factory=DielectricSpec)
    source: str = "bottom"
    link: str = "none"
    substrate: bool = True
    dvini: Union[float, np.ndarray] = 0.5
    strip: tuple | None = None

    def __post_init__(self):
        if not self.wavelength > 2:
            raise ConfigurationError(f"wavelength must exceed 2 elements, got {self.wavelength}")
        if not self.filter_radius >= 1:
            raise ConfigurationError(f"filter radius must be >= 1, got {self.filter_radius}")
        if self.source not in ("bottom", "top"):
            raise ConfigurationError(f"source must be 'bottom' or 'top', got {self.source!r}")
        if self.link not in ("none", "columns"):
            raise ConfigurationError(f"link must be 'none' or 'columns', got {self.link!r}")
        if self.link == "columns":
            counts = np.bincount(self.grid.design_index // self.grid.nely, minlength=self.grid.nelx)
            if np.any(counts != counts[0]) or counts[0] == 0:
                raise ConfigurationError("column linking needs a full-width design strip")
        dv = np.asarray(self.dvini, dtype=float)
        if dv.ndim > 0 and dv.size not in (1, self.n_vars):
            raise ConfigurationError(f"dvini has {dv.size} values, expected 1 or {self.n_vars}")
        if np.any(dv < 0) or np.any(dv > 1):
            raise ConfigurationError("dvini must lie in [0, 1]")

    @property
    def n_vars(self) -> int:
        return self.grid.nelx if self.link == "columns" else self.grid.n_design

    def initial_design(self) -> np.ndarray:
        dv = np.asarray(self.dvini, dtype=float).ravel()
        return np.full(self.n_vars, dv[0]) if dv.size == 1 else dv.copy()


def lens_problem(
    nelx: int,
    nely: int,
    target,
    start_row: int,
    thickness: int,
    wavelength: float,
    filter_radius: float,
    material: Material | None = None,
    scale: float = DEFAULT_SCALE,
    **kwargs,
) -> ProblemSpec:
    """Problem with a full-width design strip, the layout used by all presets."""
    design = lens_design_indices(nelx, nely, thickness, start_row)
    grid = GridSpec(nelx, nely, scale, tuple(target), design)
    return ProblemSpec(
        grid=grid,
        wavelength=wavelength,
        filter_radius=filter_radius,
        material=material if material is not None else DielectricSpec(),
        strip=(start_row, thickness),
        **kwargs,
    )


def rescale(problem: ProblemSpec, factor: float) -> ProblemSpec:
    """Same physical problem on a grid refined (``factor > 1``) or coarsened.

    Element counts, wavelength and filter radius are multiplied by
    ``factor`` and the element size divided by it. Only strip-based
    problems can be rescaled. Element indices map to the element containing
    the same physical point; a coarsened filter radius is clamped at 1.
    """
    if not factor > 0:
        raise ConfigurationError(f"resolution factor must be positive, got {factor}")
    if problem.strip is None:
        raise ConfigurationError("only strip-based problems can be rescaled")
    if factor == 1:
        return problem
    g = problem.grid
    nelx, nely = round(g.nelx * factor), round(g.nely * factor)
    if not (math.isclose(nelx, g.nelx * factor) and math.isclose(nely, g.nely * factor)):
        raise ConfigurationError(f"factor {factor} does not map {g.nelx}x{g.nely} onto whole elements")
    start, thickness = problem.strip

    def containing(i):
        return int(math.floor((i - 0.5) * factor)) + 1

    dvini = problem.dvini
    if np.ndim(dvini) > 0 and np.size(dvini) > 1:
        raise ConfigurationError("per-variable dvini cannot be rescaled")
    return lens_problem(
        nelx,
        nely,
        (containing(g.target[0]), containing(g.target[1])),
        int(math.floor((start - 1) * factor)) + 1,
        max(1, int(round(thickness * factor))),
        problem.wavelength * factor,
        max(1.0, problem.filter_radius * factor),
        problem.material,
        g.scale / factor,
        source=problem.source,
        link=problem.link,
        substrate=problem.substrate,
        dvini=dvini,
    )


def compute_geometric_na(problem: ProblemSpec) -> float:
    """Numerical aperture ``sin(atan((w/2) / f))`` of a strip lens.

    ``f`` is the distance in elements from the strip's top row to the
    target row. Returns NaN when the target is not above the strip.
    """
    if problem.strip is None:
        return float("nan")
    f = problem.strip[0] - problem.grid.target[1]
    if f <= 0:
        return float("nan")
    return float(math.sin(math.atan((problem.grid.nelx / 2) / f)))


@dataclass(frozen=True)
class Preset:
    """A named run: one or more problems plus optimizer settings."""

    name: str
    problems: List[ProblemSpec]
    max_iter: int
    optimizer: str = "gradient"
    beta: float = 5.0
    labels: List[str] = field(default_factory=list)


def _metalens(fr: float = 6.0, **kw) -> ProblemSpec:
    return lens_problem(400, 200, (200, 80), 165, 15, 35.0, fr, DielectricSpec(3.0, 1.0), **kw)


def preset(name: str) -> Preset:
    """Named reference setups (see ``PRESETS``)."""
    if name == "metalens":
        return Preset(name, [_metalens()], max_iter=200)
    if name == "filter-sweep":
        radii = [1.0, 3.0, 6.0, 9.0]
        return Preset(name, [_metalens(r) for r in radii], max_iter=200, labels=[f"fR{r:g}" for r in radii])
    if name == "reflector":
        p = lens_problem(400, 200, (200, 100), 165, 15, 35.0, 3.0, PlasmonicSpec(1.9, 1.5), source="top")
        return Preset(name, [p], max_iter=200)
    if name == "lens1d":
        return Preset(name, [_metalens(3.0, link="columns")], max_iter=200)
    if name == "ga-compare":
        p = lens_problem(100, 50, (50, 10), 35, 10, 20.0, 3.0, DielectricSpec(3.0, 1.0))
        return Preset(name, [p], max_iter=500)
    raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("metalens", "filter-sweep", "reflector", "lens1d", "ga-compare")

