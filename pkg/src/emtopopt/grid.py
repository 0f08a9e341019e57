"""Structured quadrilateral grid, index sets and design embedding.

Elements and nodes are numbered column-major with the y-index running
fastest, exactly like the MATLAB reference code: element ``(ix, iy)``
(1-based) has index ``(ix - 1) * nely + iy``. Row ``iy = 1`` is the top of
the domain, row ``iy = nely`` is the substrate side at the bottom.

All indices handed in from the outside (target element, design element
lists) are 1-based. Arrays returned by :func:`build_index_sets` are
0-based, ready for numpy fancy indexing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from .exceptions import ConfigurationError

BOUNDARY_NAMES = ("left", "top", "right", "bottom")


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Rectangular grid of ``nelx * nely`` square elements.

    Args:
        nelx: element count in x.
        nely: element count in y.
        scale: element side length in meters.
        target: 1-based ``(x, y)`` indices of the focal element.
        design_elements: 1-based column-major indices of the designable
            elements, in design-vector order.
    """

    nelx: int
    nely: int
    scale: float
    target: Tuple[int, int]
    design_elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.nelx < 1 or self.nely < 1:
            raise ConfigurationError(f"grid must have at least one element, got {self.nelx}x{self.nely}")
        if not self.scale > 0:
            raise ConfigurationError(f"scale must be positive, got {self.scale}")
        tx, ty = self.target
        if not (1 <= tx <= self.nelx and 1 <= ty <= self.nely):
            raise ConfigurationError(f"target {self.target} outside {self.nelx}x{self.nely} grid")
        dv = np.asarray(self.design_elements, dtype=np.int64).ravel(order="F")
        if dv.size == 0:
            raise ConfigurationError("design domain is empty")
        if dv.min() < 1 or dv.max() > self.n_elements:
            raise ConfigurationError("design element index out of range")
        if np.unique(dv).size != dv.size:
            raise ConfigurationError("duplicate design element indices")
        dv.setflags(write=False)
        object.__setattr__(self, "design_elements", dv)
        object.__setattr__(self, "target", (int(tx), int(ty)))

    @property
    def n_elements(self) -> int:
        return self.nelx * self.nely

    @property
    def n_nodes(self) -> int:
        return (self.nelx + 1) * (self.nely + 1)

    @property
    def n_design(self) -> int:
        return int(self.design_elements.size)

    @property
    def target_element(self) -> int:
        """0-based flat index of the focal element."""
        tx, ty = self.target
        return (tx - 1) * self.nely + (ty - 1)

    @property
    def design_index(self) -> np.ndarray:
        """0-based flat indices of the design elements."""
        return self.design_elements - 1


@dataclass(frozen=True, eq=False)
class IndexSets:
    """Connectivity and scatter indices for one grid (all 0-based).

    ``edof`` lists the four nodes of every element counter-clockwise
    (lower-left, lower-right, upper-right, upper-left). ``boundary`` maps
    each side to a ``(2, n_edges)`` array of node pairs.
    """

    edof: np.ndarray
    i_sys: np.ndarray
    j_sys: np.ndarray
    boundary: Dict[str, np.ndarray]
    i_bc: np.ndarray
    j_bc: np.ndarray
    sens_gather: np.ndarray

    def source_edges(self, side: str) -> np.ndarray:
        """Node pairs of the excitation boundary (``"bottom"`` or ``"top"``)."""
        if side not in ("bottom", "top"):
            raise ConfigurationError(f"source boundary must be 'bottom' or 'top', got {side!r}")
        return self.boundary[side]


def _edge_pattern(pairs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # per edge (a, b): entries (a,b), (b,a), (a,a), (b,b)
    a, b = pairs
    rows = np.stack([a, b, a, b]).ravel(order="F")
    cols = np.stack([b, a, a, b]).ravel(order="F")
    return rows, cols


def build_index_sets(spec: GridSpec) -> IndexSets:
    """Build element connectivity, assembly scatter and boundary edge sets."""
    nex, ney = spec.nelx, spec.nely
    if spec.n_nodes > np.iinfo(np.int64).max // 16:
        raise ConfigurationError("node count exceeds the index range")
    nodenrs = np.arange(spec.n_nodes, dtype=np.int64).reshape(ney + 1, nex + 1, order="F")
    edofvec = (nodenrs[:-1, :-1] + 1).ravel(order="F")
    edof = edofvec[:, None] + np.array([0, ney + 1, ney, -1], dtype=np.int64)

    # 16 entries per element, column-major over the 4x4 block
    i_sys = np.tile(edof, (1, 4)).ravel()
    j_sys = np.repeat(edof, 4, axis=1).ravel()

    iy = np.arange(ney, dtype=np.int64)
    ix = np.arange(nex, dtype=np.int64)
    boundary = {
        "left": np.stack([iy, iy + 1]),
        "top": np.stack([ix * (ney + 1), (ix + 1) * (ney + 1)]),
        "right": np.stack([nex * (ney + 1) + iy, nex * (ney + 1) + iy + 1]),
        "bottom": np.stack([(ix + 2) * (ney + 1) - 1, (ix + 1) * (ney + 1) - 1]),
    }
    rows, cols = zip(*(_edge_pattern(boundary[name]) for name in BOUNDARY_NAMES))
    return IndexSets(
        edof=edof,
        i_sys=i_sys,
        j_sys=j_sys,
        boundary=boundary,
        i_bc=np.concatenate(rows),
        j_bc=np.concatenate(cols),
        sens_gather=edof.ravel(),
    )


def lens_design_indices(nelx: int, nely: int, thickness: int, start_row: int) -> np.ndarray:
    """1-based indices of a full-width horizontal design strip.

    The strip covers element rows ``start_row .. start_row + thickness - 1``
    in every column; indices are ordered column by column.
    """
    if thickness < 1:
        raise ConfigurationError(f"design thickness must be >= 1, got {thickness}")
    if start_row < 1 or start_row + thickness - 1 > nely:
        raise ConfigurationError(
            f"design strip rows {start_row}..{start_row + thickness - 1} exceed nely={nely}"
        )
    cols = np.arange(0, nelx * nely, nely, dtype=np.int64)
    rows = np.arange(start_row, start_row + thickness, dtype=np.int64)
    return (cols[None, :] + rows[:, None]).ravel(order="F")


def substrate_first_row(nely: int) -> int:
    """1-based first row of the solid substrate band (bottom 10%)."""
    return -(-9 * nely // 10)


def embed_design(dvs: Sequence[float], spec: GridSpec, substrate: bool = True) -> np.ndarray:
    """Place design values into the full ``(nely, nelx)`` element field.

    Background is air (0); with ``substrate`` the bottom rows from
    ``ceil(0.9 * nely)`` down are solid (1). Design values are written last
    and therefore win where the strip overlaps the substrate.
    """
    dvs = np.asarray(dvs, dtype=float).ravel()
    if dvs.size != spec.n_design:
        raise ConfigurationError(f"expected {spec.n_design} design values, got {dvs.size}")
    x = np.zeros((spec.nely, spec.nelx), order="F")
    if substrate:
        x[substrate_first_row(spec.nely) - 1 :, :] = 1.0
    x.T.flat[spec.design_index] = dvs
    return x
