"""Bilinear finite elements for the scalar Helmholtz equation.

The system matrix is ``S = sum_e (L_e - k^2 eps_e M_e) + B`` where ``B``
holds the first-order absorbing boundary terms. ``S`` is complex symmetric,
so adjoint (transpose) solves reuse the forward LU factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import ConfigurationError, SolverError
from .grid import BOUNDARY_NAMES, IndexSets

# relative residual above which a solve is reported as failed
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ElementMatrices:
    laplace: np.ndarray
    mass: np.ndarray


def element_matrices(scale: float) -> ElementMatrices:
    """Laplace and mass matrices of a square bilinear element of side ``scale``."""
    if not scale > 0:
        raise ConfigurationError(f"scale must be positive, got {scale}")
    a = b = scale / 2
    k1 = (a**2 + b**2) / (a * b)
    k2 = (a**2 - 2 * b**2) / (a * b)
    k3 = (b**2 - 2 * a**2) / (a * b)
    laplace = np.array(
        [
            [k1 / 3, k2 / 6, -k1 / 6, k3 / 6],
            [k2 / 6, k1 / 3, k3 / 6, -k1 / 6],
            [-k1 / 6, k3 / 6, k1 / 3, k2 / 6],
            [k3 / 6, -k1 / 6, k2 / 6, k1 / 3],
        ]
    )
    mass = a * b * np.array(
        [
            [4 / 9, 2 / 9, 1 / 9, 2 / 9],
            [2 / 9, 4 / 9, 2 / 9, 1 / 9],
            [1 / 9, 2 / 9, 4 / 9, 2 / 9],
            [2 / 9, 1 / 9, 2 / 9, 4 / 9],
        ]
    )
    return ElementMatrices(laplace=laplace, mass=mass)


def wavenumber(wavelength_elements: float, scale: float) -> float:
    """Physical wavenumber for a wavelength given in element counts."""
    return 2 * np.pi / (wavelength_elements * scale)


def assemble(eps: np.ndarray, em: ElementMatrices, idx: IndexSets, k: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Triplets ``(rows, cols, values)`` of the volume part of ``S``.

    ``eps`` is the per-element complex permittivity in column-major
    element order (a ``(nely, nelx)`` field is flattened with ``order="F"``).
    """
    eps = np.asarray(eps)
    if eps.ndim == 2:
        eps = eps.ravel(order="F")
    ne = idx.edof.shape[0]
    if eps.size != ne:
        raise ConfigurationError(f"expected {ne} element permittivities, got {eps.size}")
    lem = em.laplace.ravel(order="F")
    mem = em.mass.ravel(order="F")
    values = (lem[None, :] - k**2 * eps[:, None] * mem[None, :]).ravel()
    return idx.i_sys, idx.j_sys, values


def boundary_and_rhs(k: float, scale: float, idx: IndexSets, n_nodes: int, source: str = "bottom"):
    """Absorbing-boundary triplets and the plane-wave excitation vector.

    Returns ``((rows, cols, values), F)``. Every exterior edge gets
    ``1j*k*scale*[[1/3, 1/6], [1/6, 1/3]]``. ``F`` is nonzero on the source
    boundary only: ``+1j*k`` per incident edge for a bottom source and
    ``-1j*k`` for a top source, then multiplied by ``scale``.
    """
    pairs = idx.source_edges(source)
    n_edges = sum(idx.boundary[name].shape[1] for name in BOUNDARY_NAMES)
    edge_values = 1j * k * scale * np.array([1 / 6, 1 / 6, 1 / 3, 1 / 3])
    values = np.tile(edge_values, n_edges)
    sign = 1.0 if source == "bottom" else -1.0
    f = np.zeros(n_nodes, dtype=complex)
    np.add.at(f, pairs[0], sign * 1j * k)
    np.add.at(f, pairs[1], sign * 1j * k)
    return (idx.i_bc, idx.j_bc, values), scale * f


@dataclass(frozen=True, eq=False)
class ComplexSparseSystem:
    matrix: sp.csc_matrix
    rhs: np.ndarray

    @classmethod
    def from_triplets(cls, triplets, rhs: np.ndarray) -> "ComplexSparseSystem":
        """Build ``S`` from one or more triplet streams, summing duplicates."""
        rows = np.concatenate([t[0] for t in triplets])
        cols = np.concatenate([t[1] for t in triplets])
        vals = np.concatenate([t[2] for t in triplets])
        n = rhs.size
        mat = sp.csc_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
        return cls(matrix=mat, rhs=rhs)


class SparsityPattern:
    """Fixed CSC structure for repeated assembly on one grid.

    Built once from the triplet indices; ``matrix(values)`` then sums the
    duplicate entries with a single ``bincount`` instead of a COO->CSC sort.
    """

    def __init__(self, rows: np.ndarray, cols: np.ndarray, n: int):
        probe = sp.csc_matrix((np.arange(1, rows.size + 1, dtype=float), (rows, cols)), shape=(n, n))
        probe.sum_duplicates()
        self.indptr, self.indices = probe.indptr, probe.indices
        key = cols.astype(np.int64) * n + rows
        col_of_slot = np.repeat(np.arange(n), np.diff(self.indptr))
        slot_keys = col_of_slot.astype(np.int64) * n + self.indices
        self.slot = np.searchsorted(slot_keys, key)
        self.n, self.nnz = n, slot_keys.size

    def matrix(self, values: np.ndarray) -> sp.csc_matrix:
        data = np.bincount(self.slot, weights=values.real, minlength=self.nnz) + 1j * np.bincount(
            self.slot, weights=values.imag, minlength=self.nnz
        )
        return sp.csc_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


@dataclass
class SolverStats:
    """Running tally of factorizations and solves."""

    factorizations: int = 0
    forward_solves: int = 0
    adjoint_solves: int = 0


class Factorization:
    """Sparse LU factors of ``S`` supporting solves with ``S`` and ``S.T``.

    SuperLU with a minimum-degree ordering on ``S + S.T`` is used; both solve
    directions reuse the same factors. Every solve is checked against
    ``RESIDUAL_TOL``; a failure raises :class:`SolverError` carrying the
    min/max ratio of the U diagonal as a conditioning hint.
    """

    def __init__(self, matrix: sp.spmatrix, stats: SolverStats | None = None):
        self.stats = stats if stats is not None else SolverStats()
        self.matrix = sp.csc_matrix(matrix)
        self.shape = matrix.shape
        try:
            self._lu = spla.splu(
                self.matrix,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.1,
                options=dict(SymmetricMode=True),
            )
        except RuntimeError as exc:
            raise SolverError(f"LU factorization failed (matrix singular): {exc}") from exc
        self.stats.factorizations += 1

    def pivot_ratio(self) -> float:
        udiag = np.abs(self._lu.U.diagonal())
        return float(udiag.min() / udiag.max()) if udiag.size else 0.0

    def _checked(self, x: np.ndarray, b: np.ndarray, A) -> np.ndarray:
        nb = np.linalg.norm(b)
        res = np.linalg.norm(A @ x - b) / nb if nb > 0 else np.linalg.norm(x)
        if not np.isfinite(res) or res > RESIDUAL_TOL:
            raise SolverError(
                f"solve residual {res:.3e} exceeds {RESIDUAL_TOL:g}; "
                f"min/max |U_ii| = {self.pivot_ratio():.3e} (numerically singular system?)"
            )
        return x

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        self.stats.forward_solves += 1
        return self._checked(self._lu.solve(b), b, self.matrix)

    def solve_transpose(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        self.stats.adjoint_solves += 1
        return self._checked(self._lu.solve(b, trans="T"), b, self.matrix.T)


def factorize(system: ComplexSparseSystem, stats: SolverStats | None = None) -> Factorization:
    return Factorization(system.matrix, stats)
