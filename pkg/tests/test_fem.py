import numpy as np
import pytest
import scipy.sparse as sp

from emtopopt import fem
from emtopopt.exceptions import ConfigurationError, SolverError
from emtopopt.grid import GridSpec, build_index_sets


def build(nelx, nely, wavelength, eps=None, scale=1e-9, source="bottom"):
    g = GridSpec(nelx, nely, scale, (1, 1), [1])
    idx = build_index_sets(g)
    em = fem.element_matrices(scale)
    k = fem.wavenumber(wavelength, scale)
    eps = np.ones(g.n_elements, dtype=complex) if eps is None else eps
    bc, rhs = fem.boundary_and_rhs(k, scale, idx, g.n_nodes, source)
    return g, fem.ComplexSparseSystem.from_triplets([fem.assemble(eps, em, idx, k), bc], rhs)


@pytest.mark.parametrize("scale", [1.0, 1e-9, 2.5e-3])
def test_element_matrices(scale):
    em = fem.element_matrices(scale)
    assert np.abs(em.laplace.sum(axis=1)).max() <= 1e-14
    assert em.mass.sum() == pytest.approx(scale**2, rel=1e-12)
    assert np.array_equal(em.laplace, em.laplace.T)
    assert np.all(np.linalg.eigvalsh(em.mass) > 0)


def test_laplace_is_scale_free():
    assert np.allclose(fem.element_matrices(1.0).laplace, fem.element_matrices(1e-7).laplace, rtol=0, atol=1e-15)


def test_system_complex_symmetric_and_residual():
    rng = np.random.default_rng(0)
    eps = 1 + 2 * rng.random(40 * 25) - 0.5j * rng.random(40 * 25)
    _, sysm = build(40, 25, 12.0, eps)
    S = sysm.matrix
    assert (S - S.T).count_nonzero() == 0
    lu = fem.factorize(sysm)
    e = lu.solve(sysm.rhs)
    res = np.linalg.norm(S @ e - sysm.rhs) / np.linalg.norm(sysm.rhs)
    assert res <= 1e-10


def test_transpose_solve_matches_plain_solve():
    _, sysm = build(20, 15, 10.0)
    lu = fem.factorize(sysm)
    b = np.random.default_rng(1).standard_normal(sysm.rhs.size) + 0j
    a, t = lu.solve(b), lu.solve_transpose(b)
    assert np.linalg.norm(a - t) <= 1e-12 * np.linalg.norm(a)


def test_solver_counters():
    stats = fem.SolverStats()
    _, sysm = build(6, 5, 8.0)
    lu = fem.factorize(sysm, stats)
    lu.solve(sysm.rhs)
    lu.solve_transpose(sysm.rhs)
    lu.solve_transpose(sysm.rhs)
    assert (stats.factorizations, stats.forward_solves, stats.adjoint_solves) == (1, 1, 2)


def test_rhs_only_on_source_boundary():
    g, sysm = build(5, 4, 8.0)
    f = sysm.rhs.reshape(g.nely + 1, g.nelx + 1, order="F")
    assert np.all(f[:-1] == 0)
    # corner nodes touch one source edge, interior nodes two
    k = fem.wavenumber(8.0, 1e-9)
    assert f[-1, 0] == pytest.approx(1j * k * 1e-9)
    assert f[-1, 2] == pytest.approx(2j * k * 1e-9)
    gt, top = build(5, 4, 8.0, source="top")
    ft = top.rhs.reshape(5, 6, order="F")
    assert np.all(ft[1:] == 0) and ft[0, 2] == pytest.approx(-2j * k * 1e-9)


def test_plane_wave_in_empty_domain():
    # first-order side boundaries reflect a little; compare in the RMS sense
    g, sysm = build(100, 50, 20.0)
    e = fem.factorize(sysm).solve(sysm.rhs).reshape(51, 101, order="F")
    inner = np.abs(e[10:-10, 10:-10])
    assert np.sqrt(np.mean((inner - 1) ** 2)) <= 0.15
    # phase changes by k per unit length along the center column
    col = e[:, 50]
    dphi = np.angle(col[25] / col[30])
    assert abs(dphi) == pytest.approx(2 * np.pi * 5 / 20, abs=0.25)


def test_singular_matrix_rejected():
    with pytest.raises(SolverError):
        fem.Factorization(sp.csc_matrix(np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)))


def test_bad_inputs():
    with pytest.raises(ConfigurationError):
        fem.element_matrices(0.0)
    g = GridSpec(3, 3, 1.0, (1, 1), [1])
    with pytest.raises(ConfigurationError):
        fem.assemble(np.ones(4), fem.element_matrices(1.0), build_index_sets(g), 1.0)
