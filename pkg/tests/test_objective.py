import numpy as np
import pytest

from conftest import full_domain_problem, small_problem
from emtopopt import PlasmonicSpec, ProjectionSpec
from emtopopt.exceptions import ConfigurationError
from emtopopt.objective import Objective, non_discreteness, selection_matrix


def fd_check(obj, x, comps, proj, h=1e-5):
    g = obj.evaluate(x, proj).sens
    errs = []
    for i in comps:
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (obj.evaluate(xp, proj, False).fom - obj.evaluate(xm, proj, False).fom) / (2 * h)
        errs.append(abs(fd - g[i]) / max(abs(g[i]), 1e-300))
    return np.array(errs), g


@pytest.mark.parametrize("beta", [5.0, 10.0])
def test_gradient_matches_fd(beta):
    p = full_domain_problem()
    obj = Objective(p)
    rng = np.random.default_rng(7)
    x = rng.uniform(0.2, 0.8, p.n_vars)
    errs, _ = fd_check(obj, x, rng.choice(p.n_vars, 10, replace=False), ProjectionSpec(beta, 0.5))
    assert errs.max() <= 1e-4


def test_gradient_at_filter_boundary():
    p = full_domain_problem(fr=3.0)
    obj = Objective(p)
    x = np.random.default_rng(2).uniform(0.2, 0.8, p.n_vars)
    errs, _ = fd_check(obj, x, [0, 19, 580, 599], ProjectionSpec(5.0, 0.5))
    assert errs.max() <= 1e-4


def test_plasmonic_gradient_top_source():
    p = small_problem(material=PlasmonicSpec(1.9, 1.5), source="top")
    obj = Objective(p)
    rng = np.random.default_rng(11)
    x = rng.uniform(0.2, 0.8, p.n_vars)
    errs, _ = fd_check(obj, x, rng.choice(p.n_vars, 6, replace=False), ProjectionSpec(5.0, 0.5))
    assert errs.max() <= 1e-4


def test_linked_gradient_is_column_sum():
    linked = small_problem(link="columns")
    free = small_problem()
    assert linked.n_vars == 30
    col = np.random.default_rng(4).uniform(0.2, 0.8, 30)
    thickness = free.n_vars // 30
    g_linked = Objective(linked).evaluate(col).sens
    g_free = Objective(free).evaluate(np.repeat(col, thickness)).sens
    assert np.allclose(g_linked, g_free.reshape(30, thickness).sum(axis=1), rtol=1e-10)


def test_linked_mode_needs_full_strip():
    from emtopopt import GridSpec, ProblemSpec
    g = GridSpec(4, 4, 1e-9, (2, 1), [2, 3, 6])
    with pytest.raises(ConfigurationError):
        ProblemSpec(g, 10.0, 2.0, link="columns")


def test_reevaluation_is_bit_identical(problem):
    x = np.random.default_rng(0).random(problem.n_vars)
    a, b = Objective(problem).evaluate(x), Objective(problem).evaluate(x)
    assert a.fom == b.fom
    assert np.array_equal(a.sens, b.sens)


def test_adjoint_reuses_factorization(problem):
    obj = Objective(problem)
    obj.evaluate(np.full(problem.n_vars, 0.5))
    assert (obj.stats.factorizations, obj.stats.forward_solves, obj.stats.adjoint_solves) == (1, 1, 1)
    obj.evaluate(np.full(problem.n_vars, 0.5), with_gradient=False)
    assert (obj.stats.factorizations, obj.stats.forward_solves, obj.stats.adjoint_solves) == (2, 2, 1)


def test_selection_matrix_normalization(problem):
    P = selection_matrix(problem.grid)
    e = np.zeros(problem.grid.n_nodes, dtype=complex)
    obj = Objective(problem)
    e[obj.idx.edof[problem.grid.target_element]] = 1.0
    assert np.real(np.vdot(e, P @ e)) == 1.0
    assert P.nnz == 4


def test_binarized_is_near_binary(problem):
    obj = Objective(problem)
    x = np.random.default_rng(5).random(problem.n_vars)
    ev = obj.binarized(x)
    xd = ev.projected.T.ravel()[problem.grid.design_index]
    assert np.mean((xd > 1e-3) & (xd < 1 - 1e-3)) < 0.05
    assert ev.sens is None


def test_binarized_insensitive_to_larger_beta(problem):
    obj = Objective(problem)
    x = (np.random.default_rng(6).random(problem.n_vars) > 0.5).astype(float)
    hi = obj.evaluate(x, ProjectionSpec(1e5, 0.5), False).fom
    assert abs(obj.binarized(x).fom - hi) <= 5e-3 * abs(hi)


def test_non_discreteness_bounds(problem):
    obj = Objective(problem)
    assert obj.non_discreteness(obj.evaluate(np.full(problem.n_vars, 0.5), ProjectionSpec(1.0, 0.5), False).projected) > 0.9
    ev = obj.binarized(np.ones(problem.n_vars))
    assert non_discreteness(ev.projected, problem.grid) < 1e-6


def test_wrong_design_length(problem):
    with pytest.raises(ConfigurationError):
        Objective(problem).evaluate(np.zeros(3))


def test_field_intensity_shape(problem):
    ev = Objective(problem).evaluate(np.full(problem.n_vars, 0.5), with_gradient=False)
    assert ev.field_intensity(problem.grid).shape == (21, 31)


def test_symmetric_design_gives_symmetric_field():
    p = small_problem(nelx=30)
    obj = Objective(p)
    half = np.random.default_rng(8).random((15, p.n_vars // 30))
    x = np.concatenate([half, half[::-1]]).ravel()
    e = obj.evaluate(x, with_gradient=False).field_intensity(p.grid)
    assert np.allclose(e, e[:, ::-1], rtol=1e-9, atol=1e-12 * e.max())
