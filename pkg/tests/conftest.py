import numpy as np
import pytest

from emtopopt import DielectricSpec, GridSpec, ProblemSpec, lens_problem


def small_problem(nelx=30, nely=20, wavelength=15.0, fr=2.0, material=None, **kw):
    """Small strip lens used throughout the unit tests."""
    return lens_problem(nelx, nely, (nelx // 2, 4), 12, 5, wavelength, fr,
                        material if material is not None else DielectricSpec(3.0, 1.0), **kw)


@pytest.fixture
def problem():
    return small_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def full_domain_problem(nelx=30, nely=20, wavelength=15.0, fr=2.0, **kw):
    """Every element designable, no substrate."""
    grid = GridSpec(nelx, nely, 1e-9, (nelx // 2, 4), np.arange(1, nelx * nely + 1))
    return ProblemSpec(grid, wavelength, fr, DielectricSpec(3.0, 1.0), substrate=False, **kw)
