"""Material interpolation from the projected design field to permittivity.

Both maps return ``(eps, deps_dx)`` as complex arrays of the input's shape.
The permittivity convention has a nonpositive imaginary part for lossy
media (time dependence ``exp(+i w t)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError


@dataclass(frozen=True)
class DielectricSpec:
    """Solid dielectric of relative permittivity ``eps_r`` in air.

    ``alpha`` scales the artificial attenuation ``-i alpha x (1 - x)`` that
    penalizes intermediate densities.
    """

    eps_r: float = 3.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class PlasmonicSpec:
    """Metal given by refractive index ``n`` and extinction ``kappa``, in air."""

    n: float = 1.9
    kappa: float = 1.5

    def __post_init__(self):
        if self.n <= 0 or self.kappa < 0:
            raise ConfigurationError(f"need n > 0 and kappa >= 0, got n={self.n}, kappa={self.kappa}")


def interpolate_dielectric(spec: DielectricSpec, x: np.ndarray):
    x = np.asarray(x, dtype=float)
    eps = 1 + x * (spec.eps_r - 1) - 1j * spec.alpha * x * (1 - x)
    deps = (spec.eps_r - 1) - 1j * spec.alpha * (1 - 2 * x)
    return eps, deps


def interpolate_plasmonic(spec: PlasmonicSpec, x: np.ndarray):
    # n and kappa are linear in x; eps = (n - i kappa)^2
    x = np.asarray(x, dtype=float)
    dn, dk = spec.n - 1.0, spec.kappa
    n = 1 + x * dn
    kap = x * dk
    eps = (n**2 - kap**2) - 1j * (2 * n * kap)
    deps = (2 * n * dn - 2 * kap * dk) - 1j * (2 * dn * kap + 2 * n * dk)
    return eps, deps


def interpolate(spec, x: np.ndarray):
    if isinstance(spec, DielectricSpec):
        return interpolate_dielectric(spec, x)
    if isinstance(spec, PlasmonicSpec):
        return interpolate_plasmonic(spec, x)
    raise ConfigurationError(f"unknown material spec {spec!r}")
