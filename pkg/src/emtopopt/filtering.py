"""Cone density filter, smoothed Heaviside projection and their adjoints.

The forward filter is the normalized weighted average

    x_filtered[h] = sum_k w(h - k) x[k] / sum_k w(h - k),

evaluated as a zero-padded ``same`` convolution followed by a pointwise
division with the local kernel mass. Its exact adjoint, used to pull
sensitivities back to the design variables, divides *before* convolving.
In the interior both orders coincide; at the grid border only this pairing
keeps constants fixed and the chain rule exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .exceptions import ConfigurationError


@dataclass(frozen=True, eq=False)
class FilterSpec:
    radius: float
    kernel: np.ndarray
    scaling: np.ndarray


@dataclass(frozen=True)
class ProjectionSpec:
    beta: float = 5.0
    eta: float = 0.5

    def __post_init__(self):
        if not self.beta >= 1:
            raise ConfigurationError(f"beta must be >= 1, got {self.beta}")
        if not 0 <= self.eta <= 1:
            raise ConfigurationError(f"eta must lie in [0, 1], got {self.eta}")


def cone_kernel(radius: float) -> np.ndarray:
    """``max(0, r - |d|)`` on integer offsets ``-(ceil(r)-1) .. ceil(r)-1``."""
    n = int(np.ceil(radius)) - 1
    d = np.arange(-n, n + 1)
    dy, dx = np.meshgrid(d, d)
    return np.maximum(0.0, radius - np.sqrt(dx**2 + dy**2))


def _conv(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return signal.convolve2d(x, kernel, mode="same", boundary="fill", fillvalue=0.0)


def build_filter(radius: float, nelx: int, nely: int) -> FilterSpec:
    if not radius >= 1:
        raise ConfigurationError(f"filter radius must be >= 1, got {radius}")
    if nelx < 1 or nely < 1:
        raise ConfigurationError("grid dimensions must be >= 1")
    kernel = cone_kernel(radius)
    scaling = _conv(np.ones((nely, nelx)), kernel)
    return FilterSpec(radius=float(radius), kernel=kernel, scaling=scaling)


def _check_shape(fs: FilterSpec, *fields: np.ndarray) -> None:
    for f in fields:
        if np.shape(f) != fs.scaling.shape:
            raise ConfigurationError(f"field shape {np.shape(f)} does not match grid {fs.scaling.shape}")


def density_filter(fs: FilterSpec, x: np.ndarray, weight: np.ndarray | None = None) -> np.ndarray:
    """Filter the element field ``x * weight``."""
    if weight is None:
        weight = np.ones_like(x)
    _check_shape(fs, x, weight)
    return _conv(x * weight, fs.kernel) / fs.scaling


def back_filter_sensitivities(fs: FilterSpec, sens: np.ndarray, dhdx: np.ndarray) -> np.ndarray:
    """Chain rule through projection and filter: returns ``dPhi/dx`` on the grid.

    ``sens`` is the sensitivity with respect to the projected field and
    ``dhdx`` the projection derivative evaluated at the filtered field.
    """
    _check_shape(fs, sens, dhdx)
    return _conv(sens * dhdx / fs.scaling, fs.kernel)


def threshold(x: np.ndarray, p: ProjectionSpec) -> np.ndarray:
    b, e = p.beta, p.eta
    return (np.tanh(b * e) + np.tanh(b * (x - e))) / (np.tanh(b * e) + np.tanh(b * (1 - e)))


def threshold_derivative(x: np.ndarray, p: ProjectionSpec) -> np.ndarray:
    b, e = p.beta, p.eta
    return b * (1 - np.tanh(b * (x - e)) ** 2) / (np.tanh(b * e) + np.tanh(b * (1 - e)))
