"""Spectrum container and axis construction shared by the spectral modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectrumGrid:
    """Intensities on a (omega, k) grid.

    ``values[i, j]`` belongs to ``omega_axis[i]`` and ``k_axis[j]``; omega is
    measured from the chemical potential (rad/s), k in 1/m.
    """

    k_axis: np.ndarray
    omega_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k_axis, dtype=float)
        w = np.asarray(self.omega_axis, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "k_axis", k)
        object.__setattr__(self, "omega_axis", w)
        object.__setattr__(self, "values", v)
        if k.ndim != 1 or w.ndim != 1:
            raise ValueError("axes must be 1-D")
        if v.shape != (w.size, k.size):
            raise ValueError(f"values shape {v.shape} != (len(omega), len(k)) = {(w.size, k.size)}")
        if np.any(np.diff(k) <= 0) or np.any(np.diff(w) <= 0):
            raise ValueError("axes must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")

    @property
    def shape(self):
        return self.values.shape

    def normalized(self) -> "SpectrumGrid":
        """Copy scaled to unit maximum (unchanged if the grid is all zero)."""
        peak = float(np.max(self.values)) if self.values.size else 0.0
        if peak <= 0:
            return self
        return SpectrumGrid(self.k_axis, self.omega_axis, self.values / peak)

    def spacing(self) -> tuple[float, float]:
        """Uniform (dk, domega); raises if either axis is not uniform."""
        return uniform_step(self.k_axis, "k"), uniform_step(self.omega_axis, "omega")


def uniform_step(axis: np.ndarray, name: str = "axis", rtol: float = 1e-9) -> float:
    d = np.diff(axis)
    if d.size == 0:
        raise ValueError(f"{name} axis needs at least two points")
    h = float(np.mean(d))
    if np.max(np.abs(d - h)) > rtol * max(abs(h), np.max(np.abs(axis))):
        raise ValueError(f"{name} axis is not uniformly spaced")
    return h


def symmetric_axis(half_width: float, n: int) -> np.ndarray:
    """``n`` points spanning [-half_width, half_width], exactly mirror symmetric.

    For even ``n`` zero is not a sample; for odd ``n`` it is.
    """
    if n < 2:
        raise ValueError("need at least two points")
    step = 2.0 * half_width / (n - 1)
    if n % 2 == 0:
        pos = (np.arange(n // 2) + 0.5) * step
        return np.concatenate([-pos[::-1], pos])
    pos = np.arange(1, n // 2 + 1) * step
    return np.concatenate([-pos[::-1], [0.0], pos])
