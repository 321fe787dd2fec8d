"""Bogoliubov Green's function and photoluminescence of the homogeneous open system.

Frequencies are measured from the chemical potential and all energies are
rates (rad/s). ``gamma`` is the net gain rate, which in the linearised
steady state damps the excitations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grids import SpectrumGrid, symmetric_axis
from .params import HBAR, PhysicalParams, effective_mass, mu_rate, thermal_rate


class PoleHitWarning(RuntimeWarning):
    """Green's function evaluated exactly on an undamped pole."""


class UnderResolvedWarning(UserWarning):
    pass


def kinetic_rate(k, p: PhysicalParams):
    """Free-particle energy hbar k^2 / 2m expressed in rad/s."""
    k = np.asarray(k, dtype=float)
    return HBAR * k**2 / (2.0 * effective_mass(p))


def wavenumber_for_kinetic(eps, p: PhysicalParams):
    """Inverse of :func:`kinetic_rate` for k >= 0."""
    return np.sqrt(2.0 * effective_mass(p) * np.asarray(eps, dtype=float) / HBAR)


@dataclass(frozen=True)
class BogoliubovPoint:
    eps_k: np.ndarray
    xi_k: np.ndarray
    u2: np.ndarray
    v2: np.ndarray


def bogoliubov_point(eps, mu) -> BogoliubovPoint:
    """Dispersion and quasiparticle weights for kinetic energy ``eps``.

    ``u2 = (eps + mu + xi) / 2 xi`` and ``v2 = (eps + mu - xi) / 2 xi``. At
    ``xi = 0`` (k = 0) the weights diverge; they are returned as inf there.
    """
    eps = np.asarray(eps, dtype=float)
    mu = np.asarray(mu, dtype=float)
    xi = np.sqrt(eps * (eps + 2.0 * mu))
    with np.errstate(divide="ignore", invalid="ignore"):
        u2 = (eps + mu + xi) / (2.0 * xi)
        # v2 = u2 - 1 is exact and avoids cancellation in eps + mu - xi
        v2 = u2 - 1.0
    # mu = 0 has no depletion even at k = 0
    free = (mu == 0) & (xi == 0)
    u2 = np.where(free, 1.0, u2)
    v2 = np.where(free, 0.0, v2)
    return BogoliubovPoint(eps, xi, u2, v2)


def bogoliubov_operator(k, omega, mu, gamma, p: PhysicalParams) -> np.ndarray:
    """Inverse Green's function ``omega - L`` of the linearised damped GP equation.

    Shape ``(..., 2, 2)`` over the broadcast of the inputs, acting on
    ``(delta psi, delta psi*)``.
    """
    eps = kinetic_rate(k, p)
    eps, omega, mu, gamma = np.broadcast_arrays(eps, np.asarray(omega, float), np.asarray(mu, float),
                                                np.asarray(gamma, float))
    out = np.empty(eps.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = omega - eps - mu + 1j * gamma
    out[..., 0, 1] = -mu + 1j * gamma
    out[..., 1, 0] = mu + 1j * gamma
    out[..., 1, 1] = omega + eps + mu + 1j * gamma
    return out


def green_retarded(k, omega, mu, gamma, p: PhysicalParams) -> np.ndarray:
    """Retarded Green's function of the open condensate, shape ``(..., 2, 2)``.

    Common denominator ``omega (omega + 2 i gamma) - eps (eps + 2 mu)``. The
    normal component ``[0, 0]`` is ``(mu + eps + omega + i gamma) / den``.
    On an exact real pole (gamma = 0, omega = +-xi) entries are signed
    infinities and :class:`PoleHitWarning` is emitted.
    """
    eps = kinetic_rate(k, p)
    eps, omega, mu, gamma = np.broadcast_arrays(eps, np.asarray(omega, float), np.asarray(mu, float),
                                                np.asarray(gamma, float))
    num = np.empty(eps.shape + (2, 2), dtype=complex)
    num[..., 0, 0] = omega + eps + mu + 1j * gamma
    num[..., 0, 1] = mu - 1j * gamma
    num[..., 1, 0] = -mu - 1j * gamma
    num[..., 1, 1] = omega - eps - mu + 1j * gamma
    den = omega * (omega + 2j * gamma) - eps * (eps + 2.0 * mu)
    pole = den == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        g = num / den[..., None, None]
    if np.any(pole):
        warnings.warn(f"{int(np.sum(pole))} evaluation(s) on an undamped pole", PoleHitWarning, stacklevel=2)
        sgn = np.sign(num[pole].real)
        sgn[sgn == 0] = 1.0
        g[pole] = sgn * np.inf
    return g


def is_pole(k, omega, mu, gamma, p: PhysicalParams) -> np.ndarray:
    eps = kinetic_rate(k, p)
    return (np.asarray(gamma) == 0) & (np.asarray(omega) ** 2 == eps * (eps + 2.0 * np.asarray(mu)))


def _weight(eps, omega, mu, gamma):
    num = 2.0 * gamma * (eps + omega) * (eps + 2.0 * mu + omega)
    den = 4.0 * gamma**2 * omega**2 + (eps**2 + 2.0 * eps * mu - omega**2) ** 2
    return num / den


def spectral_weight_open(k, omega, mu, gamma, p: PhysicalParams):
    """Spectral weight ``-2 Im G[0,0]`` (units of 1/(rad/s)).

    Normalised so that ``int W domega / 2pi = u2 - v2 = 1``. Negative on the
    ghost branch near ``omega = -xi``.
    """
    eps = kinetic_rate(k, p)
    omega = np.asarray(omega, dtype=float)
    if np.any(np.asarray(gamma) == 0):
        g = green_retarded(k, omega, mu, gamma, p)
        return -2.0 * g[..., 0, 0].imag
    return _weight(eps, omega, np.asarray(mu, float), np.asarray(gamma, float))


def bose_factor(omega, T_rate):
    """``1 / (exp(omega / T_rate) - 1)`` with omega and T both in rad/s."""
    with np.errstate(over="ignore", divide="ignore"):
        return 1.0 / np.expm1(np.asarray(omega, dtype=float) / T_rate)


def _pl_open_values(eps, omega, mu, gamma, T_rate):
    nb = 4.0 * bose_factor(omega, T_rate)
    num = gamma * (eps + omega) * (eps + 2.0 * mu + omega)
    den = 4.0 * gamma**2 * omega**2 + (eps**2 + 2.0 * eps * mu - omega**2) ** 2
    return nb * num / den


def _zero_safe(fn, omega_axis, *args):
    """Evaluate ``fn(omega_column, *args)``, replacing exact omega = 0 by the
    mean over +-half the local spacing (the Bose factor has a pole there)."""
    w = omega_axis[:, None]
    zero = np.flatnonzero(omega_axis == 0)
    if zero.size == 0:
        return fn(w, *args)
    wz = np.where(omega_axis == 0, 1.0, omega_axis)[:, None]
    out = fn(wz, *args)
    for i in zero:
        nbr = [abs(omega_axis[j]) for j in (i - 1, i + 1) if 0 <= j < omega_axis.size]
        h = 0.5 * min(nbr)
        out[i] = 0.5 * (fn(np.array([[h]]), *args)[0] + fn(np.array([[-h]]), *args)[0])
    return out


def pl_open(k_axis, omega_axis, p: PhysicalParams, mu=None, gamma_net=None, T=None, clip=True) -> SpectrumGrid:
    """Incoherent photoluminescence of the homogeneous open system.

    ``4 n_B(omega) gamma (eps+omega)(eps+2mu+omega) / (4 gamma^2 omega^2 +
    (eps^2 + 2 eps mu - omega^2)^2)`` evaluated on the full grid. ``mu``
    defaults to the Thomas-Fermi value (central density of the trapped
    cloud). Where a Lorentzian tail crosses the sign change of ``n_B`` the
    product is negative; with ``clip`` those cells are set to zero.
    """
    mu = mu_rate(p) if mu is None else float(mu)
    gamma = p.gamma_net if gamma_net is None else float(gamma_net)
    T_rate = thermal_rate(p) if T is None else thermal_rate(p.with_(T=T))
    if gamma <= 0:
        raise ValueError("open-system spectrum needs gamma_net > 0")
    k_axis = np.asarray(k_axis, dtype=float)
    omega_axis = np.asarray(omega_axis, dtype=float)
    eps = kinetic_rate(k_axis, p)[None, :]
    vals = _zero_safe(lambda w: _pl_open_values(eps, w, mu, gamma, T_rate), omega_axis)
    if clip:
        vals = np.maximum(vals, 0.0)
    return SpectrumGrid(k_axis, omega_axis, vals)


def default_axes(p: PhysicalParams, n_k: int = 512, n_omega: int = 1024, mu=None):
    """Default (k, omega) axes.

    k spans ``eps(k_max) = 10 * scale`` with ``scale = max(mu, kappa)``; omega
    spans +-5 xi(k_max).
    """
    mu = mu_rate(p) if mu is None else float(mu)
    scale = max(mu, p.kappa, 1e-12)
    eps_max = 10.0 * scale
    k_max = float(np.sqrt(2.0 * effective_mass(p) * eps_max / HBAR))
    xi_max = float(np.sqrt(eps_max * (eps_max + 2.0 * mu)))
    return symmetric_axis(k_max, n_k), symmetric_axis(5.0 * xi_max, n_omega)


@dataclass(frozen=True)
class DispersionCurve:
    k: np.ndarray
    omega_peak: np.ndarray  # nan where no interior maximum
    valid: np.ndarray


def dispersion_extract(grid: SpectrumGrid, linewidth: float | None = None) -> DispersionCurve:
    """Ridge position per k column, restricted to omega > 0.

    The arg-max cell is refined by the vertex of the parabola through it and
    its two neighbours. Columns whose maximum sits on the edge of the
    omega > 0 window (or that are identically zero) are flagged invalid.
    """
    w = grid.omega_axis
    pos = np.flatnonzero(w > 0)
    if pos.size < 3:
        raise ValueError("need at least three omega > 0 samples")
    if linewidth is not None:
        h = float(np.min(np.diff(w[pos])))
        if h > linewidth / 8.0:
            warnings.warn(f"omega spacing {h:.3g} coarser than linewidth/8", UnderResolvedWarning, stacklevel=2)
    sub = grid.values[pos, :]
    ws = w[pos]
    idx = np.argmax(sub, axis=0)
    peak = sub[idx, np.arange(sub.shape[1])]
    valid = (idx > 0) & (idx < ws.size - 1) & (peak > 0)
    i = np.clip(idx, 1, ws.size - 2)
    cols = np.arange(sub.shape[1])
    y0, y1, y2 = sub[i - 1, cols], sub[i, cols], sub[i + 1, cols]
    x0, x1, x2 = ws[i - 1], ws[i], ws[i + 1]
    # vertex of the parabola through three (possibly unevenly spaced) points
    d01, d12 = x0 - x1, x2 - x1
    s0, s2 = (y0 - y1) / d01, (y2 - y1) / d12
    curv = (s2 - s0) / (x2 - x0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = s0 - curv * d01
        shift = np.where(curv < 0, -lin / (2.0 * curv), 0.0)
    shift = np.clip(shift, d01 / 2, d12 / 2)
    omega_peak = np.where(valid, x1 + shift, np.nan)
    return DispersionCurve(grid.k_axis.copy(), omega_peak, valid)
