"""Closed-system photoluminescence of a harmonically trapped condensate.

Each point of the cloud is treated as a homogeneous condensate with local
chemical potential ``mu'(r) = mu - V(r)``; Bogoliubov lines are broadened
by a Lorentzian of half-width ``kappa`` and the emission is summed over the
cloud. Radii enter through ``s = r^2 / R_TF^2``, in which the harmonic
potential is linear (``V = mu s``) and the area element is uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import SpectrumGrid
from .open_spectrum import _zero_safe, bose_factor, kinetic_rate
from .params import HBAR, PhysicalParams, effective_mass, mu_rate, thermal_rate


class QuadratureError(RuntimeError):
    def __init__(self, achieved: float, requested: float):
        super().__init__(f"radial quadrature reached rel. change {achieved:.2e} > requested {requested:.2e}")
        self.achieved = achieved
        self.requested = requested


@dataclass(frozen=True)
class LocalEnvironment:
    r: float  # m
    mu_local: float  # rad/s
    V_r: float  # rad/s


def harmonic_environment(r, p: PhysicalParams, mu=None) -> LocalEnvironment:
    mu = mu_rate(p) if mu is None else float(mu)
    V = 0.5 * effective_mass(p) * p.Omega0**2 * np.asarray(r, dtype=float) ** 2 / HBAR
    return LocalEnvironment(r=r, mu_local=mu - V, V_r=V)


def local_dispersion(eps, env: LocalEnvironment):
    """``sqrt(eps (eps + 2 mu'))`` with mu' clamped at zero outside the cloud."""
    mup = np.maximum(np.asarray(env.mu_local, dtype=float), 0.0)
    eps = np.asarray(eps, dtype=float)
    return np.sqrt(eps * (eps + 2.0 * mup))


def lorentzian(x, kappa):
    """Unit-area Lorentzian of half-width ``kappa``."""
    return kappa / math.pi / (np.asarray(x, dtype=float) ** 2 + kappa**2)


def _weight(eps, omega, mup, kappa):
    # u2 L(w - xi) - v2 L(w + xi), rewritten as
    #   (L(w-xi) + L(w+xi)) / 2 + (eps + mu') [L(w-xi) - L(w+xi)] / (2 xi)
    # with the bracket expanded exactly so xi -> 0 is regular.
    xi = np.sqrt(eps * (eps + 2.0 * mup))
    a2 = (omega - xi) ** 2 + kappa**2
    b2 = (omega + xi) ** 2 + kappa**2
    c = kappa / math.pi
    return 0.5 * c * (1.0 / a2 + 1.0 / b2) + (eps + mup) * c * 2.0 * omega / (a2 * b2)


def spectral_weight_closed(k, omega, env: LocalEnvironment, kappa: float, p: PhysicalParams):
    """Broadened local Bogoliubov weight (1/(rad/s)); integrates to 1 over omega."""
    if not kappa > 0:
        raise ValueError("kappa_broad must be positive")
    eps = kinetic_rate(k, p)
    mup = np.maximum(np.asarray(env.mu_local, dtype=float), 0.0)
    return _weight(eps, np.asarray(omega, dtype=float), mup, kappa)


def _local_occupation(x, T_rate, floor):
    # |x| floored at ``floor`` keeping its sign; x == 0 goes to +floor
    x = np.where(x >= 0, np.maximum(x, floor), np.minimum(x, -floor))
    return bose_factor(x, T_rate)


def bose_local(omega, env: LocalEnvironment, T_rate: float, kappa: float):
    """Occupation ``1 / (exp((omega - V) / T) - 1)`` at a point of the cloud.

    ``omega - V`` is kept at least ``kappa / 10`` away from zero; below zero
    the negative analytic continuation is used.
    """
    x = np.asarray(omega, dtype=float) - np.asarray(env.V_r, dtype=float)
    return _local_occupation(x, T_rate, kappa / 10.0)


def lda_line_broadening(k, p: PhysicalParams, mu=None):
    """Spread ``xi(mu' = mu) - xi(mu' = 0)`` of the local lines at wavenumber k."""
    mu = mu_rate(p) if mu is None else float(mu)
    eps = kinetic_rate(k, p)
    return np.sqrt(eps * (eps + 2.0 * mu)) - eps


def _gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _graded_breaks(centres, widths, lo, hi, levels):
    """Panel edges clustered geometrically around each feature centre."""
    steps = widths[..., None] * (2.0 ** np.arange(levels))
    parts = [np.full(centres.shape[:-1] + (1,), lo), np.full(centres.shape[:-1] + (1,), hi)]
    for j in range(centres.shape[-1]):
        c = centres[..., j : j + 1]
        st = steps[..., j, :]
        parts += [c, c - st, c + st]
    br = np.clip(np.concatenate(parts, axis=-1), lo, hi)
    return np.sort(br, axis=-1)


def _lda_column(eps, omega, mu, kappa, T_rate, s_max, order, levels, local_bose):
    """Radial integral for one k column over all omega rows (1-D ``omega``)."""
    w = omega[:, None]
    # Lorentzian resonance where xi(mu'(s)) = |omega|
    aw = np.abs(omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        mup_star = (aw**2 - eps**2) / (2.0 * eps) if eps > 0 else np.full_like(aw, np.nan)
        s_lor = 1.0 - mup_star / mu
        width_lor = kappa * np.maximum(aw, kappa) / (max(eps, 1e-300) * mu)
    s_lor = np.where(np.isfinite(s_lor), s_lor, 0.0)
    width_lor = np.where(np.isfinite(width_lor), np.clip(width_lor, 1e-12, 1.0), 1.0)
    centres = [s_lor, np.ones_like(aw)]
    widths = [width_lor, np.full_like(aw, kappa / mu)]
    if local_bose:
        centres.append(omega / mu)
        widths.append(np.full_like(aw, kappa / (10.0 * mu)))
    br = _graded_breaks(np.stack(centres, -1), np.stack(widths, -1), 0.0, s_max, levels)
    a, b = br[:, :-1], br[:, 1:]
    x, wt = _gauss_legendre(order)
    s = a[..., None] + (b - a)[..., None] * x  # (n_omega, panels, order)
    ds = (b - a)[..., None] * wt
    mup = mu * np.maximum(1.0 - s, 0.0)
    W = _weight(eps, w[..., None], mup, kappa)
    if local_bose:
        nb = _local_occupation(w[..., None] - mu * s, T_rate, kappa / 10.0)
    else:
        nb = bose_factor(w, T_rate)[..., None]
    return np.sum(nb * W * ds, axis=(1, 2))


def pl_closed(
    k_axis,
    omega_axis,
    p: PhysicalParams,
    *,
    lda: bool = True,
    mu=None,
    kappa=None,
    r_cut: float = 1.0,
    local_bose: bool = True,
    rtol: float = 1e-4,
    order: int = 4,
    max_order: int = 64,
    levels: int = 14,
    clip: bool = True,
    strict: bool = True,
) -> SpectrumGrid:
    """Closed-system photoluminescence on a (k, omega) grid.

    With ``lda`` the local emission ``n_B(omega; r) W(k, omega; r)`` is
    integrated over the disc ``r <= r_cut * R_TF`` and divided by the area
    ``pi R_TF^2``. Without it the homogeneous spectrum at ``mu' = mu`` is
    returned. ``local_bose`` selects the position-dependent occupation
    :func:`bose_local`; otherwise the global ``n_B(omega)`` is used.

    The Gauss-Legendre order on every panel is doubled until the grid
    changes by less than ``rtol`` (relative to its maximum). Failing that,
    :class:`QuadratureError` carries the achieved tolerance.
    """
    mu = mu_rate(p) if mu is None else float(mu)
    kappa = p.kappa if kappa is None else float(kappa)
    if not kappa > 0:
        raise ValueError("kappa_broad must be positive")
    T_rate = thermal_rate(p)
    k_axis = np.asarray(k_axis, dtype=float)
    omega_axis = np.asarray(omega_axis, dtype=float)
    eps_all = kinetic_rate(k_axis, p)

    if not lda or mu <= 0:
        vals = _zero_safe(lambda w: bose_factor(w, T_rate) * _weight(eps_all[None, :], w, mu, kappa), omega_axis)
        if clip:
            vals = np.maximum(vals, 0.0)
        return SpectrumGrid(k_axis, omega_axis, vals)

    s_max = float(r_cut) ** 2
    # columns depend on |k| only
    uniq, inverse = np.unique(np.abs(k_axis), return_inverse=True)
    eps_u = kinetic_rate(uniq, p)

    def evaluate(n):
        out = np.empty((omega_axis.size, uniq.size))
        for j, eps in enumerate(eps_u):
            out[:, j] = _zero_safe(
                lambda w: _lda_column(eps, w[:, 0], mu, kappa, T_rate, s_max, n, levels, local_bose)[:, None],
                omega_axis,
            )[:, 0]
        return out

    n = order
    prev = evaluate(n)
    achieved = math.inf
    while n < max_order:
        n *= 2
        cur = evaluate(n)
        scale = np.max(np.abs(cur))
        achieved = float(np.max(np.abs(cur - prev)) / scale) if scale > 0 else 0.0
        prev = cur
        if achieved < rtol:
            break
    if achieved >= rtol and strict:
        raise QuadratureError(achieved, rtol)
    vals = prev[:, inverse]
    if clip:
        vals = np.maximum(vals, 0.0)
    return SpectrumGrid(k_axis, omega_axis, vals)
