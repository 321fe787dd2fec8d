"""Forward model of an angle-resolved photoluminescence spectrometer.

Objective lens -> slit (k_y ~ 0) -> cylindrical telescope -> reflective
grating -> cylindrical imaging lens -> camera. The camera image has
in-plane momentum along one axis and photon energy along the other.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .grids import SpectrumGrid, uniform_step
from .params import C_LIGHT, HBAR, TWO_PI, PhysicalParams, effective_mass, typical_wavenumber


class SmallAngleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class InstrumentConfig:
    """Spectrometer geometry (SI units).

    ``n_objective`` is the refractive index around the collection optics.
    ``delta_eps_override`` (rad/s) replaces the grating resolution, e.g. for a
    Fabry-Perot analyser. ``exposure`` > 1 over-exposes the camera so that
    the brightest regions saturate.
    """

    f_obj: float = 0.2
    L_prop: float = 0.3
    d_slit: float = 240e-6
    M_y: float = 75.0
    d_grating: float = 1e-3 / 900
    f_im: float = 0.05
    px_momentum: float = 180e-6
    px_energy: float = 4e-6
    bit_depth: int = 12
    full_well_fraction: float = 1.0
    exposure: float = 1.0
    n_objective: float = 1.0
    delta_eps_override: Optional[float] = None

    def __post_init__(self):
        for name in ("f_obj", "L_prop", "d_slit", "d_grating", "f_im", "px_momentum", "px_energy"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.M_y >= 1:
            raise ValueError("M_y must be >= 1")
        if self.bit_depth not in (8, 12, 16):
            raise ValueError("bit_depth must be 8, 12 or 16")
        if not 0 < self.full_well_fraction <= 1:
            raise ValueError("full_well_fraction must lie in (0, 1]")
        if not self.exposure >= 1:
            raise ValueError("exposure must be >= 1")
        if not self.n_objective >= 1:
            raise ValueError("n_objective must be >= 1")
        if self.delta_eps_override is not None and not self.delta_eps_override > 0:
            raise ValueError("delta_eps_override must be positive")

    @property
    def beam_width(self) -> float:
        """Beam size on the grating, D = d_slit * M_y."""
        return self.d_slit * self.M_y

    @property
    def full_scale(self) -> int:
        return 2**self.bit_depth - 1


@dataclass(frozen=True)
class ResolutionBudget:
    delta_k: float  # 1/m
    px_opt: float  # m
    delta_lambda: float  # m
    delta_eps: float  # rad/s
    gmin_momentum: float
    gmin_energy: float

    @property
    def limiting(self) -> str:
        return "energy" if self.gmin_energy >= self.gmin_momentum else "momentum"


def k_to_screen(k, cfg: InstrumentConfig, p: PhysicalParams):
    """Displacement ``n_L f_obj k / k0`` in the objective focal plane (m)."""
    k = np.asarray(k, dtype=float)
    k0 = typical_wavenumber(p)
    x = p.n_L * cfg.f_obj * k / k0
    kmax = float(np.max(np.abs(k))) if k.size else 0.0
    if kmax > 0:
        s = p.n_L * math.sin(math.atan(kmax / k0))
        exact = cfg.f_obj * math.tan(math.asin(min(s, 1.0))) if s < 1 else math.inf
        approx = p.n_L * cfg.f_obj * kmax / k0
        if abs(exact - approx) > 0.01 * exact:
            warnings.warn(f"small-angle error {abs(exact - approx) / exact:.1%} at k = {kmax:.3e} 1/m",
                          SmallAngleWarning, stacklevel=2)
    return x


def screen_to_k(x, cfg: InstrumentConfig, p: PhysicalParams):
    return np.asarray(x, dtype=float) * typical_wavenumber(p) / (p.n_L * cfg.f_obj)


def momentum_resolution(cfg: InstrumentConfig, p: PhysicalParams) -> tuple[float, float]:
    """``(delta_k, px_opt)`` where diffraction and pixel limits coincide.

    ``delta_k = 2 / (n f_obj) * sqrt(pi L_prop / lambda)`` and
    ``px_opt = sqrt(L_prop lambda / pi)``, with ``n`` the index around the
    objective. In-plane momentum is conserved through the mirror, so the
    cavity medium does not enter.
    """
    dk = 2.0 / (cfg.n_objective * cfg.f_obj) * math.sqrt(math.pi * cfg.L_prop / p.lambda_vac)
    px = math.sqrt(cfg.L_prop * p.lambda_vac / math.pi)
    return dk, px


def diffraction_angle(cfg: InstrumentConfig, p: PhysicalParams) -> float:
    ratio = p.lambda_vac / cfg.d_grating
    if ratio >= 1:
        raise ValueError("no first diffraction order: lambda >= d_grating")
    return math.asin(ratio)


def energy_resolution(cfg: InstrumentConfig, p: PhysicalParams) -> tuple[float, float]:
    """``(delta_lambda, delta_eps)``; ``delta_lambda = lambda d / D`` and
    ``delta_eps = 2 pi c delta_lambda / lambda^2`` in rad/s."""
    lam = p.lambda_vac
    if cfg.delta_eps_override is not None:
        de = float(cfg.delta_eps_override)
        return de * lam**2 / (TWO_PI * C_LIGHT), de
    D = cfg.beam_width
    if D <= cfg.d_grating:
        raise ValueError(f"beam width {D:.3e} m covers less than one grating line")
    dl = lam * cfg.d_grating / D
    return dl, TWO_PI * C_LIGHT * dl / lam**2


def energy_pixel_required(cfg: InstrumentConfig, p: PhysicalParams) -> float:
    """Camera pixel matching the wavelength resolution, ``f_im dl / (d cos theta)``."""
    dl, _ = energy_resolution(cfg, p)
    return cfg.f_im * dl / (cfg.d_grating * math.cos(diffraction_angle(cfg, p)))


def momentum_pixel_pitch(cfg: InstrumentConfig, p: PhysicalParams) -> float:
    """Width of one camera pixel in k (1/m)."""
    return float(screen_to_k(cfg.px_momentum, cfg, p))


def energy_pixel_pitch(cfg: InstrumentConfig, p: PhysicalParams) -> float:
    """Width of one camera pixel in omega (rad/s)."""
    dl = cfg.px_energy * cfg.d_grating * math.cos(diffraction_angle(cfg, p)) / cfg.f_im
    return TWO_PI * C_LIGHT * dl / p.lambda_vac**2


def gmin_momentum(delta_k: float, p: PhysicalParams) -> float:
    e = HBAR * delta_k**2 / (4.0 * effective_mass(p))
    return e**2 * math.pi / (p.N_bec * p.Omega0**2)


def gmin_energy(delta_eps: float, p: PhysicalParams) -> float:
    return delta_eps**2 * math.pi / (p.N_bec * (2.0 * p.Omega0) ** 2)


def gmin_estimates(cfg: InstrumentConfig, p: PhysicalParams) -> tuple[float, float]:
    """Smallest resolvable g_tilde set by momentum and by energy resolution."""
    if not (p.N_bec > 0 and p.Omega0 > 0):
        raise ValueError("need N_bec > 0 and Omega0 > 0")
    dk, _ = momentum_resolution(cfg, p)
    _, de = energy_resolution(cfg, p)
    return gmin_momentum(dk, p), gmin_energy(de, p)


def resolution_budget(cfg: InstrumentConfig, p: PhysicalParams) -> ResolutionBudget:
    dk, px = momentum_resolution(cfg, p)
    dl, de = energy_resolution(cfg, p)
    gm, ge = gmin_estimates(cfg, p)
    return ResolutionBudget(dk, px, dl, de, gm, ge)


def convolve_instrument(grid: SpectrumGrid, cfg: InstrumentConfig, p: PhysicalParams) -> SpectrumGrid:
    """Separable Gaussian blur with standard deviations delta_k/2 and delta_eps/2.

    Boundaries reflect, so the summed intensity is unchanged.
    """
    dk_grid, dw_grid = grid.spacing()
    dk, _ = momentum_resolution(cfg, p)
    _, de = energy_resolution(cfg, p)
    if dk_grid > dk / 3 or dw_grid > de / 3:
        raise ValueError(
            f"grid under-resolved: spacing ({dk_grid:.3g}, {dw_grid:.3g}) must not exceed a third of "
            f"the resolution ({dk:.3g}, {de:.3g})"
        )
    v = gaussian_filter1d(grid.values, 0.5 * dk / dk_grid, axis=1, mode="reflect")
    v = gaussian_filter1d(v, 0.5 * de / dw_grid, axis=0, mode="reflect")
    return SpectrumGrid(grid.k_axis, grid.omega_axis, v)


def _rebin_matrix(axis: np.ndarray, pitch: float):
    h = uniform_step(axis)
    lo, hi = axis[0] - 0.5 * h, axis[-1] + 0.5 * h
    n_out = int(math.floor((hi - lo) / pitch + 1e-9))
    if n_out < 1:
        raise ValueError("pixel pitch larger than the grid extent")
    start = lo + 0.5 * ((hi - lo) - n_out * pitch)
    pe = start + pitch * np.arange(n_out + 1)
    ce = lo + h * np.arange(axis.size + 1)
    ov = np.minimum(pe[1:, None], ce[None, 1:]) - np.maximum(pe[:-1, None], ce[None, :-1])
    centres = 0.5 * (pe[1:] + pe[:-1])
    return np.clip(ov, 0.0, None) / pitch, centres


def rebin(grid: SpectrumGrid, k_pitch: float, omega_pitch: float) -> SpectrumGrid:
    """Area-weighted average onto pixels of the given pitch, centred on the grid."""
    Rk, kc = _rebin_matrix(grid.k_axis, k_pitch)
    Rw, wc = _rebin_matrix(grid.omega_axis, omega_pitch)
    return SpectrumGrid(kc, wc, Rw @ grid.values @ Rk.T)


def camera_stage(grid: SpectrumGrid, cfg: InstrumentConfig, p: PhysicalParams) -> SpectrumGrid:
    """Rebin to camera pixels and quantise to integer counts.

    The grid peak maps to ``exposure * full_well_fraction * (2**bits - 1)``;
    counts clip at full well (only reachable with exposure > 1).
    """
    img = rebin(grid, momentum_pixel_pitch(cfg, p), energy_pixel_pitch(cfg, p))
    full = cfg.full_scale
    peak = float(np.max(img.values))
    if peak <= 0:
        return SpectrumGrid(img.k_axis, img.omega_axis, np.zeros_like(img.values))
    scale = cfg.exposure * cfg.full_well_fraction * full / peak
    counts = np.rint(np.clip(img.values * scale, 0.0, full))
    return SpectrumGrid(img.k_axis, img.omega_axis, counts)
