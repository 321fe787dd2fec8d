"""Physical inputs for a dye-microcavity photon condensate and the derived scales.

Every energy-like quantity used elsewhere in the package is an angular
frequency (E / hbar, rad/s). Functions here that return Joules say so.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

# CODATA 2018
C_LIGHT = 299_792_458.0  # m/s
HBAR = 1.054_571_817e-34  # J s
K_B = 1.380_649e-23  # J/K
EPS0 = 8.854_187_8128e-12  # F/m

TWO_PI = 2.0 * math.pi


class NoNetGainWarning(UserWarning):
    """Estimated scattering rate does not exceed the cavity loss."""


@dataclass(frozen=True)
class PhysicalParams:
    """Cavity, dye and condensate constants (SI units, rates in rad/s).

    Exactly one of ``g_tilde`` and ``chi3`` sets the interaction; the other
    is derived. With neither set the gas is non-interacting.
    """

    lambda_vac: float = 580e-9
    n_L: float = 1.33
    L0: float = 2e-6
    q: int = 7
    delta_omega: float = 0.0
    T: float = 300.0
    N_bec: float = 1e5
    g_tilde: Optional[float] = None
    chi3: Optional[float] = None
    Omega0: float = TWO_PI * 40e9
    gamma_net: float = TWO_PI * 1e9
    kappa_broad: Optional[float] = None
    sigma_dye: float = 2e-22
    n_dye: float = 1e24
    kappa_cav: float = TWO_PI * 1e9

    def __post_init__(self):
        if not self.lambda_vac > 0:
            raise ValueError("lambda_vac must be positive")
        if not self.n_L >= 1:
            raise ValueError("n_L must be >= 1")
        if not self.L0 > 0:
            raise ValueError("L0 must be positive")
        if int(self.q) != self.q or self.q < 1:
            raise ValueError("q must be an integer >= 1")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.N_bec >= 0:
            raise ValueError("N_bec must be non-negative")
        if self.g_tilde is not None and self.chi3 is not None:
            raise ValueError("ambiguous interaction source: set g_tilde or chi3, not both")
        if self.g_tilde is not None and not math.isfinite(self.g_tilde):
            raise ValueError("g_tilde must be finite")
        if self.Omega0 < 0:
            raise ValueError("Omega0 must be non-negative")
        for name in ("gamma_net", "kappa_cav"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.kappa_broad is not None and self.kappa_broad < 0:
            raise ValueError("kappa_broad must be non-negative")

    @property
    def kappa(self) -> float:
        """Closed-model Lorentzian broadening; defaults to the net gain rate."""
        return self.gamma_net if self.kappa_broad is None else self.kappa_broad

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    def derived(self) -> "DerivedQuantities":
        return DerivedQuantities.from_params(self)


@dataclass(frozen=True)
class DerivedQuantities:
    omega: float  # rad/s
    k_L: float  # 1/m
    k0: float  # 1/m
    mass: float  # kg
    g_tilde: float
    g: float  # J m^2
    mu: float  # J
    sound_speed: float  # m/s
    mu_rate: float = field(init=False)  # rad/s

    def __post_init__(self):
        object.__setattr__(self, "mu_rate", self.mu / HBAR)

    @classmethod
    def from_params(cls, p: PhysicalParams) -> "DerivedQuantities":
        omega = optical_omega(p)
        m = effective_mass(p)
        gt = interaction_tilde(p)
        mu = mu_thomas_fermi(p)
        return cls(
            omega=omega,
            k_L=omega * p.n_L / C_LIGHT,
            k0=typical_wavenumber(p),
            mass=m,
            g_tilde=gt,
            g=HBAR**2 / m * gt,
            mu=mu,
            sound_speed=math.sqrt(mu / m),
        )


def optical_omega(p: PhysicalParams) -> float:
    return TWO_PI * C_LIGHT / p.lambda_vac


def typical_wavenumber(p: PhysicalParams) -> float:
    """k0 = q pi n_L / L0, used for the angle-to-momentum mapping."""
    return p.q * math.pi * p.n_L / p.L0


def effective_mass(p: PhysicalParams) -> float:
    """Photon mass from hbar*omega = m c^2 / n_L^2, in kg."""
    return HBAR * optical_omega(p) * p.n_L**2 / C_LIGHT**2


def g_from_chi3(p: PhysicalParams) -> tuple[float, float]:
    """Return ``(g, g_tilde)`` for a Kerr susceptibility ``p.chi3``.

    ``g = 3 hbar^2 omega^2 chi3 / (n_L^4 eps0 L0)`` in J m^2, and
    ``g_tilde = m g / hbar^2``.
    """
    if p.g_tilde is not None:
        raise ValueError("ambiguous interaction source: g_tilde already set")
    if p.chi3 is None:
        raise ValueError("chi3 not provided")
    omega = optical_omega(p)
    g = 3.0 * HBAR**2 * omega**2 * p.chi3 / (p.n_L**4 * EPS0 * p.L0)
    return g, effective_mass(p) * g / HBAR**2


def chi3_from_g(g: float, p: PhysicalParams) -> float:
    omega = optical_omega(p)
    return g * p.n_L**4 * EPS0 * p.L0 / (3.0 * HBAR**2 * omega**2)


def interaction_tilde(p: PhysicalParams) -> float:
    if p.g_tilde is not None:
        return float(p.g_tilde)
    if p.chi3 is not None:
        return g_from_chi3(p)[1]
    return 0.0


def interaction_rate(p: PhysicalParams) -> float:
    """g / hbar in rad/s * m^2, so that ``g|psi|^2`` is a rate."""
    return HBAR * interaction_tilde(p) / effective_mass(p)


def mu_thomas_fermi(p: PhysicalParams) -> float:
    """2D Thomas-Fermi chemical potential ``hbar Omega0 sqrt(g_tilde N / pi)`` in J."""
    gt = interaction_tilde(p)
    if gt < 0:
        raise ValueError("Thomas-Fermi profile needs repulsive interactions")
    return HBAR * p.Omega0 * math.sqrt(gt * p.N_bec / math.pi)


def mu_rate(p: PhysicalParams) -> float:
    """Thomas-Fermi chemical potential in rad/s."""
    return mu_thomas_fermi(p) / HBAR


def tf_radius(p: PhysicalParams) -> float:
    """Radius where the harmonic potential reaches mu (m)."""
    if p.Omega0 <= 0:
        return math.inf
    return math.sqrt(2.0 * mu_thomas_fermi(p) / effective_mass(p)) / p.Omega0


def oscillator_length(p: PhysicalParams) -> float:
    return math.sqrt(HBAR / (effective_mass(p) * p.Omega0))


def tf_central_density(p: PhysicalParams) -> float:
    """Peak density mu/g of the Thomas-Fermi profile (1/m^2)."""
    gr = interaction_rate(p)
    if gr <= 0:
        raise ValueError("Thomas-Fermi density undefined without interactions")
    return mu_rate(p) / gr


def scattering_rate(p: PhysicalParams) -> float:
    """Dye scattering rate n_dye * sigma_dye * c / n_L (rad/s).

    Taken as the inverse mean free time of a photon in the dye solution.
    """
    return p.n_dye * p.sigma_dye * C_LIGHT / p.n_L


def gamma_net_estimate(p: PhysicalParams) -> float:
    """Scattering rate into the condensate minus the cavity loss (rad/s)."""
    g = scattering_rate(p) - p.kappa_cav
    if g <= 0:
        warnings.warn(f"no net gain: gamma_net = {g:.3e} rad/s", NoNetGainWarning, stacklevel=2)
    return g


def saturation_coefficient(gamma_net: float, peak_density: float) -> float:
    """Gain saturation ``Gamma = gamma_net / |psi(0,0)|^2`` (rad/s * m^2)."""
    if not peak_density > 0:
        raise ValueError("peak_density must be positive")
    return gamma_net / peak_density


def thermal_rate(p: PhysicalParams) -> float:
    """k_B T / hbar in rad/s."""
    return K_B * p.T / HBAR
