"""Split-step solver for the driven-dissipative photon GP equation on a periodic 2D grid.

Evolution equation, with every energy written as a rate (rad/s)::

    i dpsi/dt = [V + eps(-i grad) + g|psi|^2 + i (gamma_net - Gamma |psi|^2)] psi

``g`` here is ``hbar g_tilde / m`` so that ``g |psi|^2`` is a rate, and
``|psi|^2`` is a photon number density (1/m^2).
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import scipy.fft as sfft

from .params import (
    EPS0,
    HBAR,
    PhysicalParams,
    effective_mass,
    interaction_rate,
    mu_rate,
    optical_omega,
    oscillator_length,
    tf_radius,
)


class DivergenceError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


class MirrorRangeWarning(UserWarning):
    pass


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PBEC_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ComplexField2D:
    values: np.ndarray
    extent: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = self.values.shape[0]
        if self.values.shape != (n, n):
            raise ValueError("field must be square")
        if n < 32 or n & (n - 1):
            raise ValueError("grid size must be a power of two >= 32")
        if not self.extent > 0:
            raise ValueError("extent must be positive")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dx(self) -> float:
        return self.extent / self.n

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def number(self) -> float:
        return float(np.sum(self.density()) * self.dx**2)

    def copy(self) -> "ComplexField2D":
        return ComplexField2D(self.values.copy(), self.extent)


@dataclass
class PotentialMap:
    values: np.ndarray  # rad/s
    source: Literal["analytic-harmonic", "mirror-profile", "uniform"] = "analytic-harmonic"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("potential must be finite")


@dataclass
class EvolutionSpec:
    dt: float
    steps: int = 1
    mode: Literal["real", "imaginary"] = "real"
    gamma_net: float = 0.0
    Gamma: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.mode not in ("real", "imaginary"):
            raise ValueError("mode must be 'real' or 'imaginary'")
        if self.Gamma < 0:
            raise ValueError("Gamma must be non-negative")

    @property
    def conservative(self) -> bool:
        return self.gamma_net == 0 and self.Gamma == 0


def coordinates(n: int, extent: float) -> np.ndarray:
    """Cell positions with x = 0 at index n // 2."""
    return (np.arange(n) - n // 2) * (extent / n)


def wavenumbers(n: int, extent: float) -> np.ndarray:
    return 2.0 * math.pi * np.fft.fftfreq(n, d=extent / n)


def default_extent(p: PhysicalParams) -> float:
    """Four Thomas-Fermi radii, and never less than twelve oscillator lengths."""
    r = tf_radius(p) if interaction_rate(p) > 0 else 0.0
    return max(4.0 * r, 12.0 * oscillator_length(p))


def harmonic_potential(n: int, extent: float, p: PhysicalParams) -> PotentialMap:
    x = coordinates(n, extent)
    r2 = x[:, None] ** 2 + x[None, :] ** 2
    return PotentialMap(0.5 * effective_mass(p) * p.Omega0**2 * r2 / HBAR, "analytic-harmonic")


def potential_from_mirror(deltaL, p: PhysicalParams) -> PotentialMap:
    """Potential (rad/s) from cavity-length variations ``deltaL`` (m).

    ``V = -omega (deltaL / L0 - delta_omega / omega)``: a longer cavity
    lowers the local mode frequency, so a mirror indentation is a trap.
    """
    dL = np.asarray(deltaL, dtype=float)
    if not np.all(np.isfinite(dL)):
        raise ValueError("mirror profile must be finite")
    if np.max(np.abs(dL), initial=0.0) > p.lambda_vac / 10:
        warnings.warn("mirror variation exceeds lambda/10; linear phase approximation degrades",
                      MirrorRangeWarning, stacklevel=2)
    w = optical_omega(p)
    return PotentialMap(-w * (dL / p.L0 - p.delta_omega / w), "mirror-profile")


def psi_to_field(psi, p: PhysicalParams):
    """Electric field envelope E0 (V/m) from psi (1/m)."""
    return np.asarray(psi) / math.sqrt(p.n_L**2 * EPS0 * p.L0 / (2.0 * HBAR * optical_omega(p)))


def field_to_psi(E0, p: PhysicalParams):
    return np.asarray(E0) * math.sqrt(p.n_L**2 * EPS0 * p.L0 / (2.0 * HBAR * optical_omega(p)))


def field_energy(E0, dx: float, p: PhysicalParams) -> float:
    """Energy stored in the standing wave, ``n_L^2 L0 eps0 / 2 * int |E0|^2`` (J)."""
    return 0.5 * p.n_L**2 * p.L0 * EPS0 * float(np.sum(np.abs(E0) ** 2)) * dx**2


def max_kinetic_rate(n: int, extent: float, p: PhysicalParams) -> float:
    kmax = math.pi * n / extent
    return HBAR * 2.0 * kmax**2 / (2.0 * effective_mass(p))


def auto_dt(V: PotentialMap, p: PhysicalParams, extent: float) -> float:
    """0.1 / (largest of kinetic cutoff, potential maximum and mu)."""
    n = V.values.shape[0]
    top = max(max_kinetic_rate(n, extent, p), float(np.max(np.abs(V.values))), mu_rate(p))
    return 0.1 / top


class SplitStepSolver:
    """Strang-split propagator bound to one grid, potential and parameter set."""

    def __init__(self, V: PotentialMap, p: PhysicalParams, extent: float, spec: EvolutionSpec,
                 check_stability: bool = True):
        n = V.values.shape[0]
        self.n, self.extent, self.p, self.spec = n, extent, p, spec
        self.V = V.values
        self.g = interaction_rate(p)
        k = wavenumbers(n, extent)
        self.eps = HBAR * (k[:, None] ** 2 + k[None, :] ** 2) / (2.0 * effective_mass(p))
        if check_stability and spec.mode == "real":
            bound = spec.dt * max(float(np.max(np.abs(self.V))), float(np.max(self.eps)))
            if bound >= 0.5:
                raise ValueError(f"time step violates stability bound: dt*max(V, eps) = {bound:.3g} >= 0.5")
        if spec.mode == "real":
            self.kin = np.exp(-1j * self.eps * spec.dt)
        else:
            self.kin = np.exp(-self.eps * spec.dt)
        self.workers = _workers()

    def _potential_half(self, psi):
        tau = 0.5 * self.spec.dt
        n0 = np.abs(psi) ** 2
        if self.spec.mode == "imaginary":
            return psi * np.exp(-(self.V + self.g * n0) * tau)
        if self.spec.conservative:
            return psi * np.exp(-1j * (self.V + self.g * n0) * tau)
        # exact logistic solution of dn/dt = 2 (gamma - Gamma n) n over tau
        gam, Gam = self.spec.gamma_net, self.spec.Gamma
        a = math.expm1(2.0 * gam * tau) / gam if gam != 0 else 2.0 * tau
        grow = math.exp(2.0 * gam * tau)
        denom = 1.0 + Gam * n0 * a
        integral = np.log1p(Gam * n0 * a) / (2.0 * Gam) if Gam > 0 else 0.5 * n0 * a
        return psi * np.sqrt(grow / denom) * np.exp(-1j * (self.V * tau + self.g * integral))

    def step(self, psi: np.ndarray) -> np.ndarray:
        peak0 = float(np.max(np.abs(psi) ** 2))
        psi = self._potential_half(psi)
        psi = sfft.ifft2(self.kin * sfft.fft2(psi, workers=self.workers), workers=self.workers)
        psi = self._potential_half(psi)
        peak1 = float(np.max(np.abs(psi) ** 2))
        if not math.isfinite(peak1) or (peak0 > 0 and peak1 > 1e3 * peak0):
            raise DivergenceError(f"peak density grew from {peak0:.3e} to {peak1:.3e} in one step")
        return psi

    def energy(self, psi: np.ndarray) -> float:
        """Energy functional (rad/s): kinetic + potential + g/2 |psi|^4, summed."""
        dA = (self.extent / self.n) ** 2
        n = np.abs(psi) ** 2
        ph = sfft.fft2(psi, workers=self.workers)
        kin = float(np.sum(self.eps * np.abs(ph) ** 2)) * dA / self.n**2
        return kin + float(np.sum(self.V * n + 0.5 * self.g * n**2)) * dA

    def chemical_potential(self, psi: np.ndarray) -> float:
        """<H_GP> / N with the full interaction g|psi|^2 (rad/s)."""
        dA = (self.extent / self.n) ** 2
        n = np.abs(psi) ** 2
        N = float(np.sum(n)) * dA
        return (self.energy(psi) + 0.5 * self.g * float(np.sum(n**2)) * dA) / N


def step(field: ComplexField2D, V: PotentialMap, p: PhysicalParams, spec: EvolutionSpec) -> ComplexField2D:
    """Advance ``spec.steps`` Strang steps (half potential, full kinetic, half potential)."""
    solver = SplitStepSolver(V, p, field.extent, spec)
    psi = field.values
    for _ in range(spec.steps):
        psi = solver.step(psi)
    return ComplexField2D(psi, field.extent)


def thomas_fermi_field(n: int, extent: float, p: PhysicalParams) -> ComplexField2D:
    """Thomas-Fermi profile sqrt(max(mu - V, 0) / g) of the harmonic trap."""
    V = harmonic_potential(n, extent, p).values
    dens = np.maximum(mu_rate(p) - V, 0.0) / interaction_rate(p)
    return ComplexField2D(np.sqrt(dens).astype(complex), extent)


def gaussian_field(n: int, extent: float, p: PhysicalParams, number: float) -> ComplexField2D:
    """Harmonic-oscillator ground state holding ``number`` photons."""
    x = coordinates(n, extent)
    a = oscillator_length(p)
    r2 = x[:, None] ** 2 + x[None, :] ** 2
    psi = np.sqrt(number / (math.pi * a**2)) * np.exp(-r2 / (2.0 * a**2))
    return ComplexField2D(psi.astype(complex), extent)


@dataclass
class RelaxationResult:
    field: ComplexField2D
    energies: list = field(default_factory=list)
    mu: float = 0.0
    steps: int = 0


def relax_to_steady_state(
    V: PotentialMap,
    p: PhysicalParams,
    target_N: float,
    extent: Optional[float] = None,
    *,
    dt: Optional[float] = None,
    tol: float = 1e-10,
    max_steps: int = 50_000,
    initial: Optional[ComplexField2D] = None,
) -> RelaxationResult:
    """Imaginary-time relaxation, renormalised to ``target_N`` after every step.

    Stops once the relative energy change per step falls below ``tol``.
    ``dt`` defaults to 0.005 over the larger of mu and Omega0.
    """
    if not target_N > 0:
        raise ValueError("target_N must be positive")
    n = V.values.shape[0]
    extent = default_extent(p) if extent is None else extent
    if dt is None:
        dt = 0.005 / max(mu_rate(p), p.Omega0, 1e-30)
    solver = SplitStepSolver(V, p, extent, EvolutionSpec(dt=dt, mode="imaginary"))
    dA = (extent / n) ** 2
    if initial is not None:
        psi = initial.values.copy()
    elif V.source == "analytic-harmonic" and interaction_rate(p) > 0:
        psi = thomas_fermi_field(n, extent, p).values
    elif V.source == "analytic-harmonic":
        psi = gaussian_field(n, extent, p, target_N).values
    else:
        psi = np.ones((n, n), dtype=complex)
    psi = psi * math.sqrt(target_N / (np.sum(np.abs(psi) ** 2) * dA))
    energies = [solver.energy(psi)]
    for i in range(1, max_steps + 1):
        psi = solver.step(psi)
        psi *= math.sqrt(target_N / (np.sum(np.abs(psi) ** 2) * dA))
        e = solver.energy(psi)
        energies.append(e)
        if abs(e - energies[-2]) <= tol * abs(e):
            return RelaxationResult(ComplexField2D(psi, extent), energies, solver.chemical_potential(psi), i)
    raise ConvergenceError(f"no convergence after {max_steps} steps "
                           f"(last rel. change {abs(energies[-1] - energies[-2]) / abs(energies[-1]):.2e})")


def evolve_open(field: ComplexField2D, V: PotentialMap, p: PhysicalParams, spec: EvolutionSpec,
                record_every: int = 0):
    """Real-time evolution with gain ``gamma_net`` and saturation ``Gamma``.

    Returns the final field, plus a list of (time, N, peak density) samples
    when ``record_every`` > 0.
    """
    if spec.mode != "real":
        raise ValueError("evolve_open runs in real time")
    solver = SplitStepSolver(V, p, field.extent, spec)
    dA = field.dx**2
    psi = field.values
    history = []
    for i in range(spec.steps):
        psi = solver.step(psi)
        if record_every and (i + 1) % record_every == 0:
            d = np.abs(psi) ** 2
            history.append(((i + 1) * spec.dt, float(np.sum(d)) * dA, float(np.max(d))))
    out = ComplexField2D(psi, field.extent)
    return (out, history) if record_every else out
