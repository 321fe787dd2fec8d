"""Command-line pipeline: ``pbec <command> --config <path>``.

Commands
--------
solve       ground state (and optional open evolution) density on the solver grid
spectrum    ideal photoluminescence grid, open or closed model
instrument  spectrum seen through the spectrometer: blurred, pixelated, quantised
resolve     resolution budget and minimum detectable interaction
dispersion  ridge position per k column

Exit status is 0 on success, 1 for usage or configuration errors and 2 when
the computation fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cgpe import (
    ConvergenceError,
    DivergenceError,
    EvolutionSpec,
    auto_dt,
    coordinates,
    default_extent,
    evolve_open,
    harmonic_potential,
    potential_from_mirror,
    relax_to_steady_state,
)
from .config import ConfigError, RunConfig, load_config
from .grids import SpectrumGrid, symmetric_axis
from .gridio import atomic_write, read_grid, write_grid, write_pgm, write_spectrum, _fmt
from .instrument import camera_stage, convolve_instrument, energy_pixel_required, resolution_budget
from .lda_spectrum import QuadratureError, pl_closed
from .open_spectrum import default_axes, dispersion_extract, kinetic_rate, pl_open
from .params import TWO_PI, mu_rate, saturation_coefficient

COMMANDS = ("solve", "spectrum", "instrument", "resolve", "dispersion")
EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2

# values quoted alongside the resolution budget for comparison
REFERENCE = {
    "delta_k": (1.3e4, "1/m"),
    "px_opt": (180e-6, "m"),
    "delta_lambda": (0.04e-9, "m"),
    "delta_eps/2pi": (30e9, "Hz"),
    "px_energy_required": (4e-6, "m"),
    "gmin_momentum": (2e-10, "1"),
    "gmin_energy": (2e-5, "1"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pbec", description="Photon BEC spectra and spectrometer forward model.")
    ap.add_argument("--version", action="version", version=f"pbec {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="key = value configuration file")
    ap.add_argument("--out", help="output path (overrides the config)")
    ap.add_argument("--model", choices=("open", "closed"), help="spectrum model (overrides the config)")
    ap.add_argument("--png", help="instrument: also write a PNG heatmap")
    return ap


def provenance(cfg: RunConfig, command: str, units: str) -> dict:
    return {"config_sha256": cfg.sha256(), "pbec_version": __version__, "command": command, "units": units}


def spectrum_axes(cfg: RunConfig):
    p = cfg.physical()
    k, w = default_axes(p, cfg.n_k, cfg.n_omega)
    if cfg.k_max is not None:
        k = symmetric_axis(cfg.k_max, cfg.n_k)
    if cfg.omega_max is not None:
        w = symmetric_axis(cfg.omega_max, cfg.n_omega)
    return k, w


def compute_spectrum(cfg: RunConfig) -> SpectrumGrid:
    """Ideal photoluminescence grid with the configured normalisation."""
    p = cfg.physical()
    k, w = spectrum_axes(cfg)
    if cfg.model == "open":
        grid = pl_open(k, w, p)
    else:
        grid = pl_closed(k, w, p, lda=cfg.lda, local_bose=cfg.local_bose, r_cut=cfg.r_cut, rtol=cfg.quad_rtol)
    return grid.normalized() if cfg.normalization == "unit-max" else grid


def compute_camera(cfg: RunConfig) -> SpectrumGrid:
    p, inst = cfg.physical(), cfg.instrument()
    return camera_stage(convolve_instrument(compute_spectrum(cfg), inst, p), inst, p)


def _potential(cfg: RunConfig, p):
    if cfg.mirror_profile is None:
        extent = cfg.grid_extent if cfg.grid_extent is not None else default_extent(p)
        return harmonic_potential(cfg.grid_n, extent, p), extent
    x, y, dL, _ = read_grid(cfg.mirror_profile)
    n = x.size
    if y.size != n:
        raise ValueError("mirror profile must be square")
    extent = (x[-1] - x[0]) * n / (n - 1)
    if not np.allclose(x, coordinates(n, extent), rtol=0, atol=1e-9 * extent):
        raise ValueError("mirror profile axes must be uniform with x = 0 at index n // 2")
    return potential_from_mirror(dL, p), extent


def compute_solve(cfg: RunConfig):
    """Relaxed (optionally open-evolved) field and a metadata dict."""
    p = cfg.physical()
    V, extent = _potential(cfg, p)
    res = relax_to_steady_state(V, p, p.N_bec, extent, dt=cfg.dt, tol=cfg.solve_tol, max_steps=cfg.max_steps)
    field = res.field
    meta = {"mu_rad_s": _fmt(res.mu), "relax_steps": res.steps}
    if cfg.open_steps:
        peak = float(np.max(field.density()))
        Gamma = saturation_coefficient(p.gamma_net, peak)
        dt = cfg.dt if cfg.dt is not None else auto_dt(V, p, extent)
        spec = EvolutionSpec(dt=dt, steps=cfg.open_steps, mode="real", gamma_net=p.gamma_net, Gamma=Gamma)
        field = evolve_open(field, V, p, spec)
        meta.update(Gamma_m2_s=_fmt(Gamma), open_steps=cfg.open_steps, open_dt_s=_fmt(dt))
    meta["N"] = _fmt(field.number())
    return field, meta


def resolve_report(cfg: RunConfig) -> str:
    p, inst = cfg.physical(), cfg.instrument()
    b = resolution_budget(inst, p)
    computed = {
        "delta_k": (b.delta_k, "1/m"),
        "px_opt": (b.px_opt, "m"),
        "delta_lambda": (b.delta_lambda, "m"),
        "delta_eps": (b.delta_eps, "rad/s"),
        "delta_eps/2pi": (b.delta_eps / TWO_PI, "Hz"),
        "px_energy_required": (energy_pixel_required(inst, p), "m"),
        "gmin_momentum": (b.gmin_momentum, "1"),
        "gmin_energy": (b.gmin_energy, "1"),
    }
    lines = [f"# {k}: {v}" for k, v in provenance(cfg, "resolve", "SI; rates in rad/s").items()]
    for name, (val, unit) in computed.items():
        lines.append(f"{name} = {_fmt(val)}  # {unit}")
    lines.append(f"limiting = {b.limiting}")
    for name, (val, unit) in REFERENCE.items():
        ratio = computed[name][0] / val
        lines.append(f"reference.{name} = {_fmt(val)}  # {unit}, computed/reference = {ratio:.3g}")
    lines += [
        "# note: gmin_energy evaluates delta_eps^2 pi / (N (2 Omega0)^2); the quoted 2e-5 matches",
        "#       (Omega0)^2 in the denominator instead, a factor 4 apart.",
        "# note: gmin_momentum uses the cavity mass (n_L) with delta_k from n_objective;",
        "#       the quoted 2e-10 is reached within the same order of magnitude.",
        "# note: the quoted 180 um momentum pixel and 4 um energy pixel differ from the",
        "#       closed forms above; both are listed for comparison.",
    ]
    return "\n".join(lines) + "\n"


def dispersion_text(cfg: RunConfig, grid: SpectrumGrid) -> str:
    p = cfg.physical()
    curve = dispersion_extract(grid)
    eps = kinetic_rate(curve.k, p)
    xi = np.sqrt(eps * (eps + 2.0 * mu_rate(p)))
    lines = ["# pbec-curve v1"]
    lines += [f"# {k}: {v}" for k, v in provenance(cfg, "dispersion", "k 1/m; omega rad/s").items()]
    lines.append("k,omega_peak,valid,eps_k,xi_k")
    for row in zip(curve.k, curve.omega_peak, curve.valid, eps, xi):
        lines.append(f"{_fmt(row[0])},{_fmt(row[1])},{int(row[2])},{_fmt(row[3])},{_fmt(row[4])}")
    return "\n".join(lines) + "\n"


def write_png(path, counts: SpectrumGrid, bit_depth: int) -> None:
    from PIL import Image  # optional dependency

    img = np.asarray(counts.values[::-1, :])
    if bit_depth > 8:
        im = Image.fromarray((img * (65535 // (2**bit_depth - 1))).astype(np.uint16))
    else:
        im = Image.fromarray(img.astype(np.uint8))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    im.save(path, format="PNG")


def run(command: str, cfg: RunConfig, png: str | None = None) -> list[Path]:
    """Execute one command; returns the files written."""
    out = Path(cfg.out) if cfg.out else Path(f"pbec_{command}.{'txt' if command == 'resolve' else 'csv'}")
    written = [out]
    if command == "solve":
        field, meta = compute_solve(cfg)
        x = coordinates(field.n, field.extent)
        meta = {**provenance(cfg, "solve", "density 1/m^2; x, y in m"), **meta}
        write_grid(out, x, x, field.density(), col_name=("x_axis", "m"), row_name=("y_axis", "m"), meta=meta)
    elif command == "spectrum":
        grid = compute_spectrum(cfg)
        units = "arb. (unit max)" if cfg.normalization == "unit-max" else "1/(rad/s) per photon"
        write_spectrum(out, grid, provenance(cfg, f"spectrum model={cfg.model}", units))
    elif command == "instrument":
        counts = compute_camera(cfg)
        write_spectrum(out, counts, provenance(cfg, "instrument", "camera counts"))
        pgm = out.with_suffix(".pgm")
        write_pgm(pgm, counts, cfg.bit_depth)
        written.append(pgm)
        if png:
            write_png(png, counts, cfg.bit_depth)
            written.append(Path(png))
    elif command == "resolve":
        atomic_write(out, resolve_report(cfg).encode("utf-8"))
    elif command == "dispersion":
        atomic_write(out, dispersion_text(cfg, compute_spectrum(cfg)).encode("utf-8"))
    else:
        raise UsageError(f"unknown command {command!r}")
    return written


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config)
        overrides = {k: v for k, v in (("out", args.out), ("model", args.model)) if v is not None}
        if overrides:
            cfg = cfg.with_(**overrides)
        if args.png and args.command != "instrument":
            raise UsageError("--png only applies to the instrument command")
    except (UsageError, ConfigError, OSError) as exc:
        print(f"pbec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        for path in run(args.command, cfg, args.png):
            print(path)
    except (ValueError, ArithmeticError, RuntimeError, QuadratureError, ConvergenceError, DivergenceError,
            OSError, ImportError) as exc:
        print(f"pbec {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
