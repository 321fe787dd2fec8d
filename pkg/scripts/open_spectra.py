#!/usr/bin/env python3
"""Open-system photoluminescence for strong and weak interactions.

Writes one spectrum grid and one dispersion table per interaction strength
and prints where the ridge departs from the free parabola.
"""

import argparse
from pathlib import Path

import numpy as np

from pbec.gridio import atomic_write, write_spectrum, _fmt
from pbec.open_spectrum import default_axes, dispersion_extract, kinetic_rate, pl_open
from pbec.params import TWO_PI, PhysicalParams, mu_rate


def run(g_tilde: float, n_k: int, n_omega: int, outdir: Path) -> None:
    p = PhysicalParams(g_tilde=g_tilde)
    mu = mu_rate(p)
    k, w = default_axes(p, n_k, n_omega)
    grid = pl_open(k, w, p).normalized()
    tag = f"g{g_tilde:.0e}"
    write_spectrum(outdir / f"open_{tag}.csv", grid, {"g_tilde": g_tilde, "units": "arb. (unit max)"})

    c = dispersion_extract(grid)
    eps = kinetic_rate(k, p)
    xi = np.sqrt(eps * (eps + 2 * mu))
    rows = ["k,omega_peak,valid,eps_k,xi_k"]
    rows += [",".join([_fmt(a), _fmt(b), str(int(v)), _fmt(e), _fmt(x)])
             for a, b, v, e, x in zip(k, c.omega_peak, c.valid, eps, xi)]
    atomic_write(outdir / f"dispersion_{tag}.csv", ("\n".join(rows) + "\n").encode())

    h = w[1] - w[0]
    band = c.valid & (eps > 0.1 * mu) & (eps < mu)
    print(f"g_tilde {g_tilde:g}: mu/2pi = {mu / TWO_PI / 1e9:.1f} GHz, grid step {h / p.gamma_net:.1f} gamma")
    if band.any():
        print(f"  phonon band: max |peak - xi| = {np.max(np.abs(c.omega_peak - xi)[band]) / h:.2f} steps, "
              f"min |peak - eps| = {np.min(np.abs(c.omega_peak - eps)[band]) / p.gamma_net:.1f} gamma")
    high = c.valid & (eps > 4 * mu)
    if high.any():
        dev = np.abs(c.omega_peak - eps - mu)[high]
        print(f"  free band (eps > 4 mu): max |peak - eps - mu| = {dev.max() / p.gamma_net:.2f} gamma")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-k", type=int, default=512)
    ap.add_argument("--n-omega", type=int, default=1024)
    ap.add_argument("--out", type=Path, default=Path("out/open"))
    args = ap.parse_args()
    for g in (1e-3, 1e-5):
        run(g, args.n_k, args.n_omega, args.out)


if __name__ == "__main__":
    main()
