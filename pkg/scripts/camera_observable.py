#!/usr/bin/env python3
"""Closed-model spectrum at weak interaction as recorded by the spectrometer.

Runs spectrum -> instrument blur -> camera and reports how far the
extracted ridge sits from the free parabola, in camera energy pixels.
Optionally sweeps the energy pixel size.
"""

import argparse
import warnings
from pathlib import Path

import numpy as np

from pbec.gridio import write_pgm, write_spectrum
from pbec.instrument import InstrumentConfig, camera_stage, convolve_instrument, energy_pixel_pitch, \
    energy_pixel_required
from pbec.lda_spectrum import pl_closed
from pbec.open_spectrum import default_axes, dispersion_extract, kinetic_rate
from pbec.params import PhysicalParams, mu_rate


def longest_run(mask) -> int:
    best = run = 0
    for m in mask:
        run = run + 1 if m else 0
        best = max(best, run)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g-tilde", type=float, default=1e-5)
    ap.add_argument("--n-k", type=int, default=512)
    ap.add_argument("--n-omega", type=int, default=1024)
    ap.add_argument("--px-energy", type=float, nargs="+", default=[4e-6],
                    help="energy pixel sizes to try (m)")
    ap.add_argument("--homogeneous", action="store_true", help="skip the trap average")
    ap.add_argument("--out", type=Path, default=Path("out/camera_weak"))
    args = ap.parse_args()

    p = PhysicalParams(g_tilde=args.g_tilde)
    k, w = default_axes(p, args.n_k, args.n_omega)
    spectrum = pl_closed(k, w, p, lda=not args.homogeneous).normalized()
    mu = mu_rate(p)
    for px in args.px_energy:
        inst = InstrumentConfig(px_energy=px)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cam = camera_stage(convolve_instrument(spectrum, inst, p), inst, p)
            c = dispersion_extract(cam)
        pitch = energy_pixel_pitch(inst, p)
        dev = np.abs(c.omega_peak - kinetic_rate(c.k, p))
        run = longest_run(c.valid & (dev > pitch))
        tag = f"px{px * 1e6:g}um"
        write_spectrum(args.out / f"camera_{tag}.csv", cam, {"px_energy_m": px, "units": "camera counts"})
        write_pgm(args.out / f"camera_{tag}.pgm", cam, inst.bit_depth)
        print(f"pixel {px * 1e6:g} um: mu = {mu / pitch:.2f} px, max deviation {np.nanmax(dev) / pitch:.2f} px, "
              f"longest run above one pixel {run} columns, {c.valid.sum()}/{c.k.size} valid")
    print(f"pixel matched to the grating resolution: {energy_pixel_required(InstrumentConfig(), p) * 1e6:.2f} um")


if __name__ == "__main__":
    main()
