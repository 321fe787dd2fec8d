#!/usr/bin/env python3
"""Print the spectrometer resolution budget and detection thresholds."""

import argparse

from pbec.config import load_config, parse_config
from pbec.cli import resolve_report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="configuration file (defaults apply otherwise)")
    ap.add_argument("--n-L", type=float, action="append", default=None,
                    help="refractive index to evaluate; repeat to compare")
    args = ap.parse_args()
    base = load_config(args.config) if args.config else parse_config("")
    for n in args.n_L or [base.n_L]:
        print(f"## n_L = {n}")
        print(resolve_report(base.with_(n_L=n)))


if __name__ == "__main__":
    main()
