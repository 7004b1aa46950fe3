"""Solve every bundled model block and print the levels next to the reference table."""

from __future__ import annotations

import argparse

from sturm.cli import run_solve
from sturm.config import load_raw, validate

BLOCKS = [f"table1_{eq}_l{l}" for eq in ("schrodinger", "kg") for l in range(3)]
BLOCKS += [f"table1_dirac_j{j}" for j in ("1_2", "3_2", "5_2")]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-basis", type=int, default=60)
    parser.add_argument("--b", type=float, default=4.0)
    parser.add_argument("--only", choices=BLOCKS, help="run a single block")
    args = parser.parse_args()
    for name in [args.only] if args.only else BLOCKS:
        raw = load_raw(name)
        raw["basis"].update(N=args.n_basis, b=args.b)
        rec = run_solve(validate(raw))
        print(f"{name}  (N={args.n_basis}, b={args.b})")
        for r in rec["roots"]:
            im = f"{r['E_im']:+.2e}i" if r["type"] == "resonance" else ""
            print(f"  {r['type']:>9}  {r['E_re']:>14.8f}{im}")


if __name__ == "__main__":
    main()
