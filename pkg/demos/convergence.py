"""Drift of the model l=0 bound states with basis size, for several basis scales."""

from __future__ import annotations

import argparse

from sturm import BasisParams, EquationKind, PhysicalConstants, Problem, RadialPotential, Term, convergence_study


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N-list", default="20,30,40,50,60,80")
    parser.add_argument("--b-list", default="2,4,6,30")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    N_list = [int(x) for x in args.N_list.split(",")]
    b_list = [float(x) for x in args.b_list.split(",")]
    pot = RadialPotential(50.0, (Term(-240.0, -1, 1.0), Term(320.0, -1, 4.0)))
    problem = Problem(EquationKind.schrodinger(0), pot, BasisParams(4.0, 60), PhysicalConstants(c=137.03604))
    table = convergence_study(problem, N_list, b_list, (-100.0, -0.01), threads=args.threads)
    for b in b_list:
        print(f"b = {b}: |E_k(N) - E_k(N={max(N_list)})|")
        for N, d in table.drift(b).items():
            print(f"  N={N:>3}  " + "  ".join(f"{x:.1e}" for x in d))


if __name__ == "__main__":
    main()
