"""Pure Coulomb: the zeros of det(g^-1) sit on the Bohr levels for any basis size and scale."""

from __future__ import annotations

import argparse

from sturm import BasisParams, DeterminantEvaluator, EquationKind, PhysicalConstants, Problem, RadialPotential
from sturm import find_bound_states


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--Z", type=float, default=-1.0, help="attractive Coulomb coefficient")
    parser.add_argument("--levels", type=int, default=4)
    args = parser.parse_args()
    Z = args.Z
    exact = [-Z * Z / (2 * n * n) for n in range(1, args.levels + 1)]
    lo, hi = 1.1 * exact[0], 0.5 * (exact[-1] - Z * Z / (2 * (args.levels + 1) ** 2))
    print(f"Bohr levels: {exact}")
    print(f"{'N':>4} {'b':>6}  max |E - E_Bohr|")
    for N in (2, 5, 20, 40):
        for b in (0.7, 2.0, 8.0):
            p = Problem(EquationKind.schrodinger(0), RadialPotential(Z, ()), BasisParams(b, N), PhysicalConstants())
            E = [r.E_prime.real for r in find_bound_states(DeterminantEvaluator(p), (lo, hi))]
            err = max(abs(e - x) for e, x in zip(E, exact)) if len(E) == len(exact) else float("nan")
            print(f"{N:>4} {b:>6}  {err:.1e}  ({len(E)} levels)")


if __name__ == "__main__":
    main()
