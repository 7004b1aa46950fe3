"""Command-line interface: ``sturm solve|verify|converge|greens-probe``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from collections.abc import Sequence

import numpy as np

from .config import ProblemConfig, bundled_names, load_raw, validate
from .effective import Equation
from .errors import ConfigError, SturmError
from .greens import Sheet
from .oracle import ShootingProblem, oracle_bound_states
from .solver import (
    DeterminantEvaluator,
    RootResult,
    convergence_study,
    determinant,
    find_bound_states,
    find_resonances,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_MISMATCH = 0, 2, 3, 4

def root_record(r: RootResult) -> dict:
    E = complex(r.E_prime)
    return {
        "type": r.kind,
        "E_re": E.real,
        "E_im": min(E.imag, 0.0),
        "residual": r.sigma_min,
        "log_abs_det": r.log_abs_det,
        "N": r.N,
        "Nprime": r.Nprime,
        "b": r.b,
        "iterations": r.iterations,
        "channel": r.channel,
        "width_below_resolution": r.width_below_resolution,
    }


def _base_record(cfg: ProblemConfig, command: str) -> dict:
    kind = cfg.problem.kind
    return {
        "command": command,
        "config_name": cfg.name,
        "config_hash": cfg.digest(),
        "equation": kind.equation.value,
        "quantum_number": kind.j if kind.equation is Equation.DIRAC else kind.l,
    }


def run_solve(cfg: ProblemConfig, threads: int = 1) -> dict:
    """Bound-state search, then the resonance search when a box is configured."""
    rec = _base_record(cfg, "solve")
    ev = DeterminantEvaluator(cfg.problem)
    timings = {}
    roots: list[RootResult] = []
    if cfg.bound_interval is not None:
        t = time.perf_counter()
        roots += find_bound_states(ev, cfg.bound_interval, cfg.bound_grid, threads=threads)
        timings["bound_s"] = time.perf_counter() - t
    if cfg.resonance_box is not None:
        t = time.perf_counter()
        seeds = list(cfg.seeds) or None
        roots += find_resonances(ev, cfg.resonance_box, seeds, cfg.resonance_grid, threads=threads)
        timings["resonance_s"] = time.perf_counter() - t
    rec["roots"] = [root_record(r) for r in roots]
    rec["timings"] = timings
    return rec


def run_verify(cfg: ProblemConfig, threads: int = 1) -> dict:
    """Compare solver bound states with the Numerov oracle level by level."""
    kind = cfg.problem.kind
    if kind.equation is Equation.DIRAC:
        raise ConfigError("verify supports schrodinger and kg only", "equation")
    if cfg.bound_interval is None:
        raise ConfigError("verify needs a bound interval", "search.bound_interval")
    rec = _base_record(cfg, "verify")
    t = time.perf_counter()
    ev = DeterminantEvaluator(cfg.problem)
    solver_E = [r.E_prime.real for r in find_bound_states(ev, cfg.bound_interval, cfg.bound_grid, threads=threads)]
    t_solver = time.perf_counter() - t
    t = time.perf_counter()
    shoot = ShootingProblem.from_channel(ev.channel, cfg.problem.potential, e_top=cfg.bound_interval[1])
    oracle_E = oracle_bound_states(shoot, cfg.bound_interval)
    t_oracle = time.perf_counter() - t
    rows = []
    for e in solver_E:
        o = min(oracle_E, key=lambda x: abs(x - e)) if oracle_E else float("nan")
        rows.append({"E_solver": e, "E_oracle": o, "delta": abs(e - o)})
    unmatched = len(oracle_E) - len(solver_E)
    rec["levels"] = rows
    rec["tolerance"] = cfg.verify_tolerance
    rec["count_mismatch"] = unmatched
    rec["passed"] = unmatched == 0 and all(r["delta"] <= cfg.verify_tolerance for r in rows)
    rec["timings"] = {"solver_s": t_solver, "oracle_s": t_oracle}
    return rec


def run_converge(cfg: ProblemConfig, N_list: Sequence[int], b_list: Sequence[float], threads: int = 1) -> dict:
    """Bound states on an ``(N, b)`` grid with drift against the largest ``N``."""
    if cfg.bound_interval is None:
        raise ConfigError("converge needs a bound interval", "search.bound_interval")
    rec = _base_record(cfg, "converge")
    t = time.perf_counter()
    table = convergence_study(cfg.problem, N_list, b_list, cfg.bound_interval, cfg.bound_grid, threads)
    rows = []
    single = len(table.N_list) == 1 and len(table.b_list) == 1
    for b in table.b_list:
        drift = table.drift(b)
        for N in table.N_list:
            row = {"N": N, "b": b, "energies": [e.real for e in table.energies(N, b)]}
            if not single:
                row["drift"] = drift[N]
            if (N, b) in table.errors:
                row["error"] = table.errors[(N, b)]
            rows.append(row)
    rec["rows"] = rows
    rec["timings"] = {"total_s": time.perf_counter() - t}
    return rec


def run_greens_probe(
    cfg: ProblemConfig, re_range: tuple[float, float, int], im_range: tuple[float, float, int], sheet: str
) -> dict:
    """``log|D|`` and ``arg D`` on a rectangular energy grid."""
    rec = _base_record(cfg, "greens-probe")
    ev = DeterminantEvaluator(cfg.problem, Sheet(sheet))
    pts = []
    for x in np.linspace(*re_range[:2], int(re_range[2])):
        for y in np.linspace(*im_range[:2], int(im_range[2])):
            try:
                d = determinant(ev, complex(x, y))
                pts.append({"E_re": float(x), "E_im": float(y), "log_abs_det": d.log_abs, "phase": d.phase})
            except SturmError as exc:
                pts.append({"E_re": float(x), "E_im": float(y), "error": str(exc)})
    rec["sheet"] = sheet
    rec["grid"] = pts
    return rec


def _fmt17(x) -> str:
    return "" if x is None else (f"{x:.17g}" if isinstance(x, float) else str(x))


def format_record(rec: dict, fmt: str) -> str:
    """Serialize a result record; floats keep full precision in json and csv."""
    if fmt == "json":
        return json.dumps(rec, indent=2, sort_keys=True) + "\n"
    rows, columns = _table(rec)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt17(r.get(c)) for c in columns])
        return buf.getvalue()
    head = f"# {rec['command']} {rec['equation']} {rec['quantum_number']} config={rec['config_hash']}"
    if rec.get("config_name"):
        head += f" ({rec['config_name']})"
    lines = [head, "  ".join(f"{c:>16}" for c in columns)]
    for r in rows:
        cells = []
        for c in columns:
            v = r.get(c)
            cells.append(f"{v:>16.8g}" if isinstance(v, float) else f"{'' if v is None else v!s:>16}")
        lines.append("  ".join(cells))
    if "passed" in rec:
        lines.append(f"# passed={rec['passed']} tolerance={rec['tolerance']:g}")
    return "\n".join(lines) + "\n"


def _table(rec: dict) -> tuple[list[dict], list[str]]:
    cmd = rec["command"]
    if cmd == "solve":
        cols = ["type", "E_re", "E_im", "residual", "N", "b", "iterations"]
        return rec["roots"], cols
    if cmd == "verify":
        return rec["levels"], ["E_solver", "E_oracle", "delta"]
    if cmd == "greens-probe":
        return rec["grid"], ["E_re", "E_im", "log_abs_det", "phase"]
    rows = []
    width = max((len(r["energies"]) for r in rec["rows"]), default=0)
    has_drift = any("drift" in r for r in rec["rows"])
    cols = ["N", "b"] + [f"E{k}" for k in range(width)]
    if has_drift:
        cols += [f"drift{k}" for k in range(width)]
    for r in rec["rows"]:
        row = {"N": r["N"], "b": r["b"]}
        for k, e in enumerate(r["energies"]):
            row[f"E{k}"] = e
        for k, d in enumerate(r.get("drift", [])):
            row[f"drift{k}"] = d
        rows.append(row)
    return rows, cols


def _floats(text: str, n: int, flag: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise ConfigError(f"expected {n} comma-separated numbers", flag)
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError("not a number", flag) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file or bundled config name")
    common.add_argument("--equation", choices=[e.value for e in Equation])
    common.add_argument("--l", type=int, help="orbital angular momentum (schrodinger, kg)")
    common.add_argument("--j", type=float, help="total angular momentum (dirac)")
    common.add_argument("--n-basis", type=int, dest="n_basis", help="retained basis size N")
    common.add_argument("--n-prime", type=int, dest="n_prime", help="expansion size N'")
    common.add_argument("--b", type=float, help="basis scale b")
    common.add_argument("--bound-interval", dest="bound_interval", metavar="LO,HI")
    common.add_argument("--resonance-box", dest="resonance_box", metavar="RE_LO,RE_HI,IM_LO,IM_HI")
    common.add_argument("--dirac-coupling", dest="dirac_coupling", choices=["rotated", "rotated-flipped", "literal"])
    common.add_argument("--format", choices=["json", "csv", "text"])
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--threads", type=int, help="worker threads (default: $STURM_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="sturm", description="Coulomb-Sturmian separable-potential solver for bound states and resonances."
    )
    parser.add_argument("--list-configs", action="store_true", help="print bundled config names and exit")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("solve", parents=[common], help="find bound states and resonances")
    v = sub.add_parser("verify", parents=[common], help="compare bound states with the Numerov oracle")
    v.add_argument("--tolerance", type=float, help="largest accepted |solver - oracle|")
    c = sub.add_parser("converge", parents=[common], help="convergence study over N and b")
    c.add_argument("--N-list", dest="N_list", default=None, help="comma-separated basis sizes")
    c.add_argument("--b-list", dest="b_list", default=None, help="comma-separated basis scales")
    g = sub.add_parser("greens-probe", parents=[common], help="dump log|D| on an energy grid")
    g.add_argument("--re-range", dest="re_range", default=None, metavar="LO,HI,N")
    g.add_argument("--im-range", dest="im_range", default="0,0,1", metavar="LO,HI,N")
    g.add_argument("--sheet", choices=["physical", "unphysical"], default="physical")
    return parser


def apply_overrides(raw: dict, args: argparse.Namespace) -> dict:
    raw = json.loads(json.dumps(raw))
    if args.equation:
        raw["equation"] = args.equation
    if args.l is not None:
        raw.pop("j", None)
        raw["l"] = args.l
    if args.j is not None:
        raw.pop("l", None)
        raw["j"] = args.j
    basis = raw.setdefault("basis", {})
    if args.n_basis is not None:
        basis["N"] = args.n_basis
        if args.n_prime is None and "Nprime" in basis and basis["Nprime"] is not None and basis["Nprime"] < args.n_basis:
            basis["Nprime"] = args.n_basis
    if args.n_prime is not None:
        basis["Nprime"] = args.n_prime
    if args.b is not None:
        basis["b"] = args.b
    search = raw.setdefault("search", {})
    if args.bound_interval:
        search["bound_interval"] = list(_floats(args.bound_interval, 2, "--bound-interval"))
    if args.resonance_box:
        search["resonance_box"] = list(_floats(args.resonance_box, 4, "--resonance-box"))
    if args.dirac_coupling:
        raw["dirac_coupling"] = args.dirac_coupling
    out = raw.setdefault("output", {})
    if args.format:
        out["format"] = args.format
    if args.out:
        out["path"] = args.out
    if getattr(args, "tolerance", None) is not None:
        search.setdefault("tolerances", {})["verify"] = args.tolerance
    return raw


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("STURM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"not an integer: {env!r}", "STURM_THREADS") from None
    return 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_configs:
        print("\n".join(bundled_names()))
        return EXIT_OK
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = load_raw(args.config) if args.config else {}
        cfg = validate(apply_overrides(raw, args))
        threads = resolve_threads(args.threads)
        if args.command == "solve":
            rec = run_solve(cfg, threads)
        elif args.command == "verify":
            rec = run_verify(cfg, threads)
        elif args.command == "converge":
            N_list = [int(x) for x in args.N_list.split(",")] if args.N_list else [cfg.problem.basis.N]
            b_list = [float(x) for x in args.b_list.split(",")] if args.b_list else [cfg.problem.basis.b]
            rec = run_converge(cfg, N_list, b_list, threads)
        else:
            if args.re_range:
                lo, hi, n = _floats(args.re_range, 3, "--re-range")
            elif cfg.bound_interval is not None:
                lo, hi, n = *cfg.bound_interval, 200
            else:
                raise ConfigError("give --re-range or a bound interval", "--re-range")
            rec = run_greens_probe(cfg, (lo, hi, n), _floats(args.im_range, 3, "--im-range"), args.sheet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SturmError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = format_record(rec, cfg.output_format)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if rec.get("passed") is False:
        print("verification mismatch", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
