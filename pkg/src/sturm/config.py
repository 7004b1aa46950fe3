"""Problem configuration: JSON schema, validation and bundled examples."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from .csbasis import BasisParams, RadialPotential, Term
from .effective import DiracCoupling, Equation, EquationKind, effective_channel
from .errors import ConfigError, SturmError
from .greens import PhysicalConstants
from .solver import Problem

DEFAULTS: dict[str, Any] = {
    "name": "",
    "equation": "schrodinger",
    "constants": {"m": 1.0, "hbar": 1.0, "e2": 1.0, "c": 137.03604},
    "coulomb_Z": 0.0,
    "potential": [],
    "basis": {"b": 1.0, "N": 40, "Nprime": None, "quad_points": None},
    "search": {
        "bound_interval": None,
        "bound_grid": 500,
        "resonance_box": None,
        "resonance_grid": [40, 20],
        "seeds": [],
        "tolerances": {"verify": 1e-5},
    },
    "dirac_coupling": "rotated",
    "output": {"format": "text", "path": None},
}

OUTPUT_FORMATS = ("json", "csv", "text")


def bundled_names() -> list[str]:
    """Names of the configurations shipped with the package."""
    folder = resources.files("sturm") / "configs"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def load_raw(source: str | Path) -> dict:
    """Read a configuration from a file path or a bundled name."""
    path = Path(source)
    try:
        if path.is_file():
            text = path.read_text()
        else:
            name = str(source).removesuffix(".json")
            res = resources.files("sturm") / "configs" / f"{name}.json"
            if not res.is_file():
                raise ConfigError(f"no such file or bundled config: {source}", "config")
            text = res.read_text()
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc})", "config") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", "config")
    return data


def merge_defaults(raw: dict) -> dict:
    out = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if key in ("l", "j"):
            out[key] = value
            continue
        if key not in out:
            raise ConfigError("unknown field", key)
        if isinstance(out[key], dict) and key != "constants":
            if not isinstance(value, dict):
                raise ConfigError("must be an object", key)
            for sub, v in value.items():
                if sub not in out[key]:
                    raise ConfigError("unknown field", f"{key}.{sub}")
                if sub == "tolerances":
                    if not isinstance(v, dict):
                        raise ConfigError("must be an object", f"{key}.{sub}")
                    out[key][sub].update(v)
                else:
                    out[key][sub] = v
        else:
            out[key] = value
    return out


def _number(value, path, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("must be a number", path)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path)
    if integer and int(value) != value:
        raise ConfigError("must be an integer", path)
    if positive and value <= 0:
        raise ConfigError("must be positive", path)
    return int(value) if integer else float(value)


def _pair(value, n, path):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(f"must be a list of {n} numbers", path)
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


@dataclass(frozen=True)
class ProblemConfig:
    """Validated configuration; ``raw`` keeps the merged JSON form."""

    raw: dict
    problem: Problem
    bound_interval: tuple[float, float] | None
    bound_grid: int
    resonance_box: tuple[float, float, float, float] | None
    resonance_grid: tuple[int, int]
    seeds: tuple[complex, ...]
    verify_tolerance: float
    output_format: str
    output_path: str | None

    @property
    def name(self) -> str:
        return self.raw.get("name", "")

    def digest(self) -> str:
        """Hash of the physics and search settings (output settings excluded)."""
        body = {k: v for k, v in self.raw.items() if k not in ("output", "name")}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def validate(raw: dict) -> ProblemConfig:
    """Check every field and build the solver objects."""
    cfg = merge_defaults(raw)
    try:
        equation = Equation(cfg["equation"])
    except ValueError:
        raise ConfigError(f"must be one of {[e.value for e in Equation]}", "equation") from None
    has_l, has_j = "l" in cfg, "j" in cfg
    if has_l == has_j:
        raise ConfigError("exactly one of l and j must be given", "l" if has_l else "j")
    try:
        if equation is Equation.DIRAC:
            if not has_j:
                raise ConfigError("dirac equation takes j", "j")
            kind = EquationKind.dirac(_number(cfg["j"], "j"))
        else:
            if not has_l:
                raise ConfigError(f"{equation.value} equation takes l", "l")
            l = _number(cfg["l"], "l", integer=True)
            kind = EquationKind(equation, l=l)
    except SturmError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "j" if equation is Equation.DIRAC else "l") from exc

    const = cfg["constants"]
    if not isinstance(const, dict):
        raise ConfigError("must be an object", "constants")
    unknown = set(const) - {"m", "hbar", "e2", "c", "alpha"}
    if unknown:
        raise ConfigError("unknown field", f"constants.{sorted(unknown)[0]}")
    if "c" in const and "alpha" in const:
        raise ConfigError("give c or alpha, not both", "constants")
    m = _number(const.get("m", 1.0), "constants.m", positive=True)
    hbar = _number(const.get("hbar", 1.0), "constants.hbar", positive=True)
    e2 = _number(const.get("e2", 1.0), "constants.e2", positive=True)
    if "alpha" in const:
        alpha = _number(const["alpha"], "constants.alpha", positive=True)
        c = e2 / (hbar * alpha)
    else:
        c = _number(const.get("c", 137.03604), "constants.c", positive=True)
    try:
        constants = PhysicalConstants(m, hbar, c, e2)
    except SturmError as exc:
        raise ConfigError(str(exc), "constants") from exc

    Z = _number(cfg["coulomb_Z"], "coulomb_Z")
    if not isinstance(cfg["potential"], list):
        raise ConfigError("must be a list of terms", "potential")
    terms = []
    for i, t in enumerate(cfg["potential"]):
        path = f"potential[{i}]"
        if not isinstance(t, dict) or set(t) != {"amp", "power", "decay"}:
            raise ConfigError("term needs exactly amp, power, decay", path)
        power = _number(t["power"], f"{path}.power", integer=True)
        if power < -1:
            raise ConfigError("must be >= -1", f"{path}.power")
        terms.append(Term(_number(t["amp"], f"{path}.amp"), power, _number(t["decay"], f"{path}.decay", positive=True)))
    potential = RadialPotential(Z, tuple(terms))

    bcfg = cfg["basis"]
    b = _number(bcfg["b"], "basis.b", positive=True)
    N = _number(bcfg["N"], "basis.N", positive=True, integer=True)
    Np = None if bcfg["Nprime"] is None else _number(bcfg["Nprime"], "basis.Nprime", positive=True, integer=True)
    qp = None if bcfg["quad_points"] is None else _number(bcfg["quad_points"], "basis.quad_points", positive=True, integer=True)
    try:
        basis = BasisParams(b, N, Np, qp)
    except SturmError as exc:
        raise ConfigError(str(exc), "basis") from exc

    try:
        coupling = DiracCoupling(cfg["dirac_coupling"])
    except ValueError:
        raise ConfigError(f"must be one of {[c.value for c in DiracCoupling]}", "dirac_coupling") from None
    try:
        problem = Problem(kind, potential, basis, constants, coupling)
        effective_channel(kind, Z, constants, coupling)
    except SturmError as exc:
        raise ConfigError(str(exc), "coulomb_Z") from exc

    s = cfg["search"]
    interval = None if s["bound_interval"] is None else _pair(s["bound_interval"], 2, "search.bound_interval")
    if interval is not None and not interval[0] < interval[1] < 0:
        raise ConfigError("need lo < hi < 0", "search.bound_interval")
    grid = _number(s["bound_grid"], "search.bound_grid", positive=True, integer=True)
    if grid < 2:
        raise ConfigError("must be at least 2", "search.bound_grid")
    box = None if s["resonance_box"] is None else _pair(s["resonance_box"], 4, "search.resonance_box")
    if box is not None and not (box[0] < box[1] and box[2] < box[3] <= 0):
        raise ConfigError("need re_lo < re_hi and im_lo < im_hi <= 0", "search.resonance_box")
    rg = _pair(s["resonance_grid"], 2, "search.resonance_grid")
    if any(int(v) != v or v < 2 for v in rg):
        raise ConfigError("must be two integers >= 2", "search.resonance_grid")
    seeds = []
    if not isinstance(s["seeds"], list):
        raise ConfigError("must be a list", "search.seeds")
    for i, z in enumerate(s["seeds"]):
        re, im = _pair(z, 2, f"search.seeds[{i}]")
        seeds.append(complex(re, im))
    tol = _number(s["tolerances"].get("verify", 1e-5), "search.tolerances.verify", positive=True)

    out = cfg["output"]
    fmt = out["format"]
    if fmt not in OUTPUT_FORMATS:
        raise ConfigError(f"must be one of {list(OUTPUT_FORMATS)}", "output.format")
    path = out["path"]
    if path is not None and not isinstance(path, str):
        raise ConfigError("must be a string", "output.path")
    return ProblemConfig(
        cfg, problem, interval, grid, box, (int(rg[0]), int(rg[1])), tuple(seeds), tol, fmt, path
    )
