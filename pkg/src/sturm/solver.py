"""Determinant condition, bound-state and resonance searches, state vectors.

Eigenenergies are the zeros of ``det((g^C)^-1 - w~)`` where ``(g^C)^-1`` is
the analytic inverse Coulomb Green's matrix and ``w~`` the separable
representation of the short-range potential, both at the effective energy,
charge and angular momentum of the equation being solved.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import brentq

from .csbasis import BasisParams, RadialPotential, potential_matrix, separable_truncate, unit_operator_matrix
from .effective import DiracCoupling, Equation, EquationKind, effective_channel
from .errors import ConvergenceError, DomainError, MultiplicityError, SturmError
from .greens import GreensWorkspace, PhysicalConstants, Sheet, greens_inverse, greens_matrix, wavenumber

log = logging.getLogger(__name__)

SINGULAR_TOL = 1e-8
WIDTH_RESOLUTION = 1e-12


class GridResolutionWarning(UserWarning):
    """A scan grid looks too coarse to separate neighbouring roots."""


class ResonanceSearchWarning(UserWarning):
    """A resonance seed failed or left the search region."""


@dataclass(frozen=True)
class Problem:
    """Everything that defines one spectral problem."""

    kind: EquationKind
    potential: RadialPotential
    basis: BasisParams
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    coupling: DiracCoupling = DiracCoupling.ROTATED

    def with_basis(self, basis: BasisParams) -> Problem:
        return Problem(self.kind, self.potential, basis, self.constants, self.coupling)


@dataclass(frozen=True)
class LogDet:
    """Determinant stored as ``exp(log_abs + i phase)``."""

    log_abs: float
    phase: float

    @property
    def value(self) -> complex:
        with np.errstate(over="ignore"):
            return complex(np.exp(self.log_abs) * np.exp(1j * self.phase))

    @property
    def real_sign(self) -> float:
        return 1.0 if math.cos(self.phase) >= 0 else -1.0

    @property
    def imag_fraction(self) -> float:
        """``|Im D| / |D|``."""
        return abs(math.sin(self.phase))


@dataclass(frozen=True)
class RootResult:
    """A located zero of the determinant.

    ``sigma_min`` is the smallest singular value of the assembled matrix
    divided by its largest; for bound states the divisor is the largest
    singular value at the ends of the bracketing grid cell, which stays
    meaningful for a 1x1 matrix. ``width_below_resolution`` marks resonances
    whose imaginary part is smaller than the attainable accuracy; their
    sign is then not meaningful.
    """

    E_prime: complex
    kind: str
    log_abs_det: float
    sigma_min: float
    N: int
    Nprime: int
    b: float
    iterations: int
    channel: int | None = None
    width_below_resolution: bool = False

    def __post_init__(self):
        if self.kind not in ("bound", "resonance"):
            raise DomainError(f"RootResult: unknown kind {self.kind!r}")
        E = complex(self.E_prime)
        if self.kind == "bound" and abs(E.imag) > 1e-12 * max(1.0, abs(E.real)):
            raise DomainError("RootResult: bound state with non-zero imaginary part")
        if self.kind == "resonance" and not self.width_below_resolution and not E.imag < 0:
            raise DomainError("RootResult: resonance must have negative imaginary part")

    @property
    def energy(self) -> complex:
        return complex(self.E_prime)


@dataclass(frozen=True)
class StateVector:
    """Expansion coefficients ``c = w~ x`` and the null vector ``x`` of the root matrix."""

    coefficients: np.ndarray
    null_vector: np.ndarray
    residual: float
    convention: str = "largest coefficient real and positive"


class DeterminantEvaluator:
    """Assembles ``(g^C)^-1 - w~`` for one problem at arbitrary ``E'``.

    Potential matrices are computed once at construction; every later
    evaluation only rebuilds the Green's matrix and the energy-dependent
    combination of the cached matrices.
    """

    def __init__(self, problem: Problem, sheet: Sheet | str = Sheet.PHYSICAL, _cache=None):
        self.problem = problem
        self.sheet = Sheet(sheet)
        self.channel = effective_channel(problem.kind, problem.potential.coulomb_Z, problem.constants, problem.coupling)
        self._cache = _cache if _cache is not None else self._build_cache()

    def _build_cache(self) -> dict:
        pot, basis = self.problem.potential, self.problem.basis
        cache: dict = {"blocks": []}
        if not pot.terms:
            return cache
        relativistic = self.channel.relativistic
        dirac = self.kind.equation is Equation.DIRAC
        for lam in self.channel.lambdas:
            block = {"v": potential_matrix(pot.terms, lam, lam, basis).entries}
            if relativistic:
                block["vr"] = potential_matrix(pot.over_r_terms(), lam, lam, basis).entries
                block["v2"] = potential_matrix(pot.square_terms(), lam, lam, basis).entries
            if dirac:
                block["dv"] = potential_matrix(pot.derivative_terms(), lam, lam, basis).entries
            cache["blocks"].append(block)
        if dirac:
            lp, lm = self.channel.lambdas
            cache["mixed"] = potential_matrix(pot.derivative_terms(), lp, lm, basis).entries
        return cache

    def on_sheet(self, sheet: Sheet | str) -> DeterminantEvaluator:
        """Copy evaluating on another sheet; shares the cached matrices."""
        sheet = Sheet(sheet)
        if sheet is self.sheet:
            return self
        return DeterminantEvaluator(self.problem, sheet, _cache=self._cache)

    @property
    def kind(self) -> EquationKind:
        return self.problem.kind

    @property
    def basis(self) -> BasisParams:
        return self.problem.basis

    @property
    def n_blocks(self) -> int:
        return len(self.channel.lambdas)

    @property
    def size(self) -> int:
        return self.n_blocks * self.basis.N

    @property
    def decoupled(self) -> bool:
        """True when the channels of a multi-channel problem do not interact."""
        return self.n_blocks > 1 and not self.problem.potential.terms

    def potential_block(self, E_prime: complex) -> np.ndarray | None:
        """Full-size (``Nprime`` per channel) energy-dependent potential matrix ``w``."""
        blocks = self._cache["blocks"]
        if not blocks:
            return None
        ch = self.channel
        c1, c2, c3 = ch.weights(E_prime)
        diag = []
        for i, blk in enumerate(blocks):
            W = c1 * blk["v"]
            if ch.relativistic:
                W = W + (c2 * ch.Z) * blk["vr"] + c3 * blk["v2"]
            if ch.spin_matrix is not None:
                W = W + (ch.offdiag * ch.spin_matrix[i, i]) * blk["dv"]
            diag.append(W)
        if len(diag) == 1:
            return diag[0]
        X, kp = ch.spin_matrix, ch.offdiag
        mixed = self._cache["mixed"]
        return np.block([[diag[0], kp * X[0, 1] * mixed], [kp * X[1, 0] * mixed.T, diag[1]]])

    def separable_potential(self, E_prime: complex) -> np.ndarray | None:
        """``w~``: the double-inverted potential kept on ``N`` states per channel."""
        W = self.potential_block(E_prime)
        if W is None:
            return None
        N, Np = self.basis.N, self.basis.Nprime
        keep = np.concatenate([np.arange(N) + i * Np for i in range(self.n_blocks)])
        return separable_truncate(W, N, keep=keep)

    def greens_workspaces(self, E_prime: complex):
        ch = self.channel
        point = wavenumber(ch.eps(E_prime), self.problem.constants, self.sheet)
        zeff = ch.zeff(E_prime)
        spaces = [GreensWorkspace(lam, zeff, self.problem.constants, self.basis.b, self.basis.N) for lam in ch.lambdas]
        return spaces, point


def assemble_matrix(evaluator: DeterminantEvaluator, E_prime: complex, block: int | None = None) -> np.ndarray:
    """``(g^C)^-1 - w~`` at ``E'``; ``block`` restricts a decoupled problem to one channel."""
    spaces, point = evaluator.greens_workspaces(E_prime)
    if block is not None:
        if not evaluator.decoupled and evaluator.n_blocks > 1:
            raise DomainError("assemble_matrix: channels are coupled; cannot select a block")
        spaces = [spaces[block]]
    G = [greens_inverse(ws, point) for ws in spaces]
    M = G[0] if len(G) == 1 else block_diag(*G)
    Wt = evaluator.separable_potential(E_prime)
    if Wt is not None:
        M = M - Wt
    return M


def determinant(evaluator: DeterminantEvaluator, E_prime: complex, block: int | None = None) -> LogDet:
    """Determinant of the root matrix by LU factorization, as ``(log|D|, arg D)``."""
    sign, logabs = np.linalg.slogdet(assemble_matrix(evaluator, E_prime, block))
    return LogDet(float(logabs), float(np.angle(sign)))


def singular_values(M: np.ndarray) -> np.ndarray:
    return np.linalg.svd(M, compute_uv=False)


def _relative_sigma_min(M: np.ndarray) -> float:
    s = singular_values(M)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def _parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _bound_scan(evaluator, energies, block, threads):
    def one(E):
        try:
            return determinant(evaluator, E, block)
        except SturmError as exc:
            log.debug("determinant failed at E'=%r: %s", E, exc)
            return None

    return _parallel_map(one, list(energies), threads)


def find_bound_states(
    evaluator: DeterminantEvaluator,
    interval: tuple[float, float],
    grid: int = 500,
    xtol: float = 1e-13,
    threads: int = 1,
) -> list[RootResult]:
    """Real zeros of the determinant in ``interval``.

    The determinant is sampled on ``grid`` points, every sign change is
    refined with Brent's method, and a root is accepted only if the root
    matrix is numerically singular on the scale of the bracketing cell and
    ``|D|`` at the root lies below both cell ends (sign changes across
    poles of the tail correction are rejected this way). Decoupled multi-channel problems are
    searched channel by channel so that degenerate pairs are not lost.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise DomainError("find_bound_states: need lo < hi")
    evaluator = evaluator.on_sheet(Sheet.PHYSICAL)
    ch = evaluator.channel
    if not (ch.eps(hi).real < 0 and ch.eps(lo).real < 0):
        raise DomainError("find_bound_states: interval must lie below threshold")
    blocks = list(range(evaluator.n_blocks)) if evaluator.decoupled else [None]
    energies = np.linspace(lo, hi, grid)
    found: list[RootResult] = []
    for block in blocks:
        found.extend(_bound_search_block(evaluator, energies, block, xtol, threads))
    found.sort(key=lambda r: r.E_prime.real)
    return found


def _sign_brackets(evaluator, energies, vals, block, threads, depth):
    """Sign-change cells of the sampled determinant.

    A zero lying next to a pole of the tail correction leaves no sign change
    on a coarse grid, only a local extremum of ``|D|``. Such cells are
    resampled ``depth`` times more finely.
    """
    brackets = []
    logs = [None if v is None else v.log_abs for v in vals]
    suspects = []
    for i in range(len(energies) - 1):
        a, b = vals[i], vals[i + 1]
        if a is not None and b is not None and a.real_sign != b.real_sign:
            brackets.append((energies[i], energies[i + 1], a, b))
    if depth <= 0:
        return brackets
    for i in range(1, len(energies) - 1):
        l0, l1, l2 = logs[i - 1], logs[i], logs[i + 1]
        if l0 is None or l1 is None or l2 is None:
            continue
        extremum = (l1 < l0 and l1 < l2) or (l1 > l0 and l1 > l2)
        if extremum and vals[i - 1].real_sign == vals[i].real_sign == vals[i + 1].real_sign:
            suspects.append(i)
    for i in suspects:
        sub = np.linspace(energies[i - 1], energies[i + 1], _REFINE_POINTS)
        sub_vals = _bound_scan(evaluator, sub, block, threads)
        brackets.extend(_sign_brackets(evaluator, sub, sub_vals, block, threads, depth - 1))
    return brackets


_REFINE_POINTS = 33
_REFINE_DEPTH = 4


def _bound_search_block(evaluator, energies, block, xtol, threads):
    basis = evaluator.basis
    vals = _bound_scan(evaluator, energies, block, threads)
    size = evaluator.size if block is None else basis.N
    results = []
    changes = set()
    for i in range(len(energies) - 1):
        a, b = vals[i], vals[i + 1]
        if a is not None and b is not None and a.real_sign != b.real_sign:
            changes.update((i, i + 1))

    def f(E):
        d = determinant(evaluator, E, block)
        return d.real_sign * math.exp(d.log_abs / size)

    brackets = _sign_brackets(evaluator, energies, vals, block, threads, _REFINE_DEPTH)
    for lo, hi, a, b in sorted(brackets, key=lambda t: t[0]):
        try:
            E, info = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, full_output=True)
        except (ValueError, RuntimeError, SturmError) as exc:
            log.debug("bracket [%g, %g] failed: %s", lo, hi, exc)
            continue
        d = determinant(evaluator, E, block)
        scale = max(singular_values(assemble_matrix(evaluator, x, block))[0] for x in (lo, hi))
        smin = float(singular_values(assemble_matrix(evaluator, E, block))[-1] / scale)
        if smin > SINGULAR_TOL or not d.log_abs < min(a.log_abs, b.log_abs):
            log.debug("sign change at E'=%.12g is a pole (sigma_min=%.2e)", E, smin)
            continue
        if results and abs(E - results[-1].E_prime.real) <= 10 * xtol:
            continue
        results.append(
            RootResult(complex(E), "bound", d.log_abs, smin, basis.N, basis.Nprime, basis.b, info.iterations, block)
        )
    _check_grid_resolution(evaluator, energies, vals, changes, block, [r.E_prime.real for r in results])
    return results


def _check_grid_resolution(evaluator, energies, vals, changes, block, found=()):
    logs = np.array([np.nan if v is None else v.log_abs for v in vals])
    for i in range(1, len(energies) - 1):
        if i in changes or not (logs[i] < logs[i - 1] and logs[i] < logs[i + 1]):
            continue
        if any(energies[i - 1] <= e <= energies[i + 1] for e in found):
            continue
        smin = _relative_sigma_min(assemble_matrix(evaluator, energies[i], block))
        if smin < 1e-4:
            warnings.warn(
                f"near-singular root matrix at E'={energies[i]:.6g} without a sign change; "
                "two roots may share one grid cell, refine the grid",
                GridResolutionWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class MullerResult:
    root: complex
    iterations: int
    converged: bool


def muller(
    f: Callable[[complex], complex],
    x0: complex,
    x1: complex,
    x2: complex,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> MullerResult:
    """Muller's method: successive quadratic interpolation through three points."""
    f0, f1, f2 = f(x0), f(x1), f(x2)
    for it in range(1, max_iter + 1):
        if f2 == 0:
            return MullerResult(complex(x2), it, True)
        h1, h2 = x1 - x0, x2 - x1
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            return MullerResult(complex(x2), it, False)
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(complex(b * b - 4.0 * f2 * a))
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            return MullerResult(complex(x2), it, False)
        dx = -2.0 * f2 / den
        x0, x1, x2 = x1, x2, x2 + dx
        f0, f1, f2 = f1, f2, f(x2)
        if abs(dx) <= tol:
            return MullerResult(complex(x2), it, True)
    return MullerResult(complex(x2), max_iter, False)


def resonance_seeds(
    evaluator: DeterminantEvaluator,
    region: tuple[float, float, float, float],
    grid: tuple[int, int] = (40, 20),
    percentile: float = 10.0,
    threads: int = 1,
) -> list[complex]:
    """Muller seeds from a coarse grid over ``region``.

    The scanned quantity is ``log sigma_min``, the log-determinant with all
    but the smallest singular value divided out. It dips at every root like
    ``log|D|`` does, without the steep energy trend of the remaining
    singular values that hides narrow resonances in ``log|D|`` itself.
    Local grid minima below the given percentile become seeds, deepest first.
    """
    re_lo, re_hi, im_lo, im_hi = region
    res = np.linspace(re_lo, re_hi, grid[0])
    ims = np.linspace(im_lo, im_hi, grid[1])
    pts = [complex(x, y) for x in res for y in ims]

    def one(E):
        try:
            return math.log(singular_values(assemble_matrix(evaluator, E))[-1])
        except (SturmError, ValueError, np.linalg.LinAlgError) as exc:
            log.debug("seed scan failed at E'=%r: %s", E, exc)
            return math.inf

    L = np.array(_parallel_map(one, pts, threads)).reshape(grid)
    finite = L[np.isfinite(L)]
    if finite.size == 0:
        return []
    cut = np.percentile(finite, percentile)
    seeds = []
    for i in range(grid[0]):
        for j in range(grid[1]):
            v = L[i, j]
            if not np.isfinite(v) or v > cut:
                continue
            nb = L[max(i - 1, 0) : i + 2, max(j - 1, 0) : j + 2]
            if v <= nb.min():
                seeds.append((v, complex(res[i], ims[j])))
    return [z for _, z in sorted(seeds, key=lambda t: t[0])]


def find_resonances(
    evaluator: DeterminantEvaluator,
    region: tuple[float, float, float, float],
    seeds: Sequence[complex] | None = None,
    grid: tuple[int, int] = (40, 20),
    tol: float = 1e-10,
    merge_tol: float = 1e-8,
    max_iter: int = 100,
    threads: int = 1,
) -> list[RootResult]:
    """Complex zeros of the determinant on the unphysical sheet.

    Each seed starts a Muller iteration on the determinant divided by the
    factors ``(E' - E_k)`` of all roots already found, so a found root
    cannot attract a later seed. A converged iterate is kept only if the
    matrix there is numerically singular. Roots outside ``region`` (with a small
    allowance above the real axis for unresolved widths) are discarded.
    """
    re_lo, re_hi, im_lo, im_hi = map(float, region)
    if not (re_lo < re_hi and im_lo < im_hi):
        raise DomainError("find_resonances: empty region")
    if im_hi > 0:
        raise DomainError("find_resonances: region must lie in the lower half plane")
    evaluator = evaluator.on_sheet(Sheet.UNPHYSICAL)
    if seeds is None:
        seeds = resonance_seeds(evaluator, region, grid, threads=threads)
    basis = evaluator.basis
    found: list[RootResult] = []
    span = max(re_hi - re_lo, im_hi - im_lo)
    for seed in seeds:
        seed = complex(seed)
        ref = determinant(evaluator, seed).log_abs
        roots = [r.E_prime for r in found]

        def f(E, ref=ref, roots=roots):
            d = determinant(evaluator, E)
            val = np.exp(d.log_abs - ref + 1j * d.phase)
            for r in roots:
                val /= E - r
            return val

        h = 1e-3 * max(1.0, abs(seed))
        try:
            out = muller(f, seed - h, seed + h, seed, tol=tol, max_iter=max_iter)
            smin = _relative_sigma_min(assemble_matrix(evaluator, out.root))
            if out.converged and smin > SINGULAR_TOL:
                # a stalled step: restart once from the last iterate
                x = out.root
                out = muller(f, x - h, x + h, x, tol=tol, max_iter=max_iter)
                smin = _relative_sigma_min(assemble_matrix(evaluator, out.root))
        except (SturmError, FloatingPointError, ZeroDivisionError) as exc:
            warnings.warn(f"seed {seed:.6g}: evaluation failed ({exc})", ResonanceSearchWarning, stacklevel=2)
            continue
        E = out.root
        if E.imag > WIDTH_RESOLUTION:
            # mirror root: the determinant obeys D(E*) = D(E)* on this sheet
            E = E.conjugate()
        if not out.converged:
            warnings.warn(f"seed {seed:.6g}: Muller did not converge", ResonanceSearchWarning, stacklevel=2)
            continue
        if smin > SINGULAR_TOL:
            log.info("seed %s stalled at %s (sigma_min=%.2e)", seed, E, smin)
            continue
        inside = re_lo <= E.real <= re_hi and im_lo - 1e-3 * span <= E.imag <= WIDTH_RESOLUTION
        if not inside:
            log.info("seed %s converged to %s outside the region", seed, E)
            continue
        if any(abs(E - r.E_prime) <= merge_tol for r in found):
            continue
        d = determinant(evaluator, E)
        found.append(
            RootResult(
                E, "resonance", d.log_abs, smin, basis.N, basis.Nprime, basis.b,
                out.iterations, None, abs(E.imag) < WIDTH_RESOLUTION,
            )
        )
    found.sort(key=lambda r: r.E_prime.real)
    return found


def state_vector(evaluator: DeterminantEvaluator, root: RootResult) -> StateVector:
    """Null vector of the root matrix and the coefficients ``c = w~ x``."""
    ev = evaluator.on_sheet(Sheet.PHYSICAL if root.kind == "bound" else Sheet.UNPHYSICAL)
    M = assemble_matrix(ev, root.E_prime, root.channel)
    _, s, vh = np.linalg.svd(M)
    if s.size > 1 and s[-2] <= SINGULAR_TOL * s[0]:
        dim = int(np.sum(s <= SINGULAR_TOL * s[0]))
        raise MultiplicityError(f"null space of dimension {dim} at E'={root.E_prime}", dim)
    x = vh[-1].conj()
    Wt = ev.separable_potential(root.E_prime)
    if Wt is None:
        c = x.copy()
    elif root.channel is None:
        c = Wt @ x
    else:
        N = ev.basis.N
        c = Wt[root.channel * N : (root.channel + 1) * N, root.channel * N : (root.channel + 1) * N] @ x
    k = int(np.argmax(abs(c)))
    phase = c[k] / abs(c[k])
    c, x = c / phase, x / phase
    residual = float(np.linalg.norm(M @ x) / np.linalg.norm(x))
    return StateVector(c, x, residual)


def expectation_value(
    evaluator: DeterminantEvaluator, root: RootResult, state: StateVector, obs_matrix: np.ndarray
) -> complex:
    """``<psi|O|psi> / <psi|psi>`` from the coefficients and the Green's matrix.

    ``obs_matrix`` holds ``<n|O|n'>`` between non-dual basis states on
    ``Nprime`` states per channel (block diagonal for several channels).
    The bilinear form (no complex conjugation) is used so resonances get
    their natural complex-symmetric normalization.
    """
    ev = evaluator.on_sheet(Sheet.PHYSICAL if root.kind == "bound" else Sheet.UNPHYSICAL)
    spaces, point = ev.greens_workspaces(root.E_prime)
    lams = ev.channel.lambdas
    if root.channel is not None:
        spaces, lams = [spaces[root.channel]], [lams[root.channel]]
    N, Np = ev.basis.N, ev.basis.Nprime
    nb = len(spaces)
    obs = np.asarray(obs_matrix)
    if obs.shape != (nb * Np, nb * Np):
        raise DomainError(f"expectation_value: observable must be {nb * Np}x{nb * Np}")
    keep = np.concatenate([np.arange(N) + i * Np for i in range(nb)])
    O = obs[np.ix_(keep, keep)]
    unit_params = BasisParams(ev.basis.b, N)
    U = block_diag(*[unit_operator_matrix(lam, unit_params) for lam in lams])
    g = block_diag(*[greens_matrix(ws, point) for ws in spaces])
    gc = g @ state.coefficients
    norm = gc @ U @ gc
    if norm == 0:
        raise DomainError("expectation_value: state has zero norm")
    return complex((gc @ O @ gc) / norm)


@dataclass
class ConvergenceTable:
    """Roots per ``(N, b)`` cell with drift against the largest ``N``."""

    N_list: list[int]
    b_list: list[float]
    cells: dict[tuple[int, float], list[RootResult]]
    errors: dict[tuple[int, float], str]

    def energies(self, N: int, b: float) -> list[complex]:
        return [r.E_prime for r in self.cells.get((N, b), [])]

    def drift(self, b: float) -> dict[int, list[float]]:
        """``|E_k(N) - E_k(N_max)|`` per root index, matching roots by proximity."""
        ref = self.energies(max(self.N_list), b)
        out = {}
        for N in self.N_list:
            cur = self.energies(N, b)
            out[N] = [min((abs(e - r) for e in cur), default=math.inf) for r in ref]
        return out

    def spread(self, N: int) -> list[float]:
        """Largest deviation across ``b`` per root of the first ``b``."""
        base = self.energies(N, self.b_list[0])
        out = []
        for r in base:
            devs = [min((abs(e - r) for e in self.energies(N, b)), default=math.inf) for b in self.b_list]
            out.append(max(devs))
        return out


def solve(
    problem: Problem,
    bound_interval: tuple[float, float] | None = None,
    bound_grid: int = 500,
    resonance_region: tuple[float, float, float, float] | None = None,
    seeds: Sequence[complex] | None = None,
    resonance_grid: tuple[int, int] = (40, 20),
    threads: int = 1,
) -> list[RootResult]:
    """Bound-state search followed by an optional resonance search."""
    ev = DeterminantEvaluator(problem)
    roots: list[RootResult] = []
    if bound_interval is not None:
        roots += find_bound_states(ev, bound_interval, bound_grid, threads=threads)
    if resonance_region is not None:
        roots += find_resonances(ev, resonance_region, seeds, resonance_grid, threads=threads)
    return roots


def convergence_study(
    problem: Problem,
    N_list: Sequence[int],
    b_list: Sequence[float],
    bound_interval: tuple[float, float],
    bound_grid: int = 500,
    threads: int = 1,
) -> ConvergenceTable:
    """Re-solve the bound-state problem on every ``(N, b)`` cell.

    ``Nprime`` keeps its offset from ``N`` in ``problem.basis``. Failures in
    one cell are recorded and do not stop the study.
    """
    if not N_list or not b_list:
        raise DomainError("convergence_study: N_list and b_list must be non-empty")
    offset = problem.basis.Nprime - problem.basis.N
    cells: dict = {}
    errors: dict = {}

    def run(cell):
        N, b = cell
        try:
            p = problem.with_basis(BasisParams(b, N, N + offset))
            return cell, find_bound_states(DeterminantEvaluator(p), bound_interval, bound_grid), None
        except (SturmError, ConvergenceError, np.linalg.LinAlgError) as exc:
            return cell, None, f"{type(exc).__name__}: {exc}"

    grid = [(int(N), float(b)) for N in N_list for b in b_list]
    for cell, roots, err in _parallel_map(run, grid, threads):
        if err is None:
            cells[cell] = roots
        else:
            errors[cell] = err
    return ConvergenceTable([int(n) for n in N_list], [float(b) for b in b_list], cells, errors)
