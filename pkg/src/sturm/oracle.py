"""Independent finite-difference verification of bound-state energies.

The effective radial equation

    u'' = [lambda(lambda+1)/r**2 + (2m/hbar**2)(Z'/r + w(r) - eps)] u

is integrated with Numerov's method on a logarithmic grid ``r = exp(x)``,
where ``u = sqrt(r) y`` turns it into ``y'' = F(x) y`` with
``F = (lambda + 1/2)**2 + r**2 (2m/hbar**2)(Z'/r + w - eps)``. The grid
resolves the ``1/r**2`` behaviour at the origin exactly. Integration runs
outward from the origin and inward from ``r_max`` for many energies at once;
the normalized Wronskian of the two solutions at the outer turning point is
the matching defect.

A first-order Dirac radial integrator is provided as a separate check of
the coupled Dirac channels.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .csbasis import RadialPotential
from .effective import EffectiveChannel, Equation
from .errors import DomainError
from .greens import PhysicalConstants

MIN_STEPS = 20_000


class OracleWarning(UserWarning):
    """The oracle had to fall back to a less reliable boundary condition."""


@dataclass(frozen=True)
class ShootingProblem:
    """Single-channel effective radial problem for the Numerov oracle.

    Parameters
    ----------
    lam : float
        Effective angular momentum.
    zeff, eps, weights : callable
        Maps ``E' -> Z'``, ``E' -> eps`` and ``E' -> (c1, c2, c3)``.
    Z : float
        Coulomb coefficient entering the ``c2 Z v / r`` term.
    potential : RadialPotential
        Supplies the short-range part ``v``.
    r_max : float
        Outer boundary; must satisfy ``r_max * mu_min >= 25``.
    steps : int
        Number of Numerov steps (at least 20000).
    r0_fraction : float
        Inner boundary as a fraction of ``r_max``.
    """

    lam: float
    zeff: Callable[[float], float]
    eps: Callable[[float], float]
    weights: Callable[[float], tuple]
    Z: float
    potential: RadialPotential
    constants: PhysicalConstants
    r_max: float
    steps: int = MIN_STEPS
    r0_fraction: float = 1e-6

    def __post_init__(self):
        if self.steps < MIN_STEPS:
            raise DomainError(f"ShootingProblem: steps={self.steps} below {MIN_STEPS}")
        if self.potential.terms and self.r_max * self.potential.mu_min < 25:
            raise DomainError("ShootingProblem: r_max * mu_min must be at least 25")
        if not self.lam > -1:
            raise DomainError("ShootingProblem: lambda must exceed -1")

    @classmethod
    def from_channel(
        cls,
        channel: EffectiveChannel,
        potential: RadialPotential,
        r_max: float | None = None,
        steps: int = MIN_STEPS,
        block: int = 0,
        e_top: float | None = None,
    ) -> ShootingProblem:
        """Problem for one channel of ``channel``; Dirac channels drop ``w'``.

        ``r_max`` defaults to the larger of ``25 / mu_min`` and 25 decay
        lengths of the shallowest energy ``e_top`` searched.
        """
        if r_max is None:
            r_max = 25.0 / potential.mu_min if potential.terms else 10.0
            if e_top is not None:
                eps = channel.eps(e_top).real
                if eps >= 0:
                    raise DomainError("ShootingProblem: e_top must be below threshold")
                kappa = math.sqrt(-2.0 * channel.constants.m * eps) / channel.constants.hbar
                r_max = max(r_max, 25.0 / kappa)
        return cls(
            lam=channel.lambdas[block],
            zeff=lambda E: channel.zeff(E).real,
            eps=lambda E: channel.eps(E).real,
            weights=lambda E: tuple(float(np.real(w)) for w in channel.weights(E)),
            Z=channel.Z,
            potential=potential,
            constants=channel.constants,
            r_max=float(r_max),
            steps=steps,
        )

    def refined(self, factor: int = 2) -> ShootingProblem:
        return ShootingProblem(
            self.lam, self.zeff, self.eps, self.weights, self.Z, self.potential,
            self.constants, self.r_max, self.steps * factor, self.r0_fraction,
        )


class _Grid:
    """Log grid and the energy-independent pieces of ``F``."""

    def __init__(self, problem: ShootingProblem):
        n = problem.steps
        r0 = problem.r_max * problem.r0_fraction
        self.x = np.linspace(math.log(r0), math.log(problem.r_max), n + 1)
        self.h = self.x[1] - self.x[0]
        r = np.exp(self.x)
        self.r = r
        k = 2.0 * problem.constants.m / problem.constants.hbar**2
        v = problem.potential.short_range(r)
        self.base = (problem.lam + 0.5) ** 2
        # F = base + zeff*A + c1*B + c2Z*C + c3*D - eps*R
        self.A = k * r
        self.B = k * r * r * v
        self.C = k * r * v
        self.D = k * r * r * v * v
        self.R = k * r * r

    def F(self, problem: ShootingProblem, energies: np.ndarray) -> np.ndarray:
        cols = []
        for E in energies:
            c1, c2, c3 = problem.weights(E)
            cols.append(
                self.base + problem.zeff(E) * self.A + c1 * self.B + c2 * problem.Z * self.C
                + c3 * self.D - problem.eps(E) * self.R
            )
        return np.stack(cols, axis=1)


_GRID_CACHE: dict = {}


def _grid(problem: ShootingProblem) -> _Grid:
    key = (id(problem.potential), problem.potential, problem.lam, problem.r_max, problem.steps,
           problem.r0_fraction, problem.constants)
    g = _GRID_CACHE.get(key)
    if g is None:
        if len(_GRID_CACHE) > 8:
            _GRID_CACHE.clear()
        g = _GRID_CACHE[key] = _Grid(problem)
    return g


def _integrate(problem: ShootingProblem, energies: np.ndarray, count_nodes: bool = False):
    """Outward and inward Numerov sweeps; returns values at the matching pair and node counts."""
    g = _grid(problem)
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    F = g.F(problem, energies)
    n = F.shape[0] - 1
    h2 = g.h * g.h / 12.0
    T = 1.0 - h2 * F
    m = 2.0 * problem.constants.m / problem.constants.hbar**2
    kappa = np.empty(energies.size)
    eta = np.empty(energies.size)
    for i, E in enumerate(energies):
        eps = problem.eps(E)
        if eps >= 0:
            raise DomainError(f"match_defect: eps({E}) >= 0 is not below threshold")
        kappa[i] = math.sqrt(-m * eps)
        eta[i] = 0.5 * m * problem.zeff(E) / kappa[i]
    # matching index: outermost classically allowed point, else the minimum of F
    allowed = F < 0
    last_allowed = n - np.argmax(allowed[::-1], axis=0)
    match = np.where(allowed.any(axis=0), last_allowed, np.argmin(F, axis=0))
    match = np.clip(match, 2, n - 3)

    # regular start y ~ r^nu (1 + a r) from the two-term expansion of F near the origin
    r0, r1 = g.r[0], g.r[1]
    F1 = (F[1] - F[0]) / (r1 - r0)
    F0 = F[0] - F1 * r0
    sub = F0 <= 0
    if np.any(sub):
        warnings.warn(
            "effective 1/r^2 strength is supercritical; using a Dirichlet start at the inner boundary",
            OracleWarning,
            stacklevel=3,
        )
    nu = np.sqrt(np.where(sub, 1.0, F0))
    a = F1 / (2.0 * nu + 1.0)
    y_prev = np.where(sub, 0.0, np.exp(nu * (g.x[0] - g.x[1])) * (1.0 + a * r0))
    y_cur = np.where(sub, 1e-30, 1.0 + a * r1)
    # y_{i+1} = P_i y_i - Q_i y_{i-1} outward, z_{i-1} = P'_i z_i - Q'_i z_{i+1} inward
    U = 12.0 - 10.0 * T
    P, Q = U[1:-1] / T[2:], T[:-2] / T[2:]
    Pi, Qi = U[1:-1] / T[:-2], T[2:] / T[:-2]
    hits: dict[int, np.ndarray] = {}
    for i in np.unique(match):
        hits[int(i)] = np.nonzero(match == i)[0]
    out_pair = np.zeros((2, energies.size))
    nodes = np.zeros(energies.size, dtype=int)
    for i in range(1, n):
        y_next = P[i - 1] * y_cur - Q[i - 1] * y_prev
        sel = hits.get(i)
        if sel is not None:
            out_pair[0, sel] = y_cur[sel]
            out_pair[1, sel] = y_next[sel]
        if count_nodes:
            nodes += (np.signbit(y_next) != np.signbit(y_cur)) & (i < match)
        if i % 8 == 0:
            big = np.abs(y_next) > 1e150
            if big.any():
                s = np.where(big, 1e-150, 1.0)
                y_next, y_cur = y_next * s, y_cur * s
        y_prev, y_cur = y_cur, y_next

    # decaying start u ~ r^-eta exp(-kappa r), y = u / sqrt(r)
    def asym(r):
        return np.exp(-kappa * (r - g.r[n]) - (eta + 0.5) * np.log(r / g.r[n]))

    z_next, z_cur = asym(g.r[n]), asym(g.r[n - 1])
    in_pair = np.zeros((2, energies.size))
    for i in range(n - 1, 1, -1):
        z_prev = Pi[i - 1] * z_cur - Qi[i - 1] * z_next
        sel = hits.get(i)
        if sel is not None:
            in_pair[0, sel] = z_cur[sel]
            in_pair[1, sel] = z_next[sel]
        if i % 8 == 0:
            big = np.abs(z_prev) > 1e150
            if big.any():
                s = np.where(big, 1e-150, 1.0)
                z_prev, z_cur = z_prev * s, z_cur * s
        z_next, z_cur = z_cur, z_prev
    return out_pair, in_pair, nodes


def match_defect(problem: ShootingProblem, E_prime) -> np.ndarray | float:
    """Normalized Wronskian of the outward and inward solutions.

    Continuous in ``E'`` and zero exactly at the bound-state energies of the
    discretized problem. Accepts a scalar or an array of energies.
    """
    scalar = np.ndim(E_prime) == 0
    out, inn, _ = _integrate(problem, E_prime)
    w = out[1] * inn[0] - inn[1] * out[0]
    d = w / (np.hypot(out[0], out[1]) * np.hypot(inn[0], inn[1]))
    return float(d[0]) if scalar else d


def node_count(problem: ShootingProblem, E_prime) -> np.ndarray | int:
    """Sign changes of the outward solution inside the matching radius."""
    scalar = np.ndim(E_prime) == 0
    _, _, nodes = _integrate(problem, E_prime, count_nodes=True)
    return int(nodes[0]) if scalar else nodes


def _refine_brackets(problem, brackets, tol, sections=30, max_rounds=60):
    brackets = [list(b) for b in brackets]
    for _ in range(max_rounds):
        active = [b for b in brackets if b[1] - b[0] > tol * max(1.0, abs(b[0]))]
        if not active:
            break
        pts = []
        for a, b in active:
            pts.extend(np.linspace(a, b, sections + 2))
        vals = match_defect(problem, np.array(pts)).reshape(len(active), sections + 2)
        xs = np.array(pts).reshape(len(active), sections + 2)
        for br, x, v in zip(active, xs, vals):
            s = np.sign(v)
            k = np.nonzero(s[:-1] != s[1:])[0]
            if k.size == 0:
                br[0] = br[1] = 0.5 * (br[0] + br[1])
                continue
            br[0], br[1] = x[k[0]], x[k[0] + 1]
    return [0.5 * (a + b) for a, b in brackets]


def _bracket_roots(problem, lo, hi, grid):
    E = np.linspace(lo, hi, grid)
    d = match_defect(problem, E)
    s = np.sign(d)
    idx = np.nonzero(s[:-1] != s[1:])[0]
    return [(E[i], E[i + 1]) for i in idx]


def oracle_bound_states(
    problem: ShootingProblem,
    interval: tuple[float, float],
    grid: int = 400,
    tol: float = 1e-12,
    richardson: bool = True,
) -> list[float]:
    """Bound-state energies from sign changes of :func:`match_defect`.

    Brackets from the grid are refined by vectorized multisection. With
    ``richardson`` the energies are recomputed with twice the number of
    steps and extrapolated assuming fourth-order convergence.
    """
    lo, hi = interval
    brackets = _bracket_roots(problem, lo, hi, grid)
    if not brackets:
        return []
    coarse = np.array(_refine_brackets(problem, brackets, tol))
    if not richardson:
        return list(coarse)
    fine_problem = problem.refined(2)
    width = 1e-6 * np.maximum(1.0, np.abs(coarse))
    ends = np.concatenate([coarse - width, coarse + width])
    d = match_defect(fine_problem, ends).reshape(2, -1)
    fine_brackets = [
        (e - w, e + w) if np.sign(d[0, i]) != np.sign(d[1, i]) else brackets[i]
        for i, (e, w) in enumerate(zip(coarse, width))
    ]
    fine = np.array(_refine_brackets(fine_problem, fine_brackets, tol))
    return list(fine + (fine - coarse) / 15.0)


def oracle_wavefunction(problem: ShootingProblem, E_prime: float) -> tuple[np.ndarray, np.ndarray]:
    """Outward Numerov solution ``u(r)`` on the grid at energy ``E'``, normalized to unit norm.

    Only meaningful at a bound-state energy; beyond the turning point the
    outward solution is replaced by the inward one, scaled to match.
    """
    g = _grid(problem)
    F = g.F(problem, np.array([E_prime]))[:, 0]
    T = 1.0 - g.h**2 / 12.0 * F
    n = F.size - 1
    y = np.zeros(n + 1)
    F1 = (F[1] - F[0]) / (g.r[1] - g.r[0])
    F0 = F[0] - F1 * g.r[0]
    nu = math.sqrt(F0) if F0 > 0 else 0.0
    a = F1 / (2 * nu + 1)
    y[0] = math.exp(nu * (g.x[0] - g.x[1])) * (1 + a * g.r[0]) if F0 > 0 else 0.0
    y[1] = 1 + a * g.r[1]
    allowed = np.nonzero(F < 0)[0]
    m = int(np.clip(allowed[-1] if allowed.size else np.argmin(F), 2, n - 3))
    for i in range(1, m + 1):
        y[i + 1] = ((12 - 10 * T[i]) * y[i] - T[i - 1] * y[i - 1]) / T[i + 1]
    z = np.zeros(n + 1)
    z[n] = 0.0
    z[n - 1] = 1e-200
    for i in range(n - 1, m, -1):
        z[i - 1] = ((12 - 10 * T[i]) * z[i] - T[i + 1] * z[i + 1]) / T[i - 1]
        if abs(z[i - 1]) > 1e100:
            z[i - 1 :] *= 1e-100
    y[m + 1 :] = z[m + 1 :] * (y[m] / z[m])
    u = y * np.sqrt(g.r)
    # dr = r dx
    norm = math.sqrt(np.trapezoid(u * u * g.r, g.x))
    return g.r, u / norm


@dataclass(frozen=True)
class DiracRadialProblem:
    """First-order Dirac radial equations for ``V = Z/r + v(r)``.

    ``G' = -kappa G / r + (E' + 2 m c**2 - V) F / (hbar c)`` and
    ``F' = kappa F / r - (E' - V) G / (hbar c)``.
    """

    kappa: int
    potential: RadialPotential
    constants: PhysicalConstants
    r_match: float = 1.0
    r0: float = 1e-7
    rtol: float = 1e-12

    def _rhs(self, r, y, E):
        G, F = y
        hc = self.constants.hbar * self.constants.c
        V = self.potential.value(r)
        return [
            -self.kappa * G / r + (E + 2.0 * self.constants.mc2 - V) / hc * F,
            self.kappa * F / r - (E - V) / hc * G,
        ]

    def defect(self, E_prime: float) -> float:
        hc = self.constants.hbar * self.constants.c
        A = self.potential.coulomb_Z + sum(t.amp for t in self.potential.terms if t.power == -1)
        k = self.kappa
        if A != 0:
            disc = k * k - (A / hc) ** 2
            if disc <= 0:
                raise DomainError("DiracRadialProblem: supercritical Coulomb singularity")
            gam = math.sqrt(disc)
            y0 = [self.r0**gam, -(gam + k) * hc / A * self.r0**gam]
        else:
            y0 = [self.r0 ** abs(k), 0.0] if k < 0 else [0.0, self.r0**k]
        so = solve_ivp(self._rhs, (self.r0, self.r_match), y0, args=(E_prime,), method="DOP853",
                       rtol=self.rtol, atol=1e-300)
        Go, Fo = so.y[:, -1]
        mc2 = self.constants.mc2
        Et = E_prime + mc2
        q = math.sqrt(mc2 * mc2 - Et * Et) / hc
        R = max(40.0 / q, 3.0 * self.r_match)
        yR = [1e-30, -q * hc / (Et + mc2) * 1e-30]
        si = solve_ivp(self._rhs, (R, self.r_match), yR, args=(E_prime,), method="DOP853",
                       rtol=self.rtol, atol=1e-300)
        Gi, Fi = si.y[:, -1]
        return float((Fo * Gi - Fi * Go) / (math.hypot(Go, Fo) * math.hypot(Gi, Fi)))


def dirac_radial_bound_states(
    j: float,
    potential: RadialPotential,
    constants: PhysicalConstants,
    interval: tuple[float, float],
    grid: int = 400,
    xtol: float = 1e-11,
) -> list[tuple[int, float]]:
    """Bound states of both ``kappa = -(j+1/2)`` and ``kappa = +(j+1/2)``, as ``(kappa, E')`` pairs."""
    out = []
    E = np.linspace(*interval, grid)
    for kappa in (-int(j + 0.5), int(j + 0.5)):
        prob = DiracRadialProblem(kappa, potential, constants)
        d = np.array([prob.defect(e) for e in E])
        for i in np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]:
            root = brentq(prob.defect, E[i], E[i + 1], xtol=xtol)
            if abs(prob.defect(root)) < 1e-6:
                out.append((kappa, root))
    return sorted(out, key=lambda t: t[1])


def shooting_problems(
    channel: EffectiveChannel, potential: RadialPotential, e_top: float, steps: int = MIN_STEPS
) -> Sequence[ShootingProblem]:
    """One shooting problem per effective channel (two for Dirac, without ``w'``)."""
    blocks = range(2 if channel.kind.equation is Equation.DIRAC else 1)
    return [ShootingProblem.from_channel(channel, potential, steps=steps, block=b, e_top=e_top) for b in blocks]
