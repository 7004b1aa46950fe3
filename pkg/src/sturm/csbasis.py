"""Coulomb-Sturmian functions, potential matrix elements and the
double-inversion (separable) truncation of a potential matrix.

The Coulomb-Sturmian function of index ``n`` and angular momentum ``lambda`` is

    <r|n lambda> = sqrt(n!/Gamma(n+2 lambda+2)) e^(-b r) (2 b r)^(lambda+1) L_n^(2 lambda+1)(2 b r)

and the dual ("tilde") function is ``<r|n lambda>/r``. With ``x = 2 b r`` it
equals ``phi_n^(2 lambda+1)(x) * sqrt(x)`` where ``phi`` are orthonormal
Laguerre functions, which is how it is evaluated here.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DomainError
from .specfun import gauss_laguerre_rule, laguerre_functions, laguerre_sequence, log_gamma

SEPARABLE_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class BasisParams:
    """Size and scale of the Coulomb-Sturmian basis.

    Parameters
    ----------
    b : float
        Inverse-length scale of the basis functions.
    N : int
        Number of basis functions kept in the separable potential and in
        the Green's matrix.
    Nprime : int, optional
        Size of the expansion used by the double inversion. Defaults to ``N``,
        which is plain truncation.
    quad_points : int, optional
        Number of Gauss-Laguerre nodes; defaults to ``2 * Nprime + 40``.
    """

    b: float
    N: int
    Nprime: int | None = None
    quad_points: int | None = None

    def __post_init__(self):
        if self.Nprime is None:
            object.__setattr__(self, "Nprime", self.N)
        if self.quad_points is None:
            object.__setattr__(self, "quad_points", 2 * self.Nprime + 40)
        if not (np.isfinite(self.b) and self.b > 0):
            raise DomainError(f"BasisParams: b={self.b} must be positive")
        if not (1 <= self.N <= self.Nprime):
            raise DomainError(f"BasisParams: need 1 <= N={self.N} <= Nprime={self.Nprime}")
        if self.quad_points < 2 * self.Nprime + 40:
            raise DomainError(
                f"BasisParams: quad_points={self.quad_points} below 2*Nprime+40={2 * self.Nprime + 40}"
            )

    def with_size(self, N: int, Nprime: int | None = None) -> BasisParams:
        """Copy with a new ``N`` (and ``Nprime``), recomputing the default node count."""
        return BasisParams(self.b, N, Nprime)


@dataclass(frozen=True)
class Term:
    """Short-range term ``amp * r**power * exp(-decay * r)``."""

    amp: float
    power: int
    decay: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.amp * r**self.power * np.exp(-self.decay * r)


def _check_terms(terms: Sequence[Term], min_power: int) -> tuple[Term, ...]:
    out = []
    for i, t in enumerate(terms):
        if not isinstance(t, Term):
            t = Term(*t)
        if not t.decay > 0:
            raise DomainError(f"term {i}: decay {t.decay} must be positive")
        if int(t.power) != t.power or t.power < min_power:
            raise DomainError(f"term {i}: power {t.power} must be an integer >= {min_power}")
        out.append(Term(float(t.amp), int(t.power), float(t.decay)))
    return tuple(out)


def _combine(terms: Iterable[Term]) -> tuple[Term, ...]:
    """Merge terms with equal power and decay; drop exact zeros."""
    acc: dict[tuple[int, float], float] = {}
    for t in terms:
        key = (t.power, t.decay)
        acc[key] = acc.get(key, 0.0) + t.amp
    return tuple(Term(a, p, mu) for (p, mu), a in acc.items() if a != 0.0)


def terms_value(terms: Sequence[Term], r):
    """Sum of ``terms`` at ``r``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    for t in terms:
        out = out + t(r)
    return out


def terms_derivative(terms: Sequence[Term]) -> tuple[Term, ...]:
    """Analytic ``d/dr`` of a term list."""
    out = []
    for t in terms:
        if t.power != 0:
            out.append(Term(t.amp * t.power, t.power - 1, t.decay))
        out.append(Term(-t.amp * t.decay, t.power, t.decay))
    return _combine(out)


def terms_square(terms: Sequence[Term]) -> tuple[Term, ...]:
    """Analytic square of a term list."""
    return _combine(
        Term(s.amp * t.amp, s.power + t.power, s.decay + t.decay) for s in terms for t in terms
    )


def terms_over_r(terms: Sequence[Term]) -> tuple[Term, ...]:
    """Analytic product of a term list with ``1/r``."""
    return tuple(Term(t.amp, t.power - 1, t.decay) for t in terms)


@dataclass(frozen=True)
class RadialPotential:
    """Coulomb tail ``coulomb_Z / r`` plus a sum of short-range terms.

    ``coulomb_Z`` already contains the squared charge, so in units with
    ``e2 = 1`` it is the signed charge product.
    """

    coulomb_Z: float
    terms: tuple[Term, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", _check_terms(self.terms, min_power=-1))
        if not np.isfinite(self.coulomb_Z):
            raise DomainError("RadialPotential: coulomb_Z must be finite")

    @property
    def mu_min(self) -> float:
        """Slowest decay constant among the short-range terms (inf if none)."""
        return min((t.decay for t in self.terms), default=math.inf)

    def short_range(self, r):
        return terms_value(self.terms, r)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.coulomb_Z / r + self.short_range(r)

    def derivative_terms(self) -> tuple[Term, ...]:
        return terms_derivative(self.terms)

    def square_terms(self) -> tuple[Term, ...]:
        return terms_square(self.terms)

    def over_r_terms(self) -> tuple[Term, ...]:
        return terms_over_r(self.terms)

    def derivative(self, r):
        """Derivative of the short-range part."""
        return terms_value(self.derivative_terms(), r)

    def square(self, r):
        """Square of the short-range part."""
        return self.short_range(r) ** 2

    def over_r(self, r):
        """Short-range part divided by ``r``."""
        r = np.asarray(r, dtype=float)
        return self.short_range(r) / r


@dataclass(frozen=True)
class PotentialMatrix:
    """Matrix ``<n lambda_row| f |n' lambda_col>`` on the Coulomb-Sturmian basis."""

    lambda_row: float
    lambda_col: float
    entries: np.ndarray
    symmetric: bool

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def _check_lambda(lam: float) -> None:
    if not lam > -1:
        raise DomainError(f"angular momentum lambda={lam} must exceed -1")


def cs_eval(n: int, lam: float, b: float, r):
    """Coulomb-Sturmian function ``<r|n lambda>`` from its closed form.

    Assembled from :func:`log_gamma` and :func:`laguerre_sequence`; mainly
    useful as an independent check of :func:`cs_functions`.
    """
    _check_lambda(lam)
    if n < 0:
        raise DomainError("cs_eval: n must be non-negative")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("cs_eval: r must be non-negative")
    x = 2.0 * b * r
    lag = laguerre_sequence(2 * lam + 1, x, n)[n]
    lognorm = 0.5 * (log_gamma(n + 1).real - log_gamma(n + 2 * lam + 2).real)
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    out = np.where(x > 0, np.exp(lognorm - 0.5 * x + (lam + 1) * logx) * lag, 0.0)
    return out[()] if out.ndim == 0 else out


def cs_functions(lam: float, b: float, r, n_max: int) -> np.ndarray:
    """All Coulomb-Sturmian functions ``n = 0..n_max`` at the radii ``r``."""
    _check_lambda(lam)
    x = 2.0 * b * np.asarray(r, dtype=float)
    return laguerre_functions(2 * lam + 1, x, n_max) * np.sqrt(x)


def _term_block(
    amp: float, power: int, decay: float, lam_row: float, lam_col: float, params: BasisParams
) -> np.ndarray:
    """Exact Gauss-Laguerre evaluation of ``<n lam_row| amp r^power e^(-decay r) |n' lam_col>``.

    The rule exponent absorbs the endpoint power and the scale factor absorbs
    the exponential, so the remaining integrand is a polynomial of degree
    ``2 Nprime - 2`` and the result is exact to rounding.
    """
    alpha = lam_row + lam_col + 2 + power
    if not alpha > -1:
        raise DomainError(
            f"matrix element of r^{power} diverges at the origin for lambdas ({lam_row}, {lam_col})"
        )
    if decay < 0:
        raise DomainError("matrix element of a growing exponential does not converge")
    b, n = params.b, params.Nprime
    beta = 1.0 + decay / (2.0 * b)
    rule = gauss_laguerre_rule(alpha, params.quad_points)
    x = rule.nodes / beta
    fr = laguerre_functions(2 * lam_row + 1, x, n - 1)
    fc = fr if lam_col == lam_row else laguerre_functions(2 * lam_col + 1, x, n - 1)
    g = rule.scaled_weights * x ** (1 + power) * np.exp(-(beta - 1.0) * x)
    return amp / (beta * (2.0 * b) ** (power + 1)) * (fr * g) @ fc.T


def _callable_block(
    f: Callable, lam_row: float, lam_col: float, params: BasisParams
) -> np.ndarray:
    b, n = params.b, params.Nprime
    alpha = 2 * min(lam_row, lam_col) + 1
    rule = gauss_laguerre_rule(alpha, params.quad_points)
    x = rule.nodes
    fr = laguerre_functions(2 * lam_row + 1, x, n - 1)
    fc = fr if lam_col == lam_row else laguerre_functions(2 * lam_col + 1, x, n - 1)
    vals = np.asarray(f(x / (2.0 * b)))
    if not np.all(np.isfinite(vals)):
        raise DomainError("potential_matrix: integrand is not finite at the quadrature nodes")
    g = rule.scaled_weights * x * vals
    return (fr * g) @ fc.T / (2.0 * b)


def potential_matrix(
    f: RadialPotential | Sequence[Term] | Callable,
    lambda_row: float,
    lambda_col: float,
    params: BasisParams,
) -> PotentialMatrix:
    """Matrix of a radial function between Coulomb-Sturmian states.

    Parameters
    ----------
    f : RadialPotential, sequence of Term, or callable
        Term lists (and the short-range part of a ``RadialPotential``) are
        integrated term by term with rules that are exact for them. A plain
        callable ``f(r)`` is integrated with the Gauss-Laguerre rule of
        exponent ``2 min(lambda_row, lambda_col) + 1`` in ``x = 2 b r``.
    lambda_row, lambda_col : float
        Angular momenta of the bra and ket functions.
    params : BasisParams
        Basis scale and size; the matrix is ``Nprime x Nprime``.
    """
    _check_lambda(lambda_row)
    _check_lambda(lambda_col)
    n = params.Nprime
    if isinstance(f, RadialPotential):
        f = f.terms
    if callable(f) and not isinstance(f, (list, tuple)):
        entries = _callable_block(f, lambda_row, lambda_col, params)
    else:
        terms = _check_terms(f, min_power=-2)
        entries = np.zeros((n, n))
        for t in terms:
            entries = entries + _term_block(t.amp, t.power, t.decay, lambda_row, lambda_col, params)
    if np.iscomplexobj(entries) and not np.any(entries.imag):
        entries = entries.real
    symmetric = lambda_row == lambda_col and not np.iscomplexobj(entries)
    if symmetric:
        entries = 0.5 * (entries + entries.T)
    return PotentialMatrix(float(lambda_row), float(lambda_col), np.array(entries), symmetric)


def overlap_matrix(lam: float, params: BasisParams) -> np.ndarray:
    """Quadrature-built ``<n lambda|n' lambda tilde>``; the identity for a sound basis."""
    _check_lambda(lam)
    out = _term_block(1.0, -1, 0.0, lam, lam, params)
    if not np.all(np.isfinite(out)):
        raise DomainError("overlap_matrix: quadrature produced non-finite values")
    return out


def unit_operator_matrix(lam: float, params: BasisParams) -> np.ndarray:
    """``<n lambda|n' lambda>``, the matrix of the unit operator between non-dual states."""
    _check_lambda(lam)
    return _term_block(1.0, 0, 0.0, lam, lam, params)


def separable_truncate(
    V: np.ndarray, N: int, keep: Sequence[int] | None = None, limit: float = SEPARABLE_CONDITION_LIMIT
) -> np.ndarray:
    """Double inversion: invert ``V``, keep an ``N x N`` block, invert back.

    Computed as the Schur complement ``V_AA - V_AB V_BB^-1 V_BA``, where ``A``
    holds the kept indices (the leading ``N`` unless ``keep`` is given).

    Raises
    ------
    ConditioningError
        If the eliminated block ``V_BB`` is singular or its condition
        number exceeds ``limit``.
    """
    V = np.asarray(V)
    size = V.shape[0]
    if V.shape != (size, size):
        raise DomainError("separable_truncate: V must be square")
    if keep is None:
        if not 1 <= N <= size:
            raise DomainError(f"separable_truncate: need 1 <= N={N} <= {size}")
        keep = np.arange(N)
    keep = np.asarray(keep, dtype=int)
    if keep.size == size:
        return V
    drop = np.setdiff1d(np.arange(size), keep)
    Vbb = V[np.ix_(drop, drop)]
    cond = np.linalg.cond(Vbb)
    if not np.isfinite(cond) or cond > limit:
        raise ConditioningError(
            f"separable_truncate: eliminated block has condition {cond:.3g} > {limit:.0e}; "
            "use a smaller Nprime",
            condition=float(cond),
        )
    Vab = V[np.ix_(keep, drop)]
    Vba = V[np.ix_(drop, keep)]
    return V[np.ix_(keep, keep)] - Vab @ np.linalg.solve(Vbb, Vba)
