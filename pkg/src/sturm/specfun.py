"""Special functions: log-gamma, Laguerre polynomials, Gauss-Laguerre rules
and the Gauss continued fraction for a contiguous ratio of 2F1 functions.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, loggamma

from .errors import ConvergenceError, DomainError

LENTZ_TINY = 1e-300


def _is_nonpositive_integer(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0.0 and z.real == np.floor(z.real)


def log_gamma(z: complex) -> complex:
    """Principal branch of ``log Gamma(z)``.

    Raises
    ------
    DomainError
        If ``z`` is a pole of the gamma function.
    """
    if _is_nonpositive_integer(z):
        raise DomainError(f"log_gamma: pole of Gamma at z={z}")
    return complex(loggamma(complex(z)))


def laguerre_sequence(alpha: float, x, n_max: int) -> np.ndarray:
    """Generalized Laguerre polynomials ``L_0^alpha(x) ... L_{n_max}^alpha(x)``.

    Uses the upward three-term recurrence. ``x`` may be a scalar or an array;
    the result has shape ``(n_max + 1,) + np.shape(x)``.
    """
    if alpha <= -1:
        raise DomainError(f"laguerre_sequence: alpha={alpha} must exceed -1")
    if n_max < 0:
        raise DomainError("laguerre_sequence: n_max must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("laguerre_sequence: x must be non-negative")
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = alpha + 1.0 - x
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + alpha + 1 - x) * out[n] - (n + alpha) * out[n - 1]) / (n + 1)
    return out


def laguerre_functions(alpha: float, x, n_max: int) -> np.ndarray:
    """Orthonormal Laguerre functions on (0, inf).

    Returns ``phi_n(x) = sqrt(n!/Gamma(n+alpha+1)) L_n^alpha(x) x^(alpha/2) e^(-x/2)``
    for ``n = 0..n_max``. They stay bounded where the bare polynomials and
    the weight would overflow or underflow separately.
    """
    if alpha <= -1:
        raise DomainError(f"laguerre_functions: alpha={alpha} must exceed -1")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    with np.errstate(divide="ignore"):
        log_phi0 = 0.5 * alpha * np.log(x) - 0.5 * x - 0.5 * gammaln(alpha + 1.0)
    out[0] = np.exp(log_phi0)
    if n_max >= 1:
        out[1] = (alpha + 1.0 - x) * out[0] / np.sqrt(alpha + 1.0)
    for n in range(1, n_max):
        out[n + 1] = (
            (2 * n + alpha + 1 - x) * out[n] - np.sqrt(n * (n + alpha)) * out[n - 1]
        ) / np.sqrt((n + 1) * (n + alpha + 1))
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for the weight ``x^alpha e^(-x)`` on (0, inf).

    ``scaled_weights`` equal ``weights * exp(nodes) * nodes**(-alpha)``; they
    are O(1) and let integrands be supplied already multiplied by the
    weight function without underflow.
    """

    alpha: float
    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    def integrate(self, f) -> complex | float:
        """Approximate ``int_0^inf x^alpha e^(-x) f(x) dx``."""
        return np.sum(self.weights * f(self.nodes))

    def __len__(self) -> int:
        return self.nodes.size


@functools.lru_cache(maxsize=256)
def gauss_laguerre_rule(alpha: float, n: int) -> QuadratureRule:
    """Generalized Gauss-Laguerre rule with ``n`` nodes.

    Nodes come from the eigenvalues of the Jacobi matrix (Golub-Welsch),
    polished by Newton steps on ``L_n^alpha``. Weights are the Christoffel
    numbers ``1 / sum_k p_k(x_i)^2`` built from orthonormal Laguerre
    functions, which keeps small weights accurate in the relative sense.
    """
    alpha = float(alpha)
    if alpha <= -1:
        raise DomainError(f"gauss_laguerre_rule: alpha={alpha} must exceed -1")
    if n < 1:
        raise DomainError("gauss_laguerre_rule: need at least one node")
    k = np.arange(n)
    diag = 2.0 * k + alpha + 1.0
    off = -np.sqrt(k[1:] * (k[1:] + alpha))
    try:
        x = eigh_tridiagonal(diag, off, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"gauss_laguerre_rule: eigensolve failed ({exc})") from exc
    if n > 1:
        for _ in range(3):
            phi = laguerre_functions(alpha, x, n)
            # x p_n' = n p_n - sqrt(n(n+alpha)) p_{n-1}, in the orthonormal normalisation
            step = x * phi[n] / (n * phi[n] - np.sqrt(n * (n + alpha)) * phi[n - 1])
            # derivative of the weight factor vanishes at a root of p_n
            x = x - step
    phi = laguerre_functions(alpha, x, n - 1)
    scaled = 1.0 / np.sum(phi**2, axis=0)
    with np.errstate(under="ignore"):
        weights = scaled * np.exp(alpha * np.log(x) - x)
    for arr in (x, weights, scaled):
        arr.setflags(write=False)
    return QuadratureRule(alpha=alpha, nodes=x, weights=weights, scaled_weights=scaled)


@dataclass(frozen=True)
class Hyp2F1RatioParams:
    """Parameters of ``2F1(a, b+1; c+1; z) / 2F1(a, b; c; z)``."""

    a: complex
    b: complex
    c: complex
    z: complex

    def __post_init__(self):
        if _is_nonpositive_integer(self.c) or _is_nonpositive_integer(self.c + 1):
            raise DomainError(f"hyp2f1 ratio: c={self.c} is a non-positive integer")
        z = complex(self.z)
        if not np.isfinite(z):
            raise DomainError("hyp2f1 ratio: z is not finite")
        if z.imag == 0.0 and z.real >= 1.0:
            raise DomainError(f"hyp2f1 ratio: z={z} lies on the branch cut [1, inf)")


def hyp2f1_ratio(
    params: Hyp2F1RatioParams, tol: float = 1e-14, max_terms: int = 100_000
) -> tuple[complex, int]:
    """Evaluate ``2F1(a, b+1; c+1; z) / 2F1(a, b; c; z)`` by Gauss's continued fraction.

    The ratio equals ``1 / (1 + d_1 z / (1 + d_2 z / (1 + ...)))`` with

        d_{2k+1} = -(a+k)(c-b+k) / ((c+2k)(c+2k+1))
        d_{2k}   = -(b+k)(c-a+k) / ((c+2k-1)(c+2k))

    evaluated with the modified Lentz algorithm.

    Returns
    -------
    value, iterations
    """
    a, b, c, z = (complex(v) for v in (params.a, params.b, params.c, params.z))
    f = 1.0 + 0j
    C = f
    D = 0j
    previous = f
    for n in range(1, max_terms + 1):
        if n % 2:
            k = (n - 1) // 2
            dn = -(a + k) * (c - b + k) / ((c + 2 * k) * (c + 2 * k + 1))
        else:
            k = n // 2
            dn = -(b + k) * (c - a + k) / ((c + 2 * k - 1) * (c + 2 * k))
        an = dn * z
        D = 1.0 + an * D
        if D == 0:
            D = LENTZ_TINY
        C = 1.0 + an / C
        if C == 0:
            C = LENTZ_TINY
        D = 1.0 / D
        delta = C * D
        previous, f = f, f * delta
        if abs(delta - 1.0) < tol:
            return 1.0 / f, n
    raise ConvergenceError(
        f"hyp2f1_ratio: no convergence after {max_terms} terms (z={z})",
        last=1.0 / f,
        previous=1.0 / previous,
        iterations=max_terms,
    )
