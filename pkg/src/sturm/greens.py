"""Inverse Coulomb Green's matrix on the Coulomb-Sturmian basis.

The matrix ``J_nn' = <n lambda|(eps - h_C)|n' lambda>`` of the Coulomb
Hamiltonian is symmetric tridiagonal. Its inverse restricted to the first
``N`` states equals the inverse of the truncated ``J`` with one corner entry
corrected by the exact contribution of the discarded tail. That contribution
is a ratio of hypergeometric functions, evaluated by a continued fraction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleProximityError
from .specfun import Hyp2F1RatioParams, hyp2f1_ratio

POLE_CONDITION_LIMIT = 1e13


@dataclass(frozen=True)
class PhysicalConstants:
    """Mass, reduced Planck constant, speed of light and squared charge."""

    m: float = 1.0
    hbar: float = 1.0
    c: float = 137.03604
    e2: float = 1.0

    def __post_init__(self):
        for name in ("m", "hbar", "c", "e2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"PhysicalConstants: {name}={value} must be positive")
        if self.alpha >= 1:
            raise DomainError(f"PhysicalConstants: fine-structure constant {self.alpha} >= 1")

    @property
    def alpha(self) -> float:
        return self.e2 / (self.hbar * self.c)

    @property
    def mc2(self) -> float:
        return self.m * self.c**2

    def zalpha(self, coulomb_Z: float) -> float:
        """Dimensionless Coulomb strength of ``coulomb_Z / r``."""
        return coulomb_Z / (self.hbar * self.c)

    def with_c(self, c: float) -> PhysicalConstants:
        return PhysicalConstants(self.m, self.hbar, c, self.e2)


class Sheet(str, enum.Enum):
    PHYSICAL = "physical"
    UNPHYSICAL = "unphysical"


@dataclass(frozen=True)
class EnergyPoint:
    """Effective energy with the wavenumber chosen on a definite sheet."""

    eps: complex
    k: complex
    sheet: Sheet


def wavenumber(eps: complex, constants: PhysicalConstants, sheet: Sheet | str = Sheet.PHYSICAL) -> EnergyPoint:
    """Wavenumber ``k`` with ``k**2 = 2 m eps / hbar**2`` on the requested sheet.

    The physical sheet has ``Im k >= 0``. The unphysical sheet has
    ``Im k <= 0`` (equality only on the positive real energy axis); in the
    lower half energy plane this is the principal root, which is where
    resonance poles live.
    """
    sheet = Sheet(sheet)
    eps = complex(eps)
    k = np.sqrt(complex(2.0 * constants.m * eps)) / constants.hbar
    if sheet is Sheet.PHYSICAL:
        if k.imag < 0 or (k.imag == 0 and k.real < 0):
            k = -k
    else:
        if k.imag > 0 or (k.imag == 0 and k.real < 0):
            k = -k
    return EnergyPoint(eps, complex(k), sheet)


def j_elements(n, lam: float, Zeff: complex, point: EnergyPoint, b: float, constants: PhysicalConstants):
    """Diagonal, super- and sub-diagonal elements of ``J`` in row ``n``.

    Returns
    -------
    diag, sup, sub
        ``J[n, n]``, ``J[n, n+1]`` and ``J[n, n-1]``; ``n`` may be an array.
    """
    n = np.asarray(n, dtype=float)
    k2 = point.k * point.k
    h2m = constants.hbar**2 / constants.m
    diag = h2m * (k2 - b * b) / (2.0 * b) * (n + lam + 1.0) - Zeff
    off = -h2m * (k2 + b * b) / (4.0 * b)
    sup = off * np.sqrt((n + 1.0) * (n + 2.0 * lam + 2.0))
    sub = off * np.sqrt(n * (n + 2.0 * lam + 1.0))
    return diag, sup, sub


def sommerfeld_gamma(Zeff: complex, point: EnergyPoint, constants: PhysicalConstants) -> complex:
    """``gamma = Zeff m / (hbar**2 k)``."""
    if point.k == 0:
        raise DomainError("Sommerfeld parameter undefined at threshold (k = 0)")
    return Zeff * constants.m / (constants.hbar**2 * point.k)


def tail_correction(
    N: int,
    lam: float,
    Zeff: complex,
    point: EnergyPoint,
    b: float,
    constants: PhysicalConstants,
    tol: float = 1e-14,
    max_terms: int = 100_000,
) -> complex:
    """Corner element of the inverse of the tail of ``J`` starting at row ``N``.

    ``C = [(J restricted to n >= N)^-1]_{NN}`` (0-indexed), in closed form

        C = -(4 m b / hbar**2) / ((b - i k)**2 (N + 1 + lambda + i gamma))
            * 2F1(a, N+1; c+1; z) / 2F1(a, N; c; z)

    with ``a = -lambda + i gamma``, ``c = N + 1 + lambda + i gamma`` and
    ``z = ((b + i k) / (b - i k))**2``.
    """
    if N < 0:
        raise DomainError("tail_correction: N must be non-negative")
    k = point.k
    if b - 1j * k == 0:
        raise DomainError("tail_correction: b - i k vanishes")
    ig = 1j * sommerfeld_gamma(Zeff, point, constants) if Zeff != 0 else 0j
    z = ((b + 1j * k) / (b - 1j * k)) ** 2

    def corner(ig):
        params = Hyp2F1RatioParams(a=-lam + ig, b=N, c=N + 1 + lam + ig, z=z)
        ratio, _ = hyp2f1_ratio(params, tol=tol, max_terms=max_terms)
        pref = -(4.0 * constants.m * b / constants.hbar**2) / ((b - 1j * k) ** 2 * (N + 1 + lam + ig))
        return complex(pref * ratio)

    c = N + 1 + lam + ig
    m = round(c.real)
    if m <= 0 and abs(c - m) < 1e-12 * max(1.0, abs(c)):
        # exactly at a Coulomb level beyond the basis: the singularity is removable
        h = 1e-7 * max(1.0, abs(c))
        return 0.5 * (corner(ig + h) + corner(ig - h))
    return corner(ig)


@dataclass(frozen=True)
class GreensWorkspace:
    """Fixed data of one Coulomb channel: angular momentum, charge, basis."""

    lam: float
    Zeff: complex
    constants: PhysicalConstants
    b: float
    N: int

    def __post_init__(self):
        if not self.lam > -1:
            raise DomainError(f"GreensWorkspace: lambda={self.lam} must exceed -1")
        if not self.b > 0:
            raise DomainError("GreensWorkspace: b must be positive")
        if self.N < 1:
            raise DomainError("GreensWorkspace: N must be at least 1")

    def gamma(self, point: EnergyPoint) -> complex:
        return sommerfeld_gamma(self.Zeff, point, self.constants)


def truncated_j(workspace: GreensWorkspace, point: EnergyPoint, N: int | None = None) -> np.ndarray:
    """Plain ``N x N`` truncation of ``J`` without the tail correction."""
    N = workspace.N if N is None else N
    diag, sup, _ = j_elements(np.arange(N), workspace.lam, workspace.Zeff, point, workspace.b, workspace.constants)
    J = np.diag(np.asarray(diag, dtype=complex))
    idx = np.arange(N - 1)
    J[idx, idx + 1] = sup[:-1]
    J[idx + 1, idx] = sup[:-1]
    return J


def greens_inverse(workspace: GreensWorkspace, point: EnergyPoint, N: int | None = None) -> np.ndarray:
    """``N x N`` inverse Coulomb Green's matrix ``(g^C)^-1`` at ``point``."""
    N = workspace.N if N is None else N
    J = truncated_j(workspace, point, N)
    C = tail_correction(N, workspace.lam, workspace.Zeff, point, workspace.b, workspace.constants)
    _, sup, _ = j_elements(N - 1, workspace.lam, workspace.Zeff, point, workspace.b, workspace.constants)
    J[N - 1, N - 1] -= sup * C * sup
    return J


def greens_matrix(
    workspace: GreensWorkspace, point: EnergyPoint, N: int | None = None, limit: float = POLE_CONDITION_LIMIT
) -> np.ndarray:
    """Coulomb Green's matrix ``<n tilde|g^C|n' tilde>``.

    Raises
    ------
    PoleProximityError
        If the inverse matrix is too ill-conditioned, i.e. the energy sits on
        or next to a Coulomb pole.
    """
    Ginv = greens_inverse(workspace, point, N)
    cond = np.linalg.cond(Ginv)
    if not np.isfinite(cond) or cond > limit:
        raise PoleProximityError(
            f"greens_matrix: condition {cond:.3g} exceeds {limit:.0e} at eps={point.eps}",
            condition=float(cond),
        )
    return np.linalg.inv(Ginv)
