"""Mapping of the Schrödinger, Klein-Gordon and squared-Dirac radial
equations onto one effective Schrödinger-like form.

Each equation is described by an effective angular momentum ``lambda`` (a
pair for Dirac), an effective charge ``Z'(E')``, an effective energy
``eps(E')`` and an energy-dependent short-range potential

    w = c1 v + c2 Z v / r + c3 v**2.

For Dirac, the squared equation adds a derivative coupling
``w' = kappa' dv/dr`` acting through the spin operator ``r_hat . sigma``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SupercriticalChargeError
from .greens import PhysicalConstants


class Equation(str, enum.Enum):
    SCHRODINGER = "schrodinger"
    KLEIN_GORDON = "kg"
    DIRAC = "dirac"


class DiracCoupling(str, enum.Enum):
    """How ``r_hat . sigma`` acts on the two Dirac channels.

    ROTATED
        The operator is transformed into the basis that diagonalizes the
        angular block, with the spin-orbit sign fixed by the same
        ``-i hbar/(2 m c) grad V . sigma`` term that produces ``w'``.
    ROTATED_FLIPPED
        As ROTATED with the opposite sign of the spin-orbit term.
    LITERAL
        ``[[0, 1], [1, 0]]`` in the diagonal basis, ignoring the rotation.
    """

    ROTATED = "rotated"
    ROTATED_FLIPPED = "rotated-flipped"
    LITERAL = "literal"


@dataclass(frozen=True)
class EquationKind:
    """Equation type with its angular quantum number (``l`` or ``j``)."""

    equation: Equation
    l: int | None = None
    j: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))
        if self.equation is Equation.DIRAC:
            if self.l is not None or self.j is None:
                raise DomainError("Dirac kind takes j, not l")
            twice = 2 * self.j
            if twice != round(twice) or round(twice) % 2 != 1 or self.j < 0.5:
                raise DomainError(f"j={self.j} must be a positive half-integer")
            object.__setattr__(self, "j", float(self.j))
        else:
            if self.j is not None or self.l is None:
                raise DomainError(f"{self.equation.value} kind takes l, not j")
            if int(self.l) != self.l or self.l < 0:
                raise DomainError(f"l={self.l} must be a non-negative integer")
            object.__setattr__(self, "l", int(self.l))

    @classmethod
    def schrodinger(cls, l: int) -> EquationKind:
        return cls(Equation.SCHRODINGER, l=l)

    @classmethod
    def klein_gordon(cls, l: int) -> EquationKind:
        return cls(Equation.KLEIN_GORDON, l=l)

    @classmethod
    def dirac(cls, j: float) -> EquationKind:
        return cls(Equation.DIRAC, j=j)

    @property
    def label(self) -> str:
        if self.equation is Equation.DIRAC:
            return f"dirac j={int(2 * self.j)}/2"
        return f"{self.equation.value} l={self.l}"


def kg_lambda(l: int, Zalpha: float) -> float:
    """``lambda = -1/2 + sqrt((l + 1/2)**2 - (Z alpha)**2)``."""
    disc = (l + 0.5) ** 2 - Zalpha**2
    if disc <= 0:
        raise SupercriticalChargeError(f"|Z alpha|={abs(Zalpha)} >= l + 1/2 = {l + 0.5}")
    return -0.5 + math.sqrt(disc)


def kg_effective_energy(Eprime: complex, constants: PhysicalConstants) -> complex:
    """``eps = E' (1 + E' / (2 m c**2))``."""
    return Eprime * (1.0 + Eprime / (2.0 * constants.mc2))


def kg_effective_charge(Eprime: complex, Z: float, constants: PhysicalConstants) -> complex:
    """``Z' = Z (1 + E' / (m c**2))``."""
    return Z * (1.0 + Eprime / constants.mc2)


def kg_component_weights(Eprime: complex, Z: float, constants: PhysicalConstants) -> tuple[complex, float, float]:
    """Weights ``(c1, c2, c3)`` of ``w = c1 v + c2 Z v / r + c3 v**2``."""
    mc2 = constants.mc2
    return 1.0 + Eprime / mc2, -1.0 / mc2, -1.0 / (2.0 * mc2)


def dirac_s_and_lambdas(j: float, Zalpha: float) -> tuple[float, float, float]:
    """``s = sqrt((j + 1/2)**2 - (Z alpha)**2)`` and ``lambda_(+/-) = s - 1/2 -/+ 1/2``."""
    disc = (j + 0.5) ** 2 - Zalpha**2
    if disc <= 0:
        raise SupercriticalChargeError(f"|Z alpha|={abs(Zalpha)} >= j + 1/2 = {j + 0.5}")
    s = math.sqrt(disc)
    lp = s - 1.0
    return s, lp, lp + 1.0


@dataclass(frozen=True)
class AngularBlock:
    """The 2x2 angular matrix of the squared Dirac equation and its diagonalization.

    ``rotation`` has the eigenvectors as rows and satisfies
    ``rotation @ rotation.T = 1`` and ``rotation @ matrix @ rotation.T = diag(eigenvalues)``.
    The matrix is complex symmetric rather than Hermitian, so the rotation
    is complex orthogonal; it is unitary only at ``Z alpha = 0``.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    rotation: np.ndarray
    mixing: complex


def angular_block(j: float, Zalpha: float, spin_orbit_sign: float = -1.0) -> AngularBlock:
    """Angular block in the ``(l_+, l_-)`` basis and its diagonalizing rotation.

    The block is ``[[(j-1/2)(j+1/2) - Za**2, sign i Za], [sign i Za, (j+1/2)(j+3/2) - Za**2]]``
    with ``sign = spin_orbit_sign``. The rows of the rotation are
    ``(1, -sign i t)`` and ``(sign i t, 1)`` scaled by ``1/sqrt(1 - t**2)``,
    where ``t = Za / (j + 1/2 + s)``.
    """
    s, lp, lm = dirac_s_and_lambdas(j, Zalpha)
    za2 = Zalpha**2
    off = spin_orbit_sign * 1j * Zalpha
    matrix = np.array(
        [[(j - 0.5) * (j + 0.5) - za2, off], [off, (j + 0.5) * (j + 1.5) - za2]], dtype=complex
    )
    t = Zalpha / (j + 0.5 + s)
    mixing = -spin_orbit_sign * 1j * t
    rotation = np.array([[1.0, mixing], [-mixing, 1.0]], dtype=complex) / math.sqrt(1.0 - t * t)
    eigenvalues = np.array([lp * (lp + 1.0), lm * (lm + 1.0)])
    return AngularBlock(matrix, eigenvalues, rotation, mixing)


def dirac_offdiag_coefficient(constants: PhysicalConstants) -> complex:
    """``kappa' = -i hbar c / (2 m c**2)`` in ``w' = kappa' dv/dr``."""
    return -1j * constants.hbar * constants.c / (2.0 * constants.mc2)


def spin_operator_matrix(j: float, Zalpha: float, coupling: DiracCoupling | str = DiracCoupling.ROTATED) -> np.ndarray:
    """Matrix of ``r_hat . sigma`` between the two effective Dirac channels."""
    coupling = DiracCoupling(coupling)
    flip = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    if coupling is DiracCoupling.LITERAL:
        return flip
    sign = 1.0 if coupling is DiracCoupling.ROTATED else -1.0
    O = angular_block(j, Zalpha, spin_orbit_sign=sign).rotation
    return O @ flip @ O.T


@dataclass(frozen=True)
class EffectiveChannel:
    """Energy-dependent effective parameters of one equation and quantum number.

    ``Z`` is the Coulomb coefficient of the underlying potential.
    ``spin_matrix`` is present for Dirac only and gives the channel
    structure of ``w'``; ``offdiag`` is ``kappa'``.
    """

    kind: EquationKind
    Z: float
    constants: PhysicalConstants
    lambdas: tuple[float, ...]
    s: float | None = None
    offdiag: complex | None = None
    spin_matrix: np.ndarray | None = None

    @property
    def relativistic(self) -> bool:
        return self.kind.equation is not Equation.SCHRODINGER

    def eps(self, Eprime: complex) -> complex:
        if not self.relativistic:
            return Eprime
        return kg_effective_energy(Eprime, self.constants)

    def zeff(self, Eprime: complex) -> complex:
        if not self.relativistic:
            return self.Z
        return kg_effective_charge(Eprime, self.Z, self.constants)

    def weights(self, Eprime: complex) -> tuple[complex, float, float]:
        if not self.relativistic:
            return 1.0, 0.0, 0.0
        return kg_component_weights(Eprime, self.Z, self.constants)


def effective_channel(
    kind: EquationKind,
    Z: float,
    constants: PhysicalConstants,
    coupling: DiracCoupling | str = DiracCoupling.ROTATED,
) -> EffectiveChannel:
    """Build the effective channel data of ``kind`` for Coulomb coefficient ``Z``."""
    za = constants.zalpha(Z)
    if kind.equation is Equation.SCHRODINGER:
        return EffectiveChannel(kind, Z, constants, (float(kind.l),))
    if kind.equation is Equation.KLEIN_GORDON:
        return EffectiveChannel(kind, Z, constants, (kg_lambda(kind.l, za),))
    s, lp, lm = dirac_s_and_lambdas(kind.j, za)
    X = spin_operator_matrix(kind.j, za, coupling)
    X.setflags(write=False)
    return EffectiveChannel(
        kind, Z, constants, (lp, lm), s=s, offdiag=dirac_offdiag_coefficient(constants), spin_matrix=X
    )
