from __future__ import annotations

import pytest

from sturm import BasisParams, PhysicalConstants, RadialPotential, Term

C_LIGHT = 137.03604


@pytest.fixture(scope="session")
def constants() -> PhysicalConstants:
    return PhysicalConstants(m=1.0, hbar=1.0, c=C_LIGHT, e2=1.0)


@pytest.fixture(scope="session")
def model_potential() -> RadialPotential:
    """Z=50 repulsive Coulomb plus the two-Yukawa short-range well."""
    return RadialPotential(50.0, (Term(-240.0, -1, 1.0), Term(320.0, -1, 4.0)))


@pytest.fixture(scope="session")
def model_basis() -> BasisParams:
    return BasisParams(b=4.0, N=60)
