from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sturm.errors import DomainError, PoleProximityError
from sturm.greens import (
    GreensWorkspace,
    PhysicalConstants,
    Sheet,
    greens_inverse,
    greens_matrix,
    j_elements,
    tail_correction,
    truncated_j,
    wavenumber,
)

UNIT = PhysicalConstants(m=1.0, hbar=1.0, c=137.03604, e2=1.0)


def backward_tail(N, lam, Zeff, point, b, depth=100_000):
    """C_n = 1 / (J_nn - J_{n,n+1}^2 C_{n+1}) from C_depth = 0."""
    n = np.arange(N, N + depth)
    diag, sup, _ = j_elements(n, lam, Zeff, point, b, UNIT)
    C = 0j
    for i in range(depth - 1, -1, -1):
        s = sup[i] if i < depth - 1 else 0.0
        C = 1.0 / (diag[i] - s * s * C)
    return C


def mp_tail(N, lam, Zeff, point, b):
    mpmath.mp.dps = 30
    k = point.k
    ig = 1j * Zeff / k
    z = ((b + 1j * k) / (b - 1j * k)) ** 2
    a, c = -lam + ig, N + 1 + lam + ig
    ratio = mpmath.hyp2f1(a, N + 1, c + 1, z) / mpmath.hyp2f1(a, N, c, z)
    return complex(-4 * b / ((b - 1j * k) ** 2 * c) * ratio)


def det_sign_log(Ginv):
    s, l = np.linalg.slogdet(Ginv)
    return s, l


def bohr_zero(N, b, Z, n, lam=0.0, delta=1e-10):
    """Zero of det(g^-1) bracketed within +-delta of the Bohr energy, or None."""
    e = -Z * Z / (2.0 * n * n)
    ws = GreensWorkspace(lam, Z, UNIT, b, N)

    def f(E):
        s, l = det_sign_log(greens_inverse(ws, wavenumber(E, UNIT)))
        return s.real * math.exp(l / N), l

    (fa, la), (fb, lb) = f(e - delta), f(e + delta)
    if fa * fb > 0:
        return None
    lo, hi = e - delta, e + delta
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm, lm = f(mid)
        if fm == 0 or hi - lo < 1e-15:
            break
        if fm * fa < 0:
            hi = mid
        else:
            lo, fa = mid, fm
    root = 0.5 * (lo + hi)
    assert f(root)[1] < min(la, lb)  # a zero, not a pole
    return root


class TestWavenumber:
    def test_bound_region(self):
        assert wavenumber(-0.5, UNIT).k == pytest.approx(1j)

    def test_positive_energy(self):
        assert wavenumber(2.0, UNIT).k == pytest.approx(2.0)

    def test_unphysical(self):
        k = wavenumber(6.14 - 1e-8j, UNIT, Sheet.UNPHYSICAL).k
        assert k.real > 0 and k.imag < 0
        assert k * k / 2 == pytest.approx(6.14 - 1e-8j, rel=1e-15)

    def test_physical_upper(self):
        assert wavenumber(6.14 - 1e-8j, UNIT, Sheet.PHYSICAL).k.imag > 0


class TestJElements:
    def test_diagonal_at_k_equal_ib(self):
        b = 1.7
        p = wavenumber(-b * b / 2, UNIT)
        _, sup, sub = j_elements(np.arange(6), 0.3, -1.0, p, b, UNIT)
        assert np.all(np.abs(sup) < 1e-15) and np.all(np.abs(sub) < 1e-15)

    def test_sub_zero_at_origin(self):
        _, _, sub = j_elements(0, 0.5, 1.0, wavenumber(-0.2, UNIT), 1.0, UNIT)
        assert sub == 0

    def test_direct_arithmetic(self):
        # lambda=0, Z=0, b=1, k=2i, n=3: k^2 = -4
        p = wavenumber(-2.0, UNIT)
        diag, sup, sub = j_elements(3, 0.0, 0.0, p, 1.0, UNIT)
        assert diag == pytest.approx(-10.0)
        assert sup == pytest.approx(0.75 * math.sqrt(20.0))
        assert sub == pytest.approx(0.75 * math.sqrt(12.0))

    def test_super_equals_next_sub(self):
        p = wavenumber(1.3 - 0.4j, UNIT, Sheet.UNPHYSICAL)
        n = np.arange(30)
        _, sup, _ = j_elements(n, 0.7, 2.0, p, 2.2, UNIT)
        _, _, sub = j_elements(n + 1, 0.7, 2.0, p, 2.2, UNIT)
        np.testing.assert_array_equal(sup, sub)


class TestTailCorrection:
    def test_real_in_bound_region(self):
        C = tail_correction(10, 0.4, 3.0, wavenumber(-0.8, UNIT), 1.5, UNIT)
        assert C.imag == 0.0

    @pytest.mark.parametrize(
        "eps,lam,Z,b,N",
        [(-0.8, 0.0, 3.0, 1.5, 10), (-30.0, 0.0, 50.0, 4.0, 60), (2.0 + 1.0j, 1.0, -1.0, 1.0, 5), (6.1 + 0.2j, 2.0, 50.0, 4.0, 40)],
    )
    def test_cf_matches_backward_recursion(self, eps, lam, Z, b, N):
        p = wavenumber(eps, UNIT)
        C = tail_correction(N, lam, Z, p, b, UNIT)
        ref = backward_tail(N, lam, Z, p, b)
        assert abs(C - ref) <= 1e-10 * abs(ref)

    @pytest.mark.parametrize("eps", [6.14 - 1e-3j, 10.0 - 0.5j, 1.0 - 2.0j, 0.3 - 0.01j])
    def test_cf_matches_continued_series_unphysical(self, eps):
        p = wavenumber(eps, UNIT, Sheet.UNPHYSICAL)
        C = tail_correction(20, 0.5, 50.0, p, 4.0, UNIT)
        ref = mp_tail(20, 0.5, 50.0, p, 4.0)
        assert abs(C - ref) <= 1e-10 * abs(ref)

    def test_free_case_matches_series(self):
        p = wavenumber(-0.3, UNIT)
        C = tail_correction(4, 0.0, 0.0, p, 1.0, UNIT)
        assert C == pytest.approx(mp_tail(4, 0.0, 0.0, p, 1.0), rel=1e-13)

    def test_removable_point(self):
        # E = -1/8 with N=1, Z=-1: c = N + 1 + i gamma = 0
        p = wavenumber(-0.125, UNIT)
        C0 = tail_correction(1, 0.0, -1.0, p, 2.0, UNIT)
        Cm = tail_correction(1, 0.0, -1.0, wavenumber(-0.125 - 1e-9, UNIT), 2.0, UNIT)
        Cp = tail_correction(1, 0.0, -1.0, wavenumber(-0.125 + 1e-9, UNIT), 2.0, UNIT)
        assert abs(C0 - 0.5 * (Cm + Cp)) <= 1e-6 * abs(C0)

    def test_threshold(self):
        with pytest.raises(DomainError):
            tail_correction(3, 0.0, 1.0, wavenumber(0.0, UNIT), 1.0, UNIT)


class TestGreensInverse:
    def test_single_entry_differs(self):
        ws = GreensWorkspace(0.2, 1.0, UNIT, 1.0, 8)
        p = wavenumber(-0.7, UNIT)
        diff = greens_inverse(ws, p) != truncated_j(ws, p)
        assert diff.sum() == 1 and diff[7, 7]

    def test_symmetric(self):
        ws = GreensWorkspace(0.7, 50.0, UNIT, 4.0, 20)
        G = greens_inverse(ws, wavenumber(6.0 - 0.3j, UNIT, Sheet.UNPHYSICAL))
        np.testing.assert_array_equal(G, G.T)

    def test_large_truncation(self):
        N = 6
        p = wavenumber(1.0 + 0.5j, UNIT)
        ws = GreensWorkspace(1.0, 0.0, UNIT, 1.0, N)
        g = np.linalg.inv(greens_inverse(ws, p))
        big = np.linalg.inv(truncated_j(GreensWorkspace(1.0, 0.0, UNIT, 1.0, N + 2000), p))[:N, :N]
        assert np.max(abs(g - big)) <= 1e-8 * np.max(abs(big))

    @pytest.mark.parametrize("N", [1, 2, 5, 20])
    @pytest.mark.parametrize("b", [1.0, 3.0])
    def test_bohr_zeros(self, N, b):
        for n in (1, 2, 3):
            root = bohr_zero(N, b, -1.0, n)
            assert root is not None and abs(root + 0.5 / n**2) <= 1e-10

    @pytest.mark.parametrize("N", [2, 5, 20])
    def test_bohr_zeros_small_b(self, N):
        for n in (1, 2, 3):
            assert abs(bohr_zero(N, 0.5, -1.0, n) + 0.5 / n**2) <= 1e-10

    def test_degenerate_scale_has_no_zero(self):
        # b = kappa_2 = 1/2: the 2s state is the n=1 basis function, orthogonal
        # to the only retained function, so g_00 has no pole there.
        ws = GreensWorkspace(0.0, -1.0, UNIT, 0.5, 1)
        vals = [greens_inverse(ws, wavenumber(-0.125 + d, UNIT))[0, 0].real for d in (-1e-6, 0.0, 1e-6)]
        assert min(vals) > 0.4
        assert bohr_zero(1, 0.5, -1.0, 2) is None

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 40), st.floats(0.3, 10.0))
    def test_exact_in_n_and_b(self, N, b):
        for n in (1, 2, 3):
            if N < n and abs(b - 1.0 / n) < 1e-3:
                continue
            root = bohr_zero(N, b, -1.0, n)
            assert root is not None and abs(root + 0.5 / n**2) <= 1e-9


class TestGreensMatrix:
    def test_inverse(self):
        ws = GreensWorkspace(0.5, 2.0, UNIT, 1.2, 12)
        p = wavenumber(0.8 - 0.2j, UNIT, Sheet.UNPHYSICAL)
        g = greens_matrix(ws, p)
        np.testing.assert_allclose(g @ greens_inverse(ws, p), np.eye(12), atol=1e-11)
        np.testing.assert_allclose(g, g.T, rtol=1e-11, atol=1e-14)
        assert not np.allclose(g, g.conj().T)

    def test_sign_change_across_pole(self):
        ws = GreensWorkspace(0.0, -1.0, UNIT, 1.0, 4)
        lo = np.linalg.det(greens_inverse(ws, wavenumber(-0.5 - 1e-6, UNIT))).real
        hi = np.linalg.det(greens_inverse(ws, wavenumber(-0.5 + 1e-6, UNIT))).real
        assert lo * hi < 0

    def test_pole_proximity(self):
        ws = GreensWorkspace(0.0, -1.0, UNIT, 1.0, 4)
        with pytest.raises(PoleProximityError):
            greens_matrix(ws, wavenumber(-0.5, UNIT))
