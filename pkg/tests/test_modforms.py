import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from murmurations import modforms
from murmurations.errors import DomainError

# Ramanujan tau(n), n = 1..10
TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def test_eisenstein_coefficients():
    e4, e6 = modforms.eisenstein(4, 30), modforms.eisenstein(6, 30)
    assert e4[0] == 1 and e6[0] == 1
    for n in range(1, 30):
        assert e4[n] == 240 * sympy.divisor_sigma(n, 3)
        assert e6[n] == -504 * sympy.divisor_sigma(n, 5)


def test_delta_is_tau():
    assert list(modforms.delta(11)[1:]) == TAU
    assert modforms.delta(11)[0] == 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=1, max_size=25),
       st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=1, max_size=25))
def test_series_mul_matches_convolution(a, b):
    prec = 30
    ref = [0] * prec
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j < prec:
                ref[i + j] += x * y
    assert list(modforms.series_mul(a, b, prec)) == ref


@pytest.mark.parametrize("k,d", [(2, 0), (4, 0), (10, 0), (12, 1), (14, 0), (24, 2),
                                 (26, 1), (36, 3), (38, 2), (60, 5)])
def test_dimension_formula(k, d):
    assert modforms.dim_cusp_forms(k) == d


def test_dimension_rejects_odd():
    with pytest.raises(DomainError):
        modforms.dim_cusp_forms(13)


def test_basis_is_echelon():
    basis = modforms.victor_miller_basis(36, 20)
    assert len(basis) == 3
    for i, f in enumerate(basis):
        assert f[0] == 0
        for j in range(1, 4):
            assert f[j] == (1 if j == i + 1 else 0)


def test_weight_24_eigenvalues_of_T2():
    # T_2 on S_24 has characteristic polynomial x^2 - 1080 x - 20468736, roots 540 +- 12 sqrt(144169)
    T = sympy.Matrix(modforms.hecke_matrix(24, 2))
    x = sympy.Symbol("x")
    assert sympy.expand(T.charpoly(x).as_expr()) == x ** 2 - 1080 * x - 20468736
    d = modforms.eigen_data(24, 50)
    a2 = np.sort(d.lam[:, 0] * 2 ** 11.5)
    ref = np.sort([540 - 12 * math.sqrt(144169), 540 + 12 * math.sqrt(144169)])
    assert np.allclose(a2, ref, rtol=1e-13)


def test_delta_eigenvalues():
    d = modforms.eigen_data(12, 100)
    for p, t in ((2, -24), (3, 252), (5, 4830), (7, -16744)):
        assert d.lam_at(p)[0] == pytest.approx(t / p ** 5.5, rel=1e-13)
    assert d.epsilon == 1


def test_harmonic_weight_of_delta():
    # w = Gamma(k-1) / ((4 pi)^(k-1) <f, f>), with <Delta, Delta> = 1.0353620568043209e-6
    d = modforms.eigen_data(12, 100)
    ref = math.gamma(11) / ((4 * math.pi) ** 11 * 1.0353620568043209e-6)
    assert d.omega[0] == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("k", [16, 24, 30, 36, 44])
def test_hecke_multiplicativity_and_deligne(k):
    d = modforms.hecke_eigen_data(k, 200)
    assert np.all(np.abs(d.lam) <= 2 + 1e-12)
    # a(mn) = a(m)a(n) for coprime m, n on each normalised eigenform
    with mpmath.workdps(modforms.DPS):
        for row in d.coefficients:
            a = [mpmath.mpf(v) for v in row]
            tol = mpmath.mpf(10) ** -40
            assert abs(a[1] - 1) <= tol
            assert abs(a[6] - a[2] * a[3]) <= tol * abs(a[6])
            assert abs(a[10] - a[2] * a[5]) <= tol * abs(a[10])
            # a(p^2) = a(p)^2 - p^(k-1)
            assert abs(a[4] - (a[2] ** 2 - mpmath.mpf(2) ** (k - 1))) <= tol * 2 ** k


def test_weights_are_positive_and_sign_alternates():
    for k in (24, 26):
        d = modforms.eigen_data(k, 60)
        assert np.all(d.omega > 0)
        assert d.epsilon == (1 if k % 4 == 0 else -1)


def test_eigen_data_bounds():
    with pytest.raises(DomainError):
        modforms.hecke_eigen_data(10, 50)
    with pytest.raises(DomainError):
        modforms.hecke_eigen_data(13, 50)
    with pytest.raises(DomainError):
        modforms.hecke_eigen_data(64, 50)
    with pytest.raises(DomainError):
        modforms.eigen_data(12, 50).lam_at(53)


def test_cache_round_trip(tmp_path):
    datas = [modforms.eigen_data(k, 40) for k in (12, 24)]
    path = tmp_path / "eigen.txt"
    modforms.save_cache(path, datas)
    back = modforms.load_cache(path)
    for d in datas:
        e = back[d.k]
        assert np.array_equal(e.primes, d.primes)
        assert np.allclose(e.lam, d.lam, rtol=1e-15)
        assert np.allclose(e.omega, d.omega, rtol=1e-15)


def test_weight_fit_detects_a_perturbed_eigenvalue():
    from dataclasses import replace

    from murmurations.errors import ConsistencyError
    d = modforms.hecke_eigen_data(24, 60)
    lam = d.lam.copy()
    lam[0, 1] += 1e-3  # lambda_f(3)
    with pytest.raises(ConsistencyError):
        modforms.harmonic_weights(replace(d, lam=lam))


def test_weights_sum_to_geometric_side_at_one():
    from murmurations import petersson
    for k in (12, 24, 36):
        d = modforms.eigen_data(k, 60)
        g, _, _ = petersson.geometric_mn(k, 1, 1)
        assert math.fsum(d.omega) == pytest.approx(g, rel=1e-10)


def test_hecke_relation_at_prime_squares():
    with mpmath.workdps(modforms.DPS):
        d = modforms.hecke_eigen_data(20, 60)
        for row in d.coefficients:
            for p in (2, 3, 5, 7):
                norm = mpmath.mpf(p) ** (mpmath.mpf(19) / 2)
                lp, lp2 = row[p] / norm, row[p * p] / norm ** 2
                assert abs(lp2 - (lp ** 2 - 1)) < mpmath.mpf(10) ** -40
