import io
import json
import math

import numpy as np
import pytest
import sympy

from murmurations import arithcore, kernels, murmur
from murmurations.errors import DomainError, ParameterError, PrecisionError

TOY = dict(K=30, M=8)


@pytest.fixture(scope="module")
def toy():
    K, M = TOY["K"], TOY["M"]
    table = arithcore.build_tables(4 * K * K + 1)
    profile = kernels.make_profile(K, M, x_max=4 * math.pi * 2 * K)
    return K, M, table, profile


# -- decorrelation -----------------------------------------------------------------

def test_decorrelation_c1_is_chebyshev(table_1e6):
    r = murmur.decorrelation_sum(1, 1e6, table_1e6)
    assert r.kloosterman_prime_sum == pytest.approx(table_1e6.theta(1e6), rel=1e-14)
    assert r.main_term == 1e6


def test_decorrelation_c2(table_1e6):
    # S(1,p;2) = 1 for odd p and p = 2 is excluded
    r = murmur.decorrelation_sum(2, 1e6, table_1e6)
    assert r.kloosterman_prime_sum == pytest.approx(table_1e6.theta(1e6) - math.log(2), rel=1e-13)
    assert r.main_term == 1e6


def test_decorrelation_non_squarefree(table_1e6):
    r = murmur.decorrelation_sum(4, 1e6, table_1e6)
    assert r.main_term == 0.0
    assert r.normalized_residual <= 5


def test_decorrelation_against_brute_force():
    table = arithcore.build_tables(5000)
    for c in (6, 7, 12):
        ref = math.fsum(arithcore.kloosterman(1, int(p), c) * math.log(p)
                        for p in sympy.primerange(2, 5001) if c % p)
        r = murmur.decorrelation_sum(c, 5000, table)
        assert r.kloosterman_prime_sum == pytest.approx(ref, abs=1e-9)


def test_decorrelation_domain():
    table = arithcore.build_tables(100)
    with pytest.raises(DomainError):
        murmur.decorrelation_sum(3, 1000, table)
    with pytest.raises(DomainError):
        murmur.decorrelation_sum(0, 50, table)


# -- L(s) -------------------------------------------------------------------------

def test_L_at_one_two_representations():
    v = murmur.L_series(1.0)
    assert v.dirichlet == pytest.approx(v.euler, rel=1e-3)


def test_L_at_two_is_frozen():
    # both routes agree far beyond the criterion; value frozen from them
    v = murmur.L_series(2.0)
    assert v.euler == pytest.approx(1.33978415357, rel=1e-10)
    assert v.dirichlet == pytest.approx(v.euler, rel=1e-10)


def test_euler_factors_at_two():
    p = arithcore.simple_sieve(1000).astype(float)
    s = 2.0
    f = 1 + p ** (-s - 2) / ((1 - 1 / p) * (1 + p ** (-1 - s)))
    assert np.all(f > 1) and np.all(f < 1 + 2 * p ** -3)


def test_L_domain_errors():
    with pytest.raises(DomainError):
        murmur.L_dirichlet(0.0)
    with pytest.raises(DomainError):
        murmur.L_euler(0.0)
    with pytest.raises(DomainError):
        murmur.L_euler(-0.6)
    assert murmur.L_series(-0.25).dirichlet is None


def test_residue_at_zero():
    res, vals = murmur.residue_probe()
    assert res == pytest.approx(1.0, abs=0.02)
    assert len(vals) == 3


# -- nu(E) ------------------------------------------------------------------------

def test_nu_two_forms_agree():
    nu = murmur.nu_density((1.0, 4.0))
    assert abs(nu.rational_form - nu.cosine_form) <= 1e-4
    assert nu.rational_tail < 1e-4 and nu.cosine_tail < 1e-4


def test_nu_additive_over_intervals():
    whole = murmur.nu_rational((1.0, 4.0), 20_000)[0]
    parts = murmur.nu_rational((1.0, 2.0), 20_000)[0] + murmur.nu_rational((2.0, 4.0), 20_000)[0]
    assert whole == pytest.approx(parts, rel=1e-12)
    whole = murmur.nu_cosine((1.0, 4.0), 2_000, 10 ** 5)[0]
    parts = (murmur.nu_cosine((1.0, 2.0), 2_000, 10 ** 5)[0]
             + murmur.nu_cosine((2.0, 4.0), 2_000, 10 ** 5)[0])
    assert whole == pytest.approx(parts, rel=1e-10)


def test_cosine_integrals_against_quadrature():
    from scipy.integrate import quad
    t = np.array([0, 1, 7, 399, 400, 401, 1234])
    got = murmur.cosine_integrals(t, (1.0, 4.0))
    for ti, g in zip(t, got):
        ref, _ = quad(lambda y: math.cos(2 * math.pi * ti / math.sqrt(y)), 1, 4,
                      limit=5000, epsabs=1e-13, epsrel=1e-12)
        assert g == pytest.approx(ref, abs=1e-10)
    assert got[0] == 3.0


def test_nu_cut_too_small():
    with pytest.raises(PrecisionError, match="q_cut"):
        murmur.nu_density((1.0, 4.0), q_cut=10, tol=1e-6)


# -- numerator routes --------------------------------------------------------------

def test_toy_routes_and_spectral_side(toy):
    K, M, table, profile = toy
    direct = murmur.numerator_direct(profile, (1, 2), table, k_max=60).value
    spectral = murmur.numerator_spectral(K, M, (1, 2), table, k_max=60)
    assert direct == pytest.approx(spectral, rel=1e-6)
    d = murmur.numerator_direct(profile, (1, 2), table).value
    k = murmur.numerator_kernel(profile, (1, 2), table).value
    assert d == pytest.approx(k, rel=1e-4)


def test_numerator_is_additive(toy):
    _, _, table, profile = toy
    whole = murmur.numerator_direct(profile, (1, 2), table).value
    parts = (murmur.numerator_direct(profile, (1, 1.5), table).value
             + murmur.numerator_direct(profile, (1.5, 2), table).value)
    assert whole == pytest.approx(parts, rel=1e-8)


def test_numerator_is_real(toy):
    # 2 pi i sum log p S/c V2: the imaginary part comes from Re V2 and must vanish
    K, _, table, profile = toy
    p = table.primes[table.prime_slice(K * K, 2 * K * K)]
    lg = np.log(p.astype(float))
    re = im = 0.0
    for c in range(1, 80):
        y = 4 * math.pi * np.sqrt(p.astype(float)) / c
        v2 = kernels.V2(profile, y)
        w = lg * arithcore.kloosterman_many(1, p, c) / c
        z = 2j * math.pi * np.sum(w * v2)
        re, im = re + z.real, im + z.imag
    assert abs(im) <= 1e-8 * abs(re)


def test_thread_count_does_not_change_bits(toy):
    _, _, table, profile = toy
    a = murmur.numerator_direct(profile, (1, 2), table, threads=1).value
    b = murmur.numerator_direct(profile, (1, 2), table, threads=3).value
    assert a == b


def test_table_too_small(toy):
    _, _, _, profile = toy
    with pytest.raises(DomainError):
        murmur.numerator_direct(profile, (1, 2), arithcore.build_tables(1000))


def test_certificate_is_monotone():
    w = np.zeros(80)
    w[41:80:2] = 1.0
    C1, t1 = murmur.certified_c_max(w, 100.0, 1e4, 1e-6)
    C2, t2 = murmur.certified_c_max(w, 100.0, 1e4, 1e-12)
    assert C2 >= C1 and t1 <= 1e-6 and t2 <= 1e-12


def test_sign_weighting_carries_the_signal(table_small, profile_200_40):
    signed = murmur.numerator_direct(profile_200_40, (1, 2), table_small).value
    plain = murmur.numerator_direct(profile_200_40, (1, 2), table_small, weighting="unweighted")
    assert abs(signed) >= 5 * abs(plain.value)


# -- main term -----------------------------------------------------------------------

def test_mainterm_scales_like_root_interval(profile_200_40):
    a = murmur.numerator_mainterm(profile_200_40, (1, 4))
    b = murmur.numerator_mainterm(profile_200_40, (1, 2.25))
    assert a.value / b.value == pytest.approx(2.0, rel=0.05)
    assert a.closed_form / b.closed_form == pytest.approx(2.0, rel=1e-12)


def test_mainterm_empty_interval(profile_200_40):
    assert murmur.numerator_mainterm(profile_200_40, (2, 2)).value == 0.0


def test_mainterm_approaches_kernel_route(trend_reports):
    dev = [abs(r.numerator_mainterm - r.numerator_kernel) / abs(r.numerator_kernel)
           for r in trend_reports.values()]
    assert dev[0] > dev[1] > dev[2]


# -- denominator ------------------------------------------------------------------

def test_denominator_structure(table_small, profile_200_40):
    p = profile_200_40
    d = murmur.denominator(p, (1, 2), table_small)
    assert d.total == d.diag + d.offdiag
    assert abs(d.offdiag) <= d.diag / 40
    ell = np.arange(1, 1200, 2)
    theta = table_small.theta(2 * 200 ** 2, 200 ** 2)
    assert d.diag / (theta * math.fsum(p.u(ell))) == pytest.approx(1.0, rel=1e-12)
    ref = math.sqrt(math.pi) / 2 * 40 * 200 ** 2 * (2 - 1)
    assert 0.5 <= d.diag / ref <= 2


def test_diagonal_poisson(profile_200_40):
    chk = murmur.diagonal_poisson_check(profile_200_40)
    assert chk[0]["residual"] <= 1e-6 and chk[2]["residual"] <= 1e-6
    assert chk[0]["sum"] == pytest.approx(chk[2]["sum"], rel=1e-6)
    half = murmur.diagonal_poisson_check(kernels.make_profile(200, 20))
    assert half[0]["sum"] / chk[0]["sum"] == pytest.approx(0.5, rel=1e-3)


# -- reports --------------------------------------------------------------------------

def test_small_report_fields():
    r = murmur.murmuration_report(64, 8, (1.0, 4.0))
    assert r.predicted * 64 == pytest.approx(1 / 3, rel=1e-15)
    assert r.denominator_diag > abs(r.denominator_offdiag)
    assert r.numerator_direct == pytest.approx(r.numerator_kernel, rel=1e-4)
    assert r.normalized_ratio == pytest.approx(64 * r.ratio)
    payload = json.loads(r.to_json())
    assert payload["E"] == [1.0, 4.0] and payload["config"]["K"] == 64
    buf = io.StringIO()
    murmur.write_reports_csv([r], buf)
    head, row = buf.getvalue().splitlines()
    assert head.split(",") == list(murmur.REPORT_FIELDS)


def test_report_preconditions():
    with pytest.raises(ParameterError):
        murmur.murmuration_report(1000, 5)
    with pytest.raises(DomainError):
        murmur.murmuration_report(100, 10, (2.0, 1.0))
