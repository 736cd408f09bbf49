import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from murmurations import kernels
from murmurations.errors import ParameterError


def test_plateau_support_and_flat_part():
    x = np.array([0.0, 0.2, 0.25, 0.5, 1.0, 2.0, 3.0, 3.5])
    v = kernels.plateau(x)
    assert v.tolist()[:3] == [0.0, 0.0, 0.0]
    assert v[3:6].tolist() == [1.0, 1.0, 1.0]
    assert v[6:].tolist() == [0.0, 0.0]


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 4.0))
def test_plateau_range(x):
    assert 0.0 <= float(kernels.plateau(np.array([x]))[0]) <= 1.0


def test_weight_is_gaussian_on_plateau():
    K, M = 200, 40
    x = np.array([150.0, 199.0, 250.0])
    assert np.allclose(kernels.weight(x, K, M), np.exp(-((x + 1 - K) / M) ** 2))


def test_regime_check():
    kernels.check_regime(200, 40)
    with pytest.raises(ParameterError):
        kernels.check_regime(1000, 5)
    with pytest.raises(ParameterError):
        kernels.check_regime(100, 200)


def test_transform_at_zero(profile_200_40):
    p = profile_200_40
    ref, _ = quad(lambda t: float(kernels.weight(np.array([t]), 200, 40)[0]), 50, 600,
                  epsabs=1e-13, epsrel=1e-13, limit=400)
    assert p.W_hat0 == pytest.approx(p.u_integral / p.K)
    assert p.u_integral == pytest.approx(ref, rel=1e-10)
    # the plateau edge at K/2 trims only the far Gaussian tail
    assert p.u_integral == pytest.approx(40 * math.sqrt(math.pi), rel=1e-4)
    assert p.h_hat0 == pytest.approx(40 * math.sqrt(math.pi))


def test_identities_at_K200(profile_200_40):
    x = np.linspace(100, 400, 10)
    res = kernels.prop_residuals(profile_200_40, x)
    for name, r in res.items():
        assert r.max() <= 1e-6, name


def test_kernels_are_real_and_imaginary(profile_200_40):
    x = np.linspace(20, 800, 40)
    v1, v2 = kernels.V1(profile_200_40, x), kernels.V2(profile_200_40, x)
    scale = np.maximum(np.abs(v1), np.abs(v2)).max()
    assert np.max(np.abs(v1.imag) / scale) < 1e-8
    assert np.max(np.abs(v2.real) / scale) < 1e-8
    assert np.allclose(kernels.V2_imag(profile_200_40, x), v2.imag, atol=1e-12 * scale)
    assert np.allclose(kernels.V1_real(profile_200_40, x), v1.real, atol=1e-12 * scale)


def test_plain_sum_tracks_half_weight(profile_200_40):
    # to leading order in 1/M the weighted odd-order Bessel sum is u(x)/2
    x = np.array([180.0, 200.0, 220.0])
    s = kernels.weighted_bessel_sum(profile_200_40, x, "plain")
    assert np.allclose(s.real, profile_200_40.u(x) / 2, rtol=1e-2)


def test_kernel_negligible_far_below_support(profile_200_40):
    small = abs(kernels.V2(profile_200_40, np.array([200 / 1e4]))[0])
    peak = abs(kernels.V2(profile_200_40, np.array([200.0]))[0])
    assert small < 1e-12 * peak


def test_small_profile_refines_sampling():
    p = kernels.make_profile(30, 8)
    res = kernels.prop_residuals(p, np.linspace(15, 60, 6))
    assert max(r.max() for r in res.values()) < 1e-6


def test_plateau_examples():
    v = kernels.plateau(np.array([1.0, 0.2, 2.5]))
    assert v[0] == 1.0 and v[1] == 0.0 and 0 < v[2] < 1


def test_weight_support_and_peak():
    K, M = 200, 40
    assert float(kernels.weight(np.array([K - 1.0]), K, M)[0]) == pytest.approx(1.0)
    x = np.concatenate([np.linspace(0, K / 4 - 10 * M, 50), np.linspace(3 * K, 5 * K, 50)])
    assert np.all(np.abs(kernels.weight(x[x >= 0], K, M)) <= 1e-12)


def test_transform_symmetry_and_decay(profile_200_40):
    p = profile_200_40
    v, uh = p.v, p.u_hat
    i0 = np.searchsorted(v, 0.0)
    # u real: u_hat(-v) = conj(u_hat(v)) on the symmetric grid
    n = min(i0, v.size - 1 - i0)
    assert np.allclose(uh[i0 - n:i0][::-1], np.conj(uh[i0 + 1:i0 + n + 1]), atol=1e-13)
    far = np.abs(v) >= 10 / p.M * math.log(p.K) ** 2
    assert np.all(np.abs(uh[far]) <= 1e-8 * abs(uh[i0]))
    assert 0.5 <= p.W_hat0 / (p.M / p.K) <= 2


def test_kernels_vanish_at_zero(profile_200_40):
    x = np.array([1e-9])
    assert abs(kernels.V1(profile_200_40, x)[0]) < 1e-12
    assert abs(kernels.V2(profile_200_40, x)[0]) < 1e-12


def test_weighted_sums_are_real(profile_200_40):
    x = np.array([100.0, 200.0, 300.0])
    plain = kernels.weighted_bessel_sum(profile_200_40, x, "plain")
    sign = kernels.weighted_bessel_sum(profile_200_40, x, "sign")
    dom = np.maximum(np.abs(plain), np.abs(sign))
    assert np.all(np.abs(sign.imag) <= 1e-8 * dom)
    assert np.all(np.abs(plain.imag) <= 1e-8 * dom)
