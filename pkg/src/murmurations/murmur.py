"""The murmuration experiment: sign-weighted prime sums over the weight aspect.

The quantity studied is

    Sigma_1 = sum_{p/K^2 in E} log p  sum_{k even} u(k-1)  sum_f w_f eps_f lambda_f(p)

with ``u`` the smooth weight from :mod:`kernels`.  By the Petersson formula
``eps_f i^-k = 1`` and

    Sigma_1 = 2 pi sum_p log p sum_c S(1,p;c)/c  sum_{k even} u(k-1) J_{k-1}(4 pi sqrt(p)/c),

which is evaluated three ways: with Bessel batches (``numerator_direct``),
through the kernel ``V2`` (``numerator_kernel``), and with the prime sum
replaced by its decorrelated main term (``numerator_mainterm``).
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np
from scipy.special import gammaln, logsumexp

from . import kernels
from .arithcore import (ArithmeticTable, build_tables, kloosterman_many, mobius_phi_sigma,
                        segmented_sieve)
from .besselkit import order_table
from .errors import DomainError, ParameterError, PrecisionError, TruncationError

C_BUDGET = 20_000
SCHEMA_VERSION = 1


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("MURMUR_THREADS", "1"))
    return max(1, threads)


def _check_interval(E) -> tuple[float, float]:
    A, B = map(float, E)
    if not 0 < A <= B:
        raise DomainError(f"need 0 < A <= B, got E={E}")
    return A, B


def _prime_block(table: ArithmeticTable, K: float, A: float, B: float):
    if B * K * K > table.limit:
        raise DomainError(f"table covers p <= {table.limit}, need {B * K * K:.0f}")
    s = table.prime_slice(A * K * K, B * K * K)
    return table.primes[s], table.log_weights[s]


def _odd_weights(profile, k_max: int | None, weighting: str) -> np.ndarray:
    """Weights on Bessel orders l = k - 1 (odd), with the sign i^k for ``"unweighted"``."""
    w = kernels.order_weights(profile)
    ell = np.arange(w.size)
    w = np.where(ell % 2 == 1, w, 0.0)
    if k_max is not None:
        w = np.where(ell <= k_max - 1, w, 0.0)
    if weighting == "unweighted":
        # the family average without eps_f carries i^-k = +1 (k = 0 mod 4), -1 (k = 2 mod 4)
        w = np.where(ell % 4 == 3, w, -w)
    elif weighting != "signed":
        raise DomainError(f"unknown weighting {weighting!r}")
    return w


def certified_c_max(weights: np.ndarray, root_max: float, mass: float, tol: float,
                    budget: int = C_BUDGET) -> tuple[int, float]:
    """Smallest C such that dropping every modulus c > C changes the sum by <= tol.

    Bounds ``|S(1,p;c)/c| <= 1`` and ``|J_l(x)| <= (x/2)^l / l!`` with
    ``x = 4 pi sqrt(p)/c <= 4 pi root_max / c``, then sums ``c^-l`` over c > C
    by ``C^(1-l)/(l-1)``.  ``mass`` is the total prime weight (sum of log p).
    """
    ell = np.flatnonzero(weights)
    ell = ell[ell >= 2]
    if ell.size == 0:
        return 1, 0.0
    lw = np.log(np.abs(weights[ell]))
    base = (lw + ell * np.log(2 * math.pi * root_max) - gammaln(ell + 1.0)
            - np.log(ell - 1.0))
    log_pref = math.log(2 * math.pi * max(mass, 1e-300))

    def log_tail(C):
        return log_pref + float(logsumexp(base + (1 - ell) * math.log(C)))

    target = math.log(tol)
    if log_tail(1) <= target:
        return 1, math.exp(log_tail(1))
    lo, hi = 1, 2
    while log_tail(hi) > target:
        lo, hi = hi, hi * 2
        if hi > budget:
            raise TruncationError(f"c-sum needs more than {budget} moduli")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_tail(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi, math.exp(log_tail(hi))


def _weighted_order_sums(x: np.ndarray, w: np.ndarray, chunk: int = 512) -> np.ndarray:
    n_max = int(np.flatnonzero(w)[-1])
    parity = "odd" if not np.any(w[0::2]) else None
    out = np.empty(x.size)
    for s in range(0, x.size, chunk):
        out[s:s + chunk] = order_table(x[s:s + chunk], n_max, parity=parity) @ w[:n_max + 1]
    return out


@dataclass(frozen=True)
class NumeratorResult:
    value: float
    c_max: int
    tail_bound: float
    primes: int
    route: str


def _c_loop(primes, logs, C, fn, threads):
    """``sum_c (log p) S(1,p;c)/c fn(4 pi sqrt(p)/c)`` accumulated per prime in c order."""
    roots = np.sqrt(primes.astype(np.float64))

    def one(c):
        y = 4 * math.pi * roots / c
        return logs * kloosterman_many(1, primes, c) / c * fn(y)

    total = np.zeros(primes.size)
    with ThreadPoolExecutor(max_workers=_threads(threads)) as ex:
        for part in ex.map(one, range(1, C + 1)):
            total += part
    return total


def numerator_direct(profile, E, table: ArithmeticTable, tol: float = 1e-10,
                     k_max: int | None = None, weighting: str = "signed",
                     threads: int | None = None) -> NumeratorResult:
    """Sigma_1 with the k-sum done by Bessel batches at every (p, c).

    ``weighting="unweighted"`` drops eps_f (the sign-weighted Bessel sum).
    ``tol`` bounds the dropped c-tail relative to ``theta(E)``.
    """
    A, B = _check_interval(E)
    K = profile.K
    primes, logs = _prime_block(table, K, A, B)
    w = _odd_weights(profile, k_max, weighting)
    mass = math.fsum(logs)
    if primes.size == 0:
        return NumeratorResult(0.0, 0, 0.0, 0, "direct")
    C, tail = certified_c_max(w, math.sqrt(B) * K, mass, tol * mass)
    total = _c_loop(primes, logs, C, lambda y: _weighted_order_sums(y, w), threads)
    return NumeratorResult(2 * math.pi * math.fsum(total), C, tail, primes.size, "direct")


def numerator_kernel(profile, E, table: ArithmeticTable, tol: float = 1e-10,
                     weighting: str = "signed", threads: int | None = None) -> NumeratorResult:
    """Sigma_1 through the kernels: the k-sum is i V2 (signed) or -V1 (unweighted)."""
    A, B = _check_interval(E)
    K = profile.K
    primes, logs = _prime_block(table, K, A, B)
    w = _odd_weights(profile, None, weighting)
    mass = math.fsum(logs)
    if primes.size == 0:
        return NumeratorResult(0.0, 0, 0.0, 0, "kernel")
    C, tail = certified_c_max(w, math.sqrt(B) * K, mass, tol * mass)
    x_top = 4 * math.pi * math.sqrt(B) * K
    prof = profile if profile.x_max >= x_top else kernels.make_profile(K, profile.M, x_max=x_top)
    kern = kernels.V2_imag if weighting == "signed" else kernels.V1_real

    def fn(y):
        # i V2 is real; each modulus gets the coarsest grid valid for its arguments
        return -kern(kernels.fitted(prof, float(y.max())), y)

    total = _c_loop(primes, logs, C, fn, threads)
    return NumeratorResult(2 * math.pi * math.fsum(total), C, tail, primes.size, "kernel")


def numerator_spectral(K: float, M: float, E, table: ArithmeticTable, k_max: int) -> float:
    """Sigma_1 straight from Hecke eigenvalues and harmonic weights, k <= k_max."""
    from .modforms import dim_cusp_forms, eigen_data

    A, B = _check_interval(E)
    primes, logs = _prime_block(table, K, A, B)
    if primes.size == 0:
        return 0.0
    p_max = int(primes[-1])
    total = np.zeros(primes.size)
    for k in range(12, k_max + 1, 2):
        u = float(kernels.weight(k - 1, K, M))
        if u == 0.0 or dim_cusp_forms(k) == 0:
            continue
        data = eigen_data(k, p_max)
        idx = np.searchsorted(data.primes, primes)
        spec_sum = data.omega @ data.lam[:, idx]
        total += u * data.epsilon * spec_sum
    return math.fsum(logs * total)


@dataclass(frozen=True)
class MainTerm:
    value: float
    closed_form: float
    moduli: int


def _gauss_panels(a: float, b: float, width: float, n: int):
    panels = max(1, math.ceil((b - a) / width))
    edges = np.linspace(a, b, panels + 1)
    x, wts = np.polynomial.legendre.leggauss(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * wts[None, :]).ravel()
    return nodes, weights


def numerator_mainterm(profile, E, table: ArithmeticTable | None = None,
                       tol: float = 1e-10, quad_tol: float = 1e-9) -> MainTerm:
    """``2 pi i int_{K^2 E} sum_c mu(c)^2/(c phi(c)) V2(4 pi sqrt(x)/c) dx`` by quadrature.

    With ``w = 4 pi sqrt(x)/c`` the x-integral becomes
    ``c^2/(8 pi^2) int w V2(w) dw`` over ``[4 pi K sqrt(A)/c, 4 pi K sqrt(B)/c]``.
    Also returns the closed form ``K^2 (sqrt B - sqrt A) W_hat(0) / 2``.
    """
    A, B = _check_interval(E)
    K, M = profile.K, profile.M
    closed = 0.5 * K * K * (math.sqrt(B) - math.sqrt(A)) * profile.W_hat0
    if A == B:
        return MainTerm(0.0, 0.0, 0)
    w = _odd_weights(profile, None, "signed")
    mass = (B - A) * K * K
    C, _ = certified_c_max(w, math.sqrt(B) * K, mass, tol * mass)
    mu, phi, _ = mobius_phi_sigma(C)
    x_top = 4 * math.pi * math.sqrt(B) * K
    prof = profile if profile.x_max >= x_top else kernels.make_profile(K, M, x_max=x_top)
    width = max(0.5, min(M, K / 8) / 4)
    parts = []
    used = 0
    for c in range(1, C + 1):
        if mu[c] == 0:
            continue
        a, b = 4 * math.pi * K * math.sqrt(A) / c, 4 * math.pi * K * math.sqrt(B) / c
        vals = []
        for n in (24, 12):
            nodes, wts = _gauss_panels(a, b, width, n)
            f = -kernels.V2_imag(kernels.fitted(prof, b), nodes) * nodes
            vals.append(math.fsum(wts * f))
        scale = max(abs(vals[0]), 1e-300)
        if abs(vals[0] - vals[1]) > quad_tol * max(scale, K * M):
            raise PrecisionError(f"main-term quadrature unresolved at c={c}")
        parts.append(c * c / (8 * math.pi ** 2) * vals[0] / (c * phi[c]))
        used += 1
    return MainTerm(2 * math.pi * math.fsum(parts), closed, used)


@dataclass(frozen=True)
class Denominator:
    total: float
    diag: float
    offdiag: float
    c_max: int


def denominator(profile, E, table: ArithmeticTable, tol: float = 1e-12) -> Denominator:
    """Family size ``sum_p log p sum_k u(k-1) sum_f w_f`` split into delta and Kloosterman parts."""
    A, B = _check_interval(E)
    K = profile.K
    _, logs = _prime_block(table, K, A, B)
    theta = math.fsum(logs)
    w = _odd_weights(profile, None, "signed")
    diag = theta * math.fsum(w)
    # i^-k: +1 for k = 0 mod 4 (l = 3 mod 4), -1 for k = 2 mod 4
    ws = _odd_weights(profile, None, "unweighted")
    C, tail = certified_c_max(ws, 1.0, 1.0, tol)
    c = np.arange(1, C + 1)
    y = 4 * math.pi / c
    S = np.array([kloosterman_many(1, 1, int(ci)) for ci in c])
    ksum = _weighted_order_sums(y, ws)
    off = 2 * math.pi * theta * math.fsum(S / c * ksum)
    return Denominator(diag + off, diag, off, C)


def diagonal_poisson_check(profile) -> dict:
    """Compare each residue-class sum ``sum_{k = b mod 4} u(k-1)`` with ``(K/4) W_hat(0)``."""
    lo, hi = profile.orders()
    ell = np.arange(max(1, lo), hi + 1)
    u = profile.u(ell)
    k = ell + 1
    target = profile.K / 4 * profile.W_hat0
    out = {"target": target}
    for b in (0, 2):
        s = math.fsum(u[k % 4 == b])
        out[b] = {"sum": s, "residual": abs(s - target) / target}
    return out


# -- decorrelation --------------------------------------------------------------

@dataclass(frozen=True)
class DecorrelationReport:
    c: int
    x: float
    kloosterman_prime_sum: float
    main_term: float
    normalized_residual: float


def decorrelation_sum(c: int, x: float, table: ArithmeticTable) -> DecorrelationReport:
    """``sum_{p <= x, p not dividing c} S(1,p;c) log p`` against ``x mu(c)^2 / phi(c)``."""
    if c < 1:
        raise DomainError("c must be >= 1")
    if x > table.limit:
        raise DomainError(f"table covers p <= {table.limit}")
    s = table.prime_slice(2, x)
    p, lg = table.primes[s], table.log_weights[s]
    keep = c % p != 0
    p, lg = p[keep], lg[keep]
    # S(1,p;c) depends on p mod c only: group the log-weights by residue
    mass = np.bincount(p % c, weights=lg, minlength=c)
    from .arithcore import kloosterman_row
    total = math.fsum(kloosterman_row(1, c) * mass)
    mu, phi, _ = mobius_phi_sigma(c)
    main = x * float(mu[c]) ** 2 / float(phi[c])
    norm = float(phi[c]) * math.sqrt(x) * math.log(c * x) ** 2
    return DecorrelationReport(c, float(x), total, main, abs(total - main) / norm)


# -- L(s) -------------------------------------------------------------------------

@dataclass(frozen=True)
class LSeriesValue:
    s: float
    dirichlet: float | None
    euler: float | None
    term_cut: int
    prime_cut: int


def L_dirichlet(s: float, term_cut: int = 10 ** 6) -> float:
    """Partial sum ``sum_{c <= term_cut} mu(c)^2 / (phi(c) c^s)``; needs s > 0."""
    if s <= 0:
        raise DomainError("the Dirichlet series diverges for s <= 0")
    mu, phi = _mu_phi(term_cut, segmented_sieve(term_cut))
    c = np.arange(1, term_cut + 1)
    sq = mu[1:] != 0
    terms = 1.0 / (phi[1:][sq] * c[sq].astype(np.float64) ** s)
    return math.fsum(terms[::-1])


def _mu_phi(n: int, primes: np.ndarray):
    """``mu`` and ``phi`` alone, which is all the long Dirichlet sum needs."""
    mu = np.ones(n + 1, dtype=np.int8)
    phi = np.arange(n + 1, dtype=np.int64)
    for p in primes:
        p = int(p)
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p::p * p] = 0
        phi[p::p] -= phi[p::p] // p
    mu[0] = 0
    return mu, phi


def L_euler(s: float, prime_cut: int = 10 ** 5) -> float:
    """``zeta(s+1)/zeta(2s+2) prod_{p <= prime_cut} (1 + p^{-s-2}/((1-1/p)(1+p^{-1-s})))``."""
    if s <= -0.5 or s == 0:
        raise DomainError("the product form needs s > -1/2 and s != 0")
    p = segmented_sieve(prime_cut).astype(np.float64)
    fac = np.log1p(p ** (-s - 2) / ((1 - 1 / p) * (1 + p ** (-1 - s))))
    with mpmath.workdps(30):
        z = mpmath.zeta(s + 1) / mpmath.zeta(2 * s + 2)
    return float(z) * math.exp(math.fsum(fac))


def L_series(s: float, prime_cut: int = 10 ** 5, term_cut: int = 10 ** 6) -> LSeriesValue:
    """Both representations of L(s); the Dirichlet one is skipped for s <= 0."""
    dirichlet = L_dirichlet(s, term_cut) if s > 0 else None
    return LSeriesValue(s, dirichlet, L_euler(s, prime_cut), term_cut, prime_cut)


def residue_probe(s_values=(0.1, 0.05, 0.01), prime_cut: int = 10 ** 5) -> tuple[float, list]:
    """``s L(s)`` at small s and its polynomial extrapolation to s = 0."""
    s = np.asarray(s_values, dtype=float)
    vals = np.array([si * L_euler(si, prime_cut) for si in s])
    coef = np.polyfit(s, vals, deg=len(s) - 1)
    return float(np.polyval(coef, 0.0)), vals.tolist()


# -- nu(E) ------------------------------------------------------------------------

@dataclass(frozen=True)
class NuDensity:
    rational_form: float
    cosine_form: float
    rational_tail: float
    cosine_tail: float
    q_cut: int
    t_cut: int
    prime_cut: int


def _window_sum_inv_cubes(lo: np.ndarray, hi: np.ndarray, H3: np.ndarray) -> np.ndarray:
    """``sum_{lo <= b <= hi} b^-3`` with endpoint terms at half weight."""
    a = np.ceil(lo - 1e-12).astype(np.int64)
    b = np.floor(hi + 1e-12).astype(np.int64)
    a = np.maximum(a, 1)
    out = np.where(b >= a, H3[np.clip(b, 0, None)] - H3[np.clip(a - 1, 0, None)], 0.0)
    for end in (lo, hi):
        r = np.rint(end)
        exact = (np.abs(end - r) <= 1e-12 * np.maximum(1, end)) & (r >= 1)
        out = out - np.where(exact, 0.5 / np.maximum(r, 1) ** 3, 0.0)
    return out


def nu_rational(E, q_cut: int) -> tuple[float, float]:
    """``(1/zeta(2)) sum* mu(q)^2 / (phi(q)^2 sigma(q)) (q/a)^3`` over (a,q)=1, (q/a)^2 in E.

    Boundary fractions count with weight 1/2.  Returns ``(value, tail_estimate)``.
    """
    A, B = _check_interval(E)
    mu, phi, sigma = mobius_phi_sigma(q_cut)
    m = np.arange(q_cut + 1, dtype=np.float64)
    n_hi = int(q_cut / math.sqrt(A)) + 2
    H3 = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n_hi + 1, dtype=np.float64) ** 3)])
    G = np.zeros(q_cut + 1)
    G[1:] = m[1:] ** 3 * _window_sum_inv_cubes(m[1:] / math.sqrt(B), m[1:] / math.sqrt(A), H3)
    # inner(q) = sum_{d | q} mu(d) G(q/d): the coprimality condition by Mobius inversion
    inner = np.zeros(q_cut + 1)
    for d in np.flatnonzero(mu[1:]) + 1:
        inner[d::d] += mu[d] * G[1:q_cut // d + 1]
    q = np.flatnonzero(mu[1:]) + 1
    terms = inner[q] / (phi[q].astype(float) ** 2 * sigma[q])
    value = math.fsum(terms) / (math.pi ** 2 / 6)
    # each term is ~ (B-A)/2 / (phi(q) sigma(q)); the density of mu^2 q^2/(phi sigma)
    # is prod_p (1 - 1/(p(p+1)))
    ps = segmented_sieve(10 ** 6).astype(float)
    kappa = math.exp(math.fsum(np.log1p(-1 / (ps * (ps + 1)))))
    tail = 0.5 * (B - A) * kappa / q_cut / (math.pi ** 2 / 6)
    return value, tail


def _cos_integral_quad(t: np.ndarray, a: float, b: float) -> np.ndarray:
    """``2 int_a^b s^-3 cos(2 pi t s) ds`` by Gauss-Legendre with enough nodes."""
    out = np.empty(t.size)
    for i, ti in enumerate(t):
        n = int(2 * ti * (b - a) + 64)
        x, w = np.polynomial.legendre.leggauss(n)
        s = 0.5 * (b - a) * x + 0.5 * (b + a)
        out[i] = (b - a) * np.dot(w, s ** -3.0 * np.cos(2 * math.pi * ti * s))
    return out


def _cos_integral_asym(t: np.ndarray, a: float, b: float, terms: int = 14) -> np.ndarray:
    """Large-t expansion of ``2 int_a^b s^-3 cos(w s) ds`` by repeated integration by parts."""
    w = 2 * math.pi * t.astype(np.float64)
    total = np.zeros(t.size, dtype=complex)
    for j in range(terms):
        # f^(j)(s) for f = s^-3 is (-1)^j (j+2)!/2 s^(-3-j)
        coef = (-1) ** j * math.factorial(j + 2) / 2
        f_b, f_a = coef * b ** (-3 - j), coef * a ** (-3 - j)
        term = (f_b * np.exp(1j * w * b) - f_a * np.exp(1j * w * a)) / (1j * w) ** (j + 1)
        total += (-1) ** j * term
    return 2 * total.real


def cosine_integrals(t: np.ndarray, E, switch: int = 400) -> np.ndarray:
    """``int_E cos(2 pi t / sqrt(y)) dy`` for integer t >= 0."""
    A, B = _check_interval(E)
    a, b = 1 / math.sqrt(B), 1 / math.sqrt(A)
    t = np.asarray(t, dtype=np.int64)
    out = np.empty(t.size)
    zero = t == 0
    out[zero] = B - A
    small = (~zero) & (t < switch)
    out[small] = _cos_integral_quad(t[small], a, b)
    big = t >= switch
    out[big] = _cos_integral_asym(t[big], a, b)
    return out


def nu_cosine(E, t_cut: int, prime_cut: int = 10 ** 6) -> tuple[float, float]:
    """``(1/2) sum_{|t| <= t_cut} prod_{p not | t} (p^2-p-1)/(p^2-p) int_E cos(2 pi t/sqrt y) dy``.

    The product is over primes <= prime_cut; for t = 0 it is empty (every p divides 0).
    Returns ``(value, tail_estimate)``.
    """
    A, B = _check_interval(E)
    if prime_cut < t_cut:
        raise DomainError("prime_cut must be >= t_cut")
    ps = segmented_sieve(prime_cut)
    pf = ps.astype(np.float64)
    log_artin = math.fsum(np.log1p(-1 / (pf * pf - pf)))
    g = np.ones(t_cut + 1)
    for p in ps[ps <= t_cut]:
        p = int(p)
        g[p::p] *= (p * p - p) / (p * p - p - 1)
    t = np.arange(1, t_cut + 1)
    I = cosine_integrals(t, E)
    total = 0.5 * (B - A) + math.exp(log_artin) * math.fsum(g[1:] * I)
    # size of the first dropped terms: sin boundary terms f(s)/w (absent when 2s is an
    # integer at both ends) and the cos terms f'(s)/w^2
    a, b = 1 / math.sqrt(B), 1 / math.sqrt(A)
    mean_g = float(g[1:].mean())
    lead = 6 * (a ** -4 + b ** -4) / (4 * math.pi ** 2 * t_cut)
    if not all(abs(2 * s - round(2 * s)) < 1e-12 for s in (a, b)):
        lead += 2 * (a ** -3 + b ** -3) / (2 * math.pi * t_cut)
    tail = math.exp(log_artin) * mean_g * lead
    return total, tail


def nu_density(E, q_cut: int = 100_000, t_cut: int = 20_000,
               prime_cut: int = 10 ** 6, tol: float = 1e-3) -> NuDensity:
    """Both expressions for the murmuration density nu(E).

    Raises :class:`PrecisionError` when a tail estimate exceeds ``tol``; the
    message suggests a cut large enough for it.
    """
    r, rt = nu_rational(E, q_cut)
    if rt > tol:
        raise PrecisionError(f"rational tail {rt:.2e} > {tol}; try q_cut >= {math.ceil(q_cut * rt / tol)}")
    c, ct = nu_cosine(E, t_cut, max(prime_cut, t_cut))
    if ct > tol:
        raise PrecisionError(f"cosine tail {ct:.2e} > {tol}; try t_cut >= {math.ceil(t_cut * ct / tol)}")
    return NuDensity(r, c, rt, ct, q_cut, t_cut, max(prime_cut, t_cut))


# -- the full experiment -------------------------------------------------------

@dataclass
class MurmurationReport:
    K: float
    M: float
    E: list
    numerator_direct: float
    numerator_kernel: float
    numerator_mainterm: float
    mainterm_closed_form: float
    denominator: float
    denominator_diag: float
    denominator_offdiag: float
    ratio: float
    predicted: float
    normalized_ratio: float
    deviation: float
    c_max: int
    primes: int
    config: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


REPORT_FIELDS = ("K", "M", "A", "B", "numerator_direct", "numerator_kernel",
                 "numerator_mainterm", "mainterm_closed_form", "denominator",
                 "denominator_diag", "denominator_offdiag", "ratio", "predicted",
                 "normalized_ratio", "deviation", "c_max", "primes")


def write_reports_csv(reports, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for r in reports:
        d = asdict(r)
        d["A"], d["B"] = r.E
        w.writerow([repr(d[k]) if isinstance(d[k], float) else d[k] for k in REPORT_FIELDS])


def murmuration_report(K: float, M: float, E=(1.0, 2.0), tol: float = 1e-10,
                       table: ArithmeticTable | None = None, threads: int | None = None,
                       route_tol: float = 1e-4) -> MurmurationReport:
    """Run every evaluation of the numerator and denominator and form the ratio."""
    A, B = _check_interval(E)
    if not A < B:
        raise DomainError("need A < B")
    kernels.check_regime(K, M, 1 / 3, 0.9)
    x_top = 4 * math.pi * math.sqrt(B) * K
    profile = kernels.make_profile(K, M, x_max=x_top)
    if table is None:
        table = build_tables(math.ceil(B * K * K) + 1)
    nd = numerator_direct(profile, (A, B), table, tol, threads=threads)
    nk = numerator_kernel(profile, (A, B), table, tol, threads=threads)
    if abs(nd.value - nk.value) > route_tol * abs(nd.value):
        raise PrecisionError(f"numerator routes disagree: {nd.value} vs {nk.value}")
    mt = numerator_mainterm(profile, (A, B), table, tol)
    den = denominator(profile, (A, B), table)
    ratio = nd.value / den.total
    predicted = 1 / (K * (math.sqrt(B) + math.sqrt(A)))
    limit = 1 / (math.sqrt(B) + math.sqrt(A))
    norm = K * ratio
    config = {"K": K, "M": M, "A": A, "B": B, "tol": tol, "route_tol": route_tol,
              "table_limit": table.limit}
    return MurmurationReport(
        K=float(K), M=float(M), E=[A, B], numerator_direct=nd.value,
        numerator_kernel=nk.value, numerator_mainterm=mt.value,
        mainterm_closed_form=mt.closed_form, denominator=den.total,
        denominator_diag=den.diag, denominator_offdiag=den.offdiag, ratio=ratio,
        predicted=predicted, normalized_ratio=norm, deviation=abs(norm - limit) / limit,
        c_max=nd.c_max, primes=nd.primes, config=config)
