"""Level-1 cusp forms: exact q-expansions, Hecke matrices and eigen-data.

Series are plain Python integer lists ``a[0..prec-1]``.  Products use Kronecker
substitution (one big-integer multiplication per product), so weights up to
~60 with a few thousand coefficients stay cheap and exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import mpmath
import numpy as np
import sympy

from .arithcore import simple_sieve
from .errors import ConsistencyError, DegeneracyError, DomainError, PrecisionError

K_CAP = 60
DPS = 60


# -- exact power series ------------------------------------------------------

def _pack(coeffs: list[int], width: int) -> int:
    nbytes = width // 8
    return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little")


def _unpack(value: int, width: int, count: int) -> list[int]:
    nbytes = width // 8
    raw = value.to_bytes(max(nbytes * count, (value.bit_length() + 7) // 8), "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") for i in range(count)]


def _mul_nonneg(a: list[int], b: list[int], prec: int) -> list[int]:
    if not any(a) or not any(b):
        return [0] * prec
    bits = max(a).bit_length() + max(b).bit_length() + min(len(a), len(b)).bit_length() + 1
    width = 8 * ((bits + 7) // 8)
    prod = _pack(a, width) * _pack(b, width)
    return _unpack(prod, width, prec)


def series_mul(a: list[int], b: list[int], prec: int) -> list[int]:
    """Exact product of two integer series truncated to ``prec`` terms."""
    a, b = a[:prec], b[:prec]
    ap = [x if x > 0 else 0 for x in a]
    an = [-x if x < 0 else 0 for x in a]
    bp = [x if x > 0 else 0 for x in b]
    bn = [-x if x < 0 else 0 for x in b]
    pp = _mul_nonneg(ap, bp, prec)
    nn = _mul_nonneg(an, bn, prec)
    pn = _mul_nonneg(ap, bn, prec)
    np_ = _mul_nonneg(an, bp, prec)
    return [w + x - y - z for w, x, y, z in zip(pp, nn, pn, np_)]


def _divisor_power_sums(power: int, prec: int) -> list[int]:
    s = [0] * prec
    for d in range(1, prec):
        dp = d ** power
        for m in range(d, prec, d):
            s[m] += dp
    return s


@lru_cache(maxsize=8)
def eisenstein(weight: int, prec: int) -> tuple[int, ...]:
    """E4 or E6 with constant term 1, exact to ``prec`` terms."""
    scale = {4: 240, 6: -504}[weight]
    s = _divisor_power_sums(weight - 1, prec)
    return tuple([1] + [scale * x for x in s[1:]])


@lru_cache(maxsize=8)
def delta(prec: int) -> tuple[int, ...]:
    """The discriminant form, ``(E4^3 - E6^2) / 1728``."""
    e4 = list(eisenstein(4, prec))
    e6 = list(eisenstein(6, prec))
    num = [x - y for x, y in zip(series_mul(series_mul(e4, e4, prec), e4, prec),
                                  series_mul(e6, e6, prec))]
    if any(c % 1728 for c in num):
        raise ConsistencyError("E4^3 - E6^2 not divisible by 1728")
    return tuple(c // 1728 for c in num)


@lru_cache(maxsize=64)
def _power(kind: str, e: int, prec: int) -> tuple[int, ...]:
    if e == 0:
        return tuple([1] + [0] * (prec - 1))
    base = list(delta(prec) if kind == "D" else eisenstein(4 if kind == "E4" else 6, prec))
    if e == 1:
        return tuple(base)
    half = list(_power(kind, e // 2, prec))
    out = series_mul(half, half, prec)
    if e % 2:
        out = series_mul(out, base, prec)
    return tuple(out)


def dim_cusp_forms(k: int) -> int:
    """Dimension of level-1 cusp forms of weight k."""
    if k % 2 or k < 0:
        raise DomainError(f"weight {k} must be even and non-negative")
    if k < 12 or k == 14:
        return 0
    return k // 12 - 1 if k % 12 == 2 else k // 12


@lru_cache(maxsize=128)
def victor_miller_basis(k: int, prec: int) -> tuple[tuple[int, ...], ...]:
    """Integral echelon basis ``f_i = q^i + O(q^{d+1})``, i = 1..d, of cusp forms of weight k."""
    d = dim_cusp_forms(k)
    if d == 0:
        return ()
    if prec <= d + 1:
        raise PrecisionError(f"precision {prec} too small for dimension {d}")
    gens = []
    for j in range(1, d + 1):
        w = k - 12 * j
        b = 0 if w % 4 == 0 else 1
        a = (w - 6 * b) // 4
        g = series_mul(list(_power("D", j, prec)), list(_power("E4", a, prec)), prec)
        if b:
            g = series_mul(g, list(_power("E6", 1, prec)), prec)
        gens.append(g)
    # back-substitute so that coefficient n of basis element i is delta_{in} for n <= d
    for i in range(d - 1, -1, -1):
        for j in range(i + 1, d):
            c = gens[i][j + 1]
            if c:
                gens[i] = [x - c * y for x, y in zip(gens[i], gens[j])]
    for i, g in enumerate(gens):
        if g[:d + 1] != [0] * (i + 1) + [1] + [0] * (d - i - 1):
            raise ConsistencyError("echelon form failed")
    return tuple(tuple(g) for g in gens)


def hecke_matrix(k: int, p: int, prec: int | None = None) -> list[list[int]]:
    """Integer matrix of T_p on the Victor-Miller basis (column j = image of f_j)."""
    d = dim_cusp_forms(k)
    need = p * d + 1
    prec = max(prec or 0, need)
    basis = victor_miller_basis(k, prec)
    pk = p ** (k - 1)
    cols = []
    for f in basis:
        cols.append([f[p * n] + (pk * f[n // p] if n % p == 0 else 0) for n in range(1, d + 1)])
    return [[cols[j][i] for j in range(d)] for i in range(d)]


@dataclass(frozen=True)
class EigenformData:
    """Eigen-data of the normalised Hecke eigenbasis of weight k.

    ``lam[f, i]`` is lambda_f(p) = a_f(p) / p^((k-1)/2) for ``p = primes[i]``.
    ``omega`` is None until :func:`harmonic_weights` fills it in.
    """

    k: int
    dim: int
    primes: np.ndarray
    lam: np.ndarray
    epsilon: int
    omega: np.ndarray | None = None
    coefficients: tuple = field(default=(), repr=False)

    @property
    def p_max(self) -> int:
        return int(self.primes[-1]) if self.primes.size else 0

    def lam_at(self, p: int) -> np.ndarray:
        i = np.searchsorted(self.primes, p)
        if i >= self.primes.size or self.primes[i] != p:
            raise DomainError(f"prime {p} not in the eigen-data (p_max={self.p_max})")
        return self.lam[:, i]


def _eigenvectors(T: list[list[int]]):
    """Eigenvalues and eigenvectors (normalised v[0] = 1) by characteristic-polynomial roots."""
    d = len(T)
    x = sympy.symbols("x")
    cp = sympy.Matrix(T).charpoly(x)
    coeffs = [int(c) for c in cp.all_coeffs()]
    if sympy.discriminant(cp.as_expr(), x) == 0 and d > 1:
        raise DegeneracyError("T_2 has a repeated eigenvalue")
    with mpmath.workdps(DPS):
        roots = mpmath.polyroots(coeffs, maxsteps=500, extraprec=4 * DPS) if d > 1 \
            else [mpmath.mpf(T[0][0])]
        A = mpmath.matrix(T)
        out = []
        for r in roots:
            if abs(mpmath.im(r)) > mpmath.mpf(10) ** (-DPS // 2) * (1 + abs(r)):
                raise ConsistencyError("Hecke eigenvalue is not real")
            r = mpmath.re(r)
            B = A - r * mpmath.eye(d)
            if d == 1:
                v = mpmath.matrix([1])
            else:
                rhs = -B[:, 0]
                sub = B[:, 1:]
                w, _ = mpmath.qr_solve(sub, rhs)
                v = mpmath.matrix([1] + [w[i] for i in range(d - 1)])
            res = mpmath.norm(B * v) / mpmath.norm(v)
            if res > mpmath.mpf(10) ** (-20) * (1 + abs(r)):
                raise PrecisionError(f"eigen-residual {res}")
            out.append((r, v))
    out.sort(key=lambda t: float(t[0]))
    return out


def hecke_eigen_data(k: int, p_max: int, k_cap: int = K_CAP,
                     check_primes: int = 50) -> EigenformData:
    """Normalised Hecke eigenvalues lambda_f(p), p <= p_max, for every eigenform of weight k.

    Eigenforms are located through T_2; their q-expansions then give a_f(p) for
    every p, and for ``p <= check_primes`` the eigen-equation of the exact T_p
    matrix is verified to relative 1e-9.
    """
    if k % 2 or k < 12:
        raise DomainError(f"weight {k} must be even and >= 12")
    if k > k_cap:
        raise DomainError(f"weight {k} above k_cap={k_cap}")
    if p_max < 2:
        raise DomainError("p_max must be >= 2")
    primes = simple_sieve(p_max)
    d = dim_cusp_forms(k)
    eps = 1 if k % 4 == 0 else -1
    if d == 0:
        return EigenformData(k, 0, primes, np.zeros((0, primes.size)), eps)
    prec = max(p_max + 1, 2 * d + 2, min(check_primes, p_max) * d + 1)
    basis = victor_miller_basis(k, prec)
    systems = _eigenvectors(hecke_matrix(k, 2, prec))
    lam = np.empty((d, primes.size))
    coeffs = []
    with mpmath.workdps(DPS):
        for f, (_, v) in enumerate(systems):
            a = [mpmath.fsum(v[i] * basis[i][n] for i in range(d)) for n in range(prec)]
            coeffs.append(tuple(a))
            for j, p in enumerate(primes):
                lam[f, j] = float(a[int(p)] / mpmath.mpf(int(p)) ** (mpmath.mpf(k - 1) / 2))
            for p in primes[primes <= check_primes]:
                p = int(p)
                T = mpmath.matrix(hecke_matrix(k, p, prec))
                res = mpmath.norm(T * v - a[p] * v) / mpmath.norm(v)
                if res > 1e-9 * (1 + abs(a[p])):
                    raise ConsistencyError(f"T_{p} eigen-residual {res} at k={k}")
    if np.any(np.abs(lam) > 2 + 1e-9):
        raise ConsistencyError("Deligne bound violated")
    return EigenformData(k, d, primes, lam, eps, coefficients=tuple(coeffs))


def default_fit_pairs(data: EigenformData, count: int | None = None) -> list[tuple[int, int]]:
    """Prime pairs (p, q), p <= q, used to fit harmonic weights; never involve 1."""
    count = count or max(2 * data.dim + 6, 8)
    ps = [int(p) for p in data.primes]
    pairs = [(p, q) for i, p in enumerate(ps) for q in ps[i:]]
    pairs.sort(key=lambda t: (t[0] * t[1], t))
    if len(pairs) < count:
        raise DomainError("not enough primes in the eigen-data to fit harmonic weights")
    return pairs[:count]


def harmonic_weights(data: EigenformData, pairs: list[tuple[int, int]] | None = None,
                     cond_max: float = 1e8, tol: float = 1e-6) -> EigenformData:
    """Solve ``sum_f w_f lambda_f(m) lambda_f(n) = G(m, n)`` for the harmonic weights.

    ``G`` is the geometric side of the Petersson formula.  Pairs alternate
    between the fitting set and a held-out validation set; the validation
    residual must stay below ``tol`` relative, and every weight must be positive.
    """
    from .petersson import geometric_mn

    if data.dim == 0:
        return replace(data, omega=np.zeros(0))
    pairs = list(pairs) if pairs is not None else default_fit_pairs(data)
    if len(pairs) < data.dim + 3:
        raise DomainError(f"need at least dim+3={data.dim + 3} pairs")

    def lam_n(n):
        return np.ones(data.dim) if n == 1 else data.lam_at(n)

    rows = np.array([lam_n(m) * lam_n(n) for m, n in pairs])
    rhs = np.array([geometric_mn(data.k, m, n)[0] for m, n in pairs])
    fit = np.arange(len(pairs)) % 3 != 2
    if fit.sum() < data.dim:
        fit[:] = True
    hold = ~fit
    cond = np.linalg.cond(rows[fit])
    if not np.isfinite(cond) or cond > cond_max:
        raise PrecisionError(f"harmonic-weight system ill-conditioned (cond={cond:.2e})")
    omega, *_ = np.linalg.lstsq(rows[fit], rhs[fit], rcond=None)
    if hold.any():
        pred = rows[hold] @ omega
        scale = np.maximum(np.abs(rhs[hold]), np.abs(rows[hold]) @ np.abs(omega))
        resid = np.max(np.abs(pred - rhs[hold]) / scale)
        if resid > tol:
            raise ConsistencyError(f"held-out Petersson residual {resid:.2e} at k={data.k}")
    if np.any(omega <= 0):
        raise ConsistencyError(f"non-positive harmonic weight at k={data.k}: {omega}")
    return replace(data, omega=omega)


@lru_cache(maxsize=64)
def eigen_data(k: int, p_max: int) -> EigenformData:
    """Cached ``hecke_eigen_data`` followed by ``harmonic_weights``."""
    return harmonic_weights(hecke_eigen_data(k, p_max))


CACHE_COLUMNS = ("k", "p", "form", "lambda", "omega", "epsilon")


def save_cache(path, datas) -> None:
    """Write eigen-data as whitespace-separated columns k, p, form, lambda, omega, epsilon."""
    rows = []
    for d in datas:
        om = d.omega if d.omega is not None else np.full(d.dim, np.nan)
        for f in range(d.dim):
            for j, p in enumerate(d.primes):
                rows.append((d.k, int(p), f, d.lam[f, j], om[f], d.epsilon))
    arr = np.array(rows, dtype=float).reshape(-1, 6)
    np.savetxt(path, arr, fmt=["%d", "%d", "%d", "%.17g", "%.17g", "%d"],
               header=" ".join(CACHE_COLUMNS))


def load_cache(path) -> dict[int, EigenformData]:
    arr = np.loadtxt(path, ndmin=2)
    out = {}
    for k in np.unique(arr[:, 0]).astype(int):
        blk = arr[arr[:, 0] == k]
        forms = np.unique(blk[:, 2]).astype(int)
        primes = np.unique(blk[:, 1]).astype(np.int64)
        lam = np.empty((forms.size, primes.size))
        omega = np.empty(forms.size)
        for f in forms:
            sub = blk[blk[:, 2] == f]
            sub = sub[np.argsort(sub[:, 1])]
            lam[f] = sub[:, 3]
            omega[f] = sub[0, 4]
        eps = int(blk[0, 5])
        out[int(k)] = EigenformData(int(k), forms.size, primes, lam, eps,
                                    None if np.isnan(omega).any() else omega)
    return out
