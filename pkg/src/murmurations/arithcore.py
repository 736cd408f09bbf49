"""Exact integer arithmetic: sieving, multiplicative functions, Kloosterman sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, ConsistencyError, ResourceError

#: default memory budget for a single table, in bytes
MEMORY_BUDGET = 2 << 30

_SEGMENT = 1 << 20


def simple_sieve(limit: int) -> np.ndarray:
    """Primes up to ``limit`` by a plain Eratosthenes sieve."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def segmented_sieve(limit: int, segment: int = _SEGMENT) -> np.ndarray:
    """Primes up to ``limit``, sieving fixed-size windows so memory stays bounded."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    base = simple_sieve(math.isqrt(limit))
    if limit <= segment:
        return simple_sieve(limit)
    chunks = [base]
    low = int(base[-1]) + 1 if base.size else 2
    while low <= limit:
        high = min(low + segment, limit + 1)
        mask = np.ones(high - low, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, -(-low // p) * p)
            mask[start - low::p] = False
        chunks.append(np.flatnonzero(mask).astype(np.int64) + low)
        low = high
    return np.concatenate(chunks)


def mobius_phi_sigma(n: int, primes: np.ndarray | None = None):
    """Arrays ``mu, phi, sigma`` indexed 0..n (index 0 is unused and set to 0)."""
    if primes is None:
        primes = simple_sieve(n)
    mu = np.ones(n + 1, dtype=np.int8)
    phi = np.arange(n + 1, dtype=np.int64)
    sigma = np.ones(n + 1, dtype=np.int64)
    for p in primes:
        p = int(p)
        if p > n:
            break
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p::p * p] = 0
        phi[p::p] -= phi[p::p] // p
        mult = np.arange(p, n + 1, p, dtype=np.int64)
        rest = mult // p
        power = np.full_like(mult, p)
        term = 1 + power
        hit = rest % p == 0
        while hit.any():
            rest[hit] //= p
            power[hit] *= p
            term[hit] += power[hit]
            hit &= rest % p == 0
        sigma[mult] *= term
    mu[0] = 0
    phi[0] = 0
    sigma[0] = 0
    return mu, phi, sigma


@dataclass(frozen=True)
class ArithmeticTable:
    """Sieved primes with their log-weights and small multiplicative tables.

    ``mu``, ``phi`` and ``sigma`` are indexed by ``n`` directly (entry 0 unused).
    """

    limit: int
    small_limit: int
    primes: np.ndarray = field(repr=False)
    log_weights: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)

    def prime_slice(self, lo: float, hi: float) -> slice:
        """Index slice of the primes ``p`` with ``lo <= p <= hi``."""
        if hi > self.limit:
            raise DomainError(f"table covers primes <= {self.limit}, asked for {hi}")
        i = np.searchsorted(self.primes, lo, side="left")
        j = np.searchsorted(self.primes, hi, side="right")
        return slice(int(i), int(j))

    def theta(self, x: float, lo: float = 0) -> float:
        """Chebyshev theta: sum of log p over lo <= p <= x."""
        s = self.prime_slice(lo, x)
        return math.fsum(self.log_weights[s])


def build_tables(limit: int, small_limit: int = 1,
                 memory_budget: int = MEMORY_BUDGET) -> ArithmeticTable:
    """Sieve primes up to ``limit`` and mu, phi, sigma up to ``small_limit``."""
    if limit < 2 or small_limit < 1:
        raise DomainError("need limit >= 2 and small_limit >= 1")
    est_primes = 1.3 * limit / math.log(limit) + 10
    estimate = 16 * est_primes + 17 * (small_limit + 1) + min(limit, _SEGMENT)
    if estimate > memory_budget:
        raise ResourceError(f"tables for limit={limit} need ~{estimate:.3g} bytes, "
                            f"budget is {memory_budget}")
    primes = segmented_sieve(limit)
    small_primes = primes[primes <= small_limit] if small_limit <= limit else simple_sieve(small_limit)
    mu, phi, sigma = mobius_phi_sigma(small_limit, small_primes)
    for arr in (primes, mu, phi, sigma):
        arr.setflags(write=False)
    logs = np.log(primes.astype(np.float64))
    logs.setflags(write=False)
    return ArithmeticTable(limit, small_limit, primes, logs, mu, phi, sigma)


def kloosterman(m: int, n: int, c: int) -> float:
    """Kloosterman sum S(m, n; c) by the direct O(c) loop.

    Phases are reduced mod c in exact integer arithmetic before conversion, and both
    components are accumulated with ``math.fsum``. The sum is real; the imaginary
    part is checked rather than discarded blindly.
    """
    if c < 1:
        raise DomainError("modulus c must be >= 1")
    if c == 1:
        return 1.0
    re, im = [], []
    for x in range(1, c):
        if math.gcd(x, c) != 1:
            continue
        r = (m * x + n * pow(x, -1, c)) % c
        ang = 2.0 * math.pi * r / c
        re.append(math.cos(ang))
        im.append(math.sin(ang))
    s_im = math.fsum(im)
    if abs(s_im) > 1e-10 * c:
        raise ConsistencyError(f"Im S({m},{n};{c}) = {s_im}")
    return math.fsum(re)


@lru_cache(maxsize=4096)
def kloosterman_row(m: int, c: int) -> np.ndarray:
    """``S(m, n; c)`` for every residue ``n = 0, ..., c-1`` as a read-only array."""
    if c < 1:
        raise DomainError("modulus c must be >= 1")
    if c == 1:
        out = np.ones(1)
    else:
        units = np.array([x for x in range(1, c) if math.gcd(x, c) == 1], dtype=np.int64)
        inv = np.array([pow(int(x), -1, c) for x in units], dtype=np.int64)
        n = np.arange(c, dtype=np.int64)
        r = (m * units[None, :] + n[:, None] * inv[None, :]) % c
        ang = (2.0 * np.pi / c) * r
        out = np.cos(ang).sum(axis=1)
        im = np.sin(ang).sum(axis=1)
        if np.max(np.abs(im)) > 1e-10 * c:
            raise ConsistencyError(f"Im S({m},.;{c}) too large")
    out.setflags(write=False)
    return out


#: moduli up to this size use the cached residue table in :func:`kloosterman_many`
ROW_TABLE_MAX = 2048


def _modpow(base: np.ndarray, exp: int, mod: int) -> np.ndarray:
    # int64 square-and-multiply; products stay below mod^2 < 2^63
    result = np.ones_like(base)
    b = base % mod
    while exp:
        if exp & 1:
            result = result * b % mod
        b = b * b % mod
        exp >>= 1
    return result


def unit_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Units mod c and their inverses, from ``x^(phi(c)-1)``."""
    if not 1 < c < 3 * 10 ** 9:
        raise DomainError("modulus must satisfy 1 < c < 3e9")
    x = np.arange(1, c, dtype=np.int64)
    units = x[np.gcd(x, c) == 1]
    return units, _modpow(units, units.size - 1, c)


def kloosterman_direct(m: int, n, c: int) -> np.ndarray:
    """``S(m, n_i; c)`` summed over the units for each requested n (no residue table)."""
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    if c == 1:
        return np.ones(n.size)
    units, inv = unit_inverses(c)
    out = np.empty(n.size)
    for i, ni in enumerate(n % c):
        r = ((m % c) * units + int(ni) * inv) % c
        ang = (2.0 * np.pi / c) * r
        im = np.sin(ang).sum()
        if abs(im) > 1e-10 * c:
            raise ConsistencyError(f"Im S({m},{ni};{c}) = {im}")
        out[i] = np.cos(ang).sum()
    return out


def kloosterman_many(m: int, n, c: int) -> np.ndarray:
    """Vectorised ``S(m, n_i; c)``: residue table for small c, direct sums otherwise."""
    n = np.asarray(n, dtype=np.int64)
    if c <= ROW_TABLE_MAX:
        return kloosterman_row(m % c if c > 1 else 0, c)[n % c]
    res, back = np.unique(n % c, return_inverse=True)
    return kloosterman_direct(m, res, c)[back].reshape(n.shape)


def divisor_count(n: int) -> int:
    count, d = 0, 1
    while d * d <= n:
        if n % d == 0:
            count += 1 if d * d == n else 2
        d += 1
    return count
