"""J-Bessel functions of large integer order.

Two independent evaluation routes are provided:

* Miller's backward recurrence, normalised with ``J_0 + 2 sum J_2m = 1``
  (:func:`bessel_single`, :func:`bessel_j`);
* the discrete Fourier transform of ``t -> exp(-i x sin 2 pi t)``, whose
  n-th Fourier coefficient is ``J_n(x)``, giving every order at once
  (:func:`bessel_batch`, :func:`order_table`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, PrecisionError

MAX_ORDER = 200_000
MAX_ARGUMENT = 200_000.0
MAX_TRANSFORM = 1 << 22

#: constant in ``|J_{k-1}(x)| <= C 2^-k x`` for ``x < k/3``.  From
#: ``|J_nu(x)| <= (x/2)^nu / nu!`` one gets ``2^k |J_{k-1}(x)| / x <= 2 x^{k-2}/(k-1)!``,
#: which is at most 2 (attained as k = 2, x -> 0) and decreasing in k.
TAIL_CONSTANT = 2.0

_RESCALE = 1e250


def _miller_start(n: int, xmax: float) -> int:
    top = max(n, xmax)
    m = int(top + 30 + 12 * top ** (1 / 3))
    return m + (m & 1)


def bessel_j(n: int, x) -> np.ndarray:
    """``J_n(x)`` for a fixed integer order and an array of arguments (Miller)."""
    if n < 0:
        raise DomainError("order must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(x < 0):
        raise DomainError("argument must be non-negative")
    if n > MAX_ORDER or (x.size and x.max() > MAX_ARGUMENT):
        raise DomainError("order or argument above configured bounds")
    out = np.zeros_like(x)
    zero = x == 0
    out[zero] = 1.0 if n == 0 else 0.0
    xs = x[~zero]
    if xs.size == 0:
        return out
    m = _miller_start(n, float(xs.max()))
    two_over_x = 2.0 / xs
    nxt = np.zeros_like(xs)            # J_{j+1}
    cur = np.full_like(xs, 1e-300)     # J_j
    norm = np.zeros_like(xs)
    res = np.zeros_like(xs)
    for j in range(m, 0, -1):
        prev = j * two_over_x * cur - nxt   # J_{j-1}
        nxt, cur = cur, prev
        if j - 1 == n:
            res = cur.copy()
        if (j - 1) % 2 == 0:
            norm += cur if j == 1 else 2.0 * cur
        big = np.abs(cur) > _RESCALE
        if big.any():
            f = np.where(big, 1.0 / _RESCALE, 1.0)
            cur *= f
            nxt *= f
            norm *= f
            res *= f
    out[~zero] = res / norm
    return out


def bessel_single(n: int, x: float) -> float:
    """``J_n(x)`` to absolute accuracy ~1e-12 by Miller's backward recurrence."""
    return float(bessel_j(n, x)[0])


@dataclass(frozen=True)
class BesselBatch:
    """All orders ``J_0(x), ..., J_{n_max}(x)`` at one argument."""

    x: float
    values: np.ndarray
    method: str
    n_transform: int = 0

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    def recurrence_residuals(self) -> np.ndarray:
        """``|J_{n-1} + J_{n+1} - (2n/x) J_n| / max(1, |J_n|)`` for interior n."""
        v = self.values
        n = np.arange(1, v.size - 1)
        r = np.abs(v[:-2] + v[2:] - (2 * n / self.x) * v[1:-1])
        return r / np.maximum(1.0, np.abs(v[1:-1]))

    def normalization_residual(self) -> float:
        """``|J_0 + 2 sum J_2m - 1|`` over the stored orders."""
        v = self.values
        return abs(v[0] + 2.0 * math.fsum(v[2::2]) - 1.0)


def transform_length(n_max: int, x: float) -> int:
    """Smallest power of two >= 4 max(n_max, x), at least 64, with room past the turning point.

    The spectrum checked for aliasing starts at 3N/8, which must sit well beyond
    ``x + O(x^{1/3})`` where ``J_n(x)`` starts its super-exponential decay.
    """
    margin = 2.4 * (x + 30 + 8 * x ** (1 / 3))
    need = max(64, 4 * max(n_max, math.ceil(x)), math.ceil(margin))
    return 1 << (need - 1).bit_length()


def _transform_orders(x: np.ndarray, N: int, n_max: int, parity: str | None):
    """Fourier coefficients of exp(-i x sin theta) on an N-point grid, orders 0..n_max.

    Returns ``(values, alias)`` where ``alias`` is the largest coefficient
    magnitude in the top eighth of the spectrum, used to detect aliasing.
    """
    theta = 2.0 * np.pi * np.arange(N) / N
    s = np.sin(theta)
    arg = x[:, None] * s[None, :]
    hi = slice(N // 2 - N // 8, N // 2 + 1)
    vals = np.zeros((x.size, n_max + 1))
    alias = 0.0
    if parity in (None, "odd"):
        F = np.fft.rfft(np.sin(arg), axis=1)
        odd = -F.imag / N
        vals[:, 1::2] = odd[:, 1:n_max + 1:2]
        alias = max(alias, float(np.abs(odd[:, hi]).max()))
    if parity in (None, "even"):
        F = np.fft.rfft(np.cos(arg), axis=1)
        even = F.real / N
        vals[:, 0::2] = even[:, 0:n_max + 1:2]
        alias = max(alias, float(np.abs(even[:, hi]).max()))
    return vals, alias


def _alias_floor(x: float) -> float:
    # rounding of x*sin(theta) leaves a noise floor proportional to x
    return 1e-14 + 2e-15 * x


def bessel_batch(x: float, n_max: int, n_transform: int | None = None) -> BesselBatch:
    """Every ``J_n(x)``, ``0 <= n <= n_max``, from one discrete Fourier transform.

    The transform length doubles while the top of the spectrum is not negligible.
    An explicit ``n_transform`` disables the doubling and fails instead.
    """
    if x <= 0 or n_max < 1:
        raise DomainError("need x > 0 and n_max >= 1")
    if x > MAX_ARGUMENT or n_max > MAX_ORDER:
        raise DomainError("order or argument above configured bounds")
    fixed = n_transform is not None
    N = n_transform if fixed else transform_length(n_max, x)
    if N <= 2 * n_max:
        raise PrecisionError(f"transform length {N} cannot resolve order {n_max}")
    xa = np.array([float(x)])
    while True:
        vals, alias = _transform_orders(xa, N, n_max, None)
        batch = BesselBatch(float(x), vals[0], "integral-transform", N)
        if alias <= _alias_floor(x):
            return batch
        if fixed or 2 * N > MAX_TRANSFORM:
            raise PrecisionError(
                f"transform length {N} aliases at x={x} (top coefficient {alias:.2e})")
        N *= 2


def order_table(x, n_max: int, parity: str | None = None,
                chunk_elems: int = 1 << 22) -> np.ndarray:
    """Matrix ``J[i, n] = J_n(x_i)`` for many arguments, orders ``0..n_max``.

    Arguments are grouped by transform length; ``parity`` restricts the work
    to odd or even orders (the other entries are left at zero).
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise DomainError("arguments must be positive")
    out = np.zeros((x.size, n_max + 1))
    if x.size == 0:
        return out
    lengths = np.array([transform_length(n_max, v) for v in x])
    for N in np.unique(lengths):
        idx = np.flatnonzero(lengths == N)
        rows = max(1, chunk_elems // int(N))
        for start in range(0, idx.size, rows):
            sel = idx[start:start + rows]
            vals, alias = _transform_orders(x[sel], int(N), n_max, parity)
            if alias > _alias_floor(float(x[sel].max())):
                raise PrecisionError(f"transform length {N} aliases (top {alias:.2e})")
            out[sel] = vals
    return out


def tail_bound(k: int, x: float) -> float:
    """Certified bound ``C 2^-k x >= |J_{k-1}(x)|``, valid for ``x < k/3``."""
    if k < 2:
        raise DomainError("k must be >= 2")
    if not 0 < x < k / 3:
        raise DomainError(f"x={x} is outside the decay regime x < k/3 = {k / 3}")
    return TAIL_CONSTANT * x * 2.0 ** (-k)


def log_power_series_bound(nu, x):
    """``log((x/2)^nu / Gamma(nu+1))``, a bound on ``log|J_nu(x)|`` for nu >= 0, x > 0."""
    nu = np.asarray(nu, dtype=np.float64)
    return nu * np.log(np.asarray(x) / 2.0) - gammaln(nu + 1.0)
