"""Smooth weights over the weight k and the oscillatory kernels V1, V2.

The weight is ``u(x) = exp(-((x + 1 - K)/M)^2) V(x/K)`` where ``V`` is a fixed
C-infinity plateau: 0 outside [1/4, 3], 1 on [1/2, 2].  Its Fourier transform
``u_hat(v) = int u(t) e(-tv) dt`` is tabulated once by an FFT of samples of u,
and the kernels

    V1(x) = int u_hat(v) sin(x cos 2 pi v) dv
    V2(x) = int u_hat(v) sin(x sin 2 pi v) dv

are evaluated by the trapezoidal rule on that grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .besselkit import order_table
from .errors import DomainError, ParameterError, PrecisionError

# samples of u per unit length; doubled until u_hat is negligible near |v| = rate/2
SAMPLES_PER_UNIT = 8
MAX_SAMPLES_PER_UNIT = 128
# relative level below which u and u_hat are treated as zero (FFT rounding sits near 2e-16)
NEGLIGIBLE = 1e-15


def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t)."""
    t = np.asarray(t, dtype=np.float64)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    s = 1.0 - t
    b = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return a / (a + b)


def plateau(x):
    """The bump V: supported in [1/4, 3] and identically 1 on [1/2, 2]."""
    x = np.asarray(x, dtype=np.float64)
    rise = _smoothstep((x - 0.25) / 0.25)
    fall = _smoothstep(3.0 - x)
    return np.where(x <= 2.0, rise, fall)


def weight(x, K: float, M: float):
    """``u(x) = exp(-((x+1-K)/M)^2) V(x/K)``."""
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-(((x + 1.0 - K) / M) ** 2)) * plateau(x / K)


@dataclass(frozen=True)
class WeightProfile:
    """Sampled weight ``u`` and its Fourier transform on a uniform grid.

    ``v``/``u_hat`` hold only the effective support of the transform
    (where ``|u_hat|`` exceeds ``NEGLIGIBLE * |u_hat(0)|``); ``dv`` is the grid step.
    ``x_max`` is the largest kernel argument the grid resolves.
    """

    K: float
    M: float
    x_max: float
    grid_size: int
    dv: float
    v: np.ndarray = field(repr=False)
    u_hat: np.ndarray = field(repr=False)
    W_hat0: float = 0.0
    h_hat0: float = 0.0
    u_integral: float = 0.0

    def u(self, x):
        return weight(x, self.K, self.M)

    @property
    def support(self) -> tuple[float, float]:
        """Interval outside which ``u`` is exactly zero."""
        return self.K / 4, 3 * self.K

    def orders(self) -> tuple[int, int]:
        """Range ``[lo, hi]`` of integers l where ``u(l)`` is not negligible."""
        return _effective_orders(self.K, self.M)


@lru_cache(maxsize=64)
def _effective_orders(K: float, M: float) -> tuple[int, int]:
    lo, hi = math.floor(K / 4), math.ceil(3 * K)
    ell = np.arange(lo, hi + 1)
    w = weight(ell, K, M)
    keep = np.flatnonzero(w > NEGLIGIBLE * w.max())
    return int(ell[keep[0]]), int(ell[keep[-1]])


def check_regime(K: float, M: float, lower: float = 1 / 3, upper: float = 1.0) -> None:
    if K < 2:
        raise ParameterError(f"K={K} must be >= 2")
    if not (K ** lower <= M <= K ** upper):
        raise ParameterError(
            f"M={M} outside the regime K^{lower:.3g}={K ** lower:.4g} <= M <= "
            f"K^{upper:.3g}={K ** upper:.4g}")


def make_profile(K: float, M: float, grid_size: int | None = None,
                 x_max: float | None = None) -> WeightProfile:
    """Tabulate ``u`` and ``u_hat`` for central weight K and window width M.

    The sampling span must exceed twice ``3K + x_max`` so that the trapezoidal
    rule and its half-resolution check are both free of aliasing up to ``x_max``;
    ``grid_size`` (number of samples) is raised to that minimum when needed.
    """
    check_regime(K, M)
    if x_max is None:
        x_max = 4 * K
    need = 2.0 * (3 * K + x_max + 20 * M + 64)
    span = 2.0 ** math.ceil(math.log2(need))
    if grid_size:
        span = max(span, 2.0 ** math.ceil(math.log2(grid_size / SAMPLES_PER_UNIT)))
    rate = SAMPLES_PER_UNIT
    while True:
        h = 1.0 / rate
        N = int(span * rate)
        samples = weight(h * np.arange(N), K, M)
        F = h * np.fft.fft(samples)
        v = np.fft.fftfreq(N, d=h)
        order = np.argsort(v, kind="stable")
        v, F = v[order], F[order]
        mag = np.abs(F)
        edge = mag[np.abs(v) >= 0.4 * rate].max() / mag.max()
        if edge <= NEGLIGIBLE:
            break
        if 2 * rate > MAX_SAMPLES_PER_UNIT:
            raise PrecisionError(f"u_hat not resolved: edge level {edge:.1e}")
        rate *= 2
    keep = np.flatnonzero(mag > NEGLIGIBLE * mag.max())
    sl = slice(keep[0], keep[-1] + 1)
    u_int = float(F.real[np.searchsorted(v, 0.0)])
    for arr in (v, F):
        arr.setflags(write=False)
    return WeightProfile(
        K=float(K), M=float(M), x_max=float(span / 2 - 3 * K - 20 * M - 64),
        grid_size=N, dv=1.0 / span, v=v[sl].copy(), u_hat=F[sl].copy(),
        W_hat0=u_int / K, h_hat0=M * math.sqrt(math.pi), u_integral=u_int)


@lru_cache(maxsize=64)
def _refined(K: float, M: float, x_max: float) -> WeightProfile:
    return make_profile(K, M, x_max=x_max)


def _resolve(profile: WeightProfile, x: np.ndarray) -> WeightProfile:
    top = float(np.max(x)) if x.size else 0.0
    if top <= profile.x_max:
        return profile
    return _refined(profile.K, profile.M, 2.0 ** math.ceil(math.log2(top)))


def fitted(profile: WeightProfile, top: float) -> WeightProfile:
    """A profile valid up to ``top`` on the shortest grid, coarser than ``profile`` if possible.

    The v-grid spacing scales like ``1/x_max``, so evaluating small arguments on
    a profile built for large ones wastes work.
    """
    bucket = 2.0 ** math.ceil(math.log2(max(top, 1.0)))
    if bucket > profile.x_max or 2 * bucket <= profile.x_max:
        return _refined(profile.K, profile.M, bucket)
    return profile


def _trapezoid(profile: WeightProfile, x: np.ndarray, kind: str, chunk: int = 1 << 22):
    v, uh, dv = profile.v, profile.u_hat, profile.dv
    phase = np.cos(2 * np.pi * v) if kind == "V1" else np.sin(2 * np.pi * v)
    fine = np.empty(x.size, dtype=complex)
    coarse = np.empty(x.size, dtype=complex)
    odd = np.arange(v.size) % 2 == 1
    rows = max(1, chunk // max(1, v.size))
    for s in range(0, x.size, rows):
        xs = x[s:s + rows]
        S = np.sin(xs[:, None] * phase[None, :])
        fine[s:s + rows] = dv * (S @ uh)
        coarse[s:s + rows] = 2 * dv * (S[:, odd] @ uh[odd])
    return fine, np.abs(fine - coarse)


def kernel_tolerance(profile: WeightProfile) -> float:
    """Absolute accuracy target: 1e-8 times peak |u_hat| times support length."""
    length = profile.v[-1] - profile.v[0]
    return 1e-8 * float(np.abs(profile.u_hat).max()) * length


def _kernel(profile: WeightProfile, x, kind: str):
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xa <= 0):
        raise DomainError("kernel argument must be positive")
    prof = _resolve(profile, xa)
    val, err = _trapezoid(prof, xa, kind)
    if err.size and err.max() > kernel_tolerance(prof):
        raise PrecisionError(f"{kind} quadrature error estimate {err.max():.2e}")
    return val if np.ndim(x) else complex(val[0])


def V1(profile: WeightProfile, x):
    """``int u_hat(v) sin(x cos 2 pi v) dv``; real up to rounding."""
    return _kernel(profile, x, "V1")


def V2(profile: WeightProfile, x):
    """``int u_hat(v) sin(x sin 2 pi v) dv``; purely imaginary up to rounding."""
    return _kernel(profile, x, "V2")


def V2_imag(profile: WeightProfile, x: np.ndarray) -> np.ndarray:
    """``Im V2(x)`` using the conjugate symmetry of ``u_hat``: half the work, real arithmetic.

    ``u_hat(-v) = conj(u_hat(v))`` and the integrand's sine is odd in v, so
    ``V2(x) = 2i int_{v>0} Im u_hat(v) sin(x sin 2 pi v) dv``.
    """
    x = np.asarray(x, dtype=np.float64)
    prof = _resolve(profile, x)
    pos = prof.v > 0
    v, w = prof.v[pos], 2 * prof.dv * prof.u_hat.imag[pos]
    s = np.sin(2 * np.pi * v)
    out = np.empty(x.size)
    rows = max(1, (1 << 22) // max(1, v.size))
    for i in range(0, x.size, rows):
        out[i:i + rows] = np.sin(x[i:i + rows, None] * s[None, :]) @ w
    return out


def V1_real(profile: WeightProfile, x: np.ndarray) -> np.ndarray:
    """``Re V1(x)`` by the same symmetry (the integrand's sine is even in v)."""
    x = np.asarray(x, dtype=np.float64)
    prof = _resolve(profile, x)
    pos = prof.v > 0
    zero = np.flatnonzero(prof.v == 0)
    v, w = prof.v[pos], 2 * prof.dv * prof.u_hat.real[pos]
    c = np.cos(2 * np.pi * v)
    out = np.empty(x.size)
    rows = max(1, (1 << 22) // max(1, v.size))
    for i in range(0, x.size, rows):
        out[i:i + rows] = np.sin(x[i:i + rows, None] * c[None, :]) @ w
    if zero.size:
        out += prof.dv * prof.u_hat.real[zero[0]] * np.sin(x)
    return out


def order_weights(profile: WeightProfile, n_max: int | None = None) -> np.ndarray:
    """``u(l)`` for l = 0..n_max, zero where negligible."""
    lo, hi = profile.orders()
    n_max = hi if n_max is None else n_max
    ell = np.arange(n_max + 1)
    w = profile.u(ell)
    w[(ell < lo) | (ell > hi)] = 0.0
    return w


def class_sums(profile: WeightProfile, x) -> tuple[np.ndarray, np.ndarray]:
    """``S_0(x), S_2(x)`` where ``S_a = sum_{2 <= k = a mod 4} u(k-1) J_{k-1}(x)``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    w = order_weights(profile)
    J = order_table(x, w.size - 1, parity="odd")
    ell = np.arange(w.size)
    w3 = np.where(ell % 4 == 3, w, 0.0)   # k = l + 1 = 0 mod 4
    w1 = np.where(ell % 4 == 1, w, 0.0)   # k = 2 mod 4
    return J @ w3, J @ w1


def weighted_bessel_sum(profile: WeightProfile, x, weighting: str = "plain"):
    """Finite sum over even k of ``u(k-1) J_{k-1}(x)``.

    ``weighting`` is ``"plain"`` (S_0 + S_2), ``"sign"`` (sum of i^k u J = S_0 - S_2),
    ``"class-0"`` or ``"class-2"`` (a single residue class mod 4).
    """
    if weighting not in ("plain", "sign", "class-0", "class-2"):
        raise DomainError(f"unknown weighting {weighting!r}")
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xa <= 0):
        raise DomainError("argument must be positive")
    s0, s2 = class_sums(profile, xa)
    out = {"plain": s0 + s2, "sign": s0 - s2, "class-0": s0, "class-2": s2}[weighting]
    out = out.astype(complex)
    return out if np.ndim(x) else complex(out[0])


def prop_residuals(profile: WeightProfile, x) -> dict[str, np.ndarray]:
    """Relative residuals of the weight-summation identities at each x.

    Every residual is scaled by ``max(|S_0|, |S_2|, |V1|, |V2|)`` at that x, the
    magnitude of the terms the identity relates.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    s0, s2 = class_sums(profile, x)
    v1 = V1(profile, x)
    v2 = V2(profile, x)
    scale = np.maximum.reduce([np.abs(s0), np.abs(s2), np.abs(v1), np.abs(v2)])
    return {
        "class-0": np.abs(s0 - (0.5j * v2 - 0.5 * v1)) / scale,
        "class-2": np.abs(s2 - (0.5j * v2 + 0.5 * v1)) / scale,
        "plain": np.abs((s0 + s2) - 1j * v2) / scale,
        "sign": np.abs((s0 - s2) + v1) / scale,
        "imag-V1": np.abs(v1.imag) / scale,
        "real-V2": np.abs(v2.real) / scale,
    }
