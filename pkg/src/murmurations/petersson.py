"""Both sides of the Petersson trace formula at level 1.

    sum_f w_f lambda_f(m) lambda_f(n)
        = delta_{m=n} + 2 pi i^{-k} sum_{c>=1} S(m, n; c)/c J_{k-1}(4 pi sqrt(mn)/c)
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

import numpy as np

from .arithcore import kloosterman_many
from .besselkit import bessel_j
from .errors import DomainError, TruncationError

C_BUDGET = 100_000


def certified_cmax(k: int, mn: float, tol: float, budget: int = C_BUDGET) -> tuple[int, float]:
    """Smallest C whose tail ``2 pi sum_{c>C} |S/c| |J_{k-1}(4 pi sqrt(mn)/c)|`` is <= tol.

    Uses ``|S(m,n;c)| <= c`` and ``|J_nu(x)| <= (x/2)^nu / nu!``; summing
    ``c^-(k-1)`` over c > C is bounded by ``C^(2-k)/(k-2)``.  Returns ``(C, bound)``.
    """
    if k < 4:
        raise TruncationError(f"the trivial-bound tail does not converge for k={k}")
    nu = k - 1
    log_const = (math.log(2 * math.pi) + nu * math.log(2 * math.pi * math.sqrt(mn))
                 - math.lgamma(nu + 1) - math.log(k - 2))
    logC = (log_const - math.log(tol)) / (k - 2)
    C = max(1, math.ceil(math.exp(min(logC, 50.0))))
    if C > budget:
        raise TruncationError(f"c_max={C} exceeds budget {budget} (k={k}, mn={mn})")
    bound = math.exp(log_const + (2 - k) * math.log(C))
    return C, bound


def geometric_mn(k: int, m: int, n: int, tol: float = 1e-13) -> tuple[float, int, float]:
    """Geometric side for general indices; returns ``(value, c_max, tail_bound)``."""
    if k % 2:
        raise DomainError("weight must be even")
    if tol <= 0:
        raise DomainError("tol must be positive")
    C, tail = certified_cmax(k, m * n, tol)
    c = np.arange(1, C + 1)
    y = 4 * math.pi * math.sqrt(m * n) / c
    J = bessel_j(k - 1, y)
    S = np.array([kloosterman_many(m, n, int(ci)) for ci in c])
    terms = S / c * J
    # i^{-k} is real for even k
    sign = 1 if k % 4 == 0 else -1
    value = (1.0 if m == n else 0.0) + 2 * math.pi * sign * math.fsum(terms)
    return value, C, tail


def geometric_side(k: int, p: int, b: int, tol: float = 1e-13) -> tuple[float, int, float]:
    """``delta_{p^b=1} + 2 pi i^-k sum_c S(1, p^b; c)/c J_{k-1}(4 pi p^{b/2}/c)``."""
    if b not in (0, 1):
        raise DomainError("b must be 0 or 1")
    if k < 2:
        raise DomainError("k must be >= 2")
    return geometric_mn(k, 1, p ** b, tol)


def spectral_side(data, p: int, b: int) -> float:
    """``sum_f w_f lambda_f(p)^b`` from eigen-data with harmonic weights."""
    if b not in (0, 1):
        raise DomainError("b must be 0 or 1")
    if data.dim == 0:
        return 0.0
    if data.omega is None:
        raise DomainError("eigen-data has no harmonic weights")
    lam = data.lam_at(p) if b else np.ones(data.dim)
    return math.fsum(data.omega * lam)


@dataclass(frozen=True)
class PeterssonReport:
    k: int
    p: int
    b: int
    spectral: float
    geometric: float
    delta_term: int
    c_max: int
    tail_bound: float
    residual: float
    flagged: bool


def compare(k: int, p: int, b: int, tol: float = 1e-9, data=None,
            tail_tol: float = 1e-13) -> PeterssonReport:
    """Evaluate both sides and flag a residual above ``tol * max(1, |spectral|) + tail``."""
    if data is None:
        from .modforms import eigen_data
        data = eigen_data(k, max(97, p))
    geo, C, tail = geometric_side(k, p, b, tail_tol)
    spec_side = spectral_side(data, p, b)
    res = abs(spec_side - geo)
    flagged = res > tol * max(1.0, abs(spec_side)) + tail
    return PeterssonReport(k, p, b, spec_side, geo, int(b == 0), C, tail, res, flagged)


REPORT_COLUMNS = ("k", "p", "b", "spectral", "geometric", "residual", "c_max", "tail")


def write_csv(reports, fh) -> None:
    """CSV with columns k,p,b,spectral,geometric,residual,c_max,tail."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        d = asdict(r)
        w.writerow([d["k"], d["p"], d["b"], repr(d["spectral"]), repr(d["geometric"]),
                    repr(d["residual"]), d["c_max"], repr(d["tail_bound"])])
