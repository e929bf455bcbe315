"""Independent cross-checks.

Each oracle reaches its answer by a route that shares no code with the
module it validates: a Stirling series for log-gamma, arbitrary precision
arithmetic for the closed-form constants, brute-force scans for scalar
inequalities, Richardson-extrapolated finite differences for derivatives,
and adaptive quadrature on R^n for stereographic norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.integrate import quad

# Bernoulli numbers B_2 .. B_24 for the Stirling series.
_BERNOULLI = (
    mpmath.mpf(1) / 6,
    mpmath.mpf(-1) / 30,
    mpmath.mpf(1) / 42,
    mpmath.mpf(-1) / 30,
    mpmath.mpf(5) / 66,
    mpmath.mpf(-691) / 2730,
    mpmath.mpf(7) / 6,
    mpmath.mpf(-3617) / 510,
    mpmath.mpf(43867) / 798,
    mpmath.mpf(-174611) / 330,
    mpmath.mpf(854513) / 138,
    mpmath.mpf(-236364091) / 2730,
)
_STIRLING = tuple(float(b / (2 * k * (2 * k - 1))) for k, b in enumerate(_BERNOULLI, start=1))


@dataclass(frozen=True)
class OracleConfig:
    gamma_grid: tuple = tuple(np.round(np.arange(1, 2001) * 0.1, 10))
    gamma_tol: float = 1e-11
    holder_samples: int = 100_000
    vector_grid: int = 400
    seed: int = 20240611
    fd_ladder: tuple = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    fd_tol: float = 1e-6
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("gamma_tol", "fd_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def stirling_ln_gamma(x: float, shift_to: float = 20.0) -> float:
    """ln Gamma(x) by shifting x above ``shift_to`` and summing 12 Stirling terms."""
    x = float(x)
    if x <= 0:
        raise ValueError("x must be positive")
    log_prod = 0.0
    while x < shift_to:
        log_prod += math.log(x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for c in _STIRLING:
        series += c * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi) + series - log_prod


def gamma_crosscheck(x_grid: Sequence[float], fn: Callable[[float], float] | None = None) -> float:
    """Max gap between ``fn`` (default: the package's ln_gamma) and the Stirling oracle.

    Gaps are relative to max(|ln Gamma|, 1) so the zeros at x = 1, 2 do not
    blow the ratio up.
    """
    if fn is None:
        from .specialfuncs import ln_gamma as fn
    worst = 0.0
    for x in x_grid:
        if not 0.0 < x <= 200.0:
            raise ValueError("grid must lie in (0, 200]")
        ref = stirling_ln_gamma(x)
        worst = max(worst, abs(fn(x) - ref) / max(abs(ref), 1.0))
    return worst


def mp_constants(n: int, s: float, dps: int = 40) -> dict:
    """The closed-form constants in arbitrary precision."""
    with mpmath.workdps(dps):
        n_, s_ = mpmath.mpf(n), mpmath.mpf(s)
        area = 2 * mpmath.pi ** ((n_ + 1) / 2) / mpmath.gamma((n_ + 1) / 2)
        ratio = mpmath.gamma(n_ / 2 + s_) / mpmath.gamma(n_ / 2 - s_)
        S = ratio * area ** (2 * s_ / n_)
        lam0 = 1 / ratio
        return {
            "S": float(S),
            "c_crit": float(ratio ** ((n_ + 2 * s_) / (4 * s_))),
            "d_crit": float(ratio ** ((n_ - 2 * s_) / (4 * s_))),
            "lambda0": float(lam0),
            "K_cmp": float(1 + 2 * S * mpmath.sqrt(2 * (n_ + 2 * s_) / (n_ - 2 * s_))),
            "area": float(area),
        }


def mp_multiplier(n: int, s: float, l: int, dps: int = 40) -> float:
    with mpmath.workdps(dps):
        h = mpmath.mpf(n) / 2
        return float(mpmath.gamma(l + h - s) / mpmath.gamma(l + h + s))


def holder_constant(beta: float) -> float:
    return max(3.0**beta + 2.0**beta, beta * 2.0 ** (1.0 - beta))


def holder_ratio(a, b, beta: float):
    """|F(a+b) - F(a)| / |b|^beta with F(t) = |t|^{beta-1} t; 0 where b = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    F = lambda t: np.sign(t) * np.abs(t) ** beta  # noqa: E731
    num = np.abs(F(a + b) - F(a))
    den = np.abs(b) ** beta
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(b == 0.0, 0.0, num / np.where(b == 0.0, 1.0, den))


@dataclass(frozen=True)
class ScanResult:
    worst: float
    bound: float
    holds: bool
    seed: int | None = None


def holder_inequality_scan(beta_grid: Sequence[float], samples: int = 100_000, seed: int = 20240611) -> dict:
    """Worst Hölder ratio per beta over random pairs spread across many scales."""
    rng = np.random.default_rng(seed)
    out = {}
    for beta in beta_grid:
        if not 0.0 < beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        mag_a = 10.0 ** rng.uniform(-4, 4, samples)
        mag_b = 10.0 ** rng.uniform(-4, 4, samples)
        a = rng.choice([-1.0, 1.0], samples) * mag_a
        b = rng.choice([-1.0, 1.0], samples) * mag_b
        worst = float(np.max(holder_ratio(a, b, beta)))
        bound = holder_constant(beta)
        out[float(beta)] = ScanResult(worst, bound, worst <= bound, seed)
    return out


def vector_inequality_scan(p: float, points: int = 400, half_width: float = 2.0) -> ScanResult:
    """min over a != b of (|a|^{p-2}a - |b|^{p-2}b)(a-b) / |a-b|^p on a square grid."""
    g = np.linspace(-half_width, half_width, points)
    a, b = np.meshgrid(g, g, indexing="ij")
    mask = a != b
    a, b = a[mask], b[mask]
    F = lambda t: np.sign(t) * np.abs(t) ** (p - 1.0)  # noqa: E731
    ratio = (F(a) - F(b)) * (a - b) / np.abs(a - b) ** p
    worst = float(np.min(ratio))
    bound = 2.0 ** (2.0 - p)
    return ScanResult(worst, bound, worst >= bound * (1.0 - 1e-12))


@dataclass(frozen=True)
class FDResult:
    value: float
    error: float
    flagged: bool


def fd_derivative(fn: Callable[[float], float], x: float, eps_ladder: Sequence[float] = (1e-2, 5e-3, 2.5e-3, 1.25e-3)) -> FDResult:
    """Central differences on a halving ladder, then a Richardson table.

    The ladder is flagged when it is not a halving sequence or when the last
    two tableau diagonals disagree by more than 1e-6 relative.
    """
    h = [float(e) for e in eps_ladder]
    if len(h) < 2:
        return FDResult((fn(x + h[0]) - fn(x - h[0])) / (2 * h[0]), math.inf, True)
    halving = all(abs(h[i + 1] / h[i] - 0.5) < 1e-12 for i in range(len(h) - 1))
    table = [[(fn(x + e) - fn(x - e)) / (2.0 * e) for e in h]]
    while len(table[-1]) > 1:
        k = len(table)
        prev = table[-1]
        factor = 4.0**k
        table.append([(factor * prev[i + 1] - prev[i]) / (factor - 1.0) for i in range(len(prev) - 1)])
    value = table[-1][0]
    err = abs(value - table[-2][-1])
    flagged = (not halving) or err > 1e-6 * max(abs(value), 1.0)
    return FDResult(value, err, flagged)


def radial_lp_norm(f: Callable[[float], float], n: int, p: float) -> float:
    """||f||_{L^p(R^n)} for radial f by adaptive quadrature in r."""
    area = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    g = lambda r: abs(f(r)) ** p * r ** (n - 1)  # noqa: E731
    total = quad(g, 0.0, 1.0, limit=200, epsabs=0, epsrel=1e-13)[0]
    total += quad(g, 1.0, np.inf, limit=200, epsabs=0, epsrel=1e-13)[0]
    return (area * total) ** (1.0 / p)


def sphere_lp_norm_zonal(fn: Callable[[float], float], n: int, p: float) -> float:
    """||u||_{L^p(S^n)} for zonal u(t) by adaptive quadrature in the polar angle."""
    lower = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    g = lambda th: abs(fn(math.cos(th))) ** p * math.sin(th) ** (n - 1)  # noqa: E731
    total = quad(g, 0.0, math.pi, limit=400, epsabs=0, epsrel=1e-13)[0]
    return (lower * total) ** (1.0 / p)


def scan_minimizer_zeta(objective: Callable[[float], float], lo: float, hi: float, points: int = 2001) -> float:
    """Brute-force argmin of a 1-D objective on a uniform grid."""
    zs = np.linspace(lo, hi, points)
    vals = [objective(z) for z in zs]
    return float(zs[int(np.argmin(vals))])
