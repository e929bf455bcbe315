"""Log-gamma, Gegenbauer polynomials and Gauss-Jacobi quadrature.

Everything here is a pure function of its arguments; the returned
quadrature arrays are flagged read-only so rules can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def ln_gamma(x: float) -> float:
    """Natural log of the Gamma function for real ``x > 0``."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"ln_gamma needs a finite positive argument, got {x!r}")
    if x.is_integer() and x <= 171:
        return math.log(math.factorial(int(x) - 1))
    if x < 0.5:
        return ln_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b) through a log-gamma difference."""
    return math.exp(ln_gamma(a) - ln_gamma(b))


def gegenbauer(l: int, alpha: float, t):
    """C_l^alpha(t) by the three-term recurrence. ``t`` may be an array."""
    if l < 0:
        raise DomainError("degree must be non-negative")
    if alpha <= -0.5:
        raise DomainError("Gegenbauer parameter must exceed -1/2")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise DomainError("Gegenbauer argument must lie in [-1, 1]")
    prev = np.ones_like(t)
    if l == 0:
        return prev if prev.ndim else float(prev)
    cur = 2.0 * alpha * t
    for k in range(2, l + 1):
        prev, cur = cur, (2.0 * t * (k + alpha - 1.0) * cur - (k + 2.0 * alpha - 2.0) * prev) / k
    return cur if cur.ndim else float(cur)


def jacobi(m: int, a: float, b: float, x):
    """Jacobi polynomial P_m^{(a,b)}(x) in the standard normalization."""
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if m == 0:
        return p0
    p1 = 0.5 * ((a + b + 2.0) * x + (a - b))
    for k in range(2, m + 1):
        s = 2.0 * k + a + b
        c1 = 2.0 * k * (k + a + b) * (s - 2.0)
        c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b)
        c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        p0, p1 = p1, (c2 * p1 - c3 * p0) / c1
    return p1


def jacobi_derivative(m: int, a: float, b: float, x):
    if m == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    return 0.5 * (m + a + b + 1.0) * jacobi(m - 1, a + 1.0, b + 1.0, x)


def beta_integral(a: float, b: float) -> float:
    """Integral of (1-t)^a (1+t)^b over [-1, 1]."""
    return 2.0 ** (a + b + 1.0) * math.exp(ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0))


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    exponent_pair: tuple[float, float]

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> float:
        """Weighted sum; ``values`` are integrand samples without the weight."""
        return float(np.dot(self.weights, values))


def _jacobi_matrix(m: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(m, dtype=float)
    s = 2.0 * k + a + b
    diag = np.empty(m)
    diag[0] = (b - a) / (a + b + 2.0)
    if m > 1:
        diag[1:] = (b * b - a * a) / (s[1:] * (s[1:] + 2.0))
    off = np.empty(max(m - 1, 0))
    if m > 1:
        off[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b))
        kk = k[2:]
        ss = 2.0 * kk + a + b
        off[1:] = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (ss**2 * (ss + 1.0) * (ss - 1.0))
    return diag, np.sqrt(off)


def gauss_jacobi(m: int, a: float, b: float, tol: float = 1e-14, max_newton: int = 20) -> QuadratureRule:
    """m-point Gauss rule for the weight (1-t)^a (1+t)^b on [-1, 1].

    Eigenvalues of the Jacobi matrix seed a Newton iteration on the
    three-term recurrence, which polishes each node to ``tol``.
    """
    if int(m) != m or m < 1:
        raise DomainError("number of nodes must be a positive integer")
    if a <= -1.0 or b <= -1.0:
        raise DomainError("Jacobi exponents must exceed -1")
    m = int(m)
    if m == 1:
        x = np.array([(b - a) / (a + b + 2.0)])
    else:
        diag, off = _jacobi_matrix(m, a, b)
        x = np.sort(eigh_tridiagonal(diag, off, eigvals_only=True))
    for _ in range(max_newton):
        step = jacobi(m, a, b, x) / jacobi_derivative(m, a, b, x)
        x = x - step
        if np.max(np.abs(step)) < tol:
            break
    dp = jacobi_derivative(m, a, b, x)
    log_c = (
        (a + b + 1.0) * math.log(2.0)
        + ln_gamma(m + a + 1.0)
        + ln_gamma(m + b + 1.0)
        - ln_gamma(m + a + b + 1.0)
        - ln_gamma(m + 1.0)
    )
    w = math.exp(log_c) / ((1.0 - x * x) * dp * dp)
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(nodes=x, weights=w, exponent_pair=(float(a), float(b)))
