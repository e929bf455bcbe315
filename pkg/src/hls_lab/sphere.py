"""Axially symmetric (zonal) functions on S^n.

A zonal function depends only on t = omega . e for a fixed pole e. Its
integral over S^n reduces to

    |S^{n-1}| * int_{-1}^{1} g(t) (1 - t^2)^{(n-2)/2} dt,

so a Gauss-Jacobi rule with exponents ((n-2)/2, (n-2)/2) scaled by
|S^{n-1}| is an exact surface-measure rule for polynomial g.  Degree-l
zonal harmonics are Gegenbauer polynomials C_l^{(n-1)/2}(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .errors import ConfigurationError, DomainError
from .specialfuncs import QuadratureRule, gauss_jacobi, ln_gamma

DEFAULT_L = 32
DEFAULT_M = 80


def _area(k: int) -> float:
    # |S^k| for k >= 0; |S^0| = 2 counts the two points of the 0-sphere.
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.exp(ln_gamma((k + 1) / 2.0))


def sphere_area(n: int) -> float:
    """Surface area |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)."""
    if int(n) != n or n < 1:
        raise DomainError(f"sphere dimension must be an integer >= 1, got {n!r}")
    return _area(int(n))


@dataclass(frozen=True)
class Params:
    """Dimension ``n`` and fractional order ``s`` with 0 < s < n/2."""

    n: int
    s: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n!r}")
        if not (0.0 < self.s < self.n / 2.0):
            raise DomainError(f"need 0 < s < n/2, got n={self.n}, s={self.s}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", float(self.s))

    @property
    def p(self) -> float:
        """HLS exponent 2n/(n+2s)."""
        return 2.0 * self.n / (self.n + 2.0 * self.s)

    @property
    def q(self) -> float:
        """Dual (Sobolev) exponent 2n/(n-2s)."""
        return 2.0 * self.n / (self.n - 2.0 * self.s)

    @property
    def hls_power(self) -> float:
        """(n-2s)/(n+2s): the map v -> |v|^{-4s/(n+2s)} v is sign(v)|v|^this."""
        return (self.n - 2.0 * self.s) / (self.n + 2.0 * self.s)

    @property
    def sobolev_power(self) -> float:
        """(n+2s)/(n-2s): the map v -> |v|^{4s/(n-2s)} v is sign(v)|v|^this."""
        return (self.n + 2.0 * self.s) / (self.n - 2.0 * self.s)

    @property
    def alpha(self) -> float:
        return (self.n - 1) / 2.0

    @property
    def area(self) -> float:
        return sphere_area(self.n)


def _orthonormal_zonal_basis(n: int, L: int, t: np.ndarray) -> np.ndarray:
    """Rows l = 0..L: zonal harmonics of degree l, unit norm in L^2(S^n)."""
    t = np.asarray(t, dtype=float)
    out = np.empty((L + 1,) + t.shape)
    lower = _area(n - 1)
    if n == 1:
        # Circle: harmonics are cos(l theta) = T_l(t).
        out[0] = 1.0 / math.sqrt(2.0 * math.pi)
        prev, cur = np.ones_like(t), t.copy()
        if L >= 1:
            out[1] = cur / math.sqrt(math.pi)
        for l in range(2, L + 1):
            prev, cur = cur, 2.0 * t * cur - prev
            out[l] = cur / math.sqrt(math.pi)
        return out
    alpha = (n - 1) / 2.0
    prev = np.ones_like(t)
    cur = 2.0 * alpha * t
    for l in range(L + 1):
        if l == 0:
            c = prev
        elif l == 1:
            c = cur
        else:
            prev, cur = cur, (2.0 * t * (l + alpha - 1.0) * cur - (l + 2.0 * alpha - 2.0) * prev) / l
            c = cur
        log_h = (
            math.log(math.pi)
            + (1.0 - 2.0 * alpha) * math.log(2.0)
            + ln_gamma(l + 2.0 * alpha)
            - ln_gamma(l + 1.0)
            - math.log(l + alpha)
            - 2.0 * ln_gamma(alpha)
        )
        out[l] = c / math.sqrt(lower * math.exp(log_h))
    return out


@dataclass(frozen=True, eq=False)
class ZonalGrid:
    params: Params
    L: int
    rule: QuadratureRule
    measure_weights: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def m(self) -> int:
        return len(self.rule)

    @cached_property
    def basis(self) -> np.ndarray:
        """(L+1, m) matrix of orthonormal zonal harmonics at the nodes."""
        b = _orthonormal_zonal_basis(self.params.n, self.L, self.nodes)
        b.flags.writeable = False
        return b

    @cached_property
    def _bary_weights(self) -> np.ndarray:
        return BarycentricInterpolator(self.nodes).wi

    def harmonic_values(self, t) -> np.ndarray:
        """Orthonormal zonal harmonics of degree 0..L at arbitrary t."""
        return _orthonormal_zonal_basis(self.params.n, self.L, np.asarray(t, dtype=float))

    def integrate(self, values) -> float:
        return float(np.dot(self.measure_weights, values))

    def field(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ZonalField":
        """Sample a function of t = omega . e at the nodes."""
        return ZonalField(self, np.broadcast_to(np.asarray(fn(self.nodes), dtype=float), self.nodes.shape))

    def constant(self, value: float) -> "ZonalField":
        return ZonalField(self, np.full(self.m, float(value)))

    def harmonic(self, l: int) -> "ZonalField":
        """Unit-L^2 zonal harmonic of degree l."""
        if not 0 <= l <= self.L:
            raise ConfigurationError(f"degree {l} outside 0..{self.L}")
        return ZonalField(self, self.basis[l])


def build_grid(params: Params, L: int = DEFAULT_L, m: int | None = None) -> ZonalGrid:
    """Zonal grid with spectral cutoff L and m Gauss-Jacobi nodes (default 2L+16)."""
    if L < 2:
        raise ConfigurationError("spectral cutoff L must be >= 2")
    if m is None:
        m = 2 * L + 16
    if m < 2 * L + 4:
        raise ConfigurationError(f"need m >= 2L+4 = {2 * L + 4} nodes, got {m}")
    a = (params.n - 2) / 2.0
    rule = gauss_jacobi(m, a, a)
    w = rule.weights * _area(params.n - 1)
    w.flags.writeable = False
    return ZonalGrid(params=params, L=int(L), rule=rule, measure_weights=w)


@dataclass(frozen=True)
class SpectralCoeffs:
    """Coefficients a_0..a_L in the orthonormal zonal-harmonic basis."""

    a: np.ndarray

    @property
    def L(self) -> int:
        return len(self.a) - 1


class ZonalField:
    """Node values of a zonal function on a fixed grid; immutable."""

    def __init__(self, grid: ZonalGrid, values):
        vals = np.array(values, dtype=float)
        if vals.shape != grid.nodes.shape:
            raise ConfigurationError(f"expected {grid.m} node values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        vals.flags.writeable = False
        self.grid = grid
        self.values = vals

    @property
    def params(self) -> Params:
        return self.grid.params

    @cached_property
    def coeffs(self) -> SpectralCoeffs:
        return analyze(self)

    def at(self, t) -> np.ndarray:
        """Evaluate anywhere in [-1, 1] by barycentric interpolation through the nodes."""
        interp = BarycentricInterpolator(self.grid.nodes, self.values, wi=self.grid._bary_weights)
        return interp(np.asarray(t, dtype=float))

    def _check(self, other: "ZonalField") -> None:
        if other.grid is not self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, ZonalField):
            self._check(other)
            return ZonalField(self.grid, self.values + other.values)
        return ZonalField(self.grid, self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ZonalField):
            self._check(other)
            return ZonalField(self.grid, self.values - other.values)
        return ZonalField(self.grid, self.values - float(other))

    def __rsub__(self, other):
        return ZonalField(self.grid, float(other) - self.values)

    def __mul__(self, k):
        if isinstance(k, ZonalField):
            self._check(k)
            return ZonalField(self.grid, self.values * k.values)
        return ZonalField(self.grid, self.values * float(k))

    __rmul__ = __mul__

    def __neg__(self):
        return ZonalField(self.grid, -self.values)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ZonalField":
        return ZonalField(self.grid, fn(self.values))

    def reflect(self) -> "ZonalField":
        """u(t) -> u(-t); the node set is symmetric, so this is a reversal."""
        return ZonalField(self.grid, self.values[::-1])

    def __repr__(self) -> str:
        return f"ZonalField(n={self.params.n}, s={self.params.s}, m={self.grid.m})"


def analyze(u: ZonalField) -> SpectralCoeffs:
    """Orthogonal projection onto zonal harmonics of degree <= L."""
    g = u.grid
    return SpectralCoeffs(g.basis @ (g.measure_weights * u.values))


def synthesize(c: SpectralCoeffs | np.ndarray, grid: ZonalGrid) -> ZonalField:
    a = c.a if isinstance(c, SpectralCoeffs) else np.asarray(c, dtype=float)
    if len(a) != grid.L + 1:
        raise ConfigurationError(f"coefficient cutoff {len(a) - 1} does not match grid cutoff {grid.L}")
    return ZonalField(grid, a @ grid.basis)


def lp_norm(u: ZonalField, p: float) -> float:
    if p < 1.0:
        raise DomainError(f"L^p norm needs p >= 1, got {p}")
    return u.grid.integrate(np.abs(u.values) ** p) ** (1.0 / p)


def inner(u: ZonalField, v: ZonalField) -> float:
    u._check(v)
    return u.grid.integrate(u.values * v.values)


def truncation_error(u: ZonalField) -> float:
    """Relative L^2 size of what the degree-L projection misses."""
    tail = u - synthesize(u.coeffs, u.grid)
    base = lp_norm(u, 2.0)
    return lp_norm(tail, 2.0) / base if base > 0 else 0.0
