"""The fractional integral operator on S^n and the quantities built on it.

The operator is diagonal on spherical harmonics (Funk-Hecke), so the
spectral route multiplies Gegenbauer coefficients.  ``apply_P2s_direct``
integrates the Riesz kernel instead and serves as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .bubbles import constants
from .errors import SingularityError
from .specialfuncs import gauss_jacobi, ln_gamma
from .sphere import Params, ZonalField, _area, lp_norm, synthesize


def funk_hecke_multiplier(params: Params, l: int) -> float:
    """Gamma(l + n/2 - s) / Gamma(l + n/2 + s)."""
    h = params.n / 2.0
    return math.exp(ln_gamma(l + h - params.s) - ln_gamma(l + h + params.s))


@dataclass(frozen=True)
class MultiplierTable:
    lambdas: np.ndarray

    @property
    def L(self) -> int:
        return len(self.lambdas) - 1


@lru_cache(maxsize=64)
def multiplier_table(params: Params, L: int) -> MultiplierTable:
    lam = np.array([funk_hecke_multiplier(params, l) for l in range(L + 1)])
    lam.flags.writeable = False
    return MultiplierTable(lam)


def _lambdas(u: ZonalField) -> np.ndarray:
    return multiplier_table(u.params, u.grid.L).lambdas


def apply_P2s(u: ZonalField) -> ZonalField:
    return synthesize(_lambdas(u) * u.coeffs.a, u.grid)


def apply_A2s(u: ZonalField) -> ZonalField:
    """Spectral inverse of ``apply_P2s`` on degrees <= L (higher degrees are dropped)."""
    return synthesize(u.coeffs.a / _lambdas(u), u.grid)


def pairing_P(u: ZonalField, v: ZonalField | None = None) -> float:
    """<P u, v> computed in coefficient space."""
    a = u.coeffs.a
    b = a if v is None else v.coeffs.a
    return float(np.sum(_lambdas(u) * a * b))


def pairing_A(u: ZonalField, v: ZonalField | None = None) -> float:
    a = u.coeffs.a
    b = a if v is None else v.coeffs.a
    return float(np.sum(a * b / _lambdas(u)))


def h_norms(u: ZonalField) -> tuple[float, float]:
    """(H^{-s} norm <Pu,u>^{1/2}, H^s norm <Au,u>^{1/2})."""
    return math.sqrt(max(pairing_P(u), 0.0)), math.sqrt(max(pairing_A(u), 0.0))


def riesz_constant(params: Params) -> float:
    n, s = params.n, params.s
    return math.exp(ln_gamma(n / 2 - s) - ln_gamma(s)) / (2.0 ** (2 * s) * math.pi ** (n / 2))


def staggered_angles(grid, count: int | None = None) -> np.ndarray:
    """cos of the midpoints (in polar angle) between consecutive nodes."""
    theta = np.arccos(grid.nodes)[::-1]
    mid = 0.5 * (theta[1:] + theta[:-1])
    if count is not None and count < len(mid):
        mid = mid[np.linspace(0, len(mid) - 1, count).round().astype(int)]
    return np.cos(mid)


def apply_P2s_direct(u: ZonalField, eval_t, n_radial: int = 64, n_azimuth: int = 48) -> np.ndarray:
    """Riesz-kernel quadrature of (P u)(t0) at each t0 in ``eval_t``.

    Coordinates are centered at the evaluation point omega: xi = x omega +
    sqrt(1-x^2) nu with nu on the equatorial S^{n-1}.  The kernel then
    depends on x alone and, together with the surface measure, becomes the
    Jacobi weight (1-x)^{s-1} (1+x)^{(n-2)/2}; the S^{n-1} average of u is a
    Gegenbauer-weighted integral over y = nu . e'.  u is evaluated off-grid
    by barycentric interpolation of its node values.
    """
    params = u.params
    n, s = params.n, params.s
    t0 = np.atleast_1d(np.asarray(eval_t, dtype=float))
    gap = np.min(np.abs(t0[:, None] - u.grid.nodes[None, :]), axis=1)
    if np.any(gap < 1e-12):
        raise SingularityError("evaluation angle coincides with a quadrature node")

    radial = gauss_jacobi(n_radial, s - 1.0, (n - 2) / 2.0)
    x, wx = radial.nodes, radial.weights
    if n == 1:
        y, wy = np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    else:
        az = gauss_jacobi(n_azimuth, (n - 3) / 2.0, (n - 3) / 2.0)
        y, wy = az.nodes, az.weights * _area(n - 2)

    sx = np.sqrt(1.0 - x * x)
    out = np.empty_like(t0)
    for i, t in enumerate(t0):
        arg = t * x[:, None] + math.sqrt(max(1.0 - t * t, 0.0)) * sx[:, None] * y[None, :]
        vals = u.at(np.clip(arg, -1.0, 1.0).ravel()).reshape(arg.shape)
        out[i] = wx @ (vals @ wy)
    return riesz_constant(params) * 2.0 ** (-(n - 2 * s) / 2.0) * out


def hls_map(v, params: Params):
    """|v|^{-4s/(n+2s)} v, extended by 0 at v = 0."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.abs(v) ** params.hls_power


def sobolev_map(v, params: Params):
    """|v|^{4s/(n-2s)} v."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.abs(v) ** params.sobolev_power


class Residual(NamedTuple):
    field: ZonalField
    norm: float


def hls_deficit(u: ZonalField) -> float:
    """||u||_p^2 - S <P u, u> with p = 2n/(n+2s); nonnegative by the sharp HLS inequality."""
    return lp_norm(u, u.params.p) ** 2 - constants(u.params).S * pairing_P(u)


def hls_residual(u: ZonalField) -> Residual:
    """Pointwise |u|^{-4s/(n+2s)} u - P u and its L^{2n/(n-2s)} norm."""
    r = ZonalField(u.grid, hls_map(u.values, u.params)) - apply_P2s(u)
    return Residual(r, lp_norm(r, u.params.q))


def sobolev_residual(u: ZonalField) -> Residual:
    """A u - |u|^{4s/(n-2s)} u and its H^{-s} norm."""
    r = apply_A2s(u) - ZonalField(u.grid, sobolev_map(u.values, u.params))
    return Residual(r, h_norms(r)[0])
