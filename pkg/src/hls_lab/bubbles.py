"""Sharp constants, bubble manifolds and conformal transfer.

Bubbles are restricted to the polar axis: the conformal center is
xi = zeta * e with |zeta| < 1, so every bubble is zonal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, LiftOverflowError
from .specialfuncs import ln_gamma
from .sphere import Params, ZonalField, ZonalGrid


class BubbleKind(str, enum.Enum):
    HLS = "hls"
    SOBOLEV = "sobolev"


def bubble_exponent(params: Params, kind: BubbleKind | str) -> float:
    kind = BubbleKind(kind)
    if kind is BubbleKind.HLS:
        return (params.n + 2.0 * params.s) / 2.0
    return (params.n - 2.0 * params.s) / 2.0


@dataclass(frozen=True)
class Constants:
    S: float
    c_crit: float
    d_crit: float
    C_loc: float
    K_cmp: float
    C_ps: float
    C_case1: float
    C_case2: float
    gamma_ratio: float  # Gamma(n/2+s) / Gamma(n/2-s)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def constants(params: Params) -> Constants:
    n, s = params.n, params.s
    area = params.area
    log_ratio = ln_gamma(n / 2 + s) - ln_gamma(n / 2 - s)
    ratio = math.exp(log_ratio)
    S = math.exp(ln_gamma((n + 2 * s) / 2) - ln_gamma((n - 2 * s) / 2)) * area ** (2 * s / n)
    area_factor = area ** (-2 * s / n)
    c1 = (
        math.exp(ln_gamma(n / 2 - s + 1) - ln_gamma(n / 2 + s + 1))
        * s
        / (n / 2 + s + 1)
        * area_factor
        * math.sqrt(2 * s / (n + 2 * s))
    )
    c2 = (2 * s / (n + 2 * s)) * area_factor / ratio
    c_loc = min(c1, c2)
    return Constants(
        S=S,
        c_crit=math.exp(log_ratio * (n + 2 * s) / (4 * s)),
        d_crit=math.exp(log_ratio * (n - 2 * s) / (4 * s)),
        C_loc=c_loc,
        K_cmp=1.0 + 2.0 * S * math.sqrt(2.0 * (n + 2 * s) / (n - 2 * s)),
        C_ps=c_loc,
        C_case1=c1,
        C_case2=c2,
        gamma_ratio=ratio,
    )


def critical_amplitude(params: Params, kind: BubbleKind | str = BubbleKind.HLS) -> float:
    c = constants(params)
    return c.c_crit if BubbleKind(kind) is BubbleKind.HLS else c.d_crit


def energy_level(params: Params) -> float:
    """S^{n/(2s)}: the L^p energy of every critical bubble."""
    return constants(params).S ** (params.n / (2.0 * params.s))


@dataclass(frozen=True)
class BubbleParams:
    c: float
    zeta: float = 0.0

    def __post_init__(self):
        if not abs(self.zeta) < 1.0:
            raise DomainError(f"|zeta| must be < 1, got {self.zeta}")


def _profile(t, zeta: float, k: float):
    # (sqrt(1 - zeta^2) / (1 - zeta t))^k, computed in logs.
    t = np.asarray(t, dtype=float)
    return np.exp(k * (0.5 * math.log1p(-zeta * zeta) - np.log1p(-zeta * t)))


def bubble_values(params: Params, bp: BubbleParams, t, kind: BubbleKind | str = BubbleKind.HLS):
    return bp.c * _profile(t, bp.zeta, bubble_exponent(params, kind))


def bubble_sphere(
    params: Params, bp: BubbleParams, kind: BubbleKind | str, grid: ZonalGrid
) -> ZonalField:
    """c (sqrt(1-zeta^2)/(1-zeta t))^{(n+2s)/2}, or exponent (n-2s)/2 for Sobolev bubbles."""
    if not abs(bp.zeta) < 1.0:
        raise DomainError("|zeta| must be < 1")
    return ZonalField(grid, bubble_values(params, bp, grid.nodes, kind))


def critical_bubble(grid: ZonalGrid, zeta: float = 0.0, kind: BubbleKind | str = BubbleKind.HLS) -> ZonalField:
    """Point of the critical manifold (fixed amplitude) centered at zeta."""
    p = grid.params
    return bubble_sphere(p, BubbleParams(critical_amplitude(p, kind), zeta), kind, grid)


def tangent_fields(
    params: Params, bp: BubbleParams, grid: ZonalGrid, kind: BubbleKind | str = BubbleKind.HLS
) -> tuple[ZonalField, ZonalField]:
    """Partial derivatives of the bubble in c and in zeta."""
    d_c, d_z, _ = _bubble_derivatives(params, bp, grid.nodes, kind)
    return ZonalField(grid, d_c), ZonalField(grid, d_z)


def _bubble_derivatives(params: Params, bp: BubbleParams, t, kind):
    k = bubble_exponent(params, kind)
    z = bp.zeta
    base = _profile(t, z, k)
    g = -z / (1.0 - z * z) + t / (1.0 - z * t)
    dg = -(1.0 + z * z) / (1.0 - z * z) ** 2 + t * t / (1.0 - z * t) ** 2
    return base, bp.c * base * k * g, bp.c * base * (k * k * g * g + k * dg)


def bubble_zeta_second_derivative(params: Params, bp: BubbleParams, grid: ZonalGrid, kind=BubbleKind.HLS) -> ZonalField:
    return ZonalField(grid, _bubble_derivatives(params, bp, grid.nodes, kind)[2])


def mobius(t, zeta: float):
    """Axial conformal map of S^n in the polar coordinate: t -> (t - zeta)/(1 - zeta t)."""
    t = np.asarray(t, dtype=float)
    return (t - zeta) / (1.0 - zeta * t)


def conformal_transform(
    v: ZonalField | Callable[[np.ndarray], np.ndarray],
    zeta: float,
    grid: ZonalGrid | None = None,
    kind: BubbleKind | str = BubbleKind.HLS,
) -> ZonalField:
    """Pull v back by the axial conformal map with the weight that keeps the
    relevant norm invariant: J^{(n+2s)/(2n)} for L^{2n/(n+2s)}, J^{(n-2s)/(2n)} for H^s.

    ``transform(transform(v, z), -z) == v``; constants become bubbles centered at zeta.
    """
    if not abs(zeta) < 1.0:
        raise DomainError("|zeta| must be < 1")
    if isinstance(v, ZonalField):
        grid = v.grid if grid is None else grid
        fn = v.at
    else:
        if grid is None:
            raise DomainError("a grid is required when transforming a callable")
        fn = v
    t = grid.nodes
    weight = _profile(t, zeta, bubble_exponent(grid.params, kind))
    return ZonalField(grid, weight * fn(mobius(t, zeta)))


def stereo_radii(grid: ZonalGrid) -> np.ndarray:
    """Radii of the stereographic preimages of the nodes; t = 1 is the origin."""
    t = grid.nodes
    return np.sqrt((1.0 - t) / (1.0 + t))


def stereo_lift(f, grid: ZonalGrid) -> ZonalField:
    """u = ((1+|x|^2)/2)^{(n+2s)/2} f on the sphere; f radial, given as a
    callable of r or as samples at ``stereo_radii(grid)``."""
    r = stereo_radii(grid)
    vals = np.asarray(f(r) if callable(f) else f, dtype=float)
    k = bubble_exponent(grid.params, BubbleKind.HLS)
    with np.errstate(over="ignore", invalid="ignore"):
        out = ((1.0 + r * r) / 2.0) ** k * vals
    if not np.all(np.isfinite(out)):
        raise LiftOverflowError("stereographic lift is unbounded on the grid")
    return ZonalField(grid, out)


def stereo_project(u: ZonalField) -> np.ndarray:
    """Inverse of ``stereo_lift``: radial samples at ``stereo_radii(grid)``."""
    r = stereo_radii(u.grid)
    k = bubble_exponent(u.params, BubbleKind.HLS)
    return (2.0 / (1.0 + r * r)) ** k * u.values


def hls_bubble_rn(params: Params, r, lam: float = 1.0, amplitude: float | None = None):
    """c_{n,s} (lam / (1 + lam^2 r^2))^{(n+2s)/2} on R^n, centered at the origin."""
    c = constants(params).c_crit if amplitude is None else amplitude
    r = np.asarray(r, dtype=float)
    return c * (lam / (1.0 + lam * lam * r * r)) ** bubble_exponent(params, BubbleKind.HLS)


def zeta_from_dilation(lam: float) -> float:
    """Axial parameter of the sphere bubble that a dilation by ``lam`` lifts to."""
    return (lam * lam - 1.0) / (lam * lam + 1.0)
