"""Distances from a zonal field to the bubble manifolds.

Two metrics are used.  The L^{2n/(n+2s)} distance has no Hilbert structure
and is minimized by a derivative-free simplex search with multistart.  The
H^{-s} distance <P(u-v), u-v> is smooth in the axial parameter and is
minimized in one dimension with a scan, golden section and Newton polish.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .bubbles import (
    BubbleKind,
    BubbleParams,
    bubble_sphere,
    bubble_zeta_second_derivative,
    constants,
    tangent_fields,
)
from .operators import pairing_A, pairing_P
from .sphere import ZonalField, lp_norm

ZETA_CLAMP = 0.995
SIMPLEX_TOL = 1e-9
STATIONARY_TOL = 1e-8
ZETA_STARTS = (-0.8, -0.4, 0.0, 0.4, 0.8)
AMPLITUDE_STARTS = (0.2, 0.65, 1.1, 1.55, 2.0)


class Manifold(str, enum.Enum):
    """``M``: amplitude free; ``CRITICAL``: amplitude fixed at c_{n,s}."""

    M = "M"
    CRITICAL = "critical"


@dataclass(frozen=True)
class ProjectionResult:
    bp: BubbleParams
    dist: float
    converged: bool
    iterations: int
    multistart_spread: float
    boundary_hit: bool = False
    stationarity: float = 0.0


def _lp_objective(u: ZonalField, p: float, kind: BubbleKind):
    params, grid, vals = u.params, u.grid, u.values

    def f(c: float, zeta: float) -> float:
        z = min(max(zeta, -ZETA_CLAMP), ZETA_CLAMP)
        v = bubble_sphere(params, BubbleParams(c, z), kind, grid).values
        return grid.integrate(np.abs(vals - v) ** p)

    return f


def _scale(u: ZonalField, p: float) -> float:
    return u.grid.integrate(np.abs(u.values) ** p) + 1e-300


def _simplex_diameter(simplex: np.ndarray) -> float:
    return float(np.max(np.abs(simplex - simplex[0])))


def _pick(results):
    # Smallest distance; ties (within 1e-12 relative) go to the smallest |zeta|.
    best = min(r[0] for r in results)
    tie = [r for r in results if r[0] <= best * (1.0 + 1e-12) + 1e-300]
    return min(tie, key=lambda r: abs(r[2]))


def nearest_bubble_Lp(
    u: ZonalField,
    manifold: Manifold | str = Manifold.CRITICAL,
    kind: BubbleKind | str = BubbleKind.HLS,
    max_iter: int = 4000,
) -> ProjectionResult:
    """Nearest bubble in L^p, p = 2n/(n+2s), by Nelder-Mead from a fixed start set."""
    manifold = Manifold(manifold)
    kind = BubbleKind(kind)
    params = u.params
    p = params.p
    c0 = constants(params).c_crit if kind is BubbleKind.HLS else constants(params).d_crit
    f = _lp_objective(u, p, kind)

    if manifold is Manifold.M and not np.any(u.values):
        return ProjectionResult(BubbleParams(0.0, 0.0), 0.0, True, 0, 0.0, boundary_hit=True)

    bounds_z = (-ZETA_CLAMP, ZETA_CLAMP)
    # Function-value tolerance relative to the undisplaced field's size.
    fatol = 1e-16 * max(f(0.0, 0.0), _scale(u, p))
    found = []
    for zs in ZETA_STARTS:
        if manifold is Manifold.M:
            for cs in AMPLITUDE_STARTS:
                x0 = np.array([cs * c0, zs])
                init = np.array([x0, x0 + [0.05 * c0, 0.0], x0 + [0.0, 0.05]])
                init[:, 1] = np.clip(init[:, 1], *bounds_z)
                res = minimize(
                    lambda x: f(x[0], x[1]),
                    x0,
                    method="Nelder-Mead",
                    bounds=[(None, None), bounds_z],
                    options={"xatol": 1e-11, "fatol": fatol, "maxiter": max_iter, "initial_simplex": init},
                )
                diam = _simplex_diameter(res.final_simplex[0])
                found.append((float(res.fun), float(res.x[0]), float(res.x[1]), res.nit, diam))
        else:
            x0 = np.array([zs])
            init = np.array([[zs], [zs + (0.05 if zs < 0.9 else -0.05)]])
            res = minimize(
                lambda x: f(c0, x[0]),
                x0,
                method="Nelder-Mead",
                bounds=[bounds_z],
                options={"xatol": 1e-11, "fatol": fatol, "maxiter": max_iter, "initial_simplex": init},
            )
            diam = _simplex_diameter(res.final_simplex[0])
            found.append((float(res.fun), c0, float(res.x[0]), res.nit, diam))

    fun, c, z, nit, diam = _pick(found)
    dists = [max(r[0], 0.0) ** (1.0 / p) for r in found]
    boundary = abs(z) >= ZETA_CLAMP - 1e-9 or (manifold is Manifold.M and abs(c) <= 1e-8 * c0)
    return ProjectionResult(
        bp=BubbleParams(c, z),
        dist=max(fun, 0.0) ** (1.0 / p),
        converged=bool(diam <= SIMPLEX_TOL),
        iterations=int(sum(r[3] for r in found)),
        multistart_spread=float(max(dists) - min(dists)),
        boundary_hit=boundary,
    )


def _p_metric(u: ZonalField, c: float, kind: BubbleKind):
    params, grid = u.params, u.grid

    def G(z: float) -> float:
        d = u - bubble_sphere(params, BubbleParams(c, z), kind, grid)
        return pairing_P(d)

    def derivs(z: float) -> tuple[float, float]:
        bp = BubbleParams(c, z)
        d = u - bubble_sphere(params, bp, kind, grid)
        _, dz = tangent_fields(params, bp, grid, kind)
        d2 = bubble_zeta_second_derivative(params, bp, grid, kind)
        g1 = -2.0 * pairing_P(d, dz)
        g2 = 2.0 * pairing_P(dz) - 2.0 * pairing_P(d, d2)
        return g1, g2

    return G, derivs


def nearest_bubble_P(
    u: ZonalField,
    kind: BubbleKind | str = BubbleKind.HLS,
    scan_points: int = 81,
    max_newton: int = 30,
) -> ProjectionResult:
    """Minimize <P(u - v_zeta), u - v_zeta> over zeta with the critical amplitude."""
    kind = BubbleKind(kind)
    params = u.params
    cst = constants(params)
    c = cst.c_crit if kind is BubbleKind.HLS else cst.d_crit
    G, derivs = _p_metric(u, c, kind)

    zs = np.linspace(-ZETA_CLAMP, ZETA_CLAMP, scan_points)
    vals = np.array([G(z) for z in zs])
    best = float(vals.min())
    cand = np.flatnonzero(vals <= best * (1.0 + 1e-12) + 1e-300)
    i = int(cand[np.argmin(np.abs(zs[cand]))])
    lo, hi = zs[max(i - 1, 0)], zs[min(i + 1, len(zs) - 1)]
    if hi - lo > 0 and 0 < i < len(zs) - 1:
        gs = minimize_scalar(G, bracket=(lo, zs[i], hi), method="golden", tol=1e-10)
        z = float(np.clip(gs.x, -ZETA_CLAMP, ZETA_CLAMP))
        iters = int(gs.nit)
    else:
        z, iters = float(zs[i]), 0

    g1 = 0.0
    for _ in range(max_newton):
        g1, g2 = derivs(z)
        if abs(g1) <= 1e-15 or g2 <= 0:
            break
        step = g1 / g2
        z_new = float(np.clip(z - step, -ZETA_CLAMP, ZETA_CLAMP))
        iters += 1
        if abs(z_new - z) <= 1e-15:
            z = z_new
            break
        z = z_new
    g1, _ = derivs(z)
    # Scan minima that the polish did not visit give the spread.
    local = [vals[j] for j in range(1, len(zs) - 1) if vals[j] <= vals[j - 1] and vals[j] <= vals[j + 1]]
    final = max(G(z), 0.0)
    spread = math.sqrt(max(local)) - math.sqrt(final) if len(local) > 1 else 0.0
    return ProjectionResult(
        bp=BubbleParams(c, z),
        dist=math.sqrt(final),
        converged=abs(g1) <= STATIONARY_TOL,
        iterations=iters,
        multistart_spread=max(spread, 0.0),
        boundary_hit=abs(z) >= ZETA_CLAMP - 1e-12,
        stationarity=abs(g1),
    )


class Orthogonality(NamedTuple):
    value: float
    degenerate: bool


def orthogonality_check(u: ZonalField, pr: ProjectionResult, kind: BubbleKind | str = BubbleKind.HLS) -> Orthogonality:
    """Normalized <P(u - phi), d_zeta phi>; degenerate when u - phi vanishes."""
    params = u.params
    phi = bubble_sphere(params, pr.bp, kind, u.grid)
    r = u - phi
    _, dz = tangent_fields(params, pr.bp, u.grid, kind)
    nr = math.sqrt(max(pairing_P(r), 0.0))
    nd = math.sqrt(max(pairing_P(dz), 0.0))
    scale = math.sqrt(max(pairing_P(u), 0.0))
    if nr <= 1e-12 * max(scale, 1e-300) or nd == 0.0:
        return Orthogonality(0.0, True)
    return Orthogonality(abs(pairing_P(r, dz)) / (nr * nd), False)


@dataclass(frozen=True)
class Comparison:
    d_lp: float
    lp_dist_to_P_minimizer: float
    ratio: float
    bound: float
    in_regime: bool
    holds: bool


def comparison_verify(u: ZonalField, rel_tol: float = 1e-7) -> Comparison:
    """d_lp <= ||u - phi_P||_p <= K d_lp with phi_P the H^{-s} minimizer."""
    params = u.params
    cst = constants(params)
    lp = nearest_bubble_Lp(u, Manifold.CRITICAL)
    pp = nearest_bubble_P(u)
    phi = bubble_sphere(params, pp.bp, BubbleKind.HLS, u.grid)
    other = lp_norm(u - phi, params.p)
    if lp.dist == 0.0:
        ratio = 1.0 if other == 0.0 else math.inf
    else:
        ratio = other / lp.dist
    regime = lp.dist <= 0.1 * cst.S ** ((params.n + 2 * params.s) / (4 * params.s))
    holds = (1.0 - rel_tol) <= ratio <= cst.K_cmp
    return Comparison(float(lp.dist), float(other), float(ratio), cst.K_cmp, bool(regime), bool(holds))


def nearest_bubble_Hs(u: ZonalField, scan_points: int = 81) -> ProjectionResult:
    """Minimize the H^s distance to Sobolev bubbles with amplitude d_{n,s} over zeta."""
    params, grid = u.params, u.grid
    d = constants(params).d_crit

    def G(z: float) -> float:
        return pairing_A(u - bubble_sphere(params, BubbleParams(d, z), BubbleKind.SOBOLEV, grid))

    zs = np.linspace(-ZETA_CLAMP, ZETA_CLAMP, scan_points)
    vals = np.array([G(z) for z in zs])
    best = float(vals.min())
    cand = np.flatnonzero(vals <= best * (1.0 + 1e-12) + 1e-300)
    i = int(cand[np.argmin(np.abs(zs[cand]))])
    lo, hi = zs[max(i - 1, 0)], zs[min(i + 1, len(zs) - 1)]
    res = minimize_scalar(G, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    z, val = (float(res.x), float(res.fun)) if res.fun <= best else (float(zs[i]), best)
    local = [vals[j] for j in range(1, len(zs) - 1) if vals[j] <= vals[j - 1] and vals[j] <= vals[j + 1]]
    spread = math.sqrt(max(local)) - math.sqrt(max(val, 0.0)) if len(local) > 1 else 0.0
    return ProjectionResult(
        bp=BubbleParams(d, z),
        dist=math.sqrt(max(val, 0.0)),
        converged=bool(res.success),
        iterations=int(res.nfev) + scan_points,
        multistart_spread=max(spread, 0.0),
        boundary_hit=abs(z) >= ZETA_CLAMP - 1e-12,
    )
