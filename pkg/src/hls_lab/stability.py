"""Quantitative stability near the bubble manifold.

Stability quotients (residual over distance), the first-order expansion of
the residual around constants, Palais-Smale sequences and their single
bubble extraction, the sign-split identities, and the duality between the
Sobolev and HLS Euler-Lagrange residuals.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .bubbles import BubbleKind, BubbleParams, bubble_sphere, conformal_transform, constants, critical_bubble, energy_level
from .distance import Manifold, ProjectionResult, nearest_bubble_Hs, nearest_bubble_Lp, nearest_bubble_P
from .errors import PreconditionError
from .operators import (
    apply_P2s,
    funk_hecke_multiplier,
    h_norms,
    hls_map,
    hls_residual,
    sobolev_map,
    sobolev_residual,
)
from .specialfuncs import ln_gamma
from .sphere import Params, ZonalField, ZonalGrid, build_grid, inner, lp_norm, truncation_error

SLACK = 0.05
DEFAULT_EPS_LADDER = (1e-2, 5e-3, 2.5e-3)


# Local expansion around constants


def expansion_coefficient(params: Params, l: int, beta: float) -> float:
    """(n-2s)/(n+2s) (beta c_{n,s})^{-4s/(n+2s)} - lambda_l."""
    c = constants(params).c_crit
    w = 4.0 * params.s / (params.n + 2.0 * params.s)
    return params.hls_power * (beta * c) ** (-w) - funk_hecke_multiplier(params, l)


def gap_threshold(params: Params) -> float:
    h = params.n / 2.0
    return (h - params.s + 1.0) / (h + params.s + 1.0)


def gap_lower_bound(params: Params, beta: float) -> float:
    """Uniform lower bound for the coefficient over l >= 2."""
    h = params.n / 2.0
    w = 4.0 * params.s / (params.n + 2.0 * params.s)
    lead = math.exp(ln_gamma(h - params.s + 1.0) - ln_gamma(h + params.s + 1.0))
    return lead * (beta ** (-w) - gap_threshold(params))


def _richardson(eps: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    # Central differences carry only even powers of eps: fit a polynomial in
    # eps^2 through all points and read off the constant term.
    h2 = np.asarray(eps, dtype=float) ** 2
    V = np.vander(h2, len(h2), increasing=True)
    coef = np.linalg.solve(V, np.asarray(values, dtype=float))
    err = abs(coef[0] - values[-1]) if len(values) > 1 else math.inf
    return float(coef[0]), float(err)


def pairing_slope(grid: ZonalGrid, l: int, beta: float, eps_list=DEFAULT_EPS_LADDER) -> tuple[float, float, float]:
    """Slope at 0 of g(eps) = <hls_residual(beta c + eps Y_l), Y_l>.

    Returns (slope, error estimate, g(0)).
    """
    c = constants(grid.params).c_crit
    base = grid.constant(beta * c)
    Y = grid.harmonic(l)

    def g(e: float) -> float:
        return inner(hls_residual(base + e * Y).field, Y)

    diffs = [(g(e) - g(-e)) / (2.0 * e) for e in eps_list]
    slope, err = _richardson(eps_list, diffs)
    return slope, err, g(0.0)


@dataclass(frozen=True)
class ExpansionReport:
    n: int
    s: float
    l: int
    beta: float
    eps_list: tuple
    slope: float
    expected: float
    rel_error: float
    extrapolation_error: float
    g_at_zero: float
    gap_bound: float
    bound_holds: bool
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def local_expansion_check(
    params: Params,
    l: int,
    beta: float,
    eps_list=DEFAULT_EPS_LADDER,
    grid: ZonalGrid | None = None,
    tol: float = 1e-3,
) -> ExpansionReport:
    """Compare the fitted first-order coefficient with its closed form."""
    if l < 2:
        raise PreconditionError("the expansion check is for degrees l >= 2")
    w = 4.0 * params.s / (params.n + 2.0 * params.s)
    if not beta > 0 or not beta ** (-w) > gap_threshold(params):
        raise PreconditionError(f"beta={beta} is outside the coercive regime")
    grid = build_grid(params) if grid is None else grid
    slope, err, g0 = pairing_slope(grid, l, beta, eps_list)
    expected = expansion_coefficient(params, l, beta)
    rel = abs(slope - expected) / abs(expected)
    bound = gap_lower_bound(params, beta)
    return ExpansionReport(
        n=params.n,
        s=params.s,
        l=l,
        beta=beta,
        eps_list=tuple(eps_list),
        slope=slope,
        expected=expected,
        rel_error=rel,
        extrapolation_error=err,
        g_at_zero=g0,
        gap_bound=bound,
        bound_holds=bool(expected >= bound * (1.0 - 1e-12)),
        passed=bool(rel <= tol),
    )


def constant_mode_slope(params: Params, grid: ZonalGrid | None = None, eps_list=DEFAULT_EPS_LADDER) -> tuple[float, float]:
    """(|fitted slope|, lambda_0 4s/(n+2s)) for pure degree-0 perturbations of c_{n,s}."""
    grid = build_grid(params) if grid is None else grid
    slope, _, _ = pairing_slope(grid, 0, 1.0, eps_list)
    expected = funk_hecke_multiplier(params, 0) * 4.0 * params.s / (params.n + 2.0 * params.s)
    return abs(slope), expected


# Stability quotients


def energy(u: ZonalField) -> float:
    p = u.params.p
    return lp_norm(u, p) ** p


def in_energy_window(u: ZonalField) -> bool:
    e, e0 = energy(u), energy_level(u.params)
    return 0.5 * e0 <= e <= 1.5 * e0


@dataclass(frozen=True)
class QuotientValue:
    value: float
    residual_norm: float
    distance: float
    projection: ProjectionResult
    in_window: bool
    degenerate: bool


def quotient(u: ZonalField) -> QuotientValue:
    """HLS residual norm over the L^p distance to the critical manifold."""
    res = hls_residual(u).norm
    pr = nearest_bubble_Lp(u, Manifold.CRITICAL)
    scale = lp_norm(u, u.params.p)
    degenerate = pr.dist <= 1e-12 * max(scale, 1e-300)
    value = math.inf if degenerate else res / pr.dist
    return QuotientValue(value, res, pr.dist, pr, in_energy_window(u), degenerate)


def branch(u: ZonalField) -> str:
    """Which branch of the coercivity argument applies to u.

    The remainder after the H^{-s} projection is pulled back to the frame
    where the bubble is constant; ``case2`` when its degree-0 share is at
    least n/(n+2s), ``case1`` otherwise.
    """
    pr = nearest_bubble_P(u)
    phi = bubble_sphere(u.params, pr.bp, BubbleKind.HLS, u.grid)
    r = conformal_transform(u - phi, -pr.bp.zeta) if pr.bp.zeta != 0.0 else u - phi
    a = r.coeffs.a
    total = float(np.sum(a * a))
    if total == 0.0:
        return "none"
    n, s = u.params.n, u.params.s
    return "case2" if a[0] ** 2 >= n / (n + 2 * s) * total else "case1"


@dataclass(frozen=True)
class SurveyConfig:
    degrees: tuple = (0, 2, 3, 4)
    eps: tuple = (1e-2, 1e-3)
    betas: tuple = (0.95, 1.0, 1.05)
    zetas: tuple = (0.0, 0.4)

    def points(self) -> list[tuple[int, float, float, float]]:
        return list(product(self.degrees, self.eps, self.betas, self.zetas))


def survey_field(grid: ZonalGrid, l: int, eps: float, beta: float, zeta: float) -> ZonalField:
    """beta c_{n,s} + eps Y_l, re-centered at zeta by the conformal transform."""
    u = grid.constant(beta * constants(grid.params).c_crit) + eps * grid.harmonic(l)
    return conformal_transform(u, zeta) if zeta != 0.0 else u


@dataclass(frozen=True)
class QuotientRecord:
    l: int
    eps: float
    beta: float
    zeta: float
    residual_norm: float
    d_crit_manifold: float
    quotient: float
    branch: str
    in_window: bool
    converged: bool
    multistart_spread: float
    truncation_error: float


@dataclass
class QuotientReport:
    records: list[QuotientRecord] = field(default_factory=list)
    C_loc: float = 0.0

    @property
    def min_quotient(self) -> float:
        return min((r.quotient for r in self.records), default=math.inf)

    @property
    def argmin(self) -> int | None:
        if not self.records:
            return None
        return int(np.argmin([r.quotient for r in self.records]))

    @property
    def margin(self) -> float:
        return self.min_quotient / self.C_loc - 1.0 if self.records else math.inf

    def branch_min(self, name: str) -> float:
        return min((r.quotient for r in self.records if r.branch == name), default=math.inf)

    def conformal_deviation(self) -> float:
        """Largest relative gap between re-centered rows and their zeta = 0 twins."""
        base = {(r.l, r.eps, r.beta): r.quotient for r in self.records if r.zeta == 0.0}
        dev = 0.0
        for r in self.records:
            key = (r.l, r.eps, r.beta)
            if r.zeta != 0.0 and key in base:
                dev = max(dev, abs(r.quotient - base[key]) / abs(base[key]))
        return dev

    def summary(self, slack: float = SLACK) -> dict:
        return {
            "count": len(self.records),
            "min_quotient": self.min_quotient if self.records else None,
            "argmin": self.argmin,
            "C_loc": self.C_loc,
            "margin": self.margin if self.records else None,
            "min_case1": self.branch_min("case1") if self.records else None,
            "min_case2": self.branch_min("case2") if self.records else None,
            "conformal_deviation": self.conformal_deviation(),
            "passed": bool(not self.records or self.min_quotient >= self.C_loc * (1.0 - slack)),
        }


def _survey_point(grid: ZonalGrid, point) -> QuotientRecord:
    l, eps, beta, zeta = point
    u = survey_field(grid, l, eps, beta, zeta)
    q = quotient(u)
    nonlinear = ZonalField(grid, hls_map(u.values, grid.params))
    return QuotientRecord(
        l=int(l),
        eps=float(eps),
        beta=float(beta),
        zeta=float(zeta),
        residual_norm=q.residual_norm,
        d_crit_manifold=q.distance,
        quotient=q.value,
        branch=branch(u),
        in_window=q.in_window,
        converged=q.projection.converged,
        multistart_spread=q.projection.multistart_spread,
        truncation_error=truncation_error(nonlinear),
    )


def quotient_survey(
    params: Params,
    config: SurveyConfig | None = None,
    grid: ZonalGrid | None = None,
    workers: int = 1,
) -> QuotientReport:
    """Stability quotients over a grid of perturbed and re-centered constants.

    Records come back in grid order whatever the worker count.
    """
    config = SurveyConfig() if config is None else config
    grid = build_grid(params) if grid is None else grid
    points = config.points()
    if workers > 1 and len(points) > 1:
        grid.basis  # build shared caches before fanning out
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda pt: _survey_point(grid, pt), points))
    else:
        records = [_survey_point(grid, pt) for pt in points]
    return QuotientReport(records=records, C_loc=constants(params).C_loc)


# Palais-Smale sequences


class PSKind(str, enum.Enum):
    PERTURBATION = "perturbation"
    CONCENTRATION = "concentration"


@dataclass(frozen=True)
class PSTerm:
    k: int
    field: ZonalField
    zeta: float
    clamped: bool


@dataclass(frozen=True)
class PSSequence:
    kind: PSKind
    terms: tuple

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PSTerm]:
        return iter(self.terms)

    @property
    def fields(self) -> list[ZonalField]:
        return [t.field for t in self.terms]


def make_ps_sequence(
    grid: ZonalGrid,
    kind: PSKind | str = PSKind.PERTURBATION,
    k_max: int = 12,
    degree: int = 2,
    zeta: float = 0.0,
    clamp: float = 0.995,
) -> PSSequence:
    """f_k = bubble + 2^{-k} Y_degree, or critical bubbles centered at 1 - 2^{-k}."""
    if k_max < 3:
        raise PreconditionError("k_max must be at least 3")
    kind = PSKind(kind)
    terms = []
    if kind is PSKind.PERTURBATION:
        bubble = critical_bubble(grid, zeta)
        h = grid.harmonic(degree)
        for k in range(1, k_max + 1):
            terms.append(PSTerm(k, bubble + 2.0 ** (-k) * h, zeta, False))
    else:
        for k in range(1, k_max + 1):
            z = 1.0 - 2.0 ** (-k)
            clamped = z > clamp
            z = min(z, clamp)
            terms.append(PSTerm(k, critical_bubble(grid, z), z, clamped))
    return PSSequence(kind, tuple(terms))


@dataclass(frozen=True)
class StruweRecord:
    k: int
    residual_norm: float
    d_lp: float
    ratio: float
    pairing: float
    in_window: bool
    converged: bool


def struwe_extract(f: ZonalField, k: int = 0) -> tuple[ProjectionResult, StruweRecord]:
    """Nearest critical bubble phi and the monotone pairing <F(f) - F(phi), f - phi>."""
    params = f.params
    pr = nearest_bubble_Lp(f, Manifold.CRITICAL)
    phi = bubble_sphere(params, pr.bp, BubbleKind.HLS, f.grid)
    F = lambda v: ZonalField(f.grid, hls_map(v.values, params))  # noqa: E731
    pairing = inner(F(f) - F(phi), f - phi)
    res = hls_residual(f).norm
    ratio = res / pr.dist if pr.dist > 0 else math.inf
    return pr, StruweRecord(k, res, pr.dist, ratio, pairing, in_energy_window(f), pr.converged)


def _strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:]))


@dataclass
class StruweReport:
    records: list[StruweRecord]
    C_ps: float
    slack: float = SLACK
    ratio_from_k: int = 8

    @property
    def residual_decreasing(self) -> bool:
        return _strictly_decreasing([r.residual_norm for r in self.records])

    @property
    def distance_decreasing(self) -> bool:
        return _strictly_decreasing([r.d_lp for r in self.records])

    @property
    def pairing_decreasing(self) -> bool:
        return _strictly_decreasing([r.pairing for r in self.records])

    @property
    def final_ratio(self) -> float:
        return self.records[-1].ratio

    @property
    def ratio_ok(self) -> bool:
        floor = self.C_ps * (1.0 - self.slack)
        tail = [r.ratio for r in self.records if r.k >= self.ratio_from_k] or [self.final_ratio]
        return all(x >= floor for x in tail)

    @property
    def passed(self) -> bool:
        return self.residual_decreasing and self.distance_decreasing and self.pairing_decreasing and self.ratio_ok

    def summary(self) -> dict:
        return {
            "residual_decreasing": self.residual_decreasing,
            "distance_decreasing": self.distance_decreasing,
            "pairing_decreasing": self.pairing_decreasing,
            "final_ratio": self.final_ratio,
            "C_ps": self.C_ps,
            "ratio_ok": self.ratio_ok,
            "passed": self.passed,
        }


def struwe_run(seq: PSSequence) -> StruweReport:
    recs = [struwe_extract(t.field, t.k)[1] for t in seq]
    params = seq.terms[0].field.params
    return StruweReport(recs, constants(params).C_ps)


# Sign-split identities


@dataclass(frozen=True)
class SignSplit:
    gap_pos_raw: float
    gap_neg_raw: float
    gap_pos: float
    gap_neg: float


def sign_split(psi: ZonalField) -> SignSplit:
    """Test the Euler-Lagrange equation against the positive and negative parts.

    Raw gaps measure how far psi is from a critical point; the corrected
    gaps add the residual pairing back and vanish identically.
    """
    p = psi.params.p
    pos = psi.map(lambda v: np.maximum(v, 0.0))
    neg = psi.map(lambda v: np.maximum(-v, 0.0))
    P_pos, P_neg = apply_P2s(pos), apply_P2s(neg)
    R = hls_residual(psi).field
    raw_pos = lp_norm(pos, p) ** p - (inner(P_pos, pos) - inner(P_neg, pos))
    raw_neg = lp_norm(neg, p) ** p - (inner(P_neg, neg) - inner(P_pos, neg))
    return SignSplit(
        gap_pos_raw=raw_pos,
        gap_neg_raw=raw_neg,
        gap_pos=raw_pos - inner(R, pos),
        gap_neg=raw_neg + inner(R, neg),
    )


# Duality between the Sobolev and HLS equations


@dataclass(frozen=True)
class DualityReport:
    pointwise_error: float
    identity_error: float
    truncation_error: float
    truncation_flag: bool
    lhs: float
    rhs_forced: float
    rhs_displayed: float
    forced_holds: bool
    displayed_holds: bool

    def as_dict(self) -> dict:
        return asdict(self)


def dual_chain_check(u: ZonalField, truncation_threshold: float = 1e-8, rel_tol: float = 1e-12) -> DualityReport:
    """Check the duality f = |u|^{4s/(n-2s)} u between the two residuals.

    lhs is the H^{-s} norm of the Sobolev residual R; w = P R is the HLS
    residual of f.  The Sobolev inequality for w gives lhs >= S^{1/2}
    ||w||_{2n/(n-2s)}; the variant with S ||w||_{2n/(n+2s)} is only reported.
    """
    params = u.params
    S = constants(params).S
    f = ZonalField(u.grid, sobolev_map(u.values, params))
    back = hls_map(f.values, params)
    scale = max(float(np.max(np.abs(u.values))), 1e-300)
    pointwise = float(np.max(np.abs(back - u.values))) / scale
    w = hls_residual(f).field
    R = sobolev_residual(u)
    Pw = apply_P2s(R.field)
    identity = lp_norm(w - Pw, params.q)
    trunc = truncation_error(f)
    lhs = R.norm
    forced = math.sqrt(S) * lp_norm(w, params.q)
    displayed = S * lp_norm(w, params.p)
    tol = rel_tol * max(lhs, 1e-300) + 1e-14
    return DualityReport(
        pointwise_error=pointwise,
        identity_error=identity,
        truncation_error=trunc,
        truncation_flag=bool(trunc > truncation_threshold),
        lhs=lhs,
        rhs_forced=forced,
        rhs_displayed=displayed,
        forced_holds=bool(lhs + tol >= forced),
        displayed_holds=bool(lhs + tol >= displayed),
    )


# Sobolev-side quotient


def sobolev_energy(u: ZonalField) -> float:
    return h_norms(u)[1] ** 2


def in_sobolev_window(u: ZonalField) -> bool:
    n, s = u.params.n, u.params.s
    e, e0 = sobolev_energy(u), energy_level(u.params)
    k = (n - 2 * s) / n
    return 0.5**k * e0 <= e <= 1.5**k * e0


def sobolev_quotient(u: ZonalField) -> QuotientValue:
    """H^{-s} norm of the Sobolev residual over the H^s distance to Sobolev bubbles."""
    res = sobolev_residual(u).norm
    pr = nearest_bubble_Hs(u)
    scale = h_norms(u)[1]
    degenerate = pr.dist <= 1e-10 * max(scale, 1e-300)
    value = math.inf if degenerate else res / pr.dist
    return QuotientValue(value, res, pr.dist, pr, in_sobolev_window(u), degenerate)


def sobolev_survey(params: Params, degrees=(0, 2, 3, 4), eps=(1e-2, 1e-3), grid: ZonalGrid | None = None) -> list[dict]:
    grid = build_grid(params) if grid is None else grid
    d = constants(params).d_crit
    out = []
    for l, e in product(degrees, eps):
        q = sobolev_quotient(grid.constant(d) + e * grid.harmonic(l))
        out.append({"l": l, "eps": e, "residual_norm": q.residual_norm, "distance": q.distance, "quotient": q.value})
    return out


# Coercivity between two critical bubbles


def bubble_pair_coercivity(params: Params, zetas: Sequence[float], grid: ZonalGrid | None = None) -> float:
    """Smallest ratio <F(a) - F(b), a - b> / [S^{-1} (n-2s)/(n+2s) / 2 ||a - b||_p^2]
    over pairs of critical bubbles centered at distinct zetas."""
    grid = build_grid(params) if grid is None else grid
    S = constants(params).S
    fields = {z: critical_bubble(grid, z) for z in zetas}
    worst = math.inf
    for z1, z2 in product(zetas, zetas):
        if z1 == z2:
            continue
        a, b = fields[z1], fields[z2]
        lhs = inner(ZonalField(grid, hls_map(a.values, params) - hls_map(b.values, params)), a - b)
        rhs = params.hls_power / (2.0 * S) * lp_norm(a - b, params.p) ** 2
        worst = min(worst, lhs / rhs)
    return worst
