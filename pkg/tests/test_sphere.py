import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hls_lab.errors import ConfigurationError, DomainError
from hls_lab.sphere import (
    Params,
    ZonalField,
    analyze,
    build_grid,
    inner,
    lp_norm,
    sphere_area,
    synthesize,
    truncation_error,
)

from .conftest import grid_for


def test_sphere_areas():
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert sphere_area(3) == pytest.approx(2 * math.pi**2)


@pytest.mark.parametrize("n,s", [(3, 1.5), (3, 0.0), (2, -0.1), (0, 0.1), (2.5, 0.5)])
def test_params_validation(n, s):
    with pytest.raises(DomainError):
        Params(n, s)


def test_params_exponents():
    p = Params(3, 1)
    assert p.p == pytest.approx(1.2)
    assert p.q == pytest.approx(6.0)
    assert p.hls_power == pytest.approx(0.2)
    assert p.sobolev_power == pytest.approx(5.0)


def test_build_grid_defaults_and_checks():
    g = build_grid(Params(3, 1))
    assert g.L == 32 and g.m == 80
    with pytest.raises(ConfigurationError):
        build_grid(Params(3, 1), L=32, m=60)
    with pytest.raises(ConfigurationError):
        build_grid(Params(3, 1), L=1)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_basis_is_orthonormal(n):
    g = grid_for(n, min(0.25, n / 4))
    gram = (g.basis * g.measure_weights) @ g.basis.T
    assert np.max(np.abs(gram - np.eye(g.L + 1))) < 1e-12


def test_integrate_t_squared_on_s3(g31):
    assert g31.integrate(g31.nodes**2) == pytest.approx(sphere_area(3) / 4, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=-1, max_value=1), min_size=33, max_size=33))
def test_analysis_synthesis_roundtrip(coeffs):
    g = grid_for(3, 1.0)
    a = np.array(coeffs)
    u = synthesize(a, g)
    assert np.allclose(analyze(u).a, a, atol=1e-12)
    assert truncation_error(u) < 1e-12 or lp_norm(u, 2) == 0


def test_synthesize_cutoff_mismatch(g31):
    with pytest.raises(ConfigurationError):
        synthesize(np.zeros(5), g31)


def test_field_validation(g31):
    with pytest.raises(ConfigurationError):
        ZonalField(g31, np.zeros(3))
    with pytest.raises(DomainError):
        ZonalField(g31, np.full(g31.m, np.nan))


def test_fields_on_different_grids_do_not_mix(g31):
    other = build_grid(Params(3, 1))
    with pytest.raises(ConfigurationError):
        g31.constant(1.0) + other.constant(1.0)


def test_lp_norm_constant(g31):
    u = g31.constant(2.0)
    assert lp_norm(u, 1.2) == pytest.approx(2.0 * sphere_area(3) ** (1 / 1.2), rel=1e-13)
    with pytest.raises(DomainError):
        lp_norm(u, 0.5)


def test_interpolation_reproduces_polynomials(g31):
    u = g31.field(lambda t: t**5 - 3 * t**2)
    t = np.linspace(-1, 1, 17)
    assert np.allclose(u.at(t), t**5 - 3 * t**2, atol=1e-12)


def test_reflect(g31):
    u = g31.field(lambda t: t**3 + 1)
    assert np.allclose(u.reflect().values, -g31.nodes**3 + 1, atol=1e-14)


def test_inner_symmetric(g31):
    u, v = g31.harmonic(2), g31.harmonic(2) + g31.harmonic(3)
    assert inner(u, v) == pytest.approx(1.0, abs=1e-12)
    assert inner(u, v) == pytest.approx(inner(v, u), abs=1e-15)
