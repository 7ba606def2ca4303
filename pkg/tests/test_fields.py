import math

import numpy as np
import pytest

from sobolev_ext.errors import ConfigError, QuadratureUnderflow
from sobolev_ext.funcspace.catalog import field_from_spec, glue_pair, ramp_field, sine_field
from sobolev_ext.funcspace.fields import (
    AnalyticField, GridField, constant_field, lattice_dims, masked_field, polynomial_field, sample_grid,
)
from sobolev_ext.funcspace.multiindex import (
    centered_cube_moment, exact_order, jet_size, multi_indices, scaled_monomial,
)
from sobolev_ext.funcspace.polynomial import (
    best_fit_polynomial, best_fit_polynomials, cube_derivative_averages, moment_residuals,
)
from sobolev_ext.funcspace.radial import coordinate_times_power, expressions_field, radial_power
from sobolev_ext.geometry.cubes import DyadicCube, RootBox


def test_multi_index_order():
    assert multi_indices(2, 2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert exact_order(3, 1) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert multi_indices(2, -1) == ()
    assert jet_size(2, 1) == 1
    assert jet_size(2, 3) == 6
    assert jet_size(3, 2) == 4


def test_cube_moments():
    assert centered_cube_moment((2, 0), 1.0) == pytest.approx(1 / 12)
    assert centered_cube_moment((1, 2), 1.0) == 0.0
    assert centered_cube_moment((2, 2), 2.0) == pytest.approx(1 / 9)
    np.testing.assert_allclose(scaled_monomial(np.array([[2.0, 3.0]]), (2, 1)), [6.0])


def test_polynomial_field_derivatives():
    u = polynomial_field({(2, 0): 1.0, (0, 1): 3.0}, 2)
    x = np.array([[2.0, 5.0]])
    assert u(x)[0] == pytest.approx(19.0)
    assert u.derivative((1, 0), x)[0] == pytest.approx(4.0)
    assert u.derivative((0, 1), x)[0] == pytest.approx(3.0)
    assert u.derivative((2, 0), x)[0] == pytest.approx(2.0)
    assert u.derivative((1, 1), x)[0] == 0.0
    assert not u.uses_finite_differences(3)


def test_sine_field_exact_derivatives():
    u = sine_field(2)
    x = np.array([[0.3, 0.7]])
    expected = math.pi * math.cos(math.pi * 0.3) * math.sin(math.pi * 0.7)
    assert u.derivative((1, 0), x)[0] == pytest.approx(expected)
    assert u.derivative((2, 0), x)[0] == pytest.approx(-math.pi ** 2 * u(x)[0])


def test_finite_difference_fallback():
    u = AnalyticField(lambda x: x[:, 0] ** 3, 2, label="cubic")
    assert u.uses_finite_differences(1)
    assert u.derivative((1, 0), np.array([[1.0, 0.0]]))[0] == pytest.approx(3.0, rel=1e-6)
    assert u.derivative((0, 1), np.array([[1.0, 0.0]]))[0] == pytest.approx(0.0, abs=1e-8)


def test_scaled_and_plus():
    u = polynomial_field({(1, 0): 1.0}, 2)
    v = constant_field(2.0)
    w = u.scaled(3.0).plus(v)
    x = np.array([[1.0, 1.0]])
    assert w(x)[0] == pytest.approx(5.0)
    assert w.derivative((1, 0), x)[0] == pytest.approx(3.0, rel=1e-6)


def test_ramp_field():
    u = ramp_field(2, 1, 0.25, 2)
    x = np.array([[0.5, 0.75], [0.5, 0.0]])
    np.testing.assert_allclose(u(x), [0.25, 0.0])
    np.testing.assert_allclose(u.derivative((0, 1), x), [1.0, 0.0])
    np.testing.assert_allclose(u.derivative((0, 2), x), [2.0, 0.0])
    np.testing.assert_allclose(u.derivative((1, 0), x), [0.0, 0.0])


def test_masked_field():
    u = masked_field(constant_field(1.0), lambda x: x[:, 0] > 0.5)
    np.testing.assert_allclose(u(np.array([[0.25, 0.0], [0.75, 0.0]])), [0.0, 1.0])


@pytest.mark.parametrize("spec,value", [
    ("const:2", 2.0), ("zero", 0.0), ("linear", 0.5 + 2 * 0.25), ("linear:3,0", 1.5),
    ("sine", math.sin(math.pi * 0.5) * math.sin(math.pi * 0.25)),
    ({"kind": "polynomial", "coefficients": {"1,1": 4.0}}, 0.5),
])
def test_field_specs(spec, value):
    u = field_from_spec(spec, 2)
    assert u(np.array([[0.5, 0.25]]))[0] == pytest.approx(value)


def test_bump_spec():
    u = field_from_spec("bump:0.5,0.5,0.2", 2)
    np.testing.assert_allclose(u(np.array([[0.5, 0.5], [0.9, 0.9]])), [1.0, 0.0])
    with pytest.raises(ConfigError):
        field_from_spec("bump:0.5,0.2", 2)
    with pytest.raises(ConfigError):
        field_from_spec("wave", 2)
    with pytest.raises(ConfigError):
        field_from_spec("csv", 2)


def test_glue_pairs():
    inside, outside = glue_pair("kink")
    x = np.array([[0.5, 0.5], [1.0, 0.3], [0.0, 0.0]])
    np.testing.assert_allclose(outside(x), [1 / 16, 0.0, 0.0])
    np.testing.assert_allclose(inside(x), 0.0)
    inside, outside = glue_pair("jump")
    assert outside(x)[0] - inside(x)[0] == 1.0
    with pytest.raises(ConfigError):
        glue_pair("wedge")


def test_grid_field():
    u = sample_grid(polynomial_field({(1, 0): 1.0, (0, 1): 2.0}, 2), (0.0, 0.0), (1.0, 1.0), 0.125)
    assert u.dims == (8, 8)
    np.testing.assert_allclose(u.derivative((1, 0)), 1.0)
    np.testing.assert_allclose(u.derivative((0, 1)), 2.0)
    np.testing.assert_allclose(u.as_analytic()(np.array([[0.4, 0.3]])), [1.0])
    with pytest.raises(ValueError):
        lattice_dims((0.0, 0.0), (1.0, 1.0), 0.3)
    with pytest.raises(ValueError):
        GridField(np.zeros(2), 0.5, np.array([[np.nan, 0.0], [0.0, 0.0]]))


def test_radial_expressions():
    r2 = radial_power(2.0, (0.0, 0.0))
    x = np.array([[3.0, 4.0]])
    assert r2(x)[0] == pytest.approx(25.0)
    assert r2.derivative((1, 0))(x)[0] == pytest.approx(6.0)
    assert r2.derivative((2, 0))(x)[0] == pytest.approx(2.0)

    w = coordinate_times_power(0, 1.0, (0.0, 0.0))
    assert w(x)[0] == pytest.approx(15.0)
    assert w.partial(0)(x)[0] == pytest.approx(5.0 + 9.0 / 5.0)

    field = expressions_field([w, radial_power(1.0, (0.0, 0.0))], 1, label="pair")
    assert field.components == 2
    np.testing.assert_allclose(field(x), [[15.0, 5.0]])
    np.testing.assert_allclose(field.singular_points, [[0.0, 0.0]])


@pytest.fixture
def cube():
    return DyadicCube(2, (1, 2), RootBox.make((0.0, 0.0), 1.0))


def test_best_fit_reproduces_polynomials(cube):
    u = polynomial_field({(0, 0): 1.0, (1, 0): -2.0, (1, 1): 3.0, (0, 2): 0.5}, 2)
    poly = best_fit_polynomial(u, cube, k=3)
    points = np.random.default_rng(1).uniform(0.0, 1.0, size=(20, 2))
    np.testing.assert_allclose(poly(points), u(points), atol=1e-12)
    assert poly.degree == 2
    assert max(moment_residuals(u, cube, poly, 3)) < 1e-12


def test_best_fit_matches_averages(cube):
    u = sine_field(2)
    poly = best_fit_polynomial(u, cube, k=2)
    residuals = moment_residuals(u, cube, poly, 2)
    assert max(residuals) < 1e-12
    batch = best_fit_polynomials(u, [cube, cube.parent()], k=2)
    assert len(batch) == 2
    points = np.array([[0.3, 0.6], [0.3, 0.6]])
    np.testing.assert_allclose(batch.evaluate_pairs(np.array([0, 1]), points)[0], poly(points[:1])[0])
    np.testing.assert_allclose(batch[0].coeffs[(1, 0)], poly.coeffs[(1, 0)])


def test_best_fit_is_linear(cube):
    u = sine_field(2)
    v = polynomial_field({(2, 0): 1.0, (0, 1): -1.0, (1, 1): 0.5}, 2)
    a, b = 2.5, -0.75
    pu = best_fit_polynomial(u, cube, k=2)
    pv = best_fit_polynomial(v, cube, k=2)
    combined = best_fit_polynomial(u.scaled(a).plus(v.scaled(b)), cube, k=2)
    assert set(combined.coeffs) == set(pu.coeffs)
    for alpha, c in combined.coeffs.items():
        assert c == pytest.approx(a * pu.coeffs[alpha] + b * pv.coeffs[alpha], rel=1e-12, abs=1e-12)


def test_cube_quadrature_needs_two_cells(cube):
    with pytest.raises(QuadratureUnderflow):
        cube_derivative_averages(sine_field(2), cube.lower_f[None, :], np.array([cube.side_f]), 2, cells=1)
