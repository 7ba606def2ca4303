import numpy as np
import pytest

from sobolev_ext.errors import OrderMismatch
from sobolev_ext.funcspace.besov import (
    BesovJet, admissible_smoothness, besov_norm, besov_order, constant_jet, jet_of_field, remainders,
)
from sobolev_ext.funcspace.catalog import sine_field
from sobolev_ext.funcspace.fields import polynomial_field
from sobolev_ext.geometry.ahlfors import segment_cloud
from sobolev_ext.geometry.koch import KOCH_DIMENSION, koch_prefractal


@pytest.fixture
def cloud():
    return segment_cloud(200)


def test_order_from_smoothness():
    assert besov_order(0.5) == 1
    assert besov_order(1.25) == 2
    with pytest.raises(OrderMismatch):
        besov_order(1.0)
    assert admissible_smoothness(1, 2, 1.0, 2.0) == pytest.approx(0.5)
    assert 0 < admissible_smoothness(1, 2, KOCH_DIMENSION, 2.0) < 1


def test_jet_shape_is_checked(cloud):
    with pytest.raises(OrderMismatch):
        BesovJet(cloud, np.zeros((len(cloud), 2)), 2)
    jet = jet_of_field(sine_field(2), cloud, 2)
    assert jet.values.shape == (len(cloud), 3)
    assert list(jet.to_frame().columns) == ["x0", "x1", "f_00", "f_10", "f_01"]
    np.testing.assert_allclose(jet.component((1, 0)), sine_field(2).derivative((1, 0), cloud.points))


def test_constant_jet_has_no_shell_part(cloud):
    result = besov_norm(constant_jet(cloud, 1.0), 0.5, 2.0, j_max=6)
    assert result.shell_part == 0.0
    assert result.norm == pytest.approx(1.0)
    assert len(result.shells) == 7


def test_linear_jet_remainders_vanish(cloud):
    u = polynomial_field({(1, 0): 2.0, (0, 1): -1.0, (0, 0): 0.5}, 2)
    jet = jet_of_field(u, cloud, 2)
    x_idx = np.arange(0, 100)
    y_idx = np.arange(100, 200)
    np.testing.assert_allclose(remainders(jet, x_idx, y_idx), 0.0, atol=1e-12)
    assert besov_norm(jet, 1.5, 2.0, j_max=5).shell_part == pytest.approx(0.0, abs=1e-9)


def test_linear_field_has_a_shell_part_at_order_one(cloud):
    u = polynomial_field({(1, 0): 1.0}, 2)
    result = besov_norm(jet_of_field(u, cloud, 1), 0.5, 2.0, j_max=6)
    assert result.shell_part > 0
    assert np.all(np.diff(result.shells["partial_norm"].to_numpy()) >= 0)


def test_zero_jet_has_zero_norm(cloud):
    result = besov_norm(constant_jet(cloud, 0.0), 0.5, 2.0, j_max=5)
    assert result.norm == 0.0
    assert result.shell_part == 0.0


def test_norm_is_homogeneous_and_subadditive():
    _, cloud = koch_prefractal(3)
    s = admissible_smoothness(1, 2, cloud.d, 2.0)
    a = jet_of_field(sine_field(2), cloud, 1)
    b = jet_of_field(polynomial_field({(1, 0): 1.0, (0, 1): 1.0}, 2), cloud, 1)
    norm_a = besov_norm(a, s, 2.0, j_max=5).norm
    assert besov_norm(a.scaled(-3.0), s, 2.0, j_max=5).norm == pytest.approx(3 * norm_a, rel=1e-12)
    combined = besov_norm(a.plus(b), s, 2.0, j_max=5).norm
    assert combined <= norm_a + besov_norm(b, s, 2.0, j_max=5).norm


def test_order_must_match_smoothness(cloud):
    with pytest.raises(OrderMismatch):
        besov_norm(constant_jet(cloud, 1.0), 1.5, 2.0, j_max=4)
    with pytest.raises(ValueError):
        besov_norm(constant_jet(cloud, 1.0), 0.5, 0.5, j_max=4)
