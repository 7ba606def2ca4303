import math

import numpy as np
import pytest

from sobolev_ext.errors import ConfigError, NotRegular
from sobolev_ext.geometry.ahlfors import AhlforsCloud, ahlfors_check, circle_cloud, point_cloud, segment_cloud
from sobolev_ext.geometry.factory import cloud_from_spec
from sobolev_ext.geometry.koch import KOCH_DIMENSION, MAX_LEVEL, koch_prefractal

RADII = (1 / 8, 1 / 16, 1 / 32)


@pytest.mark.parametrize("level", [0, 1, 3])
def test_koch_prefractal_edges_and_weights(level):
    domain, cloud = koch_prefractal(level)
    assert domain.edge_count == 3 * 4 ** level
    assert len(cloud) == 3 * 4 ** level
    assert cloud.total_weight == pytest.approx(1.0)
    assert cloud.d == pytest.approx(math.log(4) / math.log(3))
    np.testing.assert_allclose(np.linalg.norm(cloud.normals, axis=1), 1.0)


def test_koch_normals_point_outward():
    domain, cloud = koch_prefractal(2)
    step = 1e-4
    assert domain.contains(cloud.points - step * cloud.normals).all()
    assert not domain.contains(cloud.points + step * cloud.normals).any()


def test_koch_level_bounds():
    with pytest.raises(ConfigError):
        koch_prefractal(MAX_LEVEL + 1)
    with pytest.raises(ConfigError):
        koch_prefractal(-1)


def test_segment_is_one_regular():
    cloud = segment_cloud(1000)
    assert cloud.total_weight == pytest.approx(1.0)
    assert ahlfors_check(cloud, RADII) == pytest.approx(2.0, rel=0.05)


def test_circle_is_one_regular():
    assert ahlfors_check(circle_cloud(512), RADII) < 3.0


def test_koch_is_regular_in_its_dimension():
    cloud = cloud_from_spec("koch:5")
    assert cloud.d == KOCH_DIMENSION
    assert 1.0 <= ahlfors_check(cloud, (1 / 8, 1 / 16, 1 / 32, 1 / 64)) <= 8.0


def test_single_point_is_not_regular():
    with pytest.raises(NotRegular) as info:
        ahlfors_check(point_cloud(), RADII)
    assert info.value.details["constant"] == pytest.approx(32.0)


def test_ahlfors_check_needs_three_radii():
    with pytest.raises(ValueError):
        ahlfors_check(segment_cloud(100), (1 / 8, 1 / 16))


def test_cloud_rejects_bad_weights():
    with pytest.raises(ValueError):
        AhlforsCloud(np.zeros((2, 2)), np.ones(3), 1.0)
    with pytest.raises(ValueError):
        AhlforsCloud(np.zeros((2, 2)), np.array([1.0, 0.0]), 1.0)


def test_ball_mass():
    cloud = segment_cloud(100)
    mass = cloud.ball_mass(np.array([[0.5, 0.0], [0.5, 1.0]]), 0.1)
    assert mass[0] == pytest.approx(0.2)
    assert mass[1] == 0.0


def test_unknown_cloud_spec():
    with pytest.raises(ConfigError):
        cloud_from_spec("sphere:10")
