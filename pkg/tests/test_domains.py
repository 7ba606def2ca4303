import numpy as np
import pytest

from sobolev_ext.errors import ConfigError
from sobolev_ext.geometry.boundary import (
    NoBoundary, SegmentPart, WholeBoundary, boundary_part_from_config, boundary_samples,
)
from sobolev_ext.geometry.domains import (
    BallDomain, BoxDomain, ComplementDomain, EmptySet, SlabDomain, cusp, disjoint_squares,
    lshape, unit_square,
)
from sobolev_ext.geometry.factory import domain_from_config, parse_domain_spec, root_for


def test_lshape_contains():
    oracle = lshape()
    points = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75], [0.5, 0.5], [1.5, 0.5]])
    np.testing.assert_array_equal(oracle.contains(points), [True, True, True, False, False, False])
    np.testing.assert_allclose(oracle.boundary_distance([[0.25, 0.25], [0.75, 0.75]]), [0.25, 0.25])


def test_polygon_box_distance_is_exact():
    oracle = unit_square()
    lower = np.array([[0.25, 0.25], [0.0, 0.5], [2.0, 0.0]])
    upper = lower + 0.25
    np.testing.assert_allclose(oracle.box_distance(lower, upper), [0.25, 0.0, 1.0])


def test_box_and_ball_agree_with_points():
    box = BoxDomain((0.0, 0.0, 0.0), (1.0, 2.0, 1.0))
    assert box.contains([[0.5, 1.0, 0.5]]).all()
    assert box.boundary_distance([[0.5, 1.0, 0.5]])[0] == pytest.approx(0.5)
    assert box.boundary_distance([[2.0, 1.0, 0.5]])[0] == pytest.approx(1.0)

    ball = BallDomain((0.0, 0.0), 1.0)
    assert ball.boundary_distance([[0.0, 0.0], [2.0, 0.0]]).tolist() == [1.0, 1.0]
    near = ball.box_distance(np.array([[-0.25, -0.25]]), np.array([[0.25, 0.25]]))
    assert near[0] == pytest.approx(1.0 - np.sqrt(2) / 4)
    assert ball.box_distance(np.array([[0.9, -0.1]]), np.array([[1.1, 0.1]]))[0] == 0.0


def test_degenerate_box_rejected():
    with pytest.raises(ConfigError):
        BoxDomain((0.0, 0.0), (1.0, 0.0))


def test_strip_box_distance():
    strip = SlabDomain(2, 1, 0.0, 1.0)
    lower = np.array([[5.0, 0.25], [5.0, -0.125], [5.0, 2.0]])
    upper = lower + 0.25
    np.testing.assert_allclose(strip.box_distance(lower, upper), [0.25, 0.0, 1.0])
    assert not np.isfinite(strip.bbox[0][0])


def test_complement_shares_the_boundary():
    base = unit_square()
    comp = ComplementDomain(base, lower=(-1.0, -1.0), upper=(2.0, 2.0))
    points = np.array([[0.5, 0.5], [1.5, 0.5], [1.0, 0.5]])
    np.testing.assert_array_equal(comp.contains(points), [False, True, False])
    np.testing.assert_allclose(comp.boundary_distance(points), base.boundary_distance(points))


def test_union_of_disjoint_squares():
    oracle = disjoint_squares(0.5)
    points = np.array([[0.5, 0.5], [1.25, 0.5], [2.0, 0.5]])
    np.testing.assert_array_equal(oracle.contains(points), [True, False, True])
    assert oracle.boundary_distance(points)[1] == pytest.approx(0.25)


def test_empty_set():
    empty = EmptySet(2)
    assert not empty.contains(np.zeros((3, 2))).any()
    assert np.isinf(empty.boundary_distance(np.zeros((1, 2)))).all()


def test_cusp_narrows_at_origin():
    oracle = cusp(4.0, vertices=128)
    assert oracle.contains([[0.5, 0.5 ** 4 / 2]]).all()
    assert not oracle.contains([[0.5, 0.5 ** 4 * 2]]).any()
    with pytest.raises(ConfigError):
        cusp(1.0)


@pytest.mark.parametrize("spec,kind", [
    ("square", "rectangle"), ("lshape", "L-shape"), ("koch:2", "koch-prefractal"), ("cusp:9", "cusp"),
    ("disc", "disc"), ("squares:0.25", "union"), ("empty", "empty"),
    ({"kind": "complement", "of": "square"}, "complement"),
])
def test_factory_kinds(spec, kind):
    assert domain_from_config(spec).kind == kind


def test_factory_rejects_bad_specs():
    assert parse_domain_spec("koch:4") == {"kind": "koch", "level": 4}
    with pytest.raises(ConfigError):
        parse_domain_spec("lshape:3")
    with pytest.raises(ConfigError):
        domain_from_config("torus")
    with pytest.raises(ConfigError):
        domain_from_config({"kind": "complement"})
    with pytest.raises(ConfigError):
        root_for(domain_from_config("strip"))


def test_root_for_covers_the_bounding_box():
    oracle = lshape()
    root = root_for(oracle)
    np.testing.assert_allclose(root.lower, [0.0, 0.0])
    assert float(root.side) == 1.0
    grown = root_for(oracle, margin=0.25)
    assert np.all(grown.lower <= -0.25) and np.all(grown.upper >= 1.25)
    explicit = root_for(oracle, root={"origin": [-1, -1], "side": 4})
    assert float(explicit.side) == 4.0


def test_boundary_parts():
    oracle = unit_square()
    assert isinstance(boundary_part_from_config(None, oracle), NoBoundary)
    assert boundary_part_from_config("none", oracle).is_empty
    whole = boundary_part_from_config("all", oracle)
    assert isinstance(whole, WholeBoundary) and whole.covers(oracle)

    bottom = boundary_part_from_config("bottom+left", oracle)
    assert isinstance(bottom, SegmentPart)
    np.testing.assert_allclose(bottom.distance([[0.5, 0.25], [0.75, 0.75]]), [0.25, 0.75])
    samples = bottom.samples(0.1)
    assert np.allclose(np.minimum(samples[:, 0], samples[:, 1]), 0.0)

    with pytest.raises(ConfigError):
        boundary_part_from_config("middle", oracle)


def test_boundary_samples_lie_on_the_boundary():
    oracle = lshape()
    samples = boundary_samples(oracle, 0.05)
    assert len(samples) >= int(4 / 0.05)
    np.testing.assert_allclose(oracle.boundary_distance(samples), 0.0, atol=1e-12)


def test_cusp_tip_is_a_chord_below_the_sampling_scale():
    oracle = cusp(4.0, vertices=64)
    tip = oracle.rings[0][-1]
    np.testing.assert_allclose(tip, [1 / 64, (1 / 64) ** 4])
    assert oracle.params["vertices"] == 64
    # Halfway along the closing chord to the origin
    assert oracle.boundary_distance(tip[None, :] / 2)[0] == pytest.approx(0.0, abs=1e-15)
