from fractions import Fraction

import numpy as np
import pytest

from sobolev_ext.geometry.cubes import DyadicCube, RootBox, cube_arrays, cube_distance


@pytest.fixture
def root():
    return RootBox.make((0.0, 0.0), 1.0)


def test_children_tile_the_parent(root):
    cube = DyadicCube(2, (1, 3), root)
    kids = list(cube.children())
    assert len(kids) == 4
    assert all(k.parent() == cube for k in kids)
    assert sum(k.side ** 2 for k in kids) == cube.side ** 2
    assert min(k.corner for k in kids) == cube.corner


def test_root_has_no_parent(root):
    with pytest.raises(ValueError):
        root.root_cube().parent()


def test_geometry_is_exact(root):
    cube = DyadicCube(3, (5, 2), root)
    assert cube.side == Fraction(1, 8)
    assert cube.corner == (Fraction(5, 8), Fraction(2, 8))
    assert cube.center == (Fraction(11, 16), Fraction(5, 16))
    lower, upper = cube.dilate(Fraction(17, 16))
    assert upper[0] - lower[0] == Fraction(17, 128)
    assert (lower[0] + upper[0]) / 2 == cube.center[0]


def test_touches_and_overlap(root):
    a = DyadicCube(1, (0, 0), root)
    b = DyadicCube(2, (2, 1), root)
    c = DyadicCube(2, (3, 3), root)
    d = DyadicCube(3, (1, 1), root)
    assert a.touches(b)
    assert not a.touches(c)
    assert not a.touches(d)
    assert a.interiors_overlap(d)
    assert DyadicCube(1, (1, 1), root).touches(a)


def test_fine_span_rejects_coarser_levels(root):
    cube = DyadicCube(2, (1, 1), root)
    assert cube.fine_span(4) == ((4, 4), (8, 8))
    with pytest.raises(ValueError):
        cube.fine_span(1)


def test_index_dimension_must_match(root):
    with pytest.raises(ValueError):
        DyadicCube(1, (0, 0, 0), root)
    with pytest.raises(ValueError):
        DyadicCube(-1, (0, 0), root)


def test_float_views(root):
    cubes = [DyadicCube(2, (0, 0), root), DyadicCube(2, (3, 0), root)]
    lower, upper, sides = cube_arrays(cubes)
    np.testing.assert_allclose(upper - lower, 0.25)
    np.testing.assert_allclose(sides, [0.25, 0.25])
    assert cube_distance(*cubes) == pytest.approx(0.5)
    assert cubes[0].contains_point((0.26, 0.1), dilation=1.25)
    assert not cubes[0].contains_point((0.26, 0.1))
