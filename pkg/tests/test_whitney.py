import math
from itertools import product

import numpy as np
import pytest

from sobolev_ext.errors import EmptyDomain
from sobolev_ext.geometry.cubes import DyadicCube, RootBox
from sobolev_ext.geometry.domains import EmptySet, lshape, unit_square
from sobolev_ext.geometry.factory import domain_from_config, root_for
from sobolev_ext.geometry.whitney import (
    check_whitney_invariants, exact_distance_sq, small_cube_cutoff, small_cubes, whitney_decompose,
)
from sobolev_ext.lib.whitney import cover_frame


def brute_force_square_counts(j_max):
    """Enumerates every dyadic cube of [0,1]^2 and applies the acceptance rule top-down."""
    counts = {}
    accepted = set()
    for level in range(j_max + 1):
        side = 1.0 / 2 ** level
        for i, j in product(range(2 ** level), repeat=2):
            if any((level - up, (i >> up, j >> up)) in accepted for up in range(1, level + 1)):
                continue
            lower = np.array([i, j]) * side
            dist = min(lower[0], lower[1], 1 - lower[0] - side, 1 - lower[1] - side)
            if dist <= 0:
                continue
            if dist >= math.sqrt(2) * side or level == j_max:
                accepted.add((level, (i, j)))
                counts[level] = counts.get(level, 0) + 1
    return counts


def level_counts_brute_force(cover):
    """Recounts the accepted cubes per level from the cube list itself."""
    levels, counts = np.unique([c.level for c in cover.cubes], return_counts=True)
    return {int(l): int(c) for l, c in zip(levels, counts)}


def test_unit_square_matches_brute_force():
    oracle = unit_square()
    cover = whitney_decompose(oracle, RootBox.make((0.0, 0.0), 1.0), 5)
    assert cover.level_counts() == brute_force_square_counts(5)
    assert level_counts_brute_force(cover) == cover.level_counts()


@pytest.mark.parametrize("spec", ["square", "lshape", "koch:3"])
def test_invariants_hold(spec):
    oracle = domain_from_config(spec)
    cover = whitney_decompose(oracle, root_for(oracle), 6)
    stats = check_whitney_invariants(cover)
    assert stats["ok"]
    assert stats["min_dist_ratio"] >= math.sqrt(2) * (1 - 1e-12)
    assert stats["max_dist_ratio"] <= 4 * math.sqrt(2) * (1 + 1e-12)
    assert 0.25 <= stats["min_neighbor_ratio"] <= stats["max_neighbor_ratio"] <= 4.0


def test_cubes_are_disjoint_and_inside():
    oracle = lshape()
    cover = whitney_decompose(oracle, root_for(oracle), 6)
    assert np.all(oracle.contains(cover.centers))
    assert cover.covered_measure() <= 0.75 + 1e-12
    assert cover.covered_measure() > 0.6


def test_truncated_cubes_only_at_finest_level():
    oracle = unit_square()
    cover = whitney_decompose(oracle, root_for(oracle), 4)
    assert np.all(cover.levels[cover.truncated] == 4)
    assert cover.truncated.any()


def test_strip_with_explicit_root():
    oracle = domain_from_config("strip")
    cover = whitney_decompose(oracle, RootBox.make((0.0, 0.0), 1.0), 5)
    assert check_whitney_invariants(cover)["ok"]


def test_empty_domain_raises():
    with pytest.raises(EmptyDomain):
        whitney_decompose(EmptySet(2), RootBox.make((0.0, 0.0), 1.0), 4)
    cover = whitney_decompose(EmptySet(2), RootBox.make((0.0, 0.0), 1.0), 4, allow_empty=True)
    assert len(cover) == 0


def test_small_cubes_respect_cutoff():
    oracle = unit_square()
    cover = whitney_decompose(oracle, root_for(oracle), 6)
    cutoff = small_cube_cutoff(1.0, 1.0, 2)
    assert cutoff == pytest.approx(1 / 32)
    assert all(c.side_f <= cutoff for c in small_cubes(cover, 1.0, 1.0))
    with pytest.raises(ValueError):
        small_cube_cutoff(0.0, 1.0, 2)


def test_cover_frame_columns():
    oracle = unit_square()
    cover = whitney_decompose(oracle, root_for(oracle), 4)
    frame = cover_frame(cover)
    assert list(frame.columns) == ["level", "i0", "i1", "side", "truncated", "x0", "y0", "x1", "y1"]
    np.testing.assert_allclose(frame["x1"] - frame["x0"], frame["side"])
    assert len(frame) == len(cover)


def test_exact_distance_on_polygons():
    root = RootBox.make((0.0, 0.0), 1.0)
    cube = DyadicCube(4, (6, 6), root)
    # Diagonal gap of one side to the reentrant corner (1/2, 1/2)
    assert exact_distance_sq(lshape(), cube) == 2 * cube.side ** 2
    assert exact_distance_sq(unit_square(), cube) == (6 * cube.side) ** 2
    assert exact_distance_sq(EmptySet(2), cube) is None


def test_ties_on_the_lower_bound_are_decided_exactly(monkeypatch):
    oracle = lshape()
    root = RootBox.make((0.0, 0.0), 1.0)
    tie = DyadicCube(4, (6, 6), root)
    box_distance = oracle.box_distance
    # Float distances one ulp short of the true value
    monkeypatch.setattr(oracle, "box_distance",
                        lambda lower, upper: np.nextafter(box_distance(lower, upper), 0.0))
    cover = whitney_decompose(oracle, root, 6)
    assert tie in cover.cubes
    assert not cover.truncated[cover.cubes.index(tie)]
    stats = check_whitney_invariants(cover)
    assert stats["lower_bound_ok"]
    assert stats["upper_bound_ok"]
    assert stats["min_dist_ratio"] < math.sqrt(2)
