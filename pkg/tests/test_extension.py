import math

import numpy as np
import pytest

from sobolev_ext.errors import (
    CollarViolation, ConfigError, EmptyBall, KernelUnderresolved, PatchGap,
)
from sobolev_ext.extension.glue import composite, glue
from sobolev_ext.extension.jones import extension_norm_ratio, jones_extend, support_diagnostics
from sobolev_ext.extension.jw import ball_polynomials, cloud_complement, jw_extend
from sobolev_ext.extension.localized import (
    Patch, build_localized_plan, free_boundary_samples, localized_extend,
)
from sobolev_ext.extension.mollify import bump_kernel, mollify
from sobolev_ext.extension.plan import build_extension_plan, default_j_max
from sobolev_ext.extension.zero import extend_by_zero
from sobolev_ext.funcspace.besov import constant_jet
from sobolev_ext.funcspace.catalog import bump_field, ramp_field, sine_field
from sobolev_ext.funcspace.fields import constant_field, sample_grid, zero_field
from sobolev_ext.geometry.ahlfors import circle_cloud, segment_cloud
from sobolev_ext.geometry.boundary import boundary_part_from_config
from sobolev_ext.geometry.cubes import RootBox
from sobolev_ext.geometry.domains import unit_square
from sobolev_ext.geometry.factory import root_for
from sobolev_ext.lib.extend import patches_from_config, polynomial_reproduction, stability_check

J_MAX = 6


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def root(square):
    return root_for(square, margin=0.25)


def test_default_j_max():
    assert default_j_max(16) == 6
    assert default_j_max(64) == 8


@pytest.mark.parametrize("k", [1, 2])
def test_jones_restricts_and_reproduces_polynomials(square, root, k):
    plan = build_extension_plan(square, root, k, j_max=J_MAX)
    u = sine_field(2)
    ext = jones_extend(u, plan, 32)
    points = ext.points()
    inside = square.contains(points)
    np.testing.assert_array_equal(ext.values.reshape(-1)[inside], u.value(points[inside]))
    assert polynomial_reproduction(plan, 32) <= 1e-10


def test_jones_extension_is_nonzero_just_outside(square, root):
    plan = build_extension_plan(square, root, 1, j_max=J_MAX)
    ext = jones_extend(constant_field(1.0), plan, 32)
    points = ext.points()
    collar = ~square.contains(points) & (square.boundary_distance(points) < plan.collar)
    assert collar.any()
    np.testing.assert_allclose(ext.values.reshape(-1)[collar], 1.0)


def test_jones_norm_ratio_is_stable(square, root):
    plan = build_extension_plan(square, root, 1, j_max=J_MAX)
    u = sine_field(2)
    ratios = [extension_norm_ratio(u, jones_extend(u, plan, grid), plan, 1, 2.0)["ratio"]
              for grid in (32, 64)]
    assert all(0.8 <= r < 5 for r in ratios)
    assert stability_check(ratios, "stable")["pass"]


def test_support_away_from_the_boundary_stays_inside(square, root):
    plan = build_extension_plan(square, root, 1, j_max=J_MAX)
    u = bump_field((0.5, 0.5), 0.15)
    report = support_diagnostics(u, jones_extend(u, plan, 32), plan)
    assert report.contact_set_ok
    assert report.enlargement_radius == 0.0


def test_support_touching_the_boundary_spreads_a_bounded_distance(square, root):
    plan = build_extension_plan(square, root, 1, j_max=J_MAX)
    u = bump_field((0.5, 0.15), 0.2)
    report = support_diagnostics(u, jones_extend(u, plan, 32), plan)
    assert report.contact_set_ok
    assert 0.0 < report.enlargement_radius < 0.5
    assert report.checked_zero > 0


def test_stability_check_modes():
    assert stability_check([1.0, 1.02, 1.05], "stable")["pass"]
    assert not stability_check([1.0, 1.5], "stable")["pass"]
    assert stability_check([1.0, 1.8, 3.1], "growth")["pass"]
    assert not stability_check([1.0, 1.2], "growth")["pass"]


def test_zero_extension_of_compact_support(square):
    result = extend_by_zero(bump_field((0.5, 0.5), 0.2), square, 32, k=1, p=2.0,
                            box=((-0.25, -0.25), (1.25, 1.25)))
    assert result.relative_defect == pytest.approx(0.0, abs=1e-12)
    assert result.norm > 0
    assert result.to_record()["h"] == pytest.approx(1.5 / 32)


def test_zero_extension_requires_a_vanishing_collar(square):
    with pytest.raises(CollarViolation):
        extend_by_zero(constant_field(1.0), square, 16)
    with pytest.raises(ValueError):
        extend_by_zero(zero_field(), square, 16, k=1, collar=1 / 32)


def test_zero_of_zero():
    result = extend_by_zero(zero_field(), unit_square(), 16)
    assert result.relative_defect == 0.0


def test_free_boundary_samples(square):
    bottom = boundary_part_from_config("bottom", square)
    samples = free_boundary_samples(square, bottom, 0.05)
    assert len(samples) > 0
    assert np.all(samples[:, 1] > 0)
    assert len(free_boundary_samples(square, boundary_part_from_config("all", square), 0.05)) == 0


def test_patches_must_cover_the_free_boundary(square, root):
    part = boundary_part_from_config("none", square)
    small = Patch(np.array([0.5, 0.5]), 0.3, square, None)
    with pytest.raises(PatchGap):
        build_localized_plan(square, part, [small], 0.125, root, 1)


def test_localized_with_a_global_patch(square, root):
    part = boundary_part_from_config("bottom", square)
    patches = patches_from_config(None, square, root, 1, J_MAX)
    assert len(patches) == 1 and patches[0].is_global
    plan = build_localized_plan(square, part, patches, 0.125, root, 1)
    assert plan.is_global
    u = ramp_field(2, 1, 0.25, 2)
    result = localized_extend(u, plan, 32)
    assert result.restriction_defect == pytest.approx(0.0, abs=1e-12)
    assert result.dirichlet_trace <= 1e-6
    assert math.isfinite(result.norm_ratio["ratio"])


def test_localized_rejects_data_on_the_dirichlet_part(square, root):
    part = boundary_part_from_config("bottom", square)
    plan = build_localized_plan(square, part, patches_from_config(None, square, root, 1, J_MAX),
                                0.125, root, 1)
    with pytest.raises(CollarViolation):
        localized_extend(sine_field(2, frequency=math.pi / 2).plus(constant_field(1.0)), plan, 16)


def test_patch_specs_need_center_and_radius(square, root):
    with pytest.raises(ConfigError):
        patches_from_config([{"radius": 1.0}], square, root, 1, J_MAX)


def test_jet_extension_reproduces_constants():
    cloud = circle_cloud(512)
    root = RootBox.make((-2.0, -2.0), 4.0)
    ext = jw_extend(constant_jet(cloud, 2.0), root, 32, j_max=6)
    points = ext.points()
    near = cloud_complement(cloud).boundary_distance(points) < 0.25
    assert near.any()
    np.testing.assert_allclose(ext.values.reshape(-1)[near], 2.0)


def test_cloud_complement_and_empty_balls():
    segment = cloud_complement(segment_cloud(10))
    assert len(segment.seg_a) == 9
    assert cloud_complement(circle_cloud(10)).seg_a.shape == (10, 2)
    jet = constant_jet(segment_cloud(10), 1.0)
    with pytest.raises(EmptyBall):
        ball_polynomials(jet, np.array([[5.0, 5.0]]), np.array([0.1]))


def test_glue_verdicts(square):
    box = ((-0.25, -0.25), (1.25, 1.25))
    smooth = glue(sine_field(2), sine_field(2), square, 1, 2.0, [16, 32, 64], box)
    assert smooth.verdict == "matched"
    jump = glue(zero_field(), constant_field(1.0), square, 1, 2.0, [16, 32, 64], box)
    assert jump.verdict == "mismatched"
    assert jump.top_growth >= 1.2
    with pytest.raises(ConfigError):
        glue(zero_field(), zero_field(), square, 1, 2.0, [16], box)


def test_composite_uses_inside_and_outside(square):
    field = composite(zero_field(), constant_field(1.0), square, 8, ((-0.5, -0.5), (1.5, 1.5)))
    values = field.values.reshape(-1)
    inside = field.mask.reshape(-1)
    assert np.all(values[inside] == 0.0) and np.all(values[~inside] == 1.0)


def test_mollifier():
    kernel = bump_kernel(2, 0.25, 0.0625)
    assert kernel.sum() == pytest.approx(1.0)
    assert kernel.shape == (9, 9)
    grid = sample_grid(constant_field(3.0), (0.0, 0.0), (1.0, 1.0), 1 / 32)
    np.testing.assert_allclose(mollify(grid, 0.125).values, 3.0)
    with pytest.raises(KernelUnderresolved):
        mollify(grid, 1 / 32)
