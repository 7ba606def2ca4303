import math

import numpy as np
import pytest

from sobolev_ext.errors import Inconclusive, SingularQuadraturePoint
from sobolev_ext.funcspace.catalog import sine_field
from sobolev_ext.funcspace.fields import constant_field, polynomial_field, sample_grid
from sobolev_ext.funcspace.norms import order_seminorms, sobolev_norm, sobolev_norm_refinement
from sobolev_ext.funcspace.quadrature import (
    check_singular_nodes, domain_quadrature, gauss_legendre, lattice_box,
)
from sobolev_ext.funcspace.radial import expressions_field, radial_power
from sobolev_ext.funcspace.scan import (
    singular_norm_scan, sobolev_norm_scan, sphere_area, sphere_directions, threshold_verdicts,
)
from sobolev_ext.geometry.domains import SlabDomain, lshape, unit_square


@pytest.mark.parametrize("oracle,volume", [(unit_square(), 1.0), (lshape(), 0.75)])
def test_quadrature_volume(oracle, volume):
    rule = domain_quadrature(oracle, 32)
    assert rule.volume == pytest.approx(volume, rel=1e-9)
    assert rule.interior_cells > 0 and rule.boundary_cells > 0


def test_unbounded_quadrature_needs_a_box():
    with pytest.raises(ValueError):
        lattice_box(SlabDomain(2, 1, 0.0, 1.0), 16)
    lower, h, dims = lattice_box(SlabDomain(2, 1, 0.0, 1.0), 16, box=((0.0, 0.0), (2.0, 1.0)))
    assert h == 0.125
    assert dims == (16, 8)


def test_singular_node_detected():
    points = np.array([[0.375, 0.375], [0.125, 0.125]])
    with pytest.raises(SingularQuadraturePoint):
        check_singular_nodes(points, np.array([[0.375, 0.375]]), 0.25)
    check_singular_nodes(points, np.array([[0.5, 0.5]]), 0.25)


def test_gauss_legendre_integrates_cubics():
    x, w = gauss_legendre(1.0, 3.0, 2)
    assert np.dot(w, x ** 3) == pytest.approx((3 ** 4 - 1) / 4)


def test_norm_of_constant():
    assert sobolev_norm(constant_field(1.0), unit_square(), 1, 2.0, grid=16) == pytest.approx(1.0)
    assert sobolev_norm(constant_field(2.0), lshape(), 0, 3.0, grid=16) == pytest.approx(2 * 0.75 ** (1 / 3))


def test_norm_of_linear_field():
    u = polynomial_field({(1, 0): 1.0, (0, 1): 2.0}, 2)
    seminorms = order_seminorms(u, unit_square(), 1, 2.0, grid=64)
    assert seminorms[0] == pytest.approx(math.sqrt(8 / 3), rel=1e-3)
    assert seminorms[1] == pytest.approx(3.0)
    assert sobolev_norm(u, unit_square(), 1, 2.0, grid=64) == pytest.approx(sum(seminorms))


def test_norm_rejects_bad_exponents():
    with pytest.raises(ValueError):
        sobolev_norm(constant_field(1.0), unit_square(), 1, 0.5)
    with pytest.raises(ValueError):
        sobolev_norm(constant_field(1.0), unit_square(), 1, math.inf)


def test_grid_field_norm_uses_the_domain_mask():
    grid = sample_grid(constant_field(1.0), (0.0, 0.0), (1.0, 1.0), 1 / 16)
    assert sobolev_norm(grid, None, 1, 2.0) == pytest.approx(1.0)
    assert sobolev_norm(grid, lshape(), 0, 2.0) == pytest.approx(math.sqrt(0.75))


def test_refinement_of_smooth_field():
    record = sobolev_norm_refinement(sine_field(2), unit_square(), 1, 2.0, grid=32)
    assert record["relative_change"] < 5e-3
    assert record["h"] == pytest.approx(1 / 32)
    assert not record["finite_differences"]


def test_scan_converges_for_smooth_fields():
    result = sobolev_norm_scan(sine_field(2), unit_square(), 1, 2.0, [16, 32, 64])
    assert result.verdict == "converges"
    assert list(result.table.columns) == ["grid", "h", "norm", "finite_differences"]
    with pytest.raises(ValueError):
        sobolev_norm_scan(sine_field(2), unit_square(), 1, 2.0, [16, 32])


def test_scan_diverges_at_a_point_singularity():
    u = expressions_field([radial_power(-0.5, (0.5, 0.5))], 0, label="r^-1/2")
    result = sobolev_norm_scan(u, unit_square(), 0, 8.0, [16, 32, 64])
    assert result.verdict == "diverges"
    assert result.slope > 0.05


def test_sphere_helpers():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    dirs = sphere_directions(3, 50)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    np.testing.assert_allclose(sphere_directions(3, 50), dirs)


def test_shell_scan_separates_a_threshold():
    # |x|^mu is in L^p near 0 in the plane exactly when mu p + 2 > 0
    u = expressions_field([radial_power(-0.5, (0.0, 0.0))], 0)

    def scan(p):
        return singular_norm_scan(u, (0.0, 0.0), 0, p, raise_inconclusive=False)

    verdicts = threshold_verdicts(scan, 4.0)
    assert verdicts["pass"]
    assert verdicts["below"].slope == pytest.approx(-0.1, abs=1e-6)
    assert verdicts["above"].slope == pytest.approx(0.1, abs=1e-6)


def test_shell_scan_at_the_threshold_is_inconclusive():
    u = expressions_field([radial_power(-0.5, (0.0, 0.0))], 0)
    with pytest.raises(Inconclusive):
        singular_norm_scan(u, (0.0, 0.0), 0, 4.0)
    result = singular_norm_scan(u, (0.0, 0.0), 0, 4.0, raise_inconclusive=False)
    assert result.verdict == "inconclusive"


def test_shell_scan_of_the_gradient():
    # grad |x|^(1/2) ~ |x|^(-1/2) is in L^p exactly for p < 4
    u = expressions_field([radial_power(0.5, (0.0, 0.0))], 1)
    assert singular_norm_scan(u, (0.0, 0.0), 1, 3.0).verdict == "converges"
    assert singular_norm_scan(u, (0.0, 0.0), 1, 5.0).verdict == "diverges"
