import math

import numpy as np
import pytest
from scipy import sparse

from sobolev_ext.bvp.cg import conjugate_gradient
from sobolev_ext.bvp.counterexamples import (
    counterexample, expected_verdict, hat_rule, mazya_exponent, mazya_theta, mazya_threshold,
    meyers_field, meyers_threshold, strongly_elliptic, theta_general, mazya_coefficients,
    weak_residual, annulus_centers, degiorgi_field, degiorgi_rhs,
)
from sobolev_ext.bvp.fem import WeakProblem, assemble, basis_norms, space_for
from sobolev_ext.bvp.manufactured import CASES, convergence_study, manufactured_case
from sobolev_ext.bvp.solve import solve_mixed
from sobolev_ext.bvp.tensors import (
    CoefficientTensor, constant, degiorgi, identity, meyers, tensor_from_config,
)
from sobolev_ext.errors import (
    ConfigError, EllipticityFail, EmptySpace, Incompatible, NotConverged,
)
from sobolev_ext.geometry.boundary import NoBoundary, WholeBoundary, boundary_part_from_config
from sobolev_ext.geometry.domains import unit_square
from sobolev_ext.trace.conormal import conormal_residual

BOX = ((0.0, 0.0), (1.0, 1.0))


def test_identity_and_constant_tensors():
    eye = identity(2, 2)
    assert eye(np.zeros((3, 2))).shape == (3, 2, 2, 2, 2)
    assert eye.check_ellipticity(BOX) == pytest.approx(1.0)
    skew = constant([[2.0, 1.0], [-1.0, 2.0]])
    assert skew.kappa == pytest.approx(2.0)
    assert not skew.symmetric
    with pytest.raises(ConfigError):
        constant([[1.0, 2.0, 3.0]])


def test_meyers_eigenvalues():
    tensor = meyers(0.5)
    matrix = tensor.as_matrix(np.array([[0.3, -0.4]]))[0]
    np.testing.assert_allclose(np.linalg.eigvalsh(matrix), [0.25, 1.0])
    assert tensor.check_ellipticity(((-1.0, -1.0), (1.0, 1.0))) >= 0.25 * (1 - 1e-9)
    with pytest.raises(ConfigError):
        meyers(0.0)


def test_degiorgi_needs_three_dimensions():
    tensor = degiorgi(1.2, 3)
    assert tensor.M == 3 and tensor.n == 3
    assert tensor.check_ellipticity(((-1.0,) * 3, (1.0,) * 3)) >= 1 - 1e-9
    with pytest.raises(ConfigError):
        degiorgi(1.2, 2)
    with pytest.raises(ConfigError):
        degiorgi(1.6, 3)


def test_ellipticity_failure():
    eye = identity(2)
    claimed = CoefficientTensor(eye.evaluator, 2, 1, 2.0, 1.0, "claimed")
    with pytest.raises(EllipticityFail):
        claimed.check_ellipticity(BOX)


def test_tensor_from_config():
    assert tensor_from_config("identity").name == "identity"
    assert tensor_from_config({"name": "meyers", "mu": 0.25}).kappa == pytest.approx(1 / 16)
    with pytest.raises(ConfigError):
        tensor_from_config({"name": "constant"})
    with pytest.raises(ConfigError):
        tensor_from_config("anisotropic")


def test_conjugate_gradient():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((20, 20))
    A = sparse.csr_matrix(B @ B.T + 20 * np.eye(20))
    b = rng.standard_normal(20)
    result = conjugate_gradient(A, b, tol=1e-12)
    np.testing.assert_allclose(A @ result.x, b, atol=1e-9)
    assert result.residual <= 1e-12
    assert np.linalg.norm(b - A @ result.x) <= 1e-12 * np.linalg.norm(b)
    assert conjugate_gradient(A, np.zeros(20)).iterations == 0
    with pytest.raises(NotConverged):
        conjugate_gradient(A, b, tol=1e-12, max_iter=1)


def test_space_constraints():
    square = unit_square()
    whole = space_for(square, 8, WholeBoundary(square))
    assert len(whole.cells) == 64
    assert len(whole.nodes) == 81
    assert len(whole.constrained) == 32
    assert len(whole.free) == 49
    assert len(space_for(square, 8, NoBoundary(2)).constrained) == 0
    left = space_for(square, 8, boundary_part_from_config("left", square))
    np.testing.assert_allclose(left.nodes[left.constrained][:, 0], 0.0)
    assert len(left.constrained) == 9
    assert np.all(basis_norms(left) > 0)


def test_space_needs_cells():
    square = unit_square()
    with pytest.raises(EmptySpace):
        space_for(square, 8, WholeBoundary(square), box=((2.0, 2.0), (3.0, 3.0)))


def test_linear_lifting_is_reproduced():
    square = unit_square()
    space = space_for(square, 8, WholeBoundary(square))
    solution = solve_mixed(WeakProblem(identity(2), space, lifting=lambda x: x[:, 0] + 2 * x[:, 1]))
    np.testing.assert_allclose(solution.values, space.nodes[:, 0] + 2 * space.nodes[:, 1], atol=1e-8)
    assert solution.diagnostics["conormal_residual"] <= 1e-8
    assert solution.diagnostics["dirichlet_trace"] == pytest.approx(3.0)
    assert solution.field.dims == (9, 9)


def test_nonsymmetric_tensor_uses_a_direct_solve():
    square = unit_square()
    space = space_for(square, 8, WholeBoundary(square))
    solution = solve_mixed(WeakProblem(constant([[1.0, 0.5], [-0.5, 1.0]]), space,
                                       f=lambda x: np.ones(len(x))))
    assert solution.diagnostics["iterations"] == 0
    assert solution.diagnostics["relative_residual"] < 1e-10
    assert conormal_residual(solution.values, solution.system) < 1e-10


def test_pure_neumann_needs_compatible_data():
    with pytest.raises(Incompatible) as info:
        solve_mixed(manufactured_case("neumann-constant").problem(8))
    assert info.value.details["compatibility"] == [pytest.approx(1.0)]

    square = unit_square()
    space = space_for(square, 8, NoBoundary(2))
    system = assemble(WeakProblem(identity(2), space, f=lambda x: x[:, 0] - 0.5))
    assert abs(system.compatibility[0]) < 1e-12
    solution = solve_mixed(WeakProblem(identity(2), space, f=lambda x: x[:, 0] - 0.5))
    assert abs(solution.values.mean()) < 1e-10


@pytest.mark.parametrize("name", ["sine-dirichlet", "mixed-left"])
def test_manufactured_convergence(name):
    table = convergence_study(manufactured_case(name), [8, 16, 32])
    assert np.all(np.diff(table["l2"]) < 0)
    assert np.all(table["l2_ratio"].to_numpy()[1:] >= 3.5)
    assert table["w12_rate"].iloc[-1] == pytest.approx(1.0, abs=0.25)
    assert table["conormal_residual"].max() <= 1e-8


def test_manufactured_catalog():
    assert set(CASES) == {"sine-dirichlet", "mixed-left", "neumann-constant"}
    with pytest.raises(ConfigError):
        manufactured_case("poisson")
    with pytest.raises(ConfigError):
        convergence_study(manufactured_case("neumann-constant"), [8])


def test_thresholds():
    assert meyers_threshold(0.5) == pytest.approx(4.0)
    assert math.isinf(meyers_threshold(1.0))
    assert expected_verdict(3.0, 4.0, 0.05) == "converges"
    assert expected_verdict(5.0, 4.0, 0.05) == "diverges"
    assert expected_verdict(4.1, 4.0, 0.05) is None


def test_mazya_exponents():
    for n in (3, 4, 6):
        a, b, c = mazya_coefficients(0.5, n)
        assert strongly_elliptic(a, b, c)
        assert theta_general(a, b, c, n) == pytest.approx(mazya_theta(0.5, n), abs=1e-12)
    assert mazya_threshold(1.0, 2, 4) > mazya_threshold(0.1, 2, 4) > mazya_threshold(0.01, 2, 4) > 2
    assert mazya_threshold(1e-14, 2, 4) == pytest.approx(2.0, abs=1e-5)
    power, threshold = mazya_exponent(1.0, 3, 5)
    assert threshold > 2
    with pytest.raises(ConfigError):
        mazya_exponent(1.0, 3, 4)
    with pytest.raises(ConfigError):
        mazya_exponent(0.0, 2, 4)


def test_hat_rule_integrates_the_hat():
    T, W, phi, dphi = hat_rule(2, 0.25)
    assert W.sum() == pytest.approx(0.25)
    assert W @ phi == pytest.approx(0.25 ** 2)
    np.testing.assert_allclose(W @ dphi, 0.0, atol=1e-14)


def test_meyers_field_is_a_weak_solution():
    h = 1 / 16
    centers = annulus_centers(2, h, 0.3, 0.8)
    assert len(centers) > 0
    residual = weak_residual(meyers(0.5), meyers_field(0.5), centers, h)
    assert np.max(np.abs(residual)) < 1e-6


def test_degiorgi_field_is_a_weak_solution():
    h = 0.1
    centers = annulus_centers(3, h, 0.3, 0.8, max_centers=6)
    residual = weak_residual(degiorgi(1.2, 3), degiorgi_field(1.2, 3), centers, h,
                             f=degiorgi_rhs(1.2, 3), pieces=3)
    assert np.max(np.abs(residual)) < 1e-6


def test_meyers_counterexample_without_solver():
    report = counterexample("meyers", mu=0.5, grids=[8, 16], levels=[10, 12], solve=False)
    assert report.threshold == pytest.approx(4.0)
    assert report.passed, [c for c in report.checks if not c["pass"]]
    table = report.tables["shell_scans"]
    finest = table[table["levels"] == 12].set_index("p")["verdict"]
    assert finest[3.0] == "converges"
    assert finest[6.0] == "diverges"
    with pytest.raises(ConfigError):
        counterexample("laplace")
