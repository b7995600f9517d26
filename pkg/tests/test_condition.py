import math

import numpy as np
import pytest

from wavecert.coeff import build
from wavecert.condition import (
    check_condition,
    multiplier_matrix,
    multiplier_matrix_diagonal,
    quadratic_form_matrix,
    weight_function,
)
from wavecert.domain import region, sample
from wavecert.weight import construct_weight

SQRT2 = math.sqrt(2.0)


def identity_field():
    return build(["1", "1"], diagonal=True)


def example_bad_field():
    return build(["1 + x1^2 + x2^2", "1 + x1^2 + x2^2"], diagonal=True)


def isotropic_exp_field():
    return build(["exp(x1 + x2)", "exp(x1 + x2)"], diagonal=True)


def quadratic_weight():
    return weight_function("(x1^2 + x2^2)/2", 2)


def offset_disk(radius=1.0, center=(2.0, 0.0)):
    cx, cy = center
    return region(
        2,
        [(cx - radius, cx + radius), (cy - radius, cy + radius)],
        [f"(x1 - {cx!r})^2 + (x2 - {cy!r})^2 - {radius * radius!r}"],
    )


def random_separable_weight(rng):
    """Quadratic-plus-linear weight with no mixed second derivatives."""
    a1, a2, b1, b2 = (float(v) for v in rng.uniform(-2.0, 2.0, size=4))
    text = f"{a1!r}*x1^2/2 + {b1!r}*x1 + {a2!r}*x2^2/2 + {b2!r}*x2"
    return weight_function(text, 2)


def random_coupled_weight(rng):
    """Quadratic weight with a mixed term; only the half-sum identity holds."""
    a1, a2, c, b1 = (float(v) for v in rng.uniform(-2.0, 2.0, size=4))
    text = f"{a1!r}*x1^2/2 + {a2!r}*x2^2/2 + {c!r}*x1*x2 + {b1!r}*x1"
    return weight_function(text, 2)


def rel_frobenius(x, y):
    denom = max(np.linalg.norm(x), np.linalg.norm(y), 1.0)
    return np.linalg.norm(x - y) / denom


BUNDLED_FIELDS = [
    (example_bad_field, [(-1.3, 1.3), (-1.3, 1.3)], {}),
    (isotropic_exp_field, [(1.0, 3.0), (-1.0, 1.0)], {}),
    (
        lambda: build(["exp(x1^3 + x2^3)", "exp(x1^3 + x2^3)"], diagonal=True),
        [(1.0, 3.0), (1.0, 3.0)],
        {},
    ),
    (
        lambda: build(["exp(mu1*x1)", "exp(-mu2*x1^2)"], diagonal=True),
        [(0.8, 3.2), (-1.2, 1.2)],
        {"mu1": 0.5, "mu2": 0.1},
    ),
]


class TestMultiplierMatrix:
    def test_identity_field_gives_weight_hessian(self):
        b = multiplier_matrix(identity_field(), quadratic_weight(), (0.7, -0.4))
        assert np.allclose(b, np.eye(2), atol=1e-14)

    def test_constant_diagonal_field(self):
        f = build(["2", "3"], diagonal=True)
        b = multiplier_matrix(f, quadratic_weight(), (0.7, -0.4))
        assert np.allclose(b, np.diag([4.0, 9.0]), atol=1e-13)

    def test_dual_paths_agree_on_example_field(self):
        f = example_bad_field()
        w = quadratic_weight()
        general = multiplier_matrix(f, w, (1.0, 1.0))
        diagonal = multiplier_matrix_diagonal(f, w, (1.0, 1.0))
        assert rel_frobenius(general, diagonal) < 1e-10

    def test_hand_expanded_entries(self):
        # field 1 + |x|^2 at (1, 0) with weight d = x1: the only nonzero
        # weight derivative is d_x1 = 1, so the four entries reduce to
        # a*da/dx1 - (1/2)*a*da/dx1 = 2 on the first diagonal,
        # -(1/2)*a*da/dx1 = -2 on the second, and zero off the diagonal
        f = example_bad_field()
        w = weight_function("x1", 2)
        b = multiplier_matrix_diagonal(f, w, (1.0, 0.0))
        assert np.allclose(b, np.diag([2.0, -2.0]), atol=1e-13)
        assert rel_frobenius(b, multiplier_matrix(f, w, (1.0, 0.0))) < 1e-10

    def test_diagonal_path_matches_general_for_exponential_weight(self):
        f = isotropic_exp_field()
        w = construct_weight(axis=1, sign_case="positive", shift=5.0, lam=1.7, dim=2)
        pt = (0.0, 0.0)
        assert (
            rel_frobenius(
                multiplier_matrix(f, w, pt), multiplier_matrix_diagonal(f, w, pt)
            )
            < 1e-10
        )

    def test_batched_equals_pointwise(self):
        f = isotropic_exp_field()
        w = quadratic_weight()
        pts = np.array([[1.2, -0.4], [2.5, 0.3], [2.0, 0.9]])
        batch = multiplier_matrix(f, w, pts)
        for row, mat in zip(pts, batch):
            assert np.allclose(mat, multiplier_matrix(f, w, row), atol=1e-12)

    def test_presymmetrization_asymmetry_small(self):
        f = build(["2 + x1^2", "x1*x2/4", "3 + x2^2"], diagonal=False)
        w = random_coupled_weight(np.random.default_rng(0))
        raw = multiplier_matrix(f, w, (0.8, -0.6), symmetrize=False)
        assert np.max(np.abs(raw - raw.T)) < 1e-12


class TestQuadraticFormMatrix:
    def test_identity_field(self):
        m = quadratic_form_matrix(identity_field(), quadratic_weight(), (0.3, 0.4))
        assert np.allclose(m, 2.0 * np.eye(2), atol=1e-14)

    def test_constant_field_diagonal_formula(self):
        f = build(["2", "3"], diagonal=True)
        m = quadratic_form_matrix(f, quadratic_weight(), (0.3, 0.4))
        assert np.allclose(m, 2.0 * np.diag([4.0, 9.0]), atol=1e-13)

    def test_half_sum_identity_random_diagonal(self):
        rng = np.random.default_rng(11)
        f = example_bad_field()
        for _ in range(20):
            w = random_coupled_weight(rng)
            pt = rng.uniform(-1.0, 1.0, size=2)
            m = quadratic_form_matrix(f, w, pt)
            b = multiplier_matrix(f, w, pt)
            assert rel_frobenius(0.5 * (m + m.T), 2.0 * b) < 1e-10


class TestQuadraticFormOracle:
    def test_matches_finite_difference_definition(self):
        # independent oracle: entry (i, j) sums 2 a^{iq} (a^{pj} d_{x_p})_{x_q}
        # minus da^{ij}/dx_q a^{pq} d_{x_p}, with the inner derivative taken
        # by central differences of the evaluated product instead of the
        # symbolic product-rule expansion the implementation uses
        from wavecert.expr import evaluate

        field = build(["2 + x1^2", "x1*x2/4", "3 + x2^2"], diagonal=False)
        rng = np.random.default_rng(99)
        step = 1e-6

        def product_value(p_idx, j_idx, w, x):
            a_val = evaluate(field.entry(p_idx, j_idx), x)
            g_val = evaluate(w.grad[p_idx - 1], x)
            return a_val * g_val

        for _ in range(5):
            w = random_coupled_weight(rng)
            pt = rng.uniform(-1.0, 1.0, size=2)
            n = field.dim
            oracle = np.zeros((n, n))
            a_at = field.values(pt)
            da_at = field.partial_values(pt)
            grad_at = w.grad_values(pt)
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    total = 0.0
                    for p in range(1, n + 1):
                        for q in range(1, n + 1):
                            hi = pt.copy()
                            lo = pt.copy()
                            hi[q - 1] += step
                            lo[q - 1] -= step
                            fd = (
                                product_value(p, j, w, hi)
                                - product_value(p, j, w, lo)
                            ) / (2 * step)
                            total += 2.0 * a_at[i - 1, q - 1] * fd
                            total -= (
                                da_at[i - 1, j - 1, q - 1]
                                * a_at[p - 1, q - 1]
                                * grad_at[p - 1]
                            )
                    oracle[i - 1, j - 1] = total
            m = quadratic_form_matrix(field, w, pt)
            assert np.allclose(m, oracle, rtol=1e-6, atol=1e-6)


class TestIdentities:
    @pytest.mark.parametrize("make_field,box,consts", BUNDLED_FIELDS)
    def test_half_sum_and_diagonal_identities(self, make_field, box, consts):
        rng = np.random.default_rng(2024)
        f = make_field()
        lows = np.array([b[0] for b in box])
        highs = np.array([b[1] for b in box])
        pts = rng.uniform(lows, highs, size=(100, 2))
        for k in range(pts.shape[0]):
            pt = pts[k]
            if k % 2 == 0:
                w = random_separable_weight(rng)
            else:
                lam = rng.uniform(0.5, 3.0)
                shift = rng.uniform(4.0, 7.0)
                case = "positive" if k % 4 == 1 else "negative"
                w = construct_weight(1, case, shift, lam, 2)
            m = quadratic_form_matrix(f, w, pt, consts)
            b = multiplier_matrix(f, w, pt, consts)
            assert rel_frobenius(0.5 * (m + m.T), 2.0 * b) < 1e-10
            bd = multiplier_matrix_diagonal(f, w, pt, consts)
            assert rel_frobenius(bd, b) < 1e-10

    def test_half_sum_identity_general_field(self):
        rng = np.random.default_rng(55)
        f = build(["2 + x1^2", "x1*x2/4", "3 + x2^2"], diagonal=False)
        for _ in range(25):
            w = random_coupled_weight(rng)
            pt = rng.uniform(-1.0, 1.0, size=2)
            m = quadratic_form_matrix(f, w, pt)
            b = multiplier_matrix(f, w, pt)
            assert rel_frobenius(0.5 * (m + m.T), 2.0 * b) < 1e-10


class TestCheckCondition:
    def test_classical_multiplier_on_offset_disk(self):
        report = check_condition(
            identity_field(), quadratic_weight(), offset_disk(), resolution=33
        )
        assert report.certified
        assert report.margin == pytest.approx(2.0, abs=1e-12)
        assert report.grad_min >= 1.0 - 1e-9

    def test_constant_diagonal_margin(self):
        report = check_condition(
            build(["2", "3"], diagonal=True),
            quadratic_weight(),
            offset_disk(),
            resolution=17,
        )
        assert report.certified
        assert report.margin == pytest.approx(4.0, abs=1e-12)

    def test_gradient_failure_at_origin(self):
        r = region(2, [(-1.0, 1.0), (-1.0, 1.0)], ["x1^2 + x2^2 - 1"])
        report = check_condition(
            identity_field(), quadratic_weight(), r, resolution=33
        )
        assert report.verdict == "failed_gradient"
        assert report.grad_min == 0.0
        assert np.allclose(report.worst_point_grad, (0.0, 0.0))

    def test_coefficient_failure_short_circuits(self):
        f = build(["x1", "1"], diagonal=True)
        r = region(2, [(-1.0, 1.0), (-1.0, 1.0)])
        report = check_condition(f, quadratic_weight(), r, resolution=9)
        assert report.verdict == "failed_coefficient"
        assert report.alpha_min <= 0.0
        assert report.margin is None

    def test_positivity_failure_verdict(self):
        # weight with negative Hessian cannot certify the identity field
        w = weight_function("-(x1^2 + x2^2)/2 + 10*x1", 2)
        report = check_condition(identity_field(), w, offset_disk(), resolution=9)
        assert report.verdict == "failed_positivity"
        assert report.margin < 0.0

    @pytest.mark.parametrize("scale", [2.0, 0.5])
    def test_pencil_margin_scales_exactly_with_weight(self, scale):
        base = check_condition(
            isotropic_exp_field(), quadratic_weight(), offset_disk(), resolution=9
        )
        scaled_weight = weight_function(f"{scale!r}*((x1^2 + x2^2)/2)", 2)
        scaled = check_condition(
            isotropic_exp_field(), scaled_weight, offset_disk(), resolution=9
        )
        assert scaled.margin == pytest.approx(scale * base.margin, rel=1e-12)

    def test_threads_do_not_change_results(self):
        f = isotropic_exp_field()
        w = quadratic_weight()
        a = check_condition(f, w, offset_disk(), resolution=17, threads=1)
        b = check_condition(f, w, offset_disk(), resolution=17, threads=4)
        assert a.margin == b.margin
        assert a.matrix_min_eig == b.matrix_min_eig
        assert a.worst_point_margin == b.worst_point_margin

    def test_radial_field_quadratic_weight_regression(self):
        # regression snapshot: the 1 + |x|^2 field with the radial weight on
        # the disk of radius sqrt(2) is not certifiable, and the binding
        # failure is the vanishing gradient at the grid's origin (the matrix
        # inequality itself holds: det(2B) = 2a^2(1 + 2|x|^2) > 0 here)
        r = region(2, [(-SQRT2, SQRT2)] * 2, ["x1^2 + x2^2 - 2"])
        report = check_condition(example_bad_field(), quadratic_weight(), r, 33)
        assert report.verdict == "failed_gradient"
        assert report.margin > 0.0
        assert report.grad_min == 0.0

    def test_sylvester_cross_check(self):
        # sign of leading principal minors must agree with the eigenvalue
        # verdict pointwise
        from wavecert.linalg import jacobi_eigenvalues, leading_principal_minors

        f = isotropic_exp_field()
        w = construct_weight(axis=1, sign_case="positive", shift=5.0, lam=3.0, dim=2)
        grid = sample(offset_disk(), 17)
        mats = multiplier_matrix(f, w, grid.points)
        for mat in mats:
            eig_pd = jacobi_eigenvalues(mat)[0] > 0.0
            minors_pd = bool(np.all(leading_principal_minors(mat) > 0.0))
            assert eig_pd == minors_pd

    def test_dump_grid_columns(self, tmp_path):
        path = tmp_path / "grid.csv"
        check_condition(
            identity_field(),
            quadratic_weight(),
            offset_disk(),
            resolution=5,
            dump_path=path,
        )
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,eig_min_pencil,eig_min_matrix,grad_norm,minor1,minor2"
