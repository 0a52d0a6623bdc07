import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from pdelearn import dataterm, oracle
from pdelearn.fespace import FeSpace, ScalarField, cosine_sum
from pdelearn.grid import Grid


def test_poincare_equality_case():
    lhs, rhs, ok = oracle.check_poincare([0.0], [1.0], cosine_sum(1))
    assert lhs == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert rhs == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert abs(lhs - rhs) <= 1e-9 and ok


def test_poincare_constant_and_polynomials():
    lhs, _, ok = oracle.check_poincare([0.0], [1.0], ScalarField.constant(3.0))
    assert lhs == pytest.approx(0.0, abs=1e-14) and ok
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert oracle.check_poincare([0.0], [1.0], oracle.polynomial_field(rng.standard_normal(6)))[2]


def test_poincare_on_2d_box():
    assert oracle.check_poincare([0.1, 0.2], [0.6, 0.5], cosine_sum(2))[2]


def test_subset_poincare():
    c = 1.5
    lhs, rhs, ok = oracle.check_subset_poincare([0.0], [1.0], [0.0], [1.0], ScalarField.constant(c))
    assert lhs == pytest.approx(c * c) and rhs == pytest.approx(3 * c * c) and ok
    rng = np.random.default_rng(1)
    for _ in range(50):
        coef = rng.standard_normal(6)
        assert oracle.check_subset_poincare([0.0], [1.0], [0.0], [0.5], oracle.polynomial_field(coef))[2]


def test_subset_poincare_zero_mean_on_subset():
    rng = np.random.default_rng(2)
    for _ in range(50):
        coef = rng.standard_normal(6)
        P = Polynomial(coef).integ()
        coef[0] -= (P(0.5) - P(0.0)) / 0.5
        lhs, rhs, ok = oracle.check_subset_poincare([0.0], [1.0], [0.0], [0.5], oracle.polynomial_field(coef))
        # the subset-average term vanishes, only the gradient term is left
        assert ok and lhs > 0


def test_data_coercivity_constant_equality():
    V = FeSpace(Grid(1, 16), 2)
    cloud = dataterm.tiled_cloud(1, 4)
    op = dataterm.build_averaging_operator(V, cloud)
    c = 0.7
    l2, grad, b = oracle._forms(V, op, np.full(V.N, c))
    assert grad == pytest.approx(0.0, abs=1e-20)
    assert l2 == pytest.approx(b, rel=1e-12) and l2 == pytest.approx(c * c, rel=1e-12)


@pytest.mark.parametrize("d, nu, n, k", [(1, 4, 16, 2), (2, 3, 6, 2)])
def test_data_coercivity(d, nu, n, k):
    slack, const = oracle.check_data_coercivity(FeSpace(Grid(d, n), k), dataterm.tiled_cloud(d, nu))
    assert slack >= -1e-10
    assert const.M == 1 and const.eta == 1
    assert const.Gamma == pytest.approx(const.delta)  # optimal weight: Gamma = eta * delta


def test_bound_constants():
    c = oracle.BoundConstants(R=0.5, M=2, delta=0.01, alpha_min=2.0, eta=3.0)
    assert c.Gamma == 3.0 * max(0.25 * 2 / (math.pi**2 * 2.0), 0.01)


def test_pde_error_term_examples():
    f1 = cosine_sum(1, 2 * math.pi**2)
    assert oracle.check_pde_error_term(f1, 0.0, 1)[0] == 0.0
    E, expected, ok = oracle.check_pde_error_term(f1, 0.5, 1)
    assert ok and E == pytest.approx(math.pi**2 / math.sqrt(2), abs=1e-10)
    assert E == pytest.approx(6.97886, abs=1e-5)
    E, _, ok = oracle.check_pde_error_term(cosine_sum(2, 2 * math.pi**2), 0.25, 2)
    assert ok and E == pytest.approx(0.25 * 2 * math.pi**2, abs=1e-10)


def test_rough_coefficient():
    table = oracle.demo_rough_coefficient([0.375, 0.1875, 0.01])
    for eps, integral, norm, ratio in table:
        assert integral == pytest.approx(2.0, abs=1e-12)
        assert norm == pytest.approx(math.sqrt(2 * eps / 3), abs=1e-12)
        assert abs(ratio - math.sqrt(6 / eps)) <= 1e-10
    assert table[0][3] == pytest.approx(4.0, abs=1e-12)
    assert table[1][3] / table[0][3] == pytest.approx(math.sqrt(2), abs=1e-10)
    with pytest.raises(ValueError):
        oracle.demo_rough_coefficient([0.6])


def test_nested_cea():
    coarse, fine = FeSpace(Grid(1, 8), 2), FeSpace(Grid(1, 16), 2)
    cloud = dataterm.sample_points(10, 1, 0.05, seed=2)
    system = oracle.model_problem_system(fine, cloud, 0.25, 0.005)
    lhs, rhs, ok = oracle.check_nested_cea(coarse, fine, system)
    assert ok and lhs <= rhs + 1e-8


def test_error_estimate_rows():
    rows = oracle.check_error_estimate(FeSpace(Grid(2, 8), 2), nu=4)
    assert all(err <= bound for _, err, bound in rows)


def test_suite_report_format():
    results = oracle.run_suite()
    report = oracle.format_report(results)
    lines = report.splitlines()
    assert len(lines) == len(results)
    assert all(line.startswith("CHECK ") and line.split()[2] in ("PASS", "FAIL") for line in lines)
    assert all(r.passed for r in results), report
