import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergodic_shapley import (
    BinaryJoint,
    InputError,
    binary_rho,
    binary_rho_min,
    crossover_points,
    ergodic_estimate,
    improvement_ratio,
    learn_transformation,
    m1_upper_bound,
    make_game,
    mst_reference_joint,
    pair_count,
    paired_variance,
)
from ergodic_shapley.analysis import binary_rho_min_joint, predict, ratio_curve
from ergodic_shapley.estimators import marginal_std

TOL = 1e-12
rhos = st.floats(-1.0, 1.0, allow_nan=False)


# paired variance


def test_paired_variance_examples():
    assert paired_variance(2.0, -1.0, 10) == 0.0
    assert paired_variance(2.0, 0.0, 10) == pytest.approx(4.0 / 20, abs=TOL)
    assert paired_variance(2.0, 1.0, 10) == pytest.approx(4.0 / 10, abs=TOL)


@pytest.mark.parametrize("args", [(-1.0, 0.0, 5), (1.0, 1.5, 5), (1.0, -1.01, 5), (1.0, 0.0, 0)])
def test_paired_variance_domain(args):
    with pytest.raises(InputError):
        paired_variance(*args)


# improvement ratio


def test_improvement_ratio_examples():
    assert improvement_ratio(4_000_000, 1_166_667, -0.8) == pytest.approx(0.58554, abs=1e-5)
    assert improvement_ratio(4_000_000, 1_166_667, -0.8) == pytest.approx(
        math.sqrt(4_000_000 * 0.2 / 2_333_334), abs=TOL
    )
    assert improvement_ratio(1000, 500, 0.0) == pytest.approx(1.0, abs=TOL)


def test_improvement_ratio_asymptote():
    n, m1, rho = 100, 1000, -0.6
    big = 10**15
    assert improvement_ratio(big, pair_count(big, m1, n), rho) == pytest.approx(math.sqrt(1 + rho), abs=1e-6)
    assert ratio_curve([1e18], n, m1, rho)[0] == pytest.approx(math.sqrt(1 + rho), abs=1e-9)


@settings(max_examples=200)
@given(st.integers(1, 10**9), rhos)
def test_half_budget_pairs_give_sqrt(m2, rho):
    assert improvement_ratio(2 * m2, m2, rho) == pytest.approx(math.sqrt(1 + rho), rel=1e-15, abs=1e-15)


@pytest.mark.parametrize("args", [(0, 1, 0.0), (1, 0, 0.0), (10, 5, 2.0)])
def test_improvement_ratio_domain(args):
    with pytest.raises(InputError):
        improvement_ratio(*args)


# learning-size bound


def test_m1_upper_bound_examples():
    assert m1_upper_bound(10**6, 100, -1.0) == pytest.approx(600.0, abs=TOL)
    assert m1_upper_bound(10**6, 100, 0.0) == 0.0
    assert m1_upper_bound(600_000, 51, -0.5) == pytest.approx(1_800_000 / 2601, abs=TOL)
    assert round(m1_upper_bound(600_000, 51, -0.5)) == 692
    assert m1_upper_bound(10**6, 100, 0.3) < 0


@pytest.mark.parametrize("m,n,rho", [(10**6, 100, -0.5), (600_000, 51, -0.5), (10**6, 100, -0.9)])
def test_m1_upper_bound_is_break_even(m, n, rho):
    # at the bound, the continuous-m2 ratio equals one
    bound = m1_upper_bound(m, n, rho)
    m2 = (m - bound * n * n / 6) / 2
    assert math.sqrt(m * (1 + rho) / (2 * m2)) == pytest.approx(1.0, abs=TOL)


def test_m1_upper_bound_at_perfect_correlation_exhausts_budget():
    assert pair_count(10**6, 600, 100) == 0
    assert pair_count(10**6, 599, 100) > 0


def test_m1_upper_bound_domain():
    with pytest.raises(InputError):
        m1_upper_bound(10, 0, -0.5)


# pair count and predictions


@pytest.mark.parametrize(
    "m,m1,n,m2",
    [(600_000, 100, 51, 278_325), (1_000_000, 500, 100, 83_333), (400_000, 100, 100, 116_667), (250_000, 100, 100, 41_667)],
)
def test_pair_count(m, m1, n, m2):
    assert pair_count(m, m1, n) == m2


@settings(max_examples=300)
@given(st.integers(1, 10**8), st.integers(2, 5000), st.integers(1, 120))
def test_pair_count_rounds_to_nearest(m, m1, n):
    exact = (Fraction(m) - Fraction(m1 * n * n, 6)) / 2
    got = pair_count(m, m1, n)
    assert abs(got - exact) <= Fraction(1, 2)
    # halves go up
    if exact - math.floor(exact) == Fraction(1, 2):
        assert got == math.floor(exact) + 1


def test_predict_invariants():
    p = predict(57.7, -0.8, 4_000_000, 1000, 100)
    assert p.m2 == 1_166_667
    assert p.predicted_ratio == pytest.approx(p.predicted_sigma_E / (57.7 / math.sqrt(4_000_000)), abs=TOL)
    assert p.predicted_sigma_E >= 0
    with pytest.raises(InputError):
        predict(1.0, 0.0, 100, 1000, 100)


def test_ratio_curve_marks_exhausted_budget():
    curve = ratio_curve([1000, 1e7], 100, 100, -0.5)
    assert math.isnan(curve[0])
    assert curve[1] == pytest.approx(math.sqrt(1e7 * 0.5 / (1e7 - 100 * 10_000 / 6)), abs=TOL)


# crossover


def test_crossover_points():
    n, lo, hi = 100, 100, 1000
    c = crossover_points(n, lo, -0.5, hi, -0.9)
    assert c.beats_simple_low == pytest.approx(n * n * lo / 3.0, abs=1e-6)
    assert c.beats_simple_high == pytest.approx(n * n * hi / 5.4, abs=1e-6)
    for m, m1, rho in [(c.beats_simple_low, lo, -0.5), (c.beats_simple_high, hi, -0.9)]:
        assert ratio_curve([m], n, m1, rho)[0] == pytest.approx(1.0, abs=TOL)
    m = c.high_overtakes_low
    assert ratio_curve([m], n, lo, -0.5)[0] == pytest.approx(ratio_curve([m], n, hi, -0.9)[0], abs=TOL)
    above = m * 1.5
    assert ratio_curve([above], n, hi, -0.9)[0] < ratio_curve([above], n, lo, -0.5)[0]


def test_crossover_without_gain():
    c = crossover_points(100, 100, 0.0, 1000, 0.1)
    assert c.beats_simple_low is None and c.beats_simple_high is None
    assert c.high_overtakes_low is None
    # a lower correlation still lets the larger learning size win eventually
    assert crossover_points(100, 100, 0.1, 1000, 0.0).high_overtakes_low == pytest.approx(
        (11 * 1000 - 10 * 100) * 10_000 / 6
    )
    with pytest.raises(InputError):
        crossover_points(100, 1000, -0.5, 100, -0.9)


# binary joint laws


def test_binary_examples():
    assert binary_rho_min(0.5) == pytest.approx(-1.0, abs=TOL)
    assert binary_rho(BinaryJoint(0.3, 0.09)) == pytest.approx(0.0, abs=TOL)
    assert binary_rho_min(0.01) == pytest.approx(-1 / 99, abs=TOL)
    assert binary_rho(BinaryJoint(0.01, 0.0)) == pytest.approx(-1 / 99, abs=TOL)


def test_binary_table_cells():
    table = BinaryJoint(0.3, 0.1).table()
    np.testing.assert_allclose(table, [[0.1, 0.2], [0.2, 0.5]], atol=TOL)
    assert table.sum() == pytest.approx(1.0, abs=TOL)


def test_binary_rho_min_by_enumeration():
    # the minimum over the feasible a-grid agrees with the closed form
    for p in (0.01, 0.2, 0.5, 0.7, 0.95):
        grid = np.linspace(max(0.0, 2 * p - 1), p, 2001)
        best = min(binary_rho(BinaryJoint(p, a)) for a in grid)
        assert best == pytest.approx(binary_rho_min(p), abs=TOL)


@settings(max_examples=200)
@given(st.floats(1e-3, 1 - 1e-3))
def test_binary_rho_min_boundary(p):
    joint = binary_rho_min_joint(p)
    assert binary_rho(joint) == pytest.approx(binary_rho_min(p), abs=TOL)


@pytest.mark.parametrize("p,a", [(0.5, 0.6), (0.8, 0.5), (1.2, 0.5), (0.3, -0.1)])
def test_binary_joint_validation(p, a):
    with pytest.raises(InputError):
        BinaryJoint(p, a)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_binary_degenerate(p):
    with pytest.raises(InputError):
        binary_rho_min(p)
    with pytest.raises(InputError):
        binary_rho(BinaryJoint(p, p))


# mst reference joint


def exact_correlation(values, probs):
    v = [Fraction(x) for x in values]
    px = [sum(probs[r][c] for r in range(3)) for c in range(3)]
    py = [sum(probs[r][c] for c in range(3)) for r in range(3)]
    ex = sum(a * b for a, b in zip(px, v))
    ey = sum(a * b for a, b in zip(py, v))
    cov = sum(probs[r][c] * v[r] * v[c] for r in range(3) for c in range(3)) - ex * ey
    vx = sum(a * b * b for a, b in zip(px, v)) - ex * ex
    vy = sum(a * b * b for a, b in zip(py, v)) - ey * ey
    return float(cov) / math.sqrt(float(vx * vy)), ex, ey


def test_mst_joint_cells():
    j = mst_reference_joint()
    assert j.values == (101.0, 1.0, -99.0)
    assert j.cell(101, 101) == 0
    assert j.cell(101, 1) == j.cell(1, 101) == pytest.approx(0.01, abs=TOL)
    assert j.cell(101, -99) == j.cell(-99, 101) == pytest.approx(1 / 3 - 0.01, abs=TOL)
    assert j.cell(1, 1) == pytest.approx(1 / 3, abs=TOL)
    for y, x in [(1, -99), (-99, 1), (-99, -99)]:
        assert j.cell(y, x) == 0


def test_mst_joint_margins():
    j = mst_reference_joint()
    expected = [1 / 3, 1 / 3 + 0.01, 1 / 3 - 0.01]
    np.testing.assert_allclose(j.marginal_x(), expected, atol=TOL)
    np.testing.assert_allclose(j.marginal_y(), expected, atol=TOL)
    assert sum(sum(row) for row in j.probs) == 1
    v = np.array(j.values)
    assert j.marginal_x() @ v == pytest.approx(2.0, abs=TOL)


def test_mst_joint_correlation():
    j = mst_reference_joint()
    rho, ex, ey = exact_correlation(j.values, j.probs)
    assert ex == ey == 2
    assert j.correlation() == pytest.approx(rho, abs=TOL)
    assert j.correlation() == pytest.approx(-0.985, abs=0.001)


def test_shoes_paired_variance_consistency():
    """Replication variance of paired estimates against the closed form."""
    game = make_game("shoes")
    matching = learn_transformation(game, 1, 1500, 77)
    m2, R = 2000, 1000
    seqs = np.random.SeedSequence(78).spawn(R)
    reports = [ergodic_estimate(game, 1, matching.involution, 2, 2 * m2, np.random.default_rng(s)) for s in seqs]
    estimates = np.array([r.estimate for r in reports])
    rho = float(np.mean([r.rho_hat for r in reports]))
    sigma = marginal_std(game, 1, 400_000, 79)
    predicted = paired_variance(sigma, rho, m2)
    assert rho < -0.3
    assert estimates.var(ddof=1) == pytest.approx(predicted, rel=0.2)
