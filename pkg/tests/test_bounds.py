import itertools
import math

import numpy as np
import pytest

from concentro.bounds import (
    BoundReport,
    BoundTerm,
    additive_functional_tail,
    eta_tail,
    gaussian_moment_bound,
    sobolev_moment_bound,
    weibull_moment_bound,
)
from concentro.norms import NormOptions
from concentro.poly import Polynomial, ProductDistribution

X1X2 = Polynomial(2, {((1, 1), (2, 1)): 1.0})
GAUSS2 = ProductDistribution.gaussian(2)
OPTS = NormOptions(restarts=16, seed=0)


def test_gaussian_bound_hand_example():
    rep = gaussian_moment_bound(X1X2, GAUSS2, 2.0, OPTS)
    # E D^2 f has ones at (1,2) and (2,1): HS norm sqrt(2), operator norm 1
    nonzero = {t.label: t for t in rep.terms if t.value != 0}
    assert nonzero["1,2"].value == pytest.approx(2.0, rel=1e-12)
    assert nonzero["1|2"].value == pytest.approx(2.0, rel=1e-12)
    assert rep.total == pytest.approx(4.0, rel=1e-12)


def test_gaussian_bound_linear_and_constant():
    a = (3.0, 4.0)
    f = Polynomial(2, {((1, 1),): a[0], ((2, 1),): a[1]})
    for p in (2.0, 4.0, 9.0):
        rep = gaussian_moment_bound(f, GAUSS2, p, OPTS)
        assert rep.total == pytest.approx(math.sqrt(p) * 5.0, rel=1e-12)
    rep = gaussian_moment_bound(Polynomial.constant(2, 7.0), GAUSS2, 2.0)
    assert rep.terms == () and rep.total == 0.0


def test_gaussian_bound_validations_and_monotonicity():
    with pytest.raises(ValueError):
        gaussian_moment_bound(X1X2, GAUSS2, 1.5)
    totals = [gaussian_moment_bound(X1X2, GAUSS2, p, OPTS).total for p in (2, 3, 4, 6)]
    assert all(b >= a for a, b in zip(totals, totals[1:]))


def test_gaussian_bound_relabeling_invariance():
    f = Polynomial(3, {((1, 2), (2, 1)): 1.0, ((3, 1),): 2.0})
    g = Polynomial(3, {((2, 2), (3, 1)): 1.0, ((1, 1),): 2.0})  # relabeled 1->2,2->3,3->1
    dist = ProductDistribution.gaussian(3)
    for p in (2.0, 4.0):
        assert gaussian_moment_bound(f, dist, p, OPTS).total == pytest.approx(
            gaussian_moment_bound(g, dist, p, OPTS).total, rel=1e-8)


def test_eta_tail_hand_example():
    rep = eta_tail(X1X2, GAUSS2, t=8.0, L=1.0, opts=OPTS)
    assert rep.kind == "min"
    vals = {t.label: t.value for t in rep.terms}
    assert vals["1,2"] == pytest.approx((8 / math.sqrt(2)) ** 2, rel=1e-12)
    assert vals["1|2"] == pytest.approx(8.0, rel=1e-12)
    assert rep.total == pytest.approx(8.0, rel=1e-12)
    assert rep.meta["tail_estimate"] == pytest.approx(2 * math.exp(-8.0), rel=1e-12)


def test_eta_tail_linear_single_partition():
    f = Polynomial(2, {((1, 1),): 3.0, ((2, 1),): 4.0})
    for t, L in [(2.0, 1.0), (5.0, 0.5)]:
        rep = eta_tail(f, GAUSS2, t, L, opts=OPTS)
        assert len(rep.terms) == 1
        assert rep.total == pytest.approx((t / (L * 5.0)) ** 2, rel=1e-12)


def test_eta_tail_scaling_invariance():
    # eta_{cf}(ct) = eta_f(t): every term is homogeneous of degree zero
    for c in (0.5, 3.0):
        base = eta_tail(X1X2, GAUSS2, 2.0, 1.0, opts=OPTS).total
        scaled = eta_tail(c * X1X2, GAUSS2, c * 2.0, 1.0, opts=OPTS).total
        assert scaled == pytest.approx(base, rel=1e-10)


def test_eta_tail_monotone_in_t_and_L():
    totals_t = [eta_tail(X1X2, GAUSS2, t, 1.0, opts=OPTS).total for t in (1, 2, 4, 8)]
    assert all(b >= a for a, b in zip(totals_t, totals_t[1:]))
    totals_L = [eta_tail(X1X2, GAUSS2, 4.0, L, opts=OPTS).total for L in (0.5, 1.0, 2.0)]
    assert all(b <= a for a, b in zip(totals_L, totals_L[1:]))


def test_eta_tail_degenerate():
    with pytest.raises(ValueError):
        eta_tail(Polynomial.constant(2, 1.0), GAUSS2, 1.0, 1.0)
    with pytest.raises(ValueError):
        eta_tail(X1X2, GAUSS2, 0.0, 1.0)


def test_sobolev_bound_reduces_to_gaussian_at_half():
    for p in (2.0, 4.0):
        a = sobolev_moment_bound(X1X2, GAUSS2, p, L=1.0, gamma=0.5, opts=OPTS).total
        b = gaussian_moment_bound(X1X2, GAUSS2, p, OPTS).total
        assert a == pytest.approx(b, rel=1e-12)


def test_sobolev_bound_hand_example():
    rep = sobolev_moment_bound(X1X2, GAUSS2, p=4.0, L=1.0, gamma=1.0, opts=OPTS)
    assert rep.total == pytest.approx(4.0**1.5 * math.sqrt(2) + 16.0, rel=1e-12)
    with pytest.raises(ValueError):
        sobolev_moment_bound(X1X2, GAUSS2, 4.0, 1.0, gamma=0.4)


def test_additive_tail_shapes():
    # D = 1: single sub-Gaussian group 2 exp(-t^2 / (c n L^2 a^2))
    n, L, a = 50, 1.3, 0.7
    for t in (0.5, 2.0, 8.0):
        got = additive_functional_tail([], a, n, L, t)
        assert got == pytest.approx(2 * math.exp(-min(t**2 / (L**2 * n * a**2),
                                                      t**2 / (L**2 * a**2))), rel=1e-12)
    # t -> 0+ gives the trivial bound 2 per nonempty group
    assert additive_functional_tail([], a, n, L, 1e-12) == pytest.approx(2.0, rel=1e-6)
    # doubling t in the sub-Gaussian regime quarters the exponent argument
    t = 1e-3
    b1 = additive_functional_tail([], a, n, L, t)
    b2 = additive_functional_tail([], a, n, L, 2 * t)
    assert math.log(b1 / 2) * 4 == pytest.approx(math.log(b2 / 2), rel=1e-6)


def test_additive_tail_three_groups():
    # D = 3 with nonzero first and second moment rows
    n, L, t = 20, 1.0, 3.0
    m1 = np.full(n, 0.5)
    m2 = np.full(n, 0.25)
    got = additive_functional_tail([m1, m2], 2.0, n, L, t)
    g1 = 2 * math.exp(-min(t**2 / (L**6 * n * 4.0), t ** (2 / 3) / (L**2 * 2.0 ** (2 / 3))))
    g2 = 2 * math.exp(-min(t**2 / (L**2 * n * 0.25), t**2 / (L**4 * n * 0.0625)))
    g3 = 2 * math.exp(-(t / (L**2 * 0.25)))
    assert got == pytest.approx(g1 + g2 + g3, rel=1e-12)
    with pytest.raises(ValueError):
        additive_functional_tail([m1], 1.0, n, L, 0.0)


def test_weibull_bound_linear_alpha_one():
    f = Polynomial(2, {((1, 1),): 3.0, ((2, 1),): 4.0})
    rep = weibull_moment_bound(f, ProductDistribution.weibull(2, 1.0), p=4.0, alpha=1.0)
    assert rep.total == pytest.approx(math.sqrt(4.0) * 5.0 + 4.0 * 4.0, rel=1e-10)
    labels = {t.label for t in rep.terms}
    assert labels == {"1||", "||1"}


def test_weibull_bound_alpha2_matches_merged_recombination():
    from concentro.norms import norm_J
    from concentro.partitions import enumerate_partitions
    from concentro.poly import expected_derivative_tensor

    rng = np.random.default_rng(9)
    dist = ProductDistribution.weibull(3, 2.0)
    f = Polynomial(3, {((1, 1), (2, 1)): rng.standard_normal(),
                       ((1, 1), (2, 1), (3, 1)): rng.standard_normal(),
                       ((3, 2),): rng.standard_normal()})
    p = 4.0
    rep = weibull_moment_bound(f, dist, p, alpha=2.0, opts=OPTS)
    expect = 0.0
    for d in range(1, f.degree + 1):
        tens = expected_derivative_tensor(f, dist, d)
        for part in enumerate_partitions(d):
            mult = 1.0
            for b in part.blocks:
                mult *= 1 + len(b)
            expect += p ** (part.n_blocks / 2.0) * mult * norm_J(tens, part, OPTS).value
    assert rep.total == pytest.approx(expect, abs=1e-8)


def test_weibull_bound_constant_and_caps():
    rep = weibull_moment_bound(Polynomial.constant(2, 5.0),
                               ProductDistribution.weibull(2, 1.5), 2.0, 1.5)
    assert rep.total == 0.0
    quartic = Polynomial(1, {((1, 4),): 1.0})
    with pytest.raises(ValueError):
        weibull_moment_bound(quartic, ProductDistribution.weibull(1, 1.0), 2.0, 1.0)


def test_report_consistency_guard():
    term = BoundTerm(1, "1", 0.5, 0, 1.0, False, 2.0)
    with pytest.raises(ValueError):
        BoundReport("sum", (term,), 3.0)
    with pytest.raises(ValueError):
        BoundReport("max", (term,), 2.0)
    rep = BoundReport("sum", (term,), 2.0)
    rows = list(rep.csv_rows())
    assert rows[0] == ("d", "partition", "exponent", "norm", "flag", "term")
    assert rows[1][1] == "1" and rows[1][4] == "exact"
