import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fusionqldpc import experiments as ex
from fusionqldpc.codes import named_code


def test_break_even():
    assert ex.break_even(0.0, 12) == 0.0
    assert ex.break_even(0.37, 1) == pytest.approx(0.37)
    assert ex.break_even(0.01, 12) == pytest.approx(1 - 0.99**12)
    assert ex.break_even(0.01, 12) == pytest.approx(0.1136, abs=1e-4)
    with pytest.raises(ValueError):
        ex.break_even(1.5, 2)
    with pytest.raises(ValueError):
        ex.break_even(0.1, 0)


@given(st.floats(0, 1), st.floats(0, math.pi / 2))
def test_line_noise_bounds(x, theta):
    p_e, p_l = ex.line_noise(theta, x)
    assert 0 <= p_e <= ex.PE_BOUNDS[1] + 1e-15
    assert 0 <= p_l <= ex.PL_BOUNDS[1] + 1e-15


def test_line_noise_axes():
    assert ex.line_noise(0.0, 0.0) == (5e-4, 0.0)
    assert ex.line_noise(0.0, 1.0) == pytest.approx((3e-3, 0.0))
    assert ex.line_noise(math.pi / 2, 0.5)[0] == 0.0
    assert ex.line_noise(math.pi / 2, 1.0)[1] == pytest.approx(0.1)


@given(st.integers(1, 10**5).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_wilson_contains_rate(kn):
    k, n = kn
    lo, hi = ex.wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1


def test_sweep_point_invariants():
    p = ex.SweepPoint("c", 3, "iid", 100, 7, p_e=0.001)
    assert p.p_bar == 0.07 and p.ci[0] < 0.07 < p.ci[1]
    assert set(p.row()) == set(ex.CSV_FIELDS)
    with pytest.raises(ValueError):
        ex.SweepPoint("c", 3, "iid", 10, 11)


class FixedRate:
    def __init__(self, q):
        self.q = q

    def __call__(self, ctx, rng):
        return rng.random() < self.q


@pytest.mark.parametrize("q", [0.02, 0.3])
def test_estimator_with_mocked_decoder(q):
    ctx = ex.context(named_code("toric2"), 2)
    trials = 20000
    fails = ex.count_failures(ctx, FixedRate(q), trials, seed=11, point=0)
    assert abs(fails / trials - q) < 3 * math.sqrt(q * (1 - q) / trials)


def test_reproducibility_and_workers():
    ctx = ex.context(named_code("toric3"))
    a = ex.iid_point(ctx, 0.01, 0.05, 300, seed=5, point=2)
    b = ex.iid_point(ctx, 0.01, 0.05, 300, seed=5, point=2)
    c = ex.iid_point(ctx, 0.01, 0.05, 300, seed=5, point=2, workers=2)
    assert a.failures == b.failures == c.failures
    d = ex.rus_point(ctx, 0.95, 4, 300, seed=5, point=2)
    e = ex.rus_point(ctx, 0.95, 4, 300, seed=5, point=2, workers=2)
    assert d.failures == e.failures


def test_criteria_nest():
    ctx = ex.context(named_code("toric3"))
    counts = {c: ex.iid_point(ctx, 0.01, 0.1, 400, 3, 0, criterion=c).failures for c in ex.FAILURE_CRITERIA}
    assert counts["flip_or_lost"] >= max(counts["flip"], counts["lost"])
    with pytest.raises(ValueError):
        ex.iid_point(ctx, 0.01, 0.1, 10, 3, 0, criterion="sometimes")


def test_grid_monotone():
    table = ex.grid_sweep(named_code("toric3"), None, [0.002, 0.02], [0.02, 0.15], 1500, seed=1)
    rates = np.array([[p.p_bar for p in row] for row in table])
    his = np.array([[p.ci[1] for p in row] for row in table])
    los = np.array([[p.ci[0] for p in row] for row in table])
    # non-decreasing along both axes within confidence intervals
    assert np.all(his[1:, :] >= los[:-1, :]) and np.all(his[:, 1:] >= los[:, :-1])
    assert rates[1, 1] > rates[0, 0]


def test_larger_code_better_at_low_noise():
    small = ex.sweep_line(named_code("bb72"), None, math.pi / 2, [0.3], 2000, seed=2)[0]
    large = ex.sweep_line(named_code("bb144"), None, math.pi / 2, [0.3], 2000, seed=2)[0]
    assert large.p_bar <= small.p_bar


def test_bisection_on_known_gap():
    def evaluate(x, point):
        g = x - 0.3
        return g, g - 0.01, g + 0.01

    crossing, lo, hi, ci = ex.bisect_crossing(evaluate, 0.0, 1.0, 0.05, lambda x: x)
    assert lo <= 0.3 <= hi and (hi - lo) <= 0.05 * (hi + lo) / 2 + 1e-12
    assert crossing == pytest.approx(0.3)
    assert ci[0] <= crossing <= ci[1]


def test_no_crossing():
    with pytest.raises(ex.NoCrossingError, match="no crossing in range"):
        ex.pseudo_threshold(named_code("bb72"), None, "erasure-only", 200, 0, x_range=(0.0, 0.1))


def test_pseudo_threshold_record():
    res = ex.pseudo_threshold(named_code("toric3"), None, "erasure-only", 400, 0)
    rec = res.record()
    assert set(rec) == {"code", "axis", "crossing", "bracket_low", "bracket_high", "k", "trials"}
    assert rec["bracket_low"] <= rec["crossing"] <= rec["bracket_high"]
    assert rec["k"] == 2 and 0.01 <= rec["crossing"] <= 0.1


def test_csv_roundtrip(tmp_path):
    points = [ex.SweepPoint("c", 2, "iid", 10, 3, p_e=0.001, p_l=0.02)]
    path = tmp_path / "out.csv"
    ex.write_csv(points, path)
    rows = ex.read_csv(path)
    assert list(rows[0]) == list(ex.CSV_FIELDS)
    assert float(rows[0]["p_bar"]) == 0.3 and rows[0]["eta"] == ""


def test_parse_axis():
    assert ex.parse_axis("error-only") == 0.0
    assert ex.parse_axis("0.5") == 0.5
    with pytest.raises(ValueError):
        ex.parse_axis("sideways")
