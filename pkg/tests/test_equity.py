import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mrio_equity import (
    RegionFlowMatrix,
    classify_quadrant,
    distance_matrix,
    eeei,
    eeei_distance,
    eeei_records,
    minmax_scale,
    net_flows,
)
from mrio_equity.errors import LabelMismatchError

from oracles import loop_net_flows, minmax

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def vectors(min_size=2, max_size=13):
    return st.integers(min_size, max_size).flatmap(
        lambda m: arrays(np.float64, m, elements=finite))


class TestNetFlows:
    def test_symmetric(self, rng):
        M = rng.uniform(size=(5, 5))
        np.testing.assert_allclose(net_flows(M + M.T), 0, atol=1e-12)

    def test_two_regions(self):
        np.testing.assert_array_equal(net_flows(np.array([[99.0, 5], [2, -7]])), [3, -3])

    def test_loop_oracle(self, rng):
        F = rng.uniform(0, 1e3, (13, 13))
        np.testing.assert_allclose(net_flows(F), loop_net_flows(F), rtol=1e-12, atol=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 13), st.integers(0, 2**32 - 1))
    def test_antisymmetry(self, m, seed):
        F = np.random.default_rng(seed).uniform(0, 1e4, (m, m))
        assert abs(net_flows(F).sum()) <= 1e-9 * np.abs(F).sum()


class TestMinmax:
    def test_endpoints_and_midpoint(self):
        np.testing.assert_array_equal(minmax_scale([0, 5, 10]), [-1, 0, 1])

    def test_constant(self):
        np.testing.assert_array_equal(minmax_scale([3.0, 3.0, 3.0]), [0, 0, 0])

    @settings(max_examples=200, deadline=None)
    @given(vectors(1, 20))
    def test_order_and_range(self, v):
        out = minmax_scale(v)
        assert ((out >= -1) & (out <= 1)).all()
        if v.max() > v.min():
            assert out[np.argmin(v)] == -1.0 and out[np.argmax(v)] == 1.0
        order = np.argsort(v, kind="stable")
        assert (np.diff(out[order]) >= 0).all()
        np.testing.assert_allclose(out, minmax(list(v)), atol=1e-12)


class TestEeei:
    def test_anti_aligned(self):
        v = np.array([3.0, -1.0, 10.0, 0.5])
        out = eeei(-v, v)
        np.testing.assert_allclose(out, minmax_scale(2 * minmax_scale(v)), atol=1e-15)
        assert out[2] == 1.0 and out[1] == -1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            eeei([1, 2], [1, 2, 3])

    def test_unknown_orientation(self):
        with pytest.raises(ValueError):
            eeei([1, 2], [2, 1], "sideways")

    def test_advantaged_region_scores_one(self, rng):
        # one region combines the lowest emission balance with the highest value balance
        e = rng.uniform(-500, 500, 13)
        v = rng.uniform(-5e4, 5e4, 13)
        e[4], v[4] = e.min() - 100.0, v.max() + 1e3
        out = eeei(e, v)
        assert out[4] == 1.0
        assert np.count_nonzero(out == 1.0) == 1
        assert eeei(e, v, "literal_eq8")[4] == -1.0

    def test_two_regions(self):
        np.testing.assert_array_equal(eeei([1.0, -1.0], [-1.0, 1.0]), [-1.0, 1.0])
        # aligned balances leave nothing to rank: the degenerate rule applies
        np.testing.assert_array_equal(eeei([1.0, -1.0], [1.0, -1.0]), [0.0, 0.0])

    def test_constant_inputs(self):
        np.testing.assert_array_equal(eeei(np.full(5, 2.0), np.full(5, -3.0)), np.zeros(5))

    @settings(max_examples=200, deadline=None)
    @given(vectors(), st.data())
    def test_properties(self, e, data):
        v = data.draw(arrays(np.float64, e.size, elements=finite))
        a = eeei(e, v)
        b = eeei(e, v, "literal_eq8")
        assert ((a >= -1) & (a <= 1)).all()
        np.testing.assert_array_equal(b, -a)
        d = minmax_scale(v) - minmax_scale(e)
        if np.unique(d).size > 1:
            assert np.count_nonzero(a == 1.0) >= 1 and np.count_nonzero(a == -1.0) >= 1
        if np.count_nonzero(d == d.max()) == 1 and np.count_nonzero(d == d.min()) == 1 and d.max() > d.min():
            assert np.count_nonzero(a == 1.0) == 1 and np.count_nonzero(a == -1.0) == 1

    def test_aligned_balances_are_degenerate(self, rng):
        # f(e) and f(v) coincide mathematically; rounding must not be amplified
        e = rng.uniform(-10, 10, 7)
        np.testing.assert_array_equal(eeei(e, 205.39375678035833 * e + 3.0), np.zeros(7))

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 13), st.integers(0, 2**32 - 1),
           st.floats(1e-2, 1e2), st.floats(-1e3, 1e3), st.floats(1e-2, 1e2), st.floats(-1e3, 1e3))
    def test_affine_invariance(self, m, seed, alpha, b, gamma, c):
        r = np.random.default_rng(seed)
        e = r.uniform(-1e3, 1e3, m)
        v = r.uniform(-1e3, 1e3, m)
        # the claim needs inputs float64 can resolve: spreads well above the
        # offsets' rounding and a non-degenerate difference vector
        assume(np.ptp(e) >= 10 and np.ptp(v) >= 10)
        assume(np.ptp(minmax_scale(v) - minmax_scale(e)) >= 0.1)
        shifted = eeei(alpha * e + alpha * b, gamma * v + gamma * c)
        np.testing.assert_allclose(shifted, eeei(e, v), rtol=0, atol=1e-12)


class TestDistance:
    def test_zero(self):
        assert eeei_distance(1.0, 1.0) == 0.0

    def test_published_distances(self):
        assert eeei_distance(1.0, 0.28) == 0.72
        assert eeei_distance(1.0, -0.51) == 1.51

    @settings(max_examples=200, deadline=None)
    @given(*(st.floats(-1, 1) for _ in range(3)))
    def test_metric_axioms(self, a, b, c):
        assert eeei_distance(a, b) == eeei_distance(b, a)
        assert (eeei_distance(a, b) == 0) == (a == b)
        assert 0 <= eeei_distance(a, b) <= 2
        assert eeei_distance(a, c) <= eeei_distance(a, b) + eeei_distance(b, c) + 1e-15

    def test_matrix(self):
        D = distance_matrix([1.0, 0.28, -0.51])
        assert D[0, 1] == 0.72 and D[0, 2] == 1.51
        np.testing.assert_array_equal(D, D.T)
        np.testing.assert_array_equal(np.diag(D), 0)


class TestQuadrant:
    def test_published_roles(self):
        assert classify_quadrant(478, 27000) == "Q1"
        assert classify_quadrant(-611, 96000) == "Q2"

    def test_remaining_quadrants(self):
        assert classify_quadrant(-1, -1) == "Q3"
        assert classify_quadrant(1, -1) == "Q4"

    def test_ties_go_positive(self):
        assert classify_quadrant(0, 0) == "Q1"
        assert classify_quadrant(0, -5) == "Q4"
        assert classify_quadrant(-5, 0) == "Q2"


class TestRecords:
    def test_fields(self, rng):
        labels = ("A", "B", "C")
        E = RegionFlowMatrix("emission", 2000, labels, rng.uniform(0, 10, (3, 3)))
        V = RegionFlowMatrix("value", 2000, labels, rng.uniform(0, 10, (3, 3)))
        recs = eeei_records(E, V)
        e, v = loop_net_flows(E.values), loop_net_flows(V.values)
        assert [r.region for r in recs] == list(labels)
        for i, r in enumerate(recs):
            assert r.e_net == pytest.approx(e[i], abs=1e-12)
            assert r.v_net == pytest.approx(v[i], abs=1e-12)
            assert r.quadrant == classify_quadrant(r.e_net, r.v_net)
        assert list(recs[0].as_row()) == ["region", "year_or_period", "e_net_Mt", "v_net_MEUR",
                                          "scaled_e", "scaled_v", "eeei", "quadrant"]

    def test_label_mismatch(self):
        E = RegionFlowMatrix("emission", 2000, ("A", "B"), np.ones((2, 2)))
        V = RegionFlowMatrix("value", 2000, ("B", "A"), np.ones((2, 2)))
        with pytest.raises(LabelMismatchError):
            eeei_records(E, V)
