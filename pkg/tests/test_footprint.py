import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrio_equity import (
    LeontiefSolver,
    Period,
    RegionFlowMatrix,
    RegionSchema,
    RunReport,
    SingularSystemError,
    compute_footprints,
    compute_output,
    footprint_flows,
    intensity,
    leontief_inverse,
    period_aggregate,
    technical_coefficients,
)
from mrio_equity.errors import DataError, LabelMismatchError
from mrio_equity.synthetic import fixture_snapshots, random_economy, scaled_requirements

from oracles import loop_footprint, loop_output, neumann_inverse


class TestOutput:
    def test_zero_intermediate(self):
        Y = np.array([[1.0, 0], [1, 1], [0, 3]])
        np.testing.assert_array_equal(compute_output(np.zeros((3, 3)), Y), [1, 2, 3])

    def test_scalar(self):
        np.testing.assert_array_equal(compute_output([[0.5]], [[0.5]]), [1.0])

    def test_loop_oracle(self, rng):
        Z = rng.uniform(0, 10, (6, 6))
        Y = rng.uniform(0, 10, (6, 3))
        np.testing.assert_allclose(compute_output(Z, Y), loop_output(Z, Y), rtol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            compute_output(np.zeros((3, 3)), np.zeros((2, 1)))


class TestCoefficients:
    def test_zero_column(self, rng):
        Z = rng.uniform(0, 1, (3, 3))
        Z[:, 1] = 0
        A = technical_coefficients(Z, np.full(3, 10.0)).A
        np.testing.assert_array_equal(A[:, 1], 0)

    def test_scalar(self):
        np.testing.assert_array_equal(technical_coefficients([[0.5]], [1.0]).A, [[0.5]])

    def test_zero_output_column_recorded(self):
        Z = np.array([[0.0, 2.0], [0.0, 1.0]])
        tech = technical_coefficients(Z, np.array([4.0, 0.0]))
        np.testing.assert_array_equal(tech.A[:, 1], 0)
        assert tech.zero_output_sectors == {1}

    def test_epsilon_threshold(self):
        tech = technical_coefficients(np.ones((2, 2)), np.array([1e-10, 1.0]), epsilon_x=1e-9)
        assert tech.zero_output_sectors == {0}
        np.testing.assert_array_equal(tech.A[:, 1], [1.0, 1.0])


class TestLeontief:
    def test_identity(self):
        np.testing.assert_array_equal(leontief_inverse(np.zeros((4, 4))), np.eye(4))

    def test_scalar(self):
        assert leontief_inverse(np.array([[0.5]]))[0, 0] == pytest.approx(2.0, rel=1e-15)

    def test_neumann_oracle(self, rng):
        A = scaled_requirements(rng, 8, 0.7)
        assert np.max(np.abs(leontief_inverse(A) - neumann_inverse(A))) < 1e-6

    @pytest.mark.parametrize("rho", [0.8, 0.85, 0.9])
    def test_converged_series_near_radius_limit(self, rng, rho):
        # 60 terms leave a tail of order rho**61 / (1 - rho); run the series to convergence
        A = scaled_requirements(rng, 16, rho)
        terms = int(np.ceil(np.log(1e-16 * (1 - rho)) / np.log(rho))) + 10
        assert np.max(np.abs(leontief_inverse(A) - neumann_inverse(A, terms))) < 1e-9

    @pytest.mark.parametrize("n", [1, 5, 17, 64])
    def test_leontief_identity(self, rng, n):
        A = scaled_requirements(rng, n, 0.9)
        L = leontief_inverse(A)
        assert np.max(np.abs(L - (np.eye(n) + A @ L))) < 1e-8
        assert (L >= -1e-12).all()

    def test_singular_raises_with_radius(self):
        A = np.array([[0.5, 0.5], [0.5, 0.5]])  # spectral radius exactly 1
        with pytest.raises(SingularSystemError) as err:
            leontief_inverse(A)
        assert "spectral radius" in str(err.value)
        assert "1" in str(err.value)

    def test_near_singular_refused(self):
        A = np.array([[0.5, 0.5], [0.5, 0.5 - 1e-14]])
        with pytest.raises(SingularSystemError):
            leontief_inverse(A)

    def test_solver_reuse(self, rng):
        A = scaled_requirements(rng, 6, 0.6)
        solver = LeontiefSolver(A)
        Y = rng.uniform(size=(6, 2))
        np.testing.assert_allclose(solver.solve(Y), leontief_inverse(A) @ Y, rtol=1e-12, atol=1e-14)
        assert solver.condition_estimate >= 1.0


class TestIntensity:
    def test_unit(self):
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(intensity(x, x), [1, 1, 1])

    def test_zero_direct(self):
        np.testing.assert_array_equal(intensity(np.zeros(3), np.ones(3)), np.zeros(3))

    def test_zero_output_warns_in_report(self):
        report = RunReport()
        q = intensity(np.array([5.0, 2.0]), np.array([0.0, 4.0]), report=report)
        np.testing.assert_array_equal(q, [0.0, 0.5])
        assert report.intensity_warnings == 1


def one_region(n_sectors=1):
    return RegionSchema(("R",), tuple(f"s{i}" for i in range(n_sectors)))


class TestFootprintFlows:
    def test_identity_single_region(self):
        schema = one_region(3)
        Y = np.array([[1.0], [2.0], [4.0]])
        F = footprint_flows(np.ones(3), np.eye(3), Y, schema, "emission")
        np.testing.assert_array_equal(F.values, [[7.0]])

    def test_scalar_chain(self):
        F = footprint_flows(np.array([0.5]), np.array([[2.0]]), np.array([[1.0]]), one_region(), "value")
        assert F.values[0, 0] == 1.0

    def test_neumann_loop_oracle(self, rng):
        snap = random_economy(rng, ("A", "B", "C"), ("s", "t"), spectral_radius=0.7)
        tech = technical_coefficients(snap.Z, snap.x)
        q = intensity(snap.ext_emission, snap.x)
        F = footprint_flows(q, leontief_inverse(tech.A), snap.Y, snap.schema, "emission")
        oracle = loop_footprint(q, tech.A, snap.Y, 3, 2)
        assert np.max(np.abs(F.values - oracle)) < 1e-6

    def test_solver_and_explicit_agree(self, small_economy):
        s = small_economy
        tech = technical_coefficients(s.Z, s.x)
        q = intensity(s.ext_value, s.x)
        a = footprint_flows(q, leontief_inverse(tech.A), s.Y, s.schema, "value")
        b = footprint_flows(q, LeontiefSolver(tech.A), s.Y, s.schema, "value")
        np.testing.assert_allclose(a.values, b.values, rtol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            footprint_flows(np.ones(2), np.eye(2), np.ones((3, 1)), one_region(2), "emission")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            footprint_flows(np.ones(1), np.eye(1), np.ones((1, 1)), one_region(), "water")


class TestConservation:
    @pytest.mark.parametrize("snap", fixture_snapshots(), ids=lambda s: str(s.year))
    def test_production_side(self, snap):
        flows = compute_footprints(snap)
        for kind, direct in (("emission", snap.ext_emission), ("value", snap.ext_value)):
            per_region = direct.reshape(snap.schema.n_regions, -1).sum(axis=1)
            np.testing.assert_allclose(flows[kind].production_totals(), per_region, rtol=1e-9)
            assert flows[kind].values.sum() == pytest.approx(direct.sum(), rel=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3))
    def test_monotone_in_demand(self, seed, m, k):
        r = np.random.default_rng(seed)
        regions = tuple(f"R{i}" for i in range(m))
        snap = random_economy(r, regions, tuple(f"s{i}" for i in range(k)))
        tech = technical_coefficients(snap.Z, snap.x)
        q = intensity(snap.ext_emission, snap.x)
        L = leontief_inverse(tech.A)
        base = footprint_flows(q, L, snap.Y, snap.schema, "emission").values
        Y2 = snap.Y.copy()
        Y2[r.integers(Y2.shape[0]), r.integers(Y2.shape[1])] += r.uniform(0.1, 10)
        bumped = footprint_flows(q, L, Y2, snap.schema, "emission").values
        assert (bumped >= base - 1e-12 * np.abs(base).max()).all()

    def test_report_fields(self, small_economy):
        report = RunReport()
        compute_footprints(small_economy, report=report)
        d = report.to_dict()
        assert d["year"] == 2001 and d["zero_output_sectors"] == 0
        assert d["condition_estimate"] > 1 and d["wall_time"] >= 0


def yearly(values, year, kind="emission", labels=("A", "B")):
    return RegionFlowMatrix(kind, year, labels, np.asarray(values, dtype=float))


class TestPeriodAggregate:
    def test_identical_years(self, rng):
        M = rng.uniform(size=(2, 2))
        p = Period("P1", 1995, 2001)
        out = period_aggregate([yearly(M, y) for y in p.years], p)
        np.testing.assert_allclose(out.values, M, rtol=1e-15)
        assert out.timeframe == p

    def test_mean_and_sum(self):
        flows = [yearly(np.ones((2, 2)), 2000), yearly(np.full((2, 2), 3.0), 2001)]
        np.testing.assert_array_equal(period_aggregate(flows, Period("P", 2000, 2001)).values, 2.0)
        np.testing.assert_array_equal(period_aggregate(flows, Period("P", 2000, 2001, "sum")).values, 4.0)

    def test_loop_oracle(self, rng):
        mats = [rng.uniform(0, 100, (3, 3)) for _ in range(7)]
        p = Period("P2", 2002, 2008)
        out = period_aggregate([yearly(m, 2002 + i, labels=("a", "b", "c")) for i, m in enumerate(mats)], p)
        oracle = np.zeros((3, 3))
        for i in range(3):
            for j in range(3):
                oracle[i, j] = sum(m[i, j] for m in mats) / 7
        np.testing.assert_allclose(out.values, oracle, rtol=1e-14)

    def test_missing_year(self):
        with pytest.raises(DataError, match="missing"):
            period_aggregate([yearly(np.ones((2, 2)), 2000)], Period("P", 2000, 2001))

    def test_label_mismatch(self):
        flows = [yearly(np.ones((2, 2)), 2000), yearly(np.ones((2, 2)), 2001, labels=("B", "A"))]
        with pytest.raises(LabelMismatchError):
            period_aggregate(flows, Period("P", 2000, 2001))

    def test_default_periods(self):
        from mrio_equity import DEFAULT_PERIODS

        assert [(p.label, p.start_year, p.end_year) for p in DEFAULT_PERIODS] == [
            ("P1", 1995, 2001), ("P2", 2002, 2008), ("P3", 2009, 2015), ("P4", 2016, 2022)]
