"""Truncated-variation kernel vs definitional oracles, plus structural invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DISTS, random_values
from truvar import tv
from truvar.path import SampledPath


def stream(x, c):
    return tv.truncated_variation(x, c).value


class TestFrozenExamples:
    def test_constant_path(self):
        assert stream([5.0, 5.0, 5.0], 0.7) == 0.0

    def test_monotone_path(self):
        # single end-to-end increment dominates: (1.0 - 0.3)_+
        assert stream([0.0, 0.4, 1.0], 0.3) == pytest.approx(0.7, abs=1e-15)

    def test_zigzag(self):
        # full partition pays (2-1) three times
        assert stream([0.0, 2.0, 0.0, 2.0], 1.0) == 3.0
        assert tv.tv_oracle_dp([0.0, 2.0, 0.0, 2.0], 1.0).value == 3.0
        assert tv.tv_oracle_exhaustive([0.0, 2.0, 0.0, 2.0], 1.0).value == 3.0

    def test_single_point(self):
        assert tv.tv_oracle_exhaustive([1.3], 0.1).value == 0.0
        assert stream([1.3], 0.0) == 0.0

    def test_two_points(self):
        assert tv.tv_oracle_exhaustive([0.0, 1.0], 0.25).value == 0.75

    def test_total_variation(self):
        assert tv.total_variation([0.0, 2.0, 0.0, 2.0]) == 6.0
        assert tv.total_variation([1.0, 1.0]) == 0.0

    def test_dp_at_zero_is_total_variation(self, rng):
        for _ in range(20):
            x = rng.normal(size=rng.integers(2, 40))
            assert tv.tv_oracle_dp(x, 0.0).value == pytest.approx(
                tv.total_variation(x), rel=1e-12
            )

    def test_level_above_oscillation(self, rng):
        x = rng.uniform(-1, 1, size=30)
        c = x.max() - x.min()
        assert tv.tv_oracle_dp(x, c).value == 0.0
        assert stream(x, c) == 0.0


class TestOracleChain:
    def test_small_paths_three_distributions(self, rng):
        # streaming = dp = exhaustive on 1000 random paths with <= 12 grid steps
        per_dist = 1000 // len(DISTS) + 1
        for dist in DISTS:
            for _ in range(per_dist):
                n_points = int(rng.integers(2, 14))
                x = random_values(rng, n_points, dist)
                c = float(rng.uniform(0, 1.5) * (np.ptp(x) + 0.1))
                a = stream(x, c)
                b = tv.tv_oracle_dp(x, c).value
                e = tv.tv_oracle_exhaustive(x, c).value
                tol = 1e-9 * (1.0 + e)
                assert abs(a - b) <= tol, (x, c)
                assert abs(a - e) <= tol, (x, c)

    def test_medium_paths_streaming_vs_dp(self, rng):
        for _ in range(60):
            n_points = int(rng.integers(50, 800))
            x = random_values(rng, n_points, str(rng.choice(DISTS)))
            c = float(rng.uniform(0, 0.5) * (np.ptp(x) + 0.1))
            a = stream(x, c)
            b = tv.tv_oracle_dp(x, c).value
            assert abs(a - b) <= 1e-9 * (1.0 + b)


class TestEnvelope:
    def test_constant_band(self):
        env = tv.minimal_envelope([0.0, 0.6], 1.0)
        assert tv.total_variation(env) == 0.0
        assert np.max(np.abs(env.values - np.array([0.0, 0.6]))) <= 0.5

    def test_monotone(self):
        env = tv.minimal_envelope([0.0, 0.4, 1.0], 0.3)
        assert tv.total_variation(env) == pytest.approx(0.7, abs=1e-15)

    def test_random_against_exhaustive(self, rng):
        for _ in range(200):
            x = random_values(rng, 12, str(rng.choice(DISTS)))
            c = float(rng.uniform(0.05, 1.2) * (np.ptp(x) + 0.1))
            env = tv.minimal_envelope(x, c)
            target = tv.tv_oracle_exhaustive(x, c).value
            assert tv.total_variation(env) == pytest.approx(target, abs=1e-9 * (1 + target))
            assert np.max(np.abs(env.values - x)) <= c / 2 + 1e-12

    def test_preserves_grid(self):
        p = SampledPath(0.0, 0.5, [0.0, 1.0, 0.0], "cadlag-step")
        env = tv.minimal_envelope(p, 0.4)
        assert env.dt == p.dt and env.t0 == p.t0 and env.interpretation == p.interpretation

    def test_rejects_zero_level(self):
        with pytest.raises(tv.TvError):
            tv.minimal_envelope([0.0, 1.0], 0.0)


class TestSkeleton:
    def test_hand_trace(self):
        sk = tv.level_crossing_skeleton([0.0, 0.3, 0.6, 0.2], 1.0)
        assert sk.stop_indices.tolist() == [0, 2]
        assert sk.skel.values.tolist() == [0.0, 0.0, 0.6, 0.6]
        assert sk.overshoots.tolist() == pytest.approx([0.1])

    def test_no_stops_below_half_level(self, rng):
        x = 0.2 * rng.uniform(-1, 1, size=50)
        sk = tv.level_crossing_skeleton(x + 3.0, 1.0)
        assert sk.stop_indices.tolist() == [0]
        assert np.all(sk.skel.values == x[0] + 3.0)

    def test_dominates_truncated_variation(self, rng):
        # TV^c(path) <= TV^0(skeleton), with tube violations reported
        violations = 0
        for _ in range(1000):
            x = random_values(rng, int(rng.integers(2, 60)), str(rng.choice(DISTS)))
            c = float(rng.uniform(0.05, 1.0) * (np.ptp(x) + 0.1))
            sk = tv.level_crossing_skeleton(x, c)
            assert stream(x, c) <= tv.total_variation(sk.skel) + 1e-12
            if sk.tube_violation(SampledPath(0.0, 1.0, x)) > 1e-12:
                violations += 1
        # jump-at-stop convention keeps every grid point inside the tube
        assert violations == 0


class TestProfile:
    def test_zero_level_is_total_variation(self, rng):
        x = random_values(rng, 100, "gaussian")
        prof = tv.tv_profile(x, [0.0, 0.1])
        assert prof[0] == pytest.approx(tv.total_variation(x), rel=1e-12)

    def test_nonincreasing_and_convex(self, rng):
        grid = np.linspace(0.0, 2.0, 50)
        for _ in range(100):
            x = random_values(rng, int(rng.integers(5, 120)), str(rng.choice(DISTS)))
            prof = tv.tv_profile(x, grid)
            assert np.all(np.diff(prof) <= 1e-12)
            second = prof[2:] - 2 * prof[1:-1] + prof[:-2]
            assert np.min(second) >= -1e-9

    def test_rejects_unsorted(self):
        with pytest.raises(tv.TvError):
            tv.tv_profile([0.0, 1.0], [0.2, 0.1])


finite_paths = st.lists(
    st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=1, max_size=30
)
levels = st.floats(min_value=0.0, max_value=10.0, allow_nan=False)


class TestInvariants:
    @given(finite_paths, levels, st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=200, deadline=None)
    def test_scaling(self, xs, c, a):
        x = np.asarray(xs)
        left = stream(a * x, a * c)
        right = a * stream(x, c)
        assert left == pytest.approx(right, rel=1e-12, abs=1e-12)

    @given(finite_paths, levels)
    @settings(max_examples=200, deadline=None)
    def test_time_reversal(self, xs, c):
        x = np.asarray(xs)
        assert stream(x[::-1], c) == pytest.approx(stream(x, c), rel=1e-12, abs=1e-12)

    @given(finite_paths, levels, levels)
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_level(self, xs, c1, c2):
        lo, hi = min(c1, c2), max(c1, c2)
        assert stream(xs, hi) <= stream(xs, lo) + 1e-12

    @given(finite_paths, levels, st.integers(min_value=0, max_value=29))
    @settings(max_examples=200, deadline=None)
    def test_concatenation_subadditivity(self, xs, c, k):
        x = np.asarray(xs)
        k = min(k, len(x) - 1)
        whole = stream(x, c)
        parts = stream(x[: k + 1], c) + c + stream(x[k:], c)
        assert whole <= parts + 1e-10

    @given(finite_paths, levels)
    @settings(max_examples=200, deadline=None)
    def test_drift_noise_decomposition_bound(self, xs, c):
        # TV^c(m + y) <= TV^0(m) + TV^c(y) for any pair on a common grid
        x = np.asarray(xs)
        rng = np.random.default_rng(int(abs(np.sum(x) * 1e6)) % 2**32)
        m = np.cumsum(rng.normal(size=x.size))
        assert stream(m + x, c) <= tv.total_variation(m) + stream(x, c) + 1e-9

    @given(
        st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=1, max_size=30),
        levels,
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_path_closed_form(self, xs, c):
        x = np.sort(np.asarray(xs))
        expected = max(abs(x[-1] - x[0]) - c, 0.0)
        assert stream(x, c) == pytest.approx(expected, rel=1e-12, abs=1e-12)


class TestErrors:
    def test_rejects_nan(self):
        with pytest.raises(tv.TvError):
            tv.truncated_variation([0.0, np.nan], 0.1)

    def test_rejects_negative_level(self):
        with pytest.raises(tv.TvError):
            tv.truncated_variation([0.0, 1.0], -0.1)

    def test_exhaustive_size_guard(self):
        with pytest.raises(tv.TvError):
            tv.tv_oracle_exhaustive(np.zeros(25), 0.1)

    def test_dp_size_guard(self):
        with pytest.raises(tv.TvError, match="truncated_variation"):
            tv.tv_oracle_dp(np.zeros(100_002), 0.1)


class TestBackends:
    def test_python_mirror_matches_selected_backend(self, rng):
        from truvar import _kernels_py

        for _ in range(100):
            x = random_values(rng, int(rng.integers(2, 200)), str(rng.choice(DISTS)))
            c = float(rng.uniform(0, 1.0) * (np.ptp(x) + 0.1))
            assert _kernels_py.tube_tv(x, c) == stream(x, c)  # bit-identical
