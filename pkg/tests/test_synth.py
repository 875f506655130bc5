import statistics

import pytest

from ammknn import (
    SplitMix64,
    SynthSpec,
    assign_cohort_years,
    generate_cohort,
    pearson_correlation,
    split_cohorts,
)
from ammknn.errors import InvalidFraction, InvalidSpec


class TestSplitMix64:
    def test_reference_vector_seed_zero(self):
        # published reference outputs for the SplitMix64 stream from seed 0
        rng = SplitMix64(0)
        assert [rng.next_u64() for _ in range(3)] == [
            0xE220A8397B1DCDAF,
            0x6E789E6AA1B965F4,
            0x06C45D188009454F,
        ]

    def test_reference_vector_seed_1234567(self):
        rng = SplitMix64(1234567)
        assert [rng.next_u64() for _ in range(3)] == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
        ]

    def test_uniform_in_half_open_unit(self):
        rng = SplitMix64(99)
        values = [rng.uniform() for _ in range(1000)]
        assert all(0.0 < v <= 1.0 for v in values)

    def test_normal_moments(self):
        rng = SplitMix64(42)
        values = [rng.normal() for _ in range(20000)]
        assert statistics.mean(values) == pytest.approx(0.0, abs=0.03)
        assert statistics.stdev(values) == pytest.approx(1.0, abs=0.03)


def spec(**overrides):
    base = dict(seed=7, n_rows=200, n_features=20, signal_features=12, fail_rate_hint=0.07)
    base.update(overrides)
    return SynthSpec(**base)


class TestGenerateCohort:
    def test_same_seed_identical_frames(self):
        assert generate_cohort(spec()) == generate_cohort(spec())

    def test_different_seed_differs(self):
        assert generate_cohort(spec()) != generate_cohort(spec(seed=8))

    def test_shape_and_ids(self):
        frame = generate_cohort(spec(n_rows=30, n_features=5, signal_features=2))
        assert frame.n_rows == 30
        assert frame.column_names == ("f01", "f02", "f03", "f04", "f05", "score")
        assert frame.target_name == "score"
        assert frame.row_ids[0] == "S01"
        assert frame.row_ids[-1] == "S30"

    def test_targets_within_range(self):
        frame = generate_cohort(spec(target_range=(300.0, 600.0)))
        assert all(300.0 <= t <= 600.0 for t in frame.target_values())

    def test_near_zero_noise_gives_near_perfect_signal(self):
        frame = generate_cohort(spec(noise_sd=1e-9, n_features=6, signal_features=3))
        target = frame.target_values()
        for name in ("f01", "f02", "f03"):
            assert abs(pearson_correlation(frame.column(name), target)) > 0.99

    def test_fail_fraction_window_seed7(self):
        # tolerance [0.02, 0.15] frozen after measuring min 0.035 / max
        # 0.105 across seeds 1..50 with these parameters
        frame = generate_cohort(spec())
        target = frame.target_values()
        fraction = sum(1 for t in target if t < 350) / len(target)
        assert 0.02 <= fraction <= 0.15

    def test_fail_fraction_window_across_seeds(self):
        for seed in range(1, 51):
            frame = generate_cohort(spec(seed=seed))
            target = frame.target_values()
            fraction = sum(1 for t in target if t < 350) / len(target)
            assert 0.02 <= fraction <= 0.15, f"seed {seed}: {fraction}"

    def test_noise_features_weakly_correlated(self):
        # frozen from the same 50-seed measurement: 3 of 400 noise-feature
        # correlations reach |r| >= 0.2 (0.75%), within the 1% allowance
        violations = 0
        total = 0
        for seed in range(1, 51):
            frame = generate_cohort(spec(seed=seed))
            target = frame.target_values()
            for name in frame.feature_names()[12:]:
                total += 1
                if abs(pearson_correlation(frame.column(name), target)) >= 0.2:
                    violations += 1
        assert violations / total <= 0.01

    def test_invalid_specs(self):
        with pytest.raises(InvalidSpec):
            spec(n_rows=0)
        with pytest.raises(InvalidSpec):
            spec(signal_features=21)
        with pytest.raises(InvalidSpec):
            spec(fail_rate_hint=0.0)
        with pytest.raises(InvalidSpec):
            spec(target_range=(800.0, 200.0))

    def test_spec_json_round_trip(self):
        s = spec()
        assert SynthSpec.from_json_dict(s.to_json_dict()) == s


class TestSplitCohorts:
    def test_split_sizes_exact(self):
        frame = generate_cohort(spec(n_rows=224))
        train, validation = split_cohorts(frame, 181 / 224, seed=7)
        assert (train.n_rows, validation.n_rows) == (181, 43)

    def test_all_but_one(self):
        frame = generate_cohort(spec(n_rows=10))
        train, validation = split_cohorts(frame, 0.95, seed=1)
        assert (train.n_rows, validation.n_rows) == (9, 1)

    def test_deterministic(self):
        frame = generate_cohort(spec(n_rows=50))
        a = split_cohorts(frame, 0.7, seed=3)
        b = split_cohorts(frame, 0.7, seed=3)
        assert a[0] == b[0] and a[1] == b[1]

    def test_exact_partition(self):
        frame = generate_cohort(spec(n_rows=60))
        train, validation = split_cohorts(frame, 0.6, seed=9)
        ids = sorted(train.row_ids + validation.row_ids)
        assert ids == sorted(frame.row_ids)
        assert set(train.row_ids).isdisjoint(validation.row_ids)

    def test_invalid_fraction(self):
        frame = generate_cohort(spec(n_rows=10))
        for fraction in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(InvalidFraction):
                split_cohorts(frame, fraction, seed=1)


class TestAssignCohortYears:
    def test_years_reproduce_split(self):
        frame = generate_cohort(spec(n_rows=40))
        stamped = assign_cohort_years(frame, 0.75, seed=5)
        assert stamped.column_names[0] == "cohort"
        train, validation = split_cohorts(frame, 0.75, seed=5)
        marked_train = [
            rid
            for rid, year in zip(stamped.row_ids, stamped.column("cohort"))
            if year == 2018.0
        ]
        assert marked_train == list(train.row_ids)
        assert stamped.n_rows == frame.n_rows

    def test_original_columns_preserved(self):
        frame = generate_cohort(spec(n_rows=12, n_features=3, signal_features=1))
        stamped = assign_cohort_years(frame, 0.5, seed=2)
        for name in frame.column_names:
            assert stamped.column(name) == frame.column(name)
