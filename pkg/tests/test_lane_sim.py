from dataclasses import replace

import numpy as np
import pytest

from emi_ace.detectors import omp
from emi_ace.errors import InvalidArgumentError
from emi_ace.lane_sim import (
    ORIGIN,
    LANE_COUNTS,
    LANE_TOTALS,
    Background,
    Scenario,
    TargetSpec,
    depth_attenuated_snr,
    exponential_covariance,
    generate_lane,
    preset_scenarios,
)
from emi_ace.preprocessing import downtrack_filter, lane_features, sine_filter_taps

METALS = ("MT", "LMT", "NMT", "CL")


def counts(truth):
    return tuple(sum(t.metal == m for t in truth) for m in METALS)


@pytest.fixture(scope="module")
def presets():
    return preset_scenarios()


def test_same_seed_bit_identical(dsrf, presets):
    a, ta = generate_lane(presets["lane2"], dsrf, seed=7)
    b, tb = generate_lane(presets["lane2"], dsrf, seed=7)
    np.testing.assert_array_equal(a.responses, b.responses)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert ta == tb
    c, _ = generate_lane(presets["lane2"], dsrf, seed=8)
    assert not np.array_equal(a.responses, c.responses)


def test_no_targets_is_pure_background(dsrf):
    sc = Scenario(lane_length_m=10.0, background=Background(drift_amplitude=0.0), rng_seed=1)
    lane, truth = generate_lane(sc, dsrf)
    assert truth == [] and len(lane) == 201
    x = np.column_stack([lane.responses.real, lane.responses.imag])
    # sample mean close to the configured one
    assert np.abs(x.mean(axis=0) - sc.background.mean).max() < 0.35
    np.testing.assert_allclose(np.diff(lane.positions[:, 0]), 0.05, atol=1e-9)


def test_catalog_and_table_counts(dsrf, presets):
    assert len(presets) == 8
    assert set(presets) == {f"lane{i}" for i in range(1, 7)} | {"easy", "hard"}
    per_lane = {}
    for name in LANE_COUNTS:
        _, truth = generate_lane(presets[name], dsrf)
        per_lane[name] = counts(truth)
        assert per_lane[name] == LANE_COUNTS[name]
    assert per_lane["lane1"] == (4, 7, 0, 6)
    assert per_lane["lane4"] == (6, 6, 3, 0)
    sums = tuple(np.sum(list(per_lane.values()), axis=0).tolist())
    assert sums[:3] == LANE_TOTALS[:3] == (31, 41, 10)
    # the reference clutter total (11) is not the column sum
    assert sums[3] == 21 and LANE_TOTALS[3] == 11


def test_preset_targets_are_labelled_consistently(dsrf, presets):
    for sc in presets.values():
        _, truth = generate_lane(sc, dsrf)
        for spec, t in zip(sc.targets, truth):
            assert (t.kind == "clutter") == (t.metal == "CL")
            assert t.depth_in == spec.depth_in <= 8
            assert t.easting == ORIGIN[0] + spec.along_track_m


def test_easy_preset_shape(presets):
    easy = presets["easy"]
    assert len(easy.targets) == 12
    for t in easy.targets:
        assert t.amplitude_snr_db == pytest.approx(depth_attenuated_snr(15.0, t.depth_in))


def test_depth_attenuation():
    assert depth_attenuated_snr(10.0, 0.0) == 10.0
    assert depth_attenuated_snr(10.0, 4.0) == pytest.approx(10.0 - 20 * np.log10(2))


def test_snr_calibration_within_1db(dsrf):
    target = TargetSpec(5.0, 40, 6.0)
    bg = Background()
    with_t = Scenario(lane_length_m=10.0, targets=(target,))
    without = replace(with_t, targets=())
    ratios = []
    for seed in range(100):
        a, _ = generate_lane(with_t, dsrf, seed=seed)
        b, _ = generate_lane(without, dsrf, seed=seed)
        i = int(np.argmin(np.abs(a.positions[:, 0] - ORIGIN[0] - 5.0)))
        sig = np.sum(np.abs(a.responses[i] - b.responses[i]) ** 2)
        x = np.column_stack([b.responses.real, b.responses.imag]) - bg.mean
        ratios.append(sig / np.mean(np.sum(x ** 2, axis=1)))
    assert abs(10 * np.log10(np.mean(ratios)) - 6.0) <= 1.0


def test_omp_residual_falls_with_snr(dsrf):
    taps = sine_filter_taps(9)
    means = []
    for snr in (0.0, 10.0, 20.0):
        res = []
        for seed in range(10):
            sc = Scenario(lane_length_m=10.0, targets=(TargetSpec(5.0, 35, snr),))
            lane, _ = generate_lane(sc, dsrf, seed=seed)
            x, _ = lane_features(downtrack_filter(lane, taps))
            res.append(omp(x[100], dsrf, 1).residual_sq)
        means.append(np.mean(res))
    assert means[0] > means[1] > means[2]


def test_truth_inside_lane_bbox(dsrf, presets):
    for sc in presets.values():
        lane, truth = generate_lane(sc, dsrf)
        lo, hi = lane.positions.min(axis=0), lane.positions.max(axis=0)
        for t in truth:
            assert lo[0] <= t.easting <= hi[0] and lo[1] <= t.northing <= hi[1]


@pytest.mark.parametrize("bad", [
    dict(lane_length_m=0.0),
    dict(sample_spacing_m=0.0),
    dict(targets=(TargetSpec(11.0, 0, 0.0),)),
    dict(targets=(TargetSpec(1.0, 100, 0.0),)),
    dict(targets=(TargetSpec(1.0, 0, 0.0, spatial_sigma_m=0.0),)),
    dict(background=Background(covariance=-exponential_covariance())),
    dict(background=Background(covariance=np.eye(3))),
])
def test_invalid_scenarios(dsrf, bad):
    sc = replace(Scenario(lane_length_m=10.0), **bad)
    with pytest.raises(InvalidArgumentError):
        generate_lane(sc, dsrf)
