"""Histogram likelihoods, MLE recovery, and binomial intervals."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.stats import binom

from latticewalk import ConvergenceError, InvalidArgumentError
from latticewalk.core import WalkParameters
from latticewalk.density import DecoherenceParameters
from latticewalk.fitting import (
    DetectionModel,
    PositionHistogram,
    clopper_pearson,
    discriminate_mechanism,
    fit,
    histogram_intervals,
    log_likelihood,
    predicted_distribution,
    synthesize_histogram,
)

THETA = math.pi / 2


def test_detection_model_validation():
    assert DetectionModel().reach == 1
    assert DetectionModel(efficiency=1.0).reach == 0
    with pytest.raises(InvalidArgumentError):
        DetectionModel(efficiency=0.0)
    with pytest.raises(InvalidArgumentError):
        DetectionModel(efficiency=1.1)
    with pytest.raises(InvalidArgumentError):
        DetectionModel(offsets=(-1, 1), weights=(0.9, 0.2))  # weights must sum to 1


def test_predicted_distribution_kernel_math():
    walk = WalkParameters(THETA, 2)
    dec = DecoherenceParameters(0.0, 0.0)
    sites0, p0 = predicted_distribution(walk, dec, DetectionModel(efficiency=1.0))
    assert sites0.tolist() == [-2, -1, 0, 1, 2]
    assert p0.sum() == pytest.approx(1.0, abs=1e-12)
    # eta = 0.8 with hops +-1: P_obs = 0.8 P(x) + 0.1 P(x-1) + 0.1 P(x+1)
    det = DetectionModel(efficiency=0.8)
    sites, p = predicted_distribution(walk, dec, det)
    assert sites.tolist() == list(range(-3, 4))
    padded = np.zeros(7)
    padded[1:6] = p0
    expect = 0.8 * padded + 0.1 * np.roll(padded, 1) + 0.1 * np.roll(padded, -1)
    assert np.abs(p - expect).max() < 1e-12


def test_synthesize_histogram_statistics():
    walk = WalkParameters(THETA, 6)
    dec = DecoherenceParameters(0.2, 0.0)
    h1 = synthesize_histogram(walk, dec, n_shots=5000, seed=42)
    h2 = synthesize_histogram(walk, dec, n_shots=5000, seed=42)
    assert np.array_equal(h1.counts, h2.counts)
    assert h1.total == 5000
    sites, p = predicted_distribution(walk, dec)
    tvd = 0.5 * np.abs(h1.counts / h1.total - p).sum()
    assert tvd < 0.03
    assert np.array_equal(h1.sites(), sites)


def test_log_likelihood_excluded_counts():
    counts = np.zeros(7, dtype=np.int64)
    counts[0] = 3   # model-forbidden bin
    counts[3] = 97
    hist = PositionHistogram(counts, halfwidth=3, steps=2)
    p = np.zeros(7)
    p[3] = 0.5
    p[5] = 0.5
    ll, excluded = log_likelihood(hist, p)
    assert excluded == 3
    assert ll == pytest.approx(97 * math.log(0.5))
    with pytest.raises(InvalidArgumentError):
        log_likelihood(hist, np.ones(5) / 5)


def test_fit_recovers_spin_dephasing_rate():
    truth = 0.06
    walk = WalkParameters(THETA, 40)
    hist = synthesize_histogram(
        walk, DecoherenceParameters(truth, 0.0), n_shots=2000, seed=7
    )
    result = fit(hist, free=("p_C",))
    est = result.estimates["p_C"]
    lo, hi = result.intervals["p_C"]
    assert abs(est - truth) < 0.02
    assert lo < est < hi
    assert hi - lo < 0.05
    assert result.excluded_counts == 0
    assert result.fixed["theta"] == pytest.approx(THETA)


def test_fit_at_zero_rate_boundary():
    walk = WalkParameters(THETA, 30)
    hist = synthesize_histogram(
        walk, DecoherenceParameters(0.0, 0.0), n_shots=3000, seed=11
    )
    result = fit(hist, free=("p_C",))
    assert result.estimates["p_C"] < 0.01
    assert result.intervals["p_C"][0] == 0.0  # interval clipped at the domain edge


def test_fit_two_free_parameters():
    walk = WalkParameters(THETA, 20)
    truth = DecoherenceParameters(0.08, 0.05)
    hist = synthesize_histogram(walk, truth, n_shots=20000, seed=3)
    result = fit(hist, free=("p_C", "p_S"))
    assert result.estimates["p_C"] == pytest.approx(0.08, abs=0.04)
    assert result.estimates["p_S"] == pytest.approx(0.05, abs=0.04)


def test_fit_input_validation():
    walk = WalkParameters(THETA, 10)
    hist = synthesize_histogram(walk, DecoherenceParameters(0.1, 0.0), n_shots=500, seed=1)
    with pytest.raises(InvalidArgumentError):
        fit(hist, free=("p_Q",))
    with pytest.raises(InvalidArgumentError):
        fit(hist, free=())
    # histogram too narrow to hold the model support (steps + kernel reach)
    narrow = PositionHistogram(np.ones(11, dtype=np.int64), halfwidth=5, steps=10)
    with pytest.raises(InvalidArgumentError):
        fit(narrow, free=("p_C",))


def test_discriminate_mechanism():
    walk = WalkParameters(THETA, 40)
    spin_data = synthesize_histogram(
        walk, DecoherenceParameters(0.3, 0.0), n_shots=4000, seed=21
    )
    spatial_data = synthesize_histogram(
        walk, DecoherenceParameters(0.0, 0.3), n_shots=4000, seed=22
    )
    verdict_spin = discriminate_mechanism(spin_data)
    verdict_spatial = discriminate_mechanism(spatial_data)
    assert verdict_spin["preferred"] == "spin"
    assert verdict_spatial["preferred"] == "spatial"
    assert verdict_spin["log_likelihood_ratio"] > 0
    assert verdict_spatial["log_likelihood_ratio"] < 0


def test_clopper_pearson_boundary_formulas():
    lo, hi = clopper_pearson(0, 10, confidence=0.68)
    assert lo == 0.0
    assert hi == pytest.approx(1.0 - 0.32 ** 0.1)  # 0.107690...
    lo, hi = clopper_pearson(10, 10, confidence=0.68)
    assert hi == 1.0
    assert lo == pytest.approx(0.32 ** 0.1)
    with pytest.raises(InvalidArgumentError):
        clopper_pearson(5, 0)
    with pytest.raises(InvalidArgumentError):
        clopper_pearson(-1, 10)


def test_clopper_pearson_coverage_oracle():
    # exact binomial coverage: CP intervals must cover >= the nominal level
    n, p_true, cl = 25, 0.3, 0.68
    cover = 0.0
    for k in range(n + 1):
        lo, hi = clopper_pearson(k, n, confidence=cl)
        if lo <= p_true <= hi:
            cover += binom.pmf(k, n, p_true)
    assert cover >= cl


def test_histogram_intervals_shape():
    walk = WalkParameters(THETA, 6)
    hist = synthesize_histogram(walk, DecoherenceParameters(0.1, 0.1), n_shots=800, seed=2)
    lows, highs = histogram_intervals(hist)
    assert lows.shape == highs.shape == hist.counts.shape
    frac = hist.counts / hist.total
    assert np.all(lows <= frac + 1e-12)
    assert np.all(frac <= highs + 1e-12)
