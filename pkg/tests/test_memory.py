"""Static per-run dephasing: exact suppression laws and Monte-Carlo checks."""
from __future__ import annotations

import math

import numpy as np
import pytest

from latticewalk import InvalidArgumentError
from latticewalk.core import WalkParameters
from latticewalk.memory import (
    DephasingDistribution,
    coherence_length_from_T2,
    dephased_correlation,
    monte_carlo_correlation,
    monte_carlo_position,
    suppression_factor,
    wavepacket_split_direct,
    zeta_walk_amplitudes,
    zeta_walk_direct,
    zeta_wavepacket_split,
)

THETA = math.pi / 2


def test_zeta_walk_phase_relation():
    walk = WalkParameters(THETA, 12)
    for zeta in (0.3, -1.7, 2 * math.pi):
        closed = zeta_walk_amplitudes(walk, zeta)
        direct = zeta_walk_direct(walk, zeta)
        assert np.abs(closed - direct).max() < 1e-10
        # the position distribution never feels zeta
        base = zeta_walk_amplitudes(walk, 0.0)
        assert np.abs((np.abs(closed) ** 2) - (np.abs(base) ** 2)).max() < 1e-12
    shifted = zeta_walk_amplitudes(WalkParameters(THETA, 4, lattice_halfwidth=9), 0.9, x0=3)
    assert shifted.shape == (2, 19)


def test_memory_model_requires_fixed_shift():
    walk = WalkParameters(THETA, 4, alternating_shift=True)
    with pytest.raises(InvalidArgumentError):
        zeta_walk_amplitudes(walk, 0.1)
    with pytest.raises(InvalidArgumentError):
        dephased_correlation(walk, DephasingDistribution("gaussian", 0.1))


def test_suppression_factor_values():
    gauss = DephasingDistribution("gaussian", 0.5)
    thermal = DephasingDistribution("thermal_exponential", 0.5)
    point = DephasingDistribution("point_mass", offset=1.3)
    for dist in (gauss, thermal, point):
        assert suppression_factor(dist, 0) == pytest.approx(1.0)
    assert suppression_factor(gauss, 2) == pytest.approx(math.exp(-0.5))
    # thermal with delta_zeta * d = 2: 1/sqrt(1 + 1) = 1/sqrt(2)
    assert suppression_factor(DephasingDistribution("thermal_exponential", 0.5), 4) == (
        pytest.approx(1.0 / math.sqrt(2.0))
    )
    assert suppression_factor(point, 17) == pytest.approx(1.0)
    arr = suppression_factor(gauss, np.array([0, 1, 2]))
    assert arr.shape == (3,)
    assert np.all(np.diff(arr) < 0)


def test_distribution_validation_and_sampling():
    with pytest.raises(InvalidArgumentError):
        DephasingDistribution("lorentzian", 0.1)
    with pytest.raises(InvalidArgumentError):
        DephasingDistribution("gaussian", -0.2)
    rng = np.random.default_rng(3)
    g = DephasingDistribution("gaussian", 0.25).sample(rng, 40000)
    assert np.mean(g) == pytest.approx(0.0, abs=0.01)
    assert np.std(g) == pytest.approx(0.5, rel=0.02)  # width 2 * delta_zeta
    t = DephasingDistribution("thermal_exponential", 0.25).sample(rng, 40000)
    assert np.all(t >= 0)
    assert np.mean(t) == pytest.approx(0.25, rel=0.03)
    p = DephasingDistribution("point_mass", offset=0.7).sample(rng, 5)
    assert np.allclose(p, 0.7)


def test_dephased_correlation_factorizes():
    walk = WalkParameters(THETA, 10)
    coherent = dephased_correlation(walk, DephasingDistribution("point_mass"))
    dist = DephasingDistribution("gaussian", 0.4)
    prof = dephased_correlation(walk, dist)
    xs = coherent.sites()
    factor = suppression_factor(dist, np.abs(xs[:, None] - xs[None, :]))
    assert np.abs(prof.values - coherent.values * factor).max() < 1e-12
    # zero-width distribution leaves the coherent profile untouched
    flat = dephased_correlation(walk, DephasingDistribution("gaussian", 0.0))
    assert np.abs(flat.values - coherent.values).max() < 1e-15


@pytest.mark.parametrize("family", ["gaussian", "thermal_exponential"])
def test_monte_carlo_approaches_analytic_correlation(family):
    walk = WalkParameters(THETA, 8)
    dist = DephasingDistribution(family, 0.3)
    analytic = dephased_correlation(walk, dist)
    mc = monte_carlo_correlation(walk, dist, n_samples=4000, seed=5)
    # moduli comparison: the thermal closed form drops a pure-phase factor
    err = np.abs(np.abs(mc.values) - np.abs(analytic.values)).max()
    assert err < 2e-2
    again = monte_carlo_correlation(walk, dist, n_samples=4000, seed=5)
    assert np.array_equal(mc.values, again.values)  # seeded: bit-reproducible


def test_monte_carlo_position_is_zeta_independent():
    walk = WalkParameters(THETA, 10)
    dist = DephasingDistribution("thermal_exponential", 0.2)
    mean, se = monte_carlo_position(walk, dist, n_samples=400, seed=9)
    exact = np.abs(zeta_walk_amplitudes(walk, 0.0)) ** 2
    assert np.abs(mean - exact.sum(axis=0)).max() < 1e-12
    # every draw yields the same distribution: only accumulator roundoff left
    assert np.abs(se).max() < 1e-9


def test_wavepacket_split_against_direct_evolution():
    theta, steps, k, dx0, zeta = math.pi / 2, 30, 1.2, 4.0, 0.8
    dist = DephasingDistribution("point_mass", offset=zeta)
    L = steps + int(math.ceil(10 * dx0))
    xs, model = zeta_wavepacket_split(theta, steps, k, +1, dist, dx0, halfwidth=L)
    xs_d, direct = wavepacket_split_direct(theta, steps, k, +1, dx0, zeta, halfwidth=L)
    assert np.array_equal(xs, xs_d)
    # side-peak mass transferred into the other band
    left = xs < 0
    assert model[left].sum() == pytest.approx(direct[left].sum(), abs=0.05)
    # dominant-peak centroid
    right = xs > 0
    c_model = np.sum(xs[right] * model[right]) / model[right].sum()
    c_direct = np.sum(xs_d[right] * direct[right]) / direct[right].sum()
    assert abs(c_model - c_direct) < 2.0


def test_wavepacket_split_zero_width_is_single_peak():
    xs, p = zeta_wavepacket_split(
        math.pi / 2, 20, 1.0, +1, DephasingDistribution("gaussian", 0.0), 3.0
    )
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    # all mass in one lobe: the k-side fraction dominates
    assert p[xs > 0].sum() > 0.95


def test_wavepacket_split_broadens_with_memory_width():
    args = (math.pi / 2, 25, 1.0, +1)
    xs, p_narrow = zeta_wavepacket_split(*args, DephasingDistribution("gaussian", 0.05), 4.0)
    _, p_wide = zeta_wavepacket_split(*args, DephasingDistribution("gaussian", 0.6), 4.0)
    def spread(p):
        m = np.sum(xs * p)
        return np.sum((xs - m) ** 2 * p)
    assert spread(p_wide) > spread(p_narrow)


def test_coherence_length_from_dephasing_time():
    assert coherence_length_from_T2(600e-6, 33.3e-6) == pytest.approx(18.0, rel=0.02)
    assert coherence_length_from_T2(33.3e-6, 33.3e-6) == pytest.approx(1.0)
    assert coherence_length_from_T2(math.inf, 33.3e-6) == math.inf
    with pytest.raises(InvalidArgumentError):
        coherence_length_from_T2(1.0, 0.0)
