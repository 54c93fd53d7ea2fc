"""Spatial correlation function G(x,y) and coherence-length extraction."""
from __future__ import annotations

import math

import numpy as np
import pytest

from latticewalk import InsufficientDataError, InvalidArgumentError
from latticewalk.coherence import (
    CorrelationProfile,
    central_peak_falloff,
    check_profile_invariants,
    correlation_function,
    fit_coherence_length,
    model_coherence_length,
    off_diagonal_mass,
)
from latticewalk.core import WalkParameters, make_initial_state
from latticewalk.density import DecoherenceParameters, evolve, state_to_density


def _final_profile(steps, p_c, p_s):
    walk = WalkParameters(math.pi / 2, steps)
    rec = evolve(
        state_to_density(make_initial_state("localized_symmetric", steps)),
        walk,
        DecoherenceParameters(p_c, p_s),
        record={"correlation_profile"},
        record_steps=[steps],
    )
    return rec["correlation_profile"][0][1]


def test_correlation_of_known_state():
    # (|up,0> + i|down,+1>)/sqrt(2): G(0,1) = sum_s a_s(0) a_s(1)^* = 0
    # for cross-spin support, but G via spin trace picks only same-spin terms
    amps = np.zeros((2, 3), dtype=complex)
    amps[0, 1] = 1 / math.sqrt(2)
    amps[1, 2] = 1j / math.sqrt(2)
    rho = np.einsum("ax,by->axby", amps, amps.conj())
    prof = correlation_function(rho)
    assert isinstance(prof, CorrelationProfile)
    assert prof.values[1, 1] == pytest.approx(0.5)
    assert prof.values[2, 2] == pytest.approx(0.5)
    assert prof.values[1, 2] == pytest.approx(0.0)  # different spin sectors
    # same-spin displaced support does contribute
    amps2 = np.zeros((2, 3), dtype=complex)
    amps2[0, 0] = amps2[0, 2] = 1 / math.sqrt(2)
    rho2 = np.einsum("ax,by->axby", amps2, amps2.conj())
    prof2 = correlation_function(rho2)
    assert prof2.values[0, 2] == pytest.approx(0.5)
    assert np.allclose(prof2.antidiagonal(), [0.5, 0.0, 0.5])


def test_profile_invariants_hold_and_detect_violations():
    prof = _final_profile(8, 0.2, 0.1)
    check_profile_invariants(prof)
    bad = CorrelationProfile(prof.values + 1e-3 * 1j, prof.halfwidth)
    with pytest.raises(InvalidArgumentError):
        check_profile_invariants(bad)


def test_model_coherence_length_edges():
    assert model_coherence_length(1.0) == 0.0
    assert model_coherence_length(0.75) == pytest.approx(1.0 / math.log(2.0))
    with pytest.raises(InvalidArgumentError):
        model_coherence_length(0.0)  # no dephasing: length diverges


def test_fitted_length_decreases_with_spin_dephasing():
    reference = _final_profile(20, 0.0, 0.0)
    lengths = []
    for p_c in (0.05, 0.15, 0.25, 0.5, 0.75, 0.99):
        prof = _final_profile(20, p_c, 0.0)
        lengths.append(fit_coherence_length(prof, reference))
    assert np.all(np.diff(lengths) < 0)
    assert lengths[-1] < 0.5  # near-total dephasing: sub-site coherence


def test_fitted_length_matches_model_in_strong_dephasing():
    reference = _final_profile(40, 0.0, 0.0)
    for p_c in (0.75, 0.9, 0.99):
        prof = _final_profile(40, p_c, 0.0)
        fitted = fit_coherence_length(prof, reference)
        assert fitted == pytest.approx(model_coherence_length(p_c), rel=0.10)


def test_fit_degenerate_inputs():
    reference = _final_profile(6, 0.0, 0.0)
    # undephased data against itself: ratio slope ~ 0 -> infinite length
    assert fit_coherence_length(reference, reference) == math.inf
    # too few usable antidiagonal points
    tiny = _final_profile(1, 0.3, 0.0)
    tiny_ref = _final_profile(1, 0.0, 0.0)
    with pytest.raises(InsufficientDataError):
        fit_coherence_length(tiny, tiny_ref)


def test_central_peak_falloff_for_spatial_dephasing():
    prof = _final_profile(40, 0.0, 0.1)
    ell = central_peak_falloff(prof)
    assert 0.5 < ell < 2.0  # order one site, not the walk extent
    assert ell == pytest.approx(1.164, abs=0.05)
    # spin dephasing at the same strength keeps a much longer tail
    prof_c = _final_profile(40, 0.1, 0.0)
    assert central_peak_falloff(prof_c) > 3.0 * ell


def test_off_diagonal_mass_separates_mechanisms():
    m_spin = off_diagonal_mass(_final_profile(40, 0.15, 0.0))
    m_spatial = off_diagonal_mass(_final_profile(40, 0.0, 0.15))
    assert m_spin > 5.0 * m_spatial
    assert m_spatial > 0.0
