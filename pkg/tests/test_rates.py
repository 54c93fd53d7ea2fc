"""Optical-lattice decoherence rates for a spin-dependent transport walk."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from latticewalk import InvalidArgumentError, MissingConstantError
from latticewalk.rates import (
    DEFAULT_MAGNETIC_WHITE,
    HBAR,
    K_B,
    AtomPhysicalParameters,
    NoiseSpectrum,
    calibrate_gamma_tot,
    inhomogeneous_T2_and_length,
    mechanism_table,
    phase_variance,
    rate_report,
    render_mechanism_table,
    scalar_light_shift_eta,
    scattering_rates,
    vector_light_shift_eta,
)

CS = AtomPhysicalParameters.cesium_defaults()


def _equal_ratio_params():
    """Detunings engineered so DeltaD1 = -2 DeltaD2 exactly (in floats)."""
    d = 2.0**47  # exactly representable shifts around omega_L ~ 2.2e15
    w_l = CS.omega_L
    return replace(CS, omega_D1=w_l - 2 * d, omega_D2=w_l + d)


def test_parameter_loading_and_validation():
    assert CS.nuclear_spin == 3.5
    d = {f: getattr(CS, f) for f in (
        "hyperfine_splitting", "omega_D1", "omega_D2", "gamma_D1", "gamma_D2",
        "lattice_wavelength", "trap_depth", "step_duration", "nuclear_spin",
        "m_up", "g_up", "m_down", "g_down", "transverse_temperature",
        "ellipticity", "rabi_frequency", "total_duration",
    )}
    assert AtomPhysicalParameters.from_dict(d) == CS
    short = {k: v for k, v in d.items() if k not in ("m_up", "g_up")}
    with pytest.raises(MissingConstantError) as exc:
        AtomPhysicalParameters.from_dict(short)
    assert "g_up" in str(exc.value) and "m_up" in str(exc.value)
    with pytest.raises(InvalidArgumentError):
        replace(CS, ellipticity=2.0)
    with pytest.raises(InvalidArgumentError):
        replace(CS, step_duration=-1.0)


def test_scalar_light_shift():
    assert scalar_light_shift_eta(CS) == pytest.approx(2.5e-3, rel=0.10)
    # degenerate fine structure: eta_s -> -Delta_HF / Delta
    eq = replace(CS, omega_D1=CS.omega_D2)
    delta = eq.delta_D1
    assert scalar_light_shift_eta(eq) == pytest.approx(-CS.hyperfine_splitting / delta, rel=1e-12)
    # linear in the hyperfine splitting
    half = replace(CS, hyperfine_splitting=0.5 * CS.hyperfine_splitting)
    assert scalar_light_shift_eta(half) == pytest.approx(0.5 * scalar_light_shift_eta(CS), rel=1e-12)


def test_vector_light_shift_exact_ratios():
    eta_v, eta_perp = vector_light_shift_eta(_equal_ratio_params())
    assert eta_v == 1.75  # [m g](up) - [m g](down) times a ratio that is 1
    assert eta_perp == 0.125
    # opposite-sign balanced coin states: transverse coupling cancels
    balanced = replace(CS, m_up=3.0)
    assert vector_light_shift_eta(balanced)[1] == pytest.approx(0.0, abs=1e-15)


def test_inhomogeneous_dephasing_times():
    t2, ell = inhomogeneous_T2_and_length(scalar_light_shift_eta(CS), CS)
    assert t2 * abs(scalar_light_shift_eta(CS)) * K_B * CS.transverse_temperature == (
        pytest.approx(2 * HBAR, rel=1e-12)
    )
    assert t2 == pytest.approx(600e-6, rel=0.2)
    assert ell == pytest.approx(18.4, rel=0.02)
    assert inhomogeneous_T2_and_length(0.0, CS) == (math.inf, math.inf)
    with pytest.raises(InvalidArgumentError):
        inhomogeneous_T2_and_length(1.0, replace(CS, transverse_temperature=0.0))


def test_report_coherence_lengths():
    report = rate_report(CS)
    report.validate()
    assert report.ell["scalar"] == pytest.approx(18.4, abs=0.5)
    assert report.ell["vectorial"] == pytest.approx(3.0, rel=0.15)  # epsilon = 0.01
    assert report.ell["wobbling"] == pytest.approx(0.8, rel=0.15)
    # transverse coupling off: wobbling channel drops out entirely
    balanced = rate_report(replace(CS, m_up=3.0))
    assert balanced.ell["wobbling"] == math.inf


def test_white_phase_variance_closed_form():
    tau = CS.step_duration
    t_tot = CS.total_duration
    s0 = 2.3e-20
    coupling = 1.7e-28
    dphi2, p_c = phase_variance(NoiseSpectrum(kind="white", density=s0), coupling, tau, t_tot)
    # oracle in u = w tau / 2: integral = S0 (2/tau) int_{u0} sin^2(u)/u^2 du,
    # finite part by quadrature plus the 1/(2U) tail of the oscillation average
    u0 = tau / (2.0 * t_tot)
    u_max = 1000.0 * math.pi
    body, _ = quad(lambda u: (math.sin(u) / u) ** 2, u0, u_max, limit=4000)
    ref = (tau * coupling / HBAR) ** 2 * s0 * (2.0 / tau) * (body + 1.0 / (2.0 * u_max))
    assert dphi2 == pytest.approx(ref, rel=1e-5)
    assert p_c == pytest.approx(1.0 - math.exp(-dphi2 / 2.0), rel=1e-12)
    assert phase_variance(NoiseSpectrum(kind="white", density=0.0), coupling, tau) == (0.0, 0.0)


def test_tabulated_spectrum_matches_white():
    tau = CS.step_duration
    t_tot = CS.total_duration
    s0 = DEFAULT_MAGNETIC_WHITE
    grid = np.linspace(1.0 / t_tot, 6e7, 4000)
    tab = NoiseSpectrum(kind="tabulated", omega=grid, values=np.full_like(grid, s0))
    coupling = 1e-28
    d_white, _ = phase_variance(NoiseSpectrum(kind="white", density=s0), coupling, tau, t_tot)
    d_tab, _ = phase_variance(tab, coupling, tau, t_tot)
    assert d_tab == pytest.approx(d_white, rel=2e-2)  # truncated tail only
    assert d_tab < d_white


def test_default_magnetic_noise_flip_free_probability():
    report = rate_report(CS)
    assert 0.03 <= report.p_C["magnetic"] <= 0.04
    assert report.delta_phi_sq["magnetic"] == pytest.approx(
        2.0 * math.log(1.0 / (1.0 - report.p_C["magnetic"])), rel=1e-12
    )


def test_scattering_rates_cesium_calibrated():
    cal = calibrate_gamma_tot(CS, gamma_tot=14.0)
    s = scattering_rates(cal)
    assert s.gamma_tot == pytest.approx(14.0, rel=1e-10)
    assert s.gamma_inel_up == pytest.approx(5.0, rel=0.2)
    assert s.gamma_inel_down == pytest.approx(7.0, rel=0.2)
    assert s.gamma_el_deph == pytest.approx(7.0, rel=0.2)
    # in-qubit Raman fraction I/(I+1/2) = 7/8, exact for these quantum numbers
    assert s.gamma_inel_qubit == pytest.approx(0.875 * s.gamma_inel_up, rel=1e-12)
    assert s.p_S == pytest.approx(14.0 * CS.step_duration, rel=1e-10)
    assert s.p_C == pytest.approx(s.gamma_el_deph * CS.step_duration, rel=1e-12)
    # doubling the step time doubles both per-step probabilities
    slow = scattering_rates(replace(cal, step_duration=2 * CS.step_duration))
    assert slow.p_S == pytest.approx(2 * s.p_S, rel=1e-12)


def test_equal_detunings_suppress_raman():
    eq = replace(CS, omega_D1=CS.omega_D2, gamma_D1=CS.gamma_D2)
    s = scattering_rates(eq)
    assert s.gamma_inel_up == 0.0
    assert s.gamma_inel_down == 0.0
    assert s.gamma_el_deph == 0.0
    assert s.gamma_tot == pytest.approx(3.0 * s.alpha / eq.delta_D2**2, rel=1e-12)


def test_qubit_fraction_requires_quantum_number_condition():
    assert scattering_rates(CS).gamma_inel_qubit is not None
    off = replace(CS, g_up=0.3)
    assert scattering_rates(off).gamma_inel_qubit is None


def test_inelastic_fraction_shrinks_with_detuning():
    far = replace(CS, lattice_wavelength=1.6e-6)
    near_frac = scattering_rates(CS).gamma_inel_up / scattering_rates(CS).gamma_tot
    far_frac = scattering_rates(far).gamma_inel_up / scattering_rates(far).gamma_tot
    assert far_frac < 0.5 * near_frac


def test_mechanism_table_classification():
    rows = mechanism_table(rate_report(calibrate_gamma_tot(CS)))
    assert len(rows) == 9
    by_name = {r.mechanism: r for r in rows}
    scalar = by_name["Differential scalar light shift"]
    assert scalar.spin_env == "[x]" and scalar.spin_coin == "x"
    raman = by_name["Raman scattering of lattice photons"]
    assert (raman.spin_env, raman.spin_coin, raman.spatial_env) == ("x", "x", "(x)")
    assert raman.spin_shift == ""
    rayleigh = by_name["Rayleigh scattering of lattice photons"]
    assert rayleigh.spatial_env == "(x)" and rayleigh.spin_env == ""
    motional = by_name["Motional excitations during transport"]
    assert motional.qualitative and "2%" in motional.annotation
    gradient = by_name["Magnetic field gradient fluctuations"]
    assert gradient.spatial_env == "x"
    text = render_mechanism_table(rows)
    assert "Decoherence source" in text
    assert "(x)" in text and "[x]" in text
    assert text.count("\n") > 10
