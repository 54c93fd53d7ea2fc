"""Pure request -> response handlers.

The FastAPI app and the CLI both call these; the CLI runs them in-process by
default so no server is needed for local work.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .. import __version__
from ..core import WalkParameters, default_halfwidth, make_initial_state
from ..density import DecoherenceParameters, evolve
from ..errors import InvalidArgumentError
from ..fitting import DetectionModel, PositionHistogram, fit
from ..memory import (
    DephasingDistribution,
    dephased_correlation,
    monte_carlo_correlation,
    suppression_factor,
)
from ..rates import (
    AtomPhysicalParameters,
    NoiseSpectrum,
    calibrate_gamma_tot,
    mechanism_table,
    rate_report,
    render_mechanism_table,
)
from ..wigner import negativity_summary
from . import models


def _build_walk(spec: models.WalkSpec, initial: models.InitialStateSpec | None = None):
    halfwidth = spec.lattice_halfwidth
    if halfwidth is None and initial is not None:
        halfwidth = default_halfwidth(spec.steps, initial.kind, initial.dx0)
    return WalkParameters(
        theta=spec.theta,
        steps=spec.steps,
        lattice_halfwidth=halfwidth,
        alternating_shift=spec.alternating_shift,
    )


def _build_initial(spec: models.InitialStateSpec, walk: WalkParameters):
    return make_initial_state(
        spec.kind,
        walk.lattice_halfwidth,
        theta=walk.theta,
        k0=spec.k0,
        dx0=spec.dx0,
        band=spec.band,
    )


def handle_simulate(req: models.SimulateRequest) -> models.SimulateResponse:
    walk = _build_walk(req.walk, req.initial)
    dec = DecoherenceParameters(p_C=req.decoherence.p_c, p_S=req.decoherence.p_s)
    initial = _build_initial(req.initial, walk)
    results = evolve(
        initial,
        walk,
        dec,
        record=set(req.observables),
        record_steps=req.record_steps,
        k_points=req.k_points,
    )
    sites = [int(x) for x in initial.sites()]
    out = {}
    if "position_distribution" in results:
        out["position_distribution"] = [
            models.DistributionOut(step=s, sites=sites, values=[float(v) for v in p])
            for s, p in results["position_distribution"]
        ]
    if "moments" in results:
        out["moments"] = [
            models.MomentsOut(step=m.step, mean=m.mean, variance=m.variance)
            for _, m in results["moments"]
        ]
    if "momentum_distribution" in results:
        out["momentum_distribution"] = [
            models.MomentumOut(
                step=s,
                k=[float(v) for v in k],
                spin_up=[float(v) for v in dens[0]],
                spin_down=[float(v) for v in dens[1]],
            )
            for s, (k, dens) in results["momentum_distribution"]
        ]
    if "correlation_profile" in results:
        out["correlation_profile"] = [
            models.CorrelationOut(
                step=s,
                halfwidth=profile.halfwidth,
                re_g=profile.values.real.tolist(),
                im_g=profile.values.imag.tolist(),
                antidiagonal_abs=profile.antidiagonal().tolist(),
            )
            for s, profile in results["correlation_profile"]
        ]
    if "wigner" in results:
        out["wigner"] = [
            models.WignerOut(
                step=s,
                x=[int(v) for v in grid.x_values],
                k=[float(v) for v in grid.k_values],
                trace=grid.spin_trace.real.tolist(),
                band_plus=grid.band_plus.tolist(),
                band_minus=grid.band_minus.tolist(),
                min_trace=float(negativity_summary(grid)["min_trace"]),
            )
            for s, grid in results["wigner"]
        ]
    return models.SimulateResponse(**out)


def handle_fit(req: models.FitRequest) -> models.FitResponse:
    hist = PositionHistogram(
        counts=np.asarray(req.histogram.counts),
        halfwidth=req.histogram.halfwidth,
        steps=req.histogram.steps,
    )
    detection = DetectionModel(
        efficiency=req.detection.efficiency,
        offsets=tuple(req.detection.offsets),
        weights=tuple(req.detection.weights),
    )
    result = fit(
        hist,
        free=tuple(req.free),
        fixed=req.fixed,
        detection=detection,
        initial=req.initial,
        alternating=req.alternating,
        confidence=req.confidence,
    )
    return models.FitResponse(
        estimates=result.estimates,
        intervals={k: tuple(v) for k, v in result.intervals.items()},
        log_likelihood=result.log_likelihood,
        excluded_counts=result.excluded_counts,
        confidence=result.confidence,
        free=list(result.free),
        fixed=result.fixed,
    )


def _build_spectrum(spec: models.SpectrumSpec | None):
    if spec is None:
        return None
    if spec.kind == "white":
        return NoiseSpectrum(kind="white", density=spec.density)
    return NoiseSpectrum(
        kind="tabulated",
        omega=np.asarray(spec.omega, dtype=float),
        values=np.asarray(spec.values, dtype=float),
    )


def handle_rates(req: models.RatesRequest) -> models.RatesResponse:
    if req.params is None:
        params = AtomPhysicalParameters.cesium_defaults()
    else:
        params = AtomPhysicalParameters.from_dict(req.params)
    if req.calibrate_gamma_tot is not None:
        params = calibrate_gamma_tot(params, req.calibrate_gamma_tot)
    report = rate_report(
        params,
        magnetic_noise=_build_spectrum(req.magnetic_noise),
        rin=_build_spectrum(req.rin),
        ellipticity_noise=_build_spectrum(req.ellipticity_noise),
    )
    rows = mechanism_table(report)
    return models.RatesResponse(
        eta_s=report.eta_s,
        eta_v_prime=report.eta_v_prime,
        eta_perp=report.eta_perp,
        T2=report.T2,
        ell=report.ell,
        delta_phi_sq=report.delta_phi_sq,
        p_C=report.p_C,
        scattering=dataclasses.asdict(report.scattering),
        table=[models.MechanismRowOut(**dataclasses.asdict(r)) for r in rows],
        rendered_table=render_mechanism_table(rows),
    )


def handle_memory(req: models.MemoryRequest) -> models.MemoryResponse:
    spec = req.walk
    halfwidth = spec.lattice_halfwidth
    if halfwidth is None:
        halfwidth = max(spec.steps, abs(req.x0) + spec.steps, 1)
    walk = WalkParameters(
        theta=spec.theta,
        steps=spec.steps,
        lattice_halfwidth=halfwidth,
        alternating_shift=spec.alternating_shift,
    )
    dist = DephasingDistribution(
        family=req.dist.family, delta_zeta=req.dist.delta_zeta, offset=req.dist.offset
    )
    dephased = dephased_correlation(walk, dist, spin=req.spin, x0=req.x0)
    coherent = dephased_correlation(
        walk, DephasingDistribution(family="point_mass"), spin=req.spin, x0=req.x0
    )
    x = dephased.sites()
    anti = dephased.antidiagonal()
    anti0 = coherent.antidiagonal()
    supp = np.asarray(suppression_factor(dist, 2 * x))
    out = models.MemoryResponse(
        sites=[int(v) for v in x],
        abs_g_analytic=anti.tolist(),
        abs_g_coherent=anti0.tolist(),
        suppression=supp.tolist(),
    )
    if req.mc_samples:
        if req.seed is None:
            raise InvalidArgumentError("a seed is required for Monte-Carlo runs")
        mc = monte_carlo_correlation(
            walk, dist, n_samples=req.mc_samples, seed=req.seed, spin=req.spin, x0=req.x0
        )
        anti_mc = mc.antidiagonal()
        out.abs_g_mc = anti_mc.tolist()
        out.mc_max_abs_difference = float(np.max(np.abs(anti_mc - anti)))
    return out


def handle_wigner(req: models.WignerRequest) -> models.WignerOut:
    walk = _build_walk(req.walk, req.initial)
    dec = DecoherenceParameters(p_C=req.decoherence.p_c, p_S=req.decoherence.p_s)
    initial = _build_initial(req.initial, walk)
    results = evolve(
        initial,
        walk,
        dec,
        record={"wigner"},
        record_steps=[walk.steps],
        k_points=req.k_points,
    )
    step, grid = results["wigner"][0]
    return models.WignerOut(
        step=step,
        x=[int(v) for v in grid.x_values],
        k=[float(v) for v in grid.k_values],
        trace=grid.spin_trace.real.tolist(),
        band_plus=grid.band_plus.tolist(),
        band_minus=grid.band_minus.tolist(),
        min_trace=float(negativity_summary(grid)["min_trace"]),
    )


def handle_health() -> models.HealthResponse:
    return models.HealthResponse(status="ok", version=__version__)
