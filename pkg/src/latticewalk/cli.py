"""Command-line frontend: simulate | fit | rates | memory | wigner | serve.

Every command builds a typed request and either calls the in-process handler
(default) or POSTs it to a running service given via ``--server``. Angles are
accepted as radians or as multiples of pi ("0.5pi"). All numeric output goes
through the versioned CSV/JSON writers, so identical inputs and seeds produce
byte-identical files.
"""

from __future__ import annotations

import functools
import json
import math

import click
import numpy as np
from pydantic import ValidationError

from . import io
from .errors import LatticeWalkError
from .service import handlers, models

_OBSERVABLE_ALIASES = {
    "prob": "position_distribution",
    "variance": "moments",
    "corr": "correlation_profile",
    "momentum": "momentum_distribution",
    "wigner": "wigner",
}


def parse_angle(text: str) -> float:
    """Radians, or a multiple of pi when suffixed: "0.5pi", "pi", "-0.25pi"."""
    s = str(text).strip().lower().replace(" ", "")
    try:
        if s.endswith("pi"):
            head = s[:-2]
            if head in ("", "+"):
                return math.pi
            if head == "-":
                return -math.pi
            return float(head) * math.pi
        return float(s)
    except ValueError:
        raise click.ClickException(f"cannot parse angle {text!r}; use radians or e.g. 0.5pi")


def _friendly_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (LatticeWalkError, ValidationError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _apply_config(ctx: click.Context, config_path, values: dict) -> dict:
    """Fill in options from a JSON config file; explicit flags win."""
    if not config_path:
        return values
    with open(config_path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"{config_path}: invalid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise click.ClickException(f"{config_path}: config must be a JSON object")
    unknown = set(cfg) - set(values)
    if unknown:
        raise click.ClickException(f"{config_path}: unknown config keys: {sorted(unknown)}")
    from click.core import ParameterSource

    for key, value in cfg.items():
        if ctx.get_parameter_source(key) == ParameterSource.DEFAULT:
            values[key] = value
    return values


def _call(ctx: click.Context, path: str, request, response_cls):
    server = (ctx.obj or {}).get("server")
    if not server:
        handler = {
            "/simulate": handlers.handle_simulate,
            "/fit": handlers.handle_fit,
            "/rates": handlers.handle_rates,
            "/memory": handlers.handle_memory,
            "/wigner": handlers.handle_wigner,
        }[path]
        return handler(request)
    import httpx

    r = httpx.post(
        server.rstrip("/") + path, json=request.model_dump(mode="json"), timeout=600.0
    )
    if r.status_code >= 400:
        try:
            detail = r.json().get("detail", r.text)
        except ValueError:
            detail = r.text
        raise click.ClickException(f"server returned {r.status_code}: {detail}")
    return response_cls.model_validate(r.json())


@click.group()
@click.option("--server", default=None, help="Base URL of a running service (default: in-process).")
@click.pass_context
def main(ctx, server):
    """Simulate and analyze dephased discrete-time quantum walks."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


def _walk_options(fn):
    fn = click.option("--steps", type=int, default=20, show_default=True)(fn)
    fn = click.option("--theta", default="0.5pi", show_default=True, help="coin angle")(fn)
    fn = click.option("--halfwidth", type=int, default=None, help="lattice halfwidth (sites)")(fn)
    fn = click.option("--alternating", is_flag=True, help="alternate the shift direction")(fn)
    return fn


def _init_options(fn):
    fn = click.option(
        "--init",
        type=click.Choice(["up", "symmetric", "packet", "cat"]),
        default="symmetric",
        show_default=True,
    )(fn)
    fn = click.option("--k0", default="0", help="packet quasi momentum")(fn)
    fn = click.option("--dx0", type=float, default=8.0 / math.sqrt(2.0), show_default=True)(fn)
    fn = click.option("--band", type=click.Choice(["1", "-1"]), default="1", show_default=True)(fn)
    return fn


_INIT_KINDS = {
    "up": "localized_up",
    "symmetric": "localized_symmetric",
    "packet": "gaussian_packet",
    "cat": "k_cat",
}


def _initial_spec(init, k0, dx0, band):
    return models.InitialStateSpec(
        kind=_INIT_KINDS[init], k0=parse_angle(k0), dx0=dx0, band=int(band)
    )


@main.command()
@_walk_options
@_init_options
@click.option("--pc", type=float, default=0.0, show_default=True, help="spin dephasing rate")
@click.option("--ps", type=float, default=0.0, show_default=True, help="spatial dephasing rate")
@click.option(
    "--observables",
    default="prob,variance",
    show_default=True,
    help="comma list: prob,variance,corr,momentum,wigner",
)
@click.option("--record-steps", default=None, help="comma list of step indices (default: all)")
@click.option("--k-points", type=int, default=None)
@click.option("--out", default="walk", show_default=True, help="output file prefix")
@click.option("--config", type=click.Path(exists=True), default=None, help="JSON config file")
@click.pass_context
@_friendly_errors
def simulate(ctx, **opts):
    """Evolve the dephased walk and write per-step observables as CSV."""
    opts = _apply_config(ctx, opts.pop("config"), opts)
    names = []
    for alias in str(opts["observables"]).split(","):
        alias = alias.strip()
        if not alias:
            continue
        if alias not in _OBSERVABLE_ALIASES:
            raise click.ClickException(
                f"unknown observable {alias!r}; choose from {sorted(_OBSERVABLE_ALIASES)}"
            )
        names.append(_OBSERVABLE_ALIASES[alias])
    record_steps = None
    if opts["record_steps"]:
        record_steps = [int(tok) for tok in str(opts["record_steps"]).split(",") if tok.strip()]
    req = models.SimulateRequest(
        walk=models.WalkSpec(
            theta=parse_angle(opts["theta"]),
            steps=int(opts["steps"]),
            lattice_halfwidth=opts["halfwidth"],
            alternating_shift=bool(opts["alternating"]),
        ),
        decoherence=models.DecoherenceSpec(p_c=opts["pc"], p_s=opts["ps"]),
        initial=_initial_spec(opts["init"], opts["k0"], opts["dx0"], opts["band"]),
        observables=names,
        record_steps=record_steps,
        k_points=opts["k_points"],
    )
    resp = _call(ctx, "/simulate", req, models.SimulateResponse)
    prefix = opts["out"]
    meta = {"theta": req.walk.theta, "pc": opts["pc"], "ps": opts["ps"], "steps": opts["steps"]}
    written = []
    if resp.position_distribution is not None:
        rows_step, rows_site, rows_p = [], [], []
        for entry in resp.position_distribution:
            rows_step.extend([entry.step] * len(entry.sites))
            rows_site.extend(entry.sites)
            rows_p.extend(entry.values)
        path = f"{prefix}_prob.csv"
        io.write_table(
            path,
            "distribution",
            {"step": rows_step, "site": rows_site, "probability": rows_p},
            meta,
        )
        written.append(path)
    if resp.moments is not None:
        path = f"{prefix}_moments.csv"
        io.write_timeseries(
            path,
            [m.step for m in resp.moments],
            {
                "mean": [m.mean for m in resp.moments],
                "variance": [m.variance for m in resp.moments],
                "rms": [math.sqrt(m.variance) for m in resp.moments],
            },
            meta,
        )
        written.append(path)
    if resp.momentum_distribution is not None:
        rows = {"step": [], "k": [], "spin_up": [], "spin_down": []}
        for entry in resp.momentum_distribution:
            rows["step"].extend([entry.step] * len(entry.k))
            rows["k"].extend(entry.k)
            rows["spin_up"].extend(entry.spin_up)
            rows["spin_down"].extend(entry.spin_down)
        path = f"{prefix}_momentum.csv"
        io.write_table(path, "momentum", rows, meta)
        written.append(path)
    if resp.correlation_profile is not None:
        from .coherence import CorrelationProfile

        last = resp.correlation_profile[-1]
        g = np.asarray(last.re_g) + 1j * np.asarray(last.im_g)
        profile = CorrelationProfile(values=g, halfwidth=last.halfwidth)
        path = f"{prefix}_corr.csv"
        io.write_correlation(path, profile, dict(meta, step=last.step))
        written.append(path)
        path = f"{prefix}_corr_antidiag.csv"
        io.write_antidiagonal(path, profile, meta=dict(meta, step=last.step))
        written.append(path)
    if resp.wigner is not None:
        last = resp.wigner[-1]
        path = f"{prefix}_wigner.csv"
        io.write_table(
            path,
            "wigner",
            {
                "x": np.repeat(last.x, len(last.k)),
                "k": np.tile(last.k, len(last.x)),
                "w_trace": np.asarray(last.trace).ravel(),
                "w_band_plus": np.asarray(last.band_plus).ravel(),
                "w_band_minus": np.asarray(last.band_minus).ravel(),
            },
            dict(meta, step=last.step),
        )
        written.append(path)
        click.echo(f"min W(trace) at step {last.step}: {last.min_trace:.6g}")
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.argument("histfile", type=click.Path(exists=True))
@click.option("--free", default="p_C", show_default=True, help="comma list from theta,p_C,p_S")
@click.option("--theta", default="0.5pi", show_default=True, help="fixed coin angle")
@click.option("--pc", type=float, default=0.0, help="fixed spin rate (when not free)")
@click.option("--ps", type=float, default=0.0, help="fixed spatial rate (when not free)")
@click.option("--efficiency", type=float, default=0.9, show_default=True)
@click.option("--confidence", type=float, default=0.68, show_default=True)
@click.option("--initial", default="localized_symmetric", show_default=True)
@click.option("--alternating", is_flag=True)
@click.option("--out", default=None, help="write the fit result as JSON")
@click.pass_context
@_friendly_errors
def fit(ctx, histfile, free, theta, pc, ps, efficiency, confidence, initial, alternating, out):
    """Fit decoherence parameters to a measured site histogram (CSV)."""
    hist = io.read_histogram(histfile)
    free_names = [tok.strip() for tok in free.split(",") if tok.strip()]
    fixed = {"theta": parse_angle(theta), "p_C": pc, "p_S": ps}
    for name in free_names:
        fixed.pop(name, None)

    # parity check: the bare walk only reaches sites with x = steps (mod 2)
    sites = hist.sites()
    forbidden = (np.abs(sites) > hist.steps) | (((sites - hist.steps) % 2) != 0)
    stray = int(hist.counts[forbidden].sum())
    if stray:
        click.echo(
            f"warning: {stray} counts sit on parity-forbidden sites; "
            "the detection kernel accounts for them",
            err=True,
        )

    req = models.FitRequest(
        histogram=models.HistogramSpec(
            counts=[int(c) for c in hist.counts], halfwidth=hist.halfwidth, steps=hist.steps
        ),
        free=free_names,
        fixed=fixed,
        detection=models.DetectionSpec(efficiency=efficiency),
        initial=initial,
        alternating=alternating,
        confidence=confidence,
    )
    resp = _call(ctx, "/fit", req, models.FitResponse)
    for name in free_names:
        lo, hi = resp.intervals[name]
        click.echo(
            f"{name} = {resp.estimates[name]:.5g} "
            f"({confidence:.0%} interval {lo:.5g} .. {hi:.5g})"
        )
    click.echo(f"log-likelihood {resp.log_likelihood:.6g}")
    if resp.excluded_counts:
        click.echo(
            f"warning: {resp.excluded_counts} counts outside model support were excluded",
            err=True,
        )
    if out:
        io.write_json(out, resp.model_dump())
        click.echo(f"wrote {out}")


@main.command()
@click.option("--params", type=click.Path(exists=True), default=None, help="JSON constants file")
@click.option("--calibrate-gamma-tot", type=float, default=None, help="back-solve the Rabi frequency")
@click.option("--magnetic-density", type=float, default=None, help="white S_B in T^2 s/rad")
@click.option("--out", default=None, help="write the full report as JSON")
@click.pass_context
@_friendly_errors
def rates(ctx, params, calibrate_gamma_tot, magnetic_density, out):
    """Evaluate light-shift, noise, and scattering decoherence rates."""
    payload = None
    if params:
        with open(params, encoding="utf-8") as fh:
            payload = json.load(fh)
    magnetic = (
        models.SpectrumSpec(kind="white", density=magnetic_density)
        if magnetic_density is not None
        else None
    )
    req = models.RatesRequest(
        params=payload, calibrate_gamma_tot=calibrate_gamma_tot, magnetic_noise=magnetic
    )
    resp = _call(ctx, "/rates", req, models.RatesResponse)
    click.echo(f"eta_s       = {resp.eta_s:.6g}")
    click.echo(f"eta_v'      = {resp.eta_v_prime:.6g}")
    click.echo(f"eta_perp    = {resp.eta_perp:.6g}")
    for name in resp.T2:
        click.echo(f"T2[{name}] = {resp.T2[name]:.6g} s, ell = {resp.ell[name]:.6g} sites")
    for name, value in resp.p_C.items():
        click.echo(f"p_C[{name}] = {value:.6g} (DPhi^2 = {resp.delta_phi_sq[name]:.6g})")
    s = resp.scattering
    click.echo(
        "Gamma_tot = {gamma_tot:.6g} 1/s, Gamma_inel(up) = {gamma_inel_up:.6g}, "
        "Gamma_inel(down) = {gamma_inel_down:.6g}, Gamma_el.deph = {gamma_el_deph:.6g}".format(**s)
    )
    click.echo(f"p_S = {s['p_S']:.6g}, p_C(scattering) = {s['p_C']:.6g}")
    click.echo("")
    click.echo(resp.rendered_table)
    if out:
        io.write_json(out, resp.model_dump())
        click.echo(f"wrote {out}")


@main.command()
@_walk_options
@click.option(
    "--dist",
    type=click.Choice(["gaussian", "thermal", "point"]),
    default="thermal",
    show_default=True,
)
@click.option("--delta-zeta", type=float, default=0.1, show_default=True)
@click.option("--offset", type=float, default=0.0, help="point-mass shift value")
@click.option("--spin", default="symmetric", show_default=True)
@click.option("--x0", type=int, default=0, show_default=True)
@click.option("--mc-samples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", default="memory", show_default=True, help="output file prefix")
@click.pass_context
@_friendly_errors
def memory(ctx, **opts):
    """Quasi-stationary dephasing: analytic and Monte-Carlo coherence profiles."""
    family = {"gaussian": "gaussian", "thermal": "thermal_exponential", "point": "point_mass"}[
        opts["dist"]
    ]
    req = models.MemoryRequest(
        walk=models.WalkSpec(
            theta=parse_angle(opts["theta"]),
            steps=int(opts["steps"]),
            lattice_halfwidth=opts["halfwidth"],
            alternating_shift=bool(opts["alternating"]),
        ),
        dist=models.DephasingSpec(
            family=family, delta_zeta=opts["delta_zeta"], offset=opts["offset"]
        ),
        spin=opts["spin"],
        x0=opts["x0"],
        mc_samples=opts["mc_samples"],
        seed=opts["seed"],
    )
    resp = _call(ctx, "/memory", req, models.MemoryResponse)
    columns = {
        "x": resp.sites,
        "abs_g": resp.abs_g_analytic,
        "abs_g_coherent": resp.abs_g_coherent,
        "suppression": resp.suppression,
    }
    if resp.abs_g_mc is not None:
        columns["abs_g_mc"] = resp.abs_g_mc
        columns["difference"] = [
            a - b for a, b in zip(resp.abs_g_mc, resp.abs_g_analytic)
        ]
        click.echo(f"max |analytic - MC| on the antidiagonal: {resp.mc_max_abs_difference:.3e}")
    path = f"{opts['out']}_antidiag.csv"
    io.write_table(
        path,
        "antidiagonal",
        columns,
        {
            "family": family,
            "delta_zeta": opts["delta_zeta"],
            "steps": opts["steps"],
            "halfwidth": (len(resp.sites) - 1) // 2,
        },
    )
    click.echo(f"wrote {path}")


@main.command()
@_walk_options
@_init_options
@click.option("--pc", type=float, default=0.0, show_default=True)
@click.option("--ps", type=float, default=0.0, show_default=True)
@click.option("--k-points", type=int, default=None)
@click.option("--out", default="wigner.csv", show_default=True)
@click.pass_context
@_friendly_errors
def wigner(ctx, **opts):
    """Phase-space snapshot of the final step as a long-format CSV."""
    req = models.WignerRequest(
        walk=models.WalkSpec(
            theta=parse_angle(opts["theta"]),
            steps=int(opts["steps"]),
            lattice_halfwidth=opts["halfwidth"],
            alternating_shift=bool(opts["alternating"]),
        ),
        decoherence=models.DecoherenceSpec(p_c=opts["pc"], p_s=opts["ps"]),
        initial=_initial_spec(opts["init"], opts["k0"], opts["dx0"], opts["band"]),
        k_points=opts["k_points"],
    )
    resp = _call(ctx, "/wigner", req, models.WignerOut)
    io.write_table(
        opts["out"],
        "wigner",
        {
            "x": np.repeat(resp.x, len(resp.k)),
            "k": np.tile(resp.k, len(resp.x)),
            "w_trace": np.asarray(resp.trace).ravel(),
            "w_band_plus": np.asarray(resp.band_plus).ravel(),
            "w_band_minus": np.asarray(resp.band_minus).ravel(),
        },
        {"theta": req.walk.theta, "step": resp.step},
    )
    click.echo(f"min W(trace) = {resp.min_trace:.6g}")
    click.echo(f"wrote {opts['out']}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
