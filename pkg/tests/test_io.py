"""Versioned CSV round-trips and parser diagnostics."""
from __future__ import annotations

import math

import numpy as np
import pytest

from latticewalk import ParseError
from latticewalk.coherence import CorrelationProfile
from latticewalk.core import WalkParameters, make_initial_state
from latticewalk.density import DecoherenceParameters
from latticewalk.fitting import PositionHistogram, fit, synthesize_histogram
from latticewalk.io import (
    FORMAT_VERSION,
    fit_result_to_dict,
    read_correlation,
    read_distribution,
    read_histogram,
    read_table,
    write_correlation,
    write_distribution,
    write_histogram,
    write_json,
    write_table,
)


def test_distribution_round_trip_is_exact(tmp_path):
    path = tmp_path / "dist.csv"
    sites = np.arange(-3, 4)
    probs = np.array([0.0, 1 / 3, 0.0, 1e-300, 0.25, 0.75 - 1 / 3 - 1e-300, 0.0])
    write_distribution(path, sites, probs, meta={"steps": 3, "theta": math.pi / 2})
    s2, p2, meta = read_distribution(path)
    assert np.array_equal(s2, sites)
    assert np.array_equal(p2, probs)  # %.17g survives the float round-trip
    assert meta["steps"] == "3"
    # rewriting parsed content is byte-identical
    write_distribution(tmp_path / "dist2.csv", s2, p2, {k: meta[k] for k in meta})
    assert (tmp_path / "dist.csv").read_bytes() == (tmp_path / "dist2.csv").read_bytes()


def test_histogram_round_trip(tmp_path):
    path = tmp_path / "hist.csv"
    hist = synthesize_histogram(
        WalkParameters(math.pi / 2, 6),
        DecoherenceParameters(0.1, 0.0),
        n_shots=500,
        seed=4,
    )
    write_histogram(path, hist)
    back = read_histogram(path)
    assert back.steps == hist.steps
    assert back.halfwidth == hist.halfwidth
    assert np.array_equal(back.counts, hist.counts)


def test_histogram_reader_validates_sites_and_counts(tmp_path):
    good = tmp_path / "good.csv"
    write_histogram(good, PositionHistogram(np.array([1, 2, 3]), halfwidth=1, steps=1))
    text = good.read_text()
    scrambled = tmp_path / "scrambled.csv"
    scrambled.write_text(text.replace("-1,1", "-2,1"))
    with pytest.raises(ParseError):
        read_histogram(scrambled)
    fractional = tmp_path / "fractional.csv"
    fractional.write_text(text.replace("0,2", "0,2.5"))
    with pytest.raises(ParseError):
        read_histogram(fractional)


def test_correlation_round_trip(tmp_path):
    state = make_initial_state("localized_symmetric", 4)
    rho = np.einsum("ax,by->axby", state.amplitudes, state.amplitudes.conj())
    from latticewalk.coherence import correlation_function

    prof = correlation_function(rho)
    path = tmp_path / "corr.csv"
    write_correlation(path, prof)
    back = read_correlation(path)
    assert back.halfwidth == prof.halfwidth
    assert np.array_equal(back.values, prof.values)
    # truncated payload: not a full grid
    lines = path.read_text().splitlines()
    (tmp_path / "cut.csv").write_text("\n".join(lines[:-5]) + "\n")
    with pytest.raises(ParseError, match="grid"):
        read_correlation(tmp_path / "cut.csv")


def test_string_meta_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, "timeseries", {"step": [0, 1], "v": [0.5, 0.25]}, meta={"family": "thermal_exponential"})
    t = read_table(path, "timeseries")
    assert t.meta["family"] == "thermal_exponential"
    with pytest.raises(ParseError):
        write_table(tmp_path / "bad.csv", "timeseries", {"step": [0]}, meta={"note": "two words"})


def test_parse_errors_name_the_line(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("")
    with pytest.raises(ParseError, match="empty file"):
        read_table(p)
    p.write_text("site,probability\n0,1.0\n")
    with pytest.raises(ParseError, match="line 1"):
        read_table(p)
    p.write_text(f"# latticewalk-csv v{FORMAT_VERSION + 1} distribution\nsite,probability\n0,1.0\n")
    with pytest.raises(ParseError, match="version"):
        read_table(p)
    p.write_text(f"# latticewalk-csv v{FORMAT_VERSION} distribution\nsite,probability\n0,1.0\n1\n")
    with pytest.raises(ParseError, match="line 4"):
        read_table(p)
    p.write_text(f"# latticewalk-csv v{FORMAT_VERSION} distribution\nsite,probability\n0,1.0\n1,oops\n")
    with pytest.raises(ParseError, match="line 4.*oops"):
        read_table(p)
    p.write_text(f"# latticewalk-csv v{FORMAT_VERSION} distribution\nsite,probability\n")
    with pytest.raises(ParseError, match="no data rows"):
        read_table(p)
    p.write_text(f"# latticewalk-csv v{FORMAT_VERSION} histogram\nsite,count\n0,1\n")
    with pytest.raises(ParseError, match="kind"):
        read_table(p, "distribution")


def test_fit_result_serializes_to_json(tmp_path):
    hist = synthesize_histogram(
        WalkParameters(math.pi / 2, 10),
        DecoherenceParameters(0.1, 0.0),
        n_shots=400,
        seed=8,
    )
    result = fit(hist, free=("p_C",))
    payload = fit_result_to_dict(result)
    out = tmp_path / "fit.json"
    write_json(out, payload)
    import json

    loaded = json.loads(out.read_text())
    assert loaded["estimates"]["p_C"] == pytest.approx(result.estimates["p_C"])
    assert loaded["confidence"] == pytest.approx(0.68)
    assert "p_C" in loaded["intervals"]
