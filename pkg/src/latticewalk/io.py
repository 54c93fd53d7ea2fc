"""Plot-ready CSV/JSON serialization with lossless round-trips.

Every CSV starts with a versioned header comment
``# latticewalk-csv v1 <kind> key=value ...`` followed by a column-name row.
Floats are written with 17 significant digits so identical inputs produce
byte-identical files and readers recover the exact binary values.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .coherence import CorrelationProfile
from .errors import ParseError
from .fitting import FitResult, PositionHistogram

FORMAT_VERSION = 1
_MAGIC = "# latticewalk-csv"


def _format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        if any(c.isspace() for c in v) or "," in v:
            raise ParseError(f"string values may not contain spaces or commas: {v!r}")
        return v
    return "%.17g" % float(v)


def _header(kind: str, meta: dict | None) -> str:
    tokens = [f"{_MAGIC} v{FORMAT_VERSION}", kind]
    for key in sorted(meta or {}):
        tokens.append(f"{key}={_format_value((meta or {})[key])}")
    return " ".join(tokens)


def write_table(path, kind: str, columns: dict, meta: dict | None = None) -> None:
    """Write named columns as CSV under a versioned ``kind`` header."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    if not arrays or any(a.ndim != 1 for a in arrays):
        raise ParseError("columns must be nonempty 1-d arrays")
    n_rows = len(arrays[0])
    if any(len(a) != n_rows for a in arrays):
        raise ParseError("all columns must have equal length")
    lines = [_header(kind, meta), ",".join(names)]
    for i in range(n_rows):
        lines.append(",".join(_format_value(a[i]) for a in arrays))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclasses.dataclass
class TableData:
    kind: str
    meta: dict
    columns: dict  # name -> float ndarray

    def meta_int(self, key: str) -> int:
        try:
            return int(float(self.meta[key]))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"header is missing or has a non-integer {key!r}") from exc

    def meta_float(self, key: str) -> float:
        try:
            return float(self.meta[key])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"header is missing or has a non-numeric {key!r}") from exc


def read_table(path, expected_kind: str | None = None) -> TableData:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    head = lines[0]
    if not head.startswith(_MAGIC):
        raise ParseError(f"{path}: line 1: missing '{_MAGIC}' header")
    tokens = head[len(_MAGIC) :].split()
    if len(tokens) < 2 or not tokens[0].startswith("v"):
        raise ParseError(f"{path}: line 1: malformed header {head!r}")
    try:
        version = int(tokens[0][1:])
    except ValueError as exc:
        raise ParseError(f"{path}: line 1: bad version token {tokens[0]!r}") from exc
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: line 1: unsupported format version {version}")
    kind = tokens[1]
    if expected_kind is not None and kind != expected_kind:
        raise ParseError(f"{path}: line 1: expected kind {expected_kind!r}, found {kind!r}")
    meta = {}
    for tok in tokens[2:]:
        if "=" not in tok:
            raise ParseError(f"{path}: line 1: malformed meta token {tok!r}")
        key, _, value = tok.partition("=")
        meta[key] = value
    if len(lines) < 2:
        raise ParseError(f"{path}: line 2: missing column-name row")
    names = [n.strip() for n in lines[1].split(",")]
    data = [[] for _ in names]
    n_data = 0
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(names):
            raise ParseError(
                f"{path}: line {lineno}: expected {len(names)} fields, found {len(cells)}"
            )
        for col, cell in zip(data, cells):
            try:
                col.append(float(cell))
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: not a number: {cell!r}") from exc
        n_data += 1
    if n_data == 0:
        raise ParseError(f"{path}: no data rows")
    return TableData(kind=kind, meta=meta, columns={n: np.array(c) for n, c in zip(names, data)})


# --- typed writers / readers --------------------------------------------------


def write_distribution(path, sites, probabilities, meta: dict | None = None) -> None:
    write_table(
        path, "distribution", {"site": sites, "probability": probabilities}, meta
    )


def read_distribution(path):
    t = read_table(path, "distribution")
    return t.columns["site"].astype(int), t.columns["probability"], t.meta


def write_timeseries(path, steps, columns: dict, meta: dict | None = None) -> None:
    payload = {"step": steps}
    payload.update(columns)
    write_table(path, "timeseries", payload, meta)


def read_timeseries(path) -> TableData:
    return read_table(path, "timeseries")


def write_correlation(path, profile: CorrelationProfile, meta: dict | None = None) -> None:
    L = profile.halfwidth
    x = profile.sites()
    xx, yy = np.meshgrid(x, x, indexing="ij")
    g = profile.values
    meta = dict(meta or {})
    meta["halfwidth"] = L
    write_table(
        path,
        "correlation",
        {
            "x": xx.ravel(),
            "y": yy.ravel(),
            "re_g": g.real.ravel(),
            "im_g": g.imag.ravel(),
        },
        meta,
    )


def read_correlation(path) -> CorrelationProfile:
    t = read_table(path, "correlation")
    L = t.meta_int("halfwidth")
    n = 2 * L + 1
    if len(t.columns["x"]) != n * n:
        raise ParseError(f"{path}: correlation payload is not a full {n}x{n} grid")
    g = (t.columns["re_g"] + 1j * t.columns["im_g"]).reshape(n, n)
    return CorrelationProfile(values=g, halfwidth=L)


def write_antidiagonal(path, profile: CorrelationProfile, reference=None, meta=None) -> None:
    """Coherence vs site-pair (x, -x): columns |G(x,-x)| and, when a
    reference profile is given, the suppression ratio against it."""
    x = profile.sites()
    anti = profile.antidiagonal()
    columns = {"x": x, "abs_g": anti}
    if reference is not None:
        ref = reference.antidiagonal()
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(ref > 0, anti / ref, np.nan)
        columns["abs_g_reference"] = ref
        columns["ratio"] = ratio
    meta = dict(meta or {})
    meta["halfwidth"] = profile.halfwidth
    write_table(path, "antidiagonal", columns, meta)


def write_wigner(path, grid, meta: dict | None = None) -> None:
    """Long-format phase-space table: one row per (x, k) point."""
    nx, nk = len(grid.x_values), len(grid.k_values)
    xx = np.repeat(grid.x_values, nk)
    kk = np.tile(grid.k_values, nx)
    trace = grid.spin_trace.real
    comps = grid.spin_components
    meta = dict(meta or {})
    meta["theta"] = grid.theta
    meta["halfwidth"] = (nx - 1) // 2
    write_table(
        path,
        "wigner",
        {
            "x": xx,
            "k": kk,
            "w_trace": trace.ravel(),
            "w_band_plus": grid.band_plus.ravel(),
            "w_band_minus": grid.band_minus.ravel(),
            "re_w_uu": comps[0, 0].real.ravel(),
            "re_w_dd": comps[1, 1].real.ravel(),
            "re_w_ud": comps[0, 1].real.ravel(),
            "im_w_ud": comps[0, 1].imag.ravel(),
        },
        meta,
    )


def write_histogram(path, hist: PositionHistogram, meta: dict | None = None) -> None:
    meta = dict(meta or {})
    meta["steps"] = hist.steps
    meta["halfwidth"] = hist.halfwidth
    write_table(path, "histogram", {"site": hist.sites(), "count": hist.counts}, meta)


def read_histogram(path) -> PositionHistogram:
    t = read_table(path, "histogram")
    steps = t.meta_int("steps")
    halfwidth = t.meta_int("halfwidth")
    sites = t.columns["site"].astype(int)
    expected = np.arange(-halfwidth, halfwidth + 1)
    if len(sites) != len(expected) or np.any(sites != expected):
        raise ParseError(f"{path}: site column must run -{halfwidth}..{halfwidth} in order")
    counts = t.columns["count"]
    if np.any(counts < 0) or np.any(counts != np.round(counts)):
        raise ParseError(f"{path}: counts must be nonnegative integers")
    return PositionHistogram(counts=counts.astype(np.int64), halfwidth=halfwidth, steps=steps)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def fit_result_to_dict(result: FitResult) -> dict:
    return {
        "estimates": result.estimates,
        "intervals": {k: list(v) for k, v in result.intervals.items()},
        "log_likelihood": result.log_likelihood,
        "excluded_counts": result.excluded_counts,
        "confidence": result.confidence,
        "free": list(result.free),
        "fixed": result.fixed,
    }
