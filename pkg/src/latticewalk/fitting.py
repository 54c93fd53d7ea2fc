"""Maximum-likelihood extraction of decoherence rates from site histograms.

The forward model is the dephased walk position distribution pushed through a
simple detection model (finite identification efficiency, misidentified shots
landing on neighbor sites). Fits use a multinomial log-likelihood over bins
with positive predicted probability, grid seeding followed by bounded local
refinement, and profile-likelihood confidence intervals. Per-bin binomial
intervals use the Clopper-Pearson construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.stats import beta as beta_dist
from scipy.stats import chi2

from .core import WalkParameters, make_initial_state
from .density import DecoherenceParameters, dephasing_mask, kraus_step, position_distribution, state_to_density
from .errors import ConvergenceError, InvalidArgumentError

PARAM_NAMES = ("theta", "p_C", "p_S")
_THETA_GRID_STEP = math.pi / 64
_RATE_GRID_STEP = 0.01


@dataclass(frozen=True)
class DetectionModel:
    """Finite detection efficiency with a displacement kernel for the rest.

    A fraction ``efficiency`` of shots report the true site; the remainder is
    distributed over ``offsets`` with the given ``weights`` (default: equal
    split onto the two nearest neighbors).
    """

    efficiency: float = 0.9
    offsets: tuple[int, ...] = (-1, 1)
    weights: tuple[float, ...] = (0.5, 0.5)

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise InvalidArgumentError(f"efficiency must be in (0, 1], got {self.efficiency!r}")
        if len(self.offsets) != len(self.weights):
            raise InvalidArgumentError("offsets and weights must have equal length")
        if self.efficiency < 1.0:
            if not self.offsets:
                raise InvalidArgumentError("need a displacement kernel when efficiency < 1")
            if any(w < 0 for w in self.weights) or not math.isclose(
                sum(self.weights), 1.0, abs_tol=1e-12
            ):
                raise InvalidArgumentError("kernel weights must be nonnegative and sum to 1")

    @property
    def reach(self) -> int:
        return max((abs(o) for o in self.offsets), default=0) if self.efficiency < 1.0 else 0


@dataclass(frozen=True)
class PositionHistogram:
    """Shot counts per site, on sites -halfwidth..halfwidth after ``steps`` steps."""

    counts: np.ndarray
    halfwidth: int
    steps: int

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (2 * self.halfwidth + 1,):
            raise InvalidArgumentError(
                f"counts must have shape ({2 * self.halfwidth + 1},), got {c.shape}"
            )
        if np.any(c < 0) or not np.allclose(c, np.round(c)):
            raise InvalidArgumentError("counts must be nonnegative integers")
        object.__setattr__(self, "counts", c.astype(np.int64))
        object.__setattr__(self, "halfwidth", int(self.halfwidth))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def sites(self) -> np.ndarray:
        return np.arange(-self.halfwidth, self.halfwidth + 1)


@lru_cache(maxsize=4096)
def _walk_distribution(
    theta: float, p_c: float, p_s: float, steps: int, alternating: bool, initial: str
) -> tuple[float, ...]:
    # bare (pre-detection) distribution on sites -steps..steps
    walk = WalkParameters(theta=theta, steps=steps, alternating_shift=alternating)
    dec = DecoherenceParameters(p_C=p_c, p_S=p_s)
    state = make_initial_state(initial, walk.lattice_halfwidth, theta=theta)
    rho = state_to_density(state)
    mask = dephasing_mask(walk.n_sites, dec) if (p_c or p_s) else None
    for step in range(steps):
        rho = kraus_step(rho, walk, dec, step_index=step, mask=mask)
    return tuple(position_distribution(rho))


def predicted_distribution(
    walk: WalkParameters,
    dec: DecoherenceParameters,
    detection: DetectionModel | None = None,
    initial: str = "localized_symmetric",
):
    """Observed-site distribution: walk distribution pushed through detection.

    Returns (sites, probabilities) on sites -(steps + reach)..(steps + reach).
    """
    detection = detection if detection is not None else DetectionModel()
    p = np.array(
        _walk_distribution(
            walk.theta, dec.p_C, dec.p_S, walk.steps, walk.alternating_shift, initial
        )
    )
    reach = detection.reach
    half = walk.steps + reach
    out = np.zeros(2 * half + 1)
    lo = half - walk.steps
    out[lo : lo + len(p)] += detection.efficiency * p
    if detection.efficiency < 1.0:
        stray = 1.0 - detection.efficiency
        for off, w in zip(detection.offsets, detection.weights):
            out[lo + off : lo + off + len(p)] += stray * w * p
    return np.arange(-half, half + 1), out


def synthesize_histogram(
    walk: WalkParameters,
    dec: DecoherenceParameters,
    detection: DetectionModel | None = None,
    n_shots: int = 1000,
    seed: int = 0,
    initial: str = "localized_symmetric",
) -> PositionHistogram:
    """Draw a multinomial histogram of ``n_shots`` detector outcomes."""
    if n_shots < 1:
        raise InvalidArgumentError("n_shots must be >= 1")
    sites, p = predicted_distribution(walk, dec, detection, initial)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_shots, p / p.sum())
    return PositionHistogram(counts=counts, halfwidth=sites[-1], steps=walk.steps)


def _align_model(p: np.ndarray, model_half: int, hist_half: int) -> np.ndarray:
    if hist_half < model_half:
        raise InvalidArgumentError(
            f"histogram halfwidth {hist_half} cannot hold the model support "
            f"(needs >= {model_half} = steps + detection reach)"
        )
    out = np.zeros(2 * hist_half + 1)
    lo = hist_half - model_half
    out[lo : lo + len(p)] = p
    return out


def log_likelihood(hist: PositionHistogram, p_obs: np.ndarray):
    """Multinomial log-likelihood (up to the count-only constant).

    Bins with zero predicted probability are excluded from the sum; the total
    count falling in such bins is returned as a diagnostic (nonzero values
    flag data the model deems impossible, e.g. parity-forbidden sites).
    """
    c = hist.counts
    if p_obs.shape != c.shape:
        raise InvalidArgumentError("predicted distribution is not aligned to the histogram")
    support = p_obs > 0.0
    ll = float(np.dot(c[support], np.log(p_obs[support])))
    excluded = int(c[~support].sum())
    return ll, excluded


@dataclass
class FitResult:
    estimates: dict
    intervals: dict
    log_likelihood: float
    excluded_counts: int
    confidence: float
    free: tuple
    fixed: dict = field(default_factory=dict)


_BOUNDS = {"theta": (0.0, math.pi), "p_C": (0.0, 1.0), "p_S": (0.0, 1.0)}


def _param_grid(name: str) -> np.ndarray:
    lo, hi = _BOUNDS[name]
    step = _THETA_GRID_STEP if name == "theta" else _RATE_GRID_STEP
    return np.arange(lo, hi + step / 2, step)


def fit(
    hist: PositionHistogram,
    free=("p_C",),
    fixed: dict | None = None,
    detection: DetectionModel | None = None,
    initial: str = "localized_symmetric",
    alternating: bool = False,
    confidence: float = 0.68,
) -> FitResult:
    """Maximum-likelihood fit of walk/decoherence parameters to a histogram.

    ``free`` names the parameters to fit (subset of theta, p_C, p_S);
    everything else comes from ``fixed`` (defaults: theta = pi/2, rates 0).
    Seeding is a coarse grid (pi/64 in theta, 0.01 in rates; ties broken
    toward the smallest p_C), refined by a bounded local optimizer. Intervals
    are profile-likelihood at the requested confidence.
    """
    free = tuple(free)
    if not free or any(f not in PARAM_NAMES for f in free):
        raise InvalidArgumentError(f"free parameters must be a nonempty subset of {PARAM_NAMES}")
    if hist.total < 1:
        raise InvalidArgumentError("histogram has no counts to fit")
    detection = detection if detection is not None else DetectionModel()
    defaults = {"theta": math.pi / 2, "p_C": 0.0, "p_S": 0.0}
    defaults.update(fixed or {})
    fixed_full = {k: float(v) for k, v in defaults.items() if k not in free}
    model_half = hist.steps + detection.reach

    def ll_at(values: dict) -> float:
        params = dict(fixed_full)
        params.update(values)
        if params["p_C"] + params["p_S"] > 1.0:
            return -np.inf
        for name, v in params.items():
            lo, hi = _BOUNDS[name]
            if not lo <= v <= hi:
                return -np.inf
        p = np.array(
            _walk_distribution(
                params["theta"], params["p_C"], params["p_S"], hist.steps, alternating, initial
            )
        )
        reach = detection.reach
        out = np.zeros(2 * model_half + 1)
        lo_i = model_half - hist.steps
        out[lo_i : lo_i + len(p)] += detection.efficiency * p
        if detection.efficiency < 1.0:
            for off, w in zip(detection.offsets, detection.weights):
                out[lo_i + off : lo_i + off + len(p)] += (1.0 - detection.efficiency) * w * p
        aligned = _align_model(out, model_half, hist.halfwidth)
        return log_likelihood(hist, aligned)[0]

    # --- grid seed (ties -> smallest p_C, then smallest p_S) ---
    grids = [_param_grid(f) for f in free]
    best = None
    for combo in np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, len(free)):
        values = dict(zip(free, (float(v) for v in combo)))
        ll = ll_at(values)
        key = (-ll, values.get("p_C", 0.0), values.get("p_S", 0.0))
        if best is None or key < best[0]:
            best = (key, values)
    seed_values = best[1]
    if not np.isfinite(-best[0][0]):
        raise ConvergenceError(
            "no grid point has positive likelihood support for the data", best_result=None
        )

    # --- bounded refinement around the seed ---
    def step_of(name):
        return _THETA_GRID_STEP if name == "theta" else _RATE_GRID_STEP

    if len(free) == 1:
        name = free[0]
        lo, hi = _BOUNDS[name]
        c = seed_values[name]
        bracket = (max(lo, c - 2 * step_of(name)), min(hi, c + 2 * step_of(name)))
        res = minimize_scalar(
            lambda v: -ll_at({name: float(v)}),
            bounds=bracket,
            method="bounded",
            options={"xatol": 1e-5},
        )
        estimates = {name: float(res.x)}
        ll_max = -float(res.fun)
    else:
        x0 = np.array([seed_values[f] for f in free])

        def neg_ll(x):
            v = ll_at(dict(zip(free, (float(xi) for xi in x))))
            return 1e12 if not np.isfinite(v) else -v

        res = minimize(
            neg_ll,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": 2000},
        )
        estimates = dict(zip(free, (float(v) for v in res.x)))
        ll_max = -float(res.fun)
        if not res.success:
            raise ConvergenceError(
                f"refinement did not converge: {res.message}",
                best_result=FitResult(
                    estimates=estimates,
                    intervals={},
                    log_likelihood=ll_max,
                    excluded_counts=0,
                    confidence=confidence,
                    free=free,
                    fixed=fixed_full,
                ),
            )
    # keep the seed if refinement somehow went uphill
    seed_ll = ll_at(seed_values)
    if seed_ll > ll_max:
        estimates, ll_max = dict(seed_values), seed_ll

    # --- profile-likelihood intervals ---
    delta = 0.5 * chi2.ppf(confidence, df=1)
    target = ll_max - delta

    def profile_ll(name: str, v: float) -> float:
        others = [f for f in free if f != name]
        if not others:
            return ll_at({name: v})

        def neg(x):
            values = dict(zip(others, (float(xi) for xi in x)))
            values[name] = v
            out = ll_at(values)
            return 1e12 if not np.isfinite(out) else -out

        start = np.array([estimates[f] for f in others])
        r = minimize(neg, start, method="Nelder-Mead", options={"xatol": 1e-5, "fatol": 1e-7})
        return -float(r.fun)

    def interval_edge(name: str, direction: int) -> float:
        lo, hi = _BOUNDS[name]
        bound = hi if direction > 0 else lo
        center = estimates[name]
        if math.isclose(center, bound, abs_tol=1e-12):
            return bound
        span = bound - center
        prev_v, prev_f = center, ll_max - target
        for j in range(1, 33):
            v = center + span * j / 32
            f = profile_ll(name, v) - target
            if f <= 0.0:
                return float(
                    brentq(lambda u: profile_ll(name, u) - target, prev_v, v, xtol=1e-5)
                )
            prev_v, prev_f = v, f
        return bound

    intervals = {f: (interval_edge(f, -1), interval_edge(f, +1)) for f in free}

    # excluded-count diagnostic at the MLE
    params = dict(fixed_full)
    params.update(estimates)
    _, p_obs = predicted_distribution(
        WalkParameters(theta=params["theta"], steps=hist.steps, alternating_shift=alternating),
        DecoherenceParameters(p_C=params["p_C"], p_S=params["p_S"]),
        detection,
        initial,
    )
    _, excluded = log_likelihood(hist, _align_model(p_obs, model_half, hist.halfwidth))

    return FitResult(
        estimates=estimates,
        intervals=intervals,
        log_likelihood=ll_max,
        excluded_counts=excluded,
        confidence=confidence,
        free=free,
        fixed=fixed_full,
    )


def discriminate_mechanism(
    hist: PositionHistogram,
    theta: float = math.pi / 2,
    detection: DetectionModel | None = None,
    initial: str = "localized_symmetric",
    confidence: float = 0.68,
) -> dict:
    """Compare spin-only vs spatial-only dephasing fits on the same data.

    Returns both fits, the log-likelihood ratio (spin minus spatial), and the
    preferred mechanism label.
    """
    fit_spin = fit(
        hist,
        free=("p_C",),
        fixed={"theta": theta, "p_S": 0.0},
        detection=detection,
        initial=initial,
        confidence=confidence,
    )
    fit_spatial = fit(
        hist,
        free=("p_S",),
        fixed={"theta": theta, "p_C": 0.0},
        detection=detection,
        initial=initial,
        confidence=confidence,
    )
    lr = fit_spin.log_likelihood - fit_spatial.log_likelihood
    return {
        "spin": fit_spin,
        "spatial": fit_spatial,
        "log_likelihood_ratio": lr,
        "preferred": "spin" if lr >= 0 else "spatial",
    }


def clopper_pearson(k: int, n: int, confidence: float = 0.68):
    """Clopper-Pearson binomial interval for k successes out of n trials.

    Central (equal-tailed) except at the boundary outcomes, where the interval
    is one-sided at the full confidence level: k = 0 gives
    [0, 1 - (1-CL)^(1/n)] and k = n the mirror image.
    """
    if n <= 0 or not 0 <= k <= n:
        raise InvalidArgumentError(f"need 0 <= k <= n with n > 0, got k={k}, n={n}")
    if not 0.0 < confidence < 1.0:
        raise InvalidArgumentError("confidence must be in (0, 1)")
    alpha = 1.0 - confidence
    if k == 0:
        return 0.0, 1.0 - alpha ** (1.0 / n)
    if k == n:
        return alpha ** (1.0 / n), 1.0
    lo = float(beta_dist.ppf(alpha / 2, k, n - k + 1))
    hi = float(beta_dist.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


def histogram_intervals(hist: PositionHistogram, confidence: float = 0.68):
    """Per-bin Clopper-Pearson intervals on the site probabilities."""
    n = hist.total
    if n < 1:
        raise InvalidArgumentError("histogram has no counts")
    lows = np.empty(len(hist.counts))
    highs = np.empty(len(hist.counts))
    for i, k in enumerate(hist.counts):
        lows[i], highs[i] = clopper_pearson(int(k), n, confidence)
    return lows, highs
