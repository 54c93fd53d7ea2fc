"""Spatial-coherence diagnostics built on the spin-traced correlation function.

G(x, y) = sum_s rho[s,x,s,y] measures coherence between sites x and y; its
diagonal is the position distribution and the antidiagonal cut |G(x, -x)|
tracks coherence across the origin. Dephasing suppresses |G| with the
separation d = |x - y|; the fit here estimates the decay length of the ratio
to the decoherence-free profile, |G| ~ |G0| exp(-d / ell).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError

#: entries with |G0| below this fraction of the antidiagonal max are excluded
#: from fits (parity-forbidden sites are exact zeros)
DEFAULT_FLOOR_FACTOR = 1e-6

#: fitted decay slopes smaller than this are reported as "no decay"
_MIN_SLOPE = 1e-12


@dataclass
class CorrelationProfile:
    """Correlation function G(x,y) on the site grid -L..L."""

    values: np.ndarray
    halfwidth: int
    coherence_length: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = 2 * self.halfwidth + 1
        if self.values.shape != (n, n):
            raise InvalidArgumentError(f"values shape {self.values.shape} != ({n}, {n})")

    def sites(self) -> np.ndarray:
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    def antidiagonal(self) -> np.ndarray:
        """|G(x, -x)| for x = -L..L."""
        L = self.halfwidth
        idx = np.arange(2 * L + 1)
        return np.abs(self.values[idx, 2 * L - idx])

    def diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.values))


def correlation_function(rho4: np.ndarray) -> CorrelationProfile:
    """Spin-traced correlation G(x,y) = sum_s rho[s,x,s,y]."""
    g = np.einsum("sxsy->xy", rho4)
    return CorrelationProfile(values=g, halfwidth=rho4.shape[1] // 2)


def off_diagonal_mass(profile: CorrelationProfile) -> float:
    """Total coherence mass sum_{x != y} |G(x,y)|."""
    a = np.abs(profile.values)
    return float(a.sum() - np.trace(a))


def fit_coherence_length(
    profile: CorrelationProfile,
    reference: CorrelationProfile,
    floor_factor: float = DEFAULT_FLOOR_FACTOR,
) -> float:
    """Decay length of the antidiagonal ratio to the decoherence-free profile.

    Zero-intercept least squares of log(|G(x,-x)| / |G0(x,-x)|) against
    -d/ell with d = 2|x|, over antidiagonal entries where |G0| exceeds
    ``floor_factor`` times its maximum (this excludes parity-forbidden exact
    zeros). Returns ell > 0, or math.inf when the ratio shows no decay (the
    coherent-limit sentinel). Needs at least 3 usable off-center points.
    """
    if profile.halfwidth != reference.halfwidth:
        raise InvalidArgumentError("profile and reference use different lattices")
    g = profile.antidiagonal()
    g0 = reference.antidiagonal()
    x = profile.sites()
    floor = floor_factor * g0.max()
    usable = (g0 > floor) & (g > 0.0) & (x != 0)
    if usable.sum() < 3:
        raise InsufficientDataError(
            f"only {int(usable.sum())} usable antidiagonal points (need 3)"
        )
    d = 2.0 * np.abs(x[usable])
    y = np.log(g[usable] / g0[usable])
    # model y = -d/ell; least squares slope for the single regressor -d
    slope = -float(np.dot(d, y) / np.dot(d, d))  # = 1/ell
    if slope <= _MIN_SLOPE:
        return math.inf
    return 1.0 / slope


def central_peak_falloff(profile: CorrelationProfile) -> float:
    """Local decay length of |G| at the central antidiagonal peak.

    Uses the nearest populated antidiagonal neighbors (parity spacing 2 in x,
    i.e. separation d = 4): ell = 4 / (ln|G(0,0)| - ln mean|G(+-2, -+2)|).
    This is the per-site fall-off of the peak itself, insensitive to the
    large-separation plateau that pure spatial dephasing leaves in the ratio
    fit. Returns math.inf when the profile does not decay off the center.
    """
    L = profile.halfwidth
    if L < 2:
        raise InsufficientDataError("need halfwidth >= 2 for the central falloff")
    v = profile.values
    g0 = abs(v[L, L])
    g2 = 0.5 * (abs(v[L + 2, L - 2]) + abs(v[L - 2, L + 2]))
    if g0 <= 0 or g2 <= 0:
        raise InsufficientDataError("central antidiagonal entries are zero")
    drop = math.log(g0) - math.log(g2)
    if drop <= _MIN_SLOPE:
        return math.inf
    return 4.0 / drop


def model_coherence_length(p_C: float) -> float:
    """Coherence length of the spin-dephasing model, ell = 1/log(1/sqrt(1-p_C)).

    The probability of x consecutive coherent steps is (1-p_C)^(x/2)-like,
    giving exponential decay with this length; ~ 2/p_C for small p_C.
    """
    if not (0.0 < p_C <= 1.0):
        raise InvalidArgumentError(
            f"model requires 0 < p_C <= 1 (diverges at p_C=0), got {p_C!r}"
        )
    if p_C == 1.0:
        return 0.0
    return 1.0 / math.log(1.0 / math.sqrt(1.0 - p_C))


def check_profile_invariants(profile: CorrelationProfile, atol: float = 1e-10) -> None:
    """Hermiticity and Cauchy-Schwarz bounds; raises on violation."""
    v = profile.values
    if np.abs(v - v.conj().T).max() > atol:
        raise InvalidArgumentError("correlation function is not Hermitian")
    diag = np.clip(np.real(np.diagonal(v)), 0.0, None)
    bound = np.sqrt(np.outer(diag, diag))
    if np.any(np.abs(v) > bound + atol):
        raise InvalidArgumentError("correlation function violates Cauchy-Schwarz")
