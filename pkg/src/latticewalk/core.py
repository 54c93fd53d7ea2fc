"""Unitary walk core: coin, shift, spectrum, eigenspinors, and initial states.

A walker state lives on spin ⊗ position with basis ordering (up, down) ⊗
(x = -L..+L), row-major by spin. Amplitude arrays are shaped (2, 2L+1) with
position index x + L. One walk step is W = S C: coin rotation first, then the
spin-conditioned shift (up moves +1 site, down moves -1; reversed for the
adjoint shift used on odd steps of the alternating variant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, SingularMassError, TruncationError

# Amplitude smaller than this at the lattice edge is treated as numerically
# empty when deciding whether a shift would truncate.
EDGE_TOLERANCE = 1e-12

DEFAULT_K_GRID_SIZE = 1024


def coin_matrix(theta: float) -> np.ndarray:
    """Spin rotation exp(-i sigma_y theta/2) in the (up, down) basis.

    Returns the real 2x2 matrix [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]].
    """
    if not math.isfinite(theta):
        raise InvalidArgumentError(f"coin angle must be finite, got {theta!r}")
    h = 0.5 * theta
    c, s = math.cos(h), math.sin(h)
    return np.array([[c, -s], [s, c]])


def normalize_angle(theta: float) -> float:
    """Map an angle into [0, 2*pi)."""
    if not math.isfinite(theta):
        raise InvalidArgumentError(f"angle must be finite, got {theta!r}")
    return float(theta) % (2.0 * math.pi)


@dataclass(frozen=True)
class WalkParameters:
    """Coin angle, step count, shift convention, and lattice size.

    ``lattice_halfwidth`` L fixes the site range -L..+L. It must be at least
    ``steps`` so a localized start can never reach the edge (support after n
    steps is bounded by |x| <= n); wave-packet states need extra room for
    their envelope, see :func:`default_halfwidth`.
    """

    theta: float
    steps: int
    alternating_shift: bool = False
    lattice_halfwidth: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))
        if not isinstance(self.steps, (int, np.integer)) or self.steps < 0:
            raise InvalidArgumentError(f"steps must be a nonnegative integer, got {self.steps!r}")
        L = self.lattice_halfwidth
        if L is None:
            L = max(int(self.steps), 1)
            object.__setattr__(self, "lattice_halfwidth", L)
        if not isinstance(L, (int, np.integer)) or L < 1:
            raise InvalidArgumentError(f"lattice_halfwidth must be a positive integer, got {L!r}")
        if L < self.steps:
            raise InvalidArgumentError(
                f"lattice_halfwidth {L} < steps {self.steps}: walker support would truncate"
            )

    @property
    def n_sites(self) -> int:
        return 2 * self.lattice_halfwidth + 1

    def sites(self) -> np.ndarray:
        L = self.lattice_halfwidth
        return np.arange(-L, L + 1)


@dataclass
class SpinorLatticeState:
    """Pure walker state: complex amplitudes shaped (2, 2L+1)."""

    amplitudes: np.ndarray
    halfwidth: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        N = 2 * self.halfwidth + 1
        if self.amplitudes.shape != (2, N):
            raise InvalidArgumentError(
                f"amplitudes shape {self.amplitudes.shape} != (2, {N})"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def validate(self, atol: float = 1e-12) -> None:
        if abs(self.norm - 1.0) > atol:
            raise InvalidArgumentError(f"state norm {self.norm} deviates from 1 beyond {atol}")

    def sites(self) -> np.ndarray:
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    def position_distribution(self) -> np.ndarray:
        return (np.abs(self.amplitudes) ** 2).sum(axis=0)

    def copy(self) -> "SpinorLatticeState":
        return SpinorLatticeState(self.amplitudes.copy(), self.halfwidth)


def _shift_no_wrap(amps: np.ndarray, up_shift: int) -> np.ndarray:
    """Shift spin-up rows by up_shift sites and spin-down by -up_shift.

    Raises TruncationError if occupied amplitude would cross the edge; never
    wraps or silently drops.
    """
    out = np.zeros_like(amps)
    edge_up = amps[0, -1] if up_shift > 0 else amps[0, 0]
    edge_dn = amps[1, 0] if up_shift > 0 else amps[1, -1]
    if max(abs(edge_up), abs(edge_dn)) > EDGE_TOLERANCE:
        raise TruncationError(
            "walker amplitude reached the lattice edge; enlarge lattice_halfwidth"
        )
    if up_shift > 0:
        out[0, 1:] = amps[0, :-1]
        out[1, :-1] = amps[1, 1:]
    else:
        out[0, :-1] = amps[0, 1:]
        out[1, 1:] = amps[1, :-1]
    return out


def apply_step(
    state: SpinorLatticeState, params: WalkParameters, step_index: int = 0
) -> SpinorLatticeState:
    """One walk step S C (or S^dagger C on odd steps when alternating)."""
    C = coin_matrix(params.theta)
    amps = C @ state.amplitudes
    dagger = params.alternating_shift and (step_index % 2 == 1)
    amps = _shift_no_wrap(amps, -1 if dagger else +1)
    return SpinorLatticeState(amps, state.halfwidth)


def evolve_state(
    state: SpinorLatticeState, params: WalkParameters, zeta: float = 0.0
) -> SpinorLatticeState:
    """Run all ``params.steps`` steps of the unitary walk.

    ``zeta`` applies an extra spin phase exp(i zeta sigma_z / 2) after every
    step (a per-step quasi-energy shift used by the long-memory dephasing
    model).
    """
    cur = state.copy()
    phase_up = np.exp(0.5j * zeta)
    for t in range(params.steps):
        cur = apply_step(cur, params, t)
        if zeta:
            cur.amplitudes[0] *= phase_up
            cur.amplitudes[1] *= np.conj(phase_up)
    return cur


# --- band structure ---------------------------------------------------------


def reduced_walk_operator(theta: float, k: float) -> np.ndarray:
    """The 2x2 momentum-space walk operator W(k) = exp(-i sigma_z k) C(theta)."""
    phase = np.array([np.exp(-1j * k), np.exp(1j * k)])
    return phase[:, None] * coin_matrix(theta)


def dispersion(theta: float, k) -> np.ndarray:
    """Upper-band quasi energy omega_+(k) = arccos(cos(theta/2) cos k)."""
    arg = np.clip(np.cos(0.5 * theta) * np.cos(k), -1.0, 1.0)
    return np.arccos(arg)


def group_velocity(theta: float, k, band: int = +1) -> np.ndarray:
    """Analytic d omega_band / dk in sites per step.

    vg_+-(k) = +- cos(theta/2) sin k / sqrt(1 - cos^2(theta/2) cos^2 k), with
    the removable singularity at the band-degenerate points (denominator -> 0)
    set to 0.
    """
    if band not in (+1, -1):
        raise InvalidArgumentError(f"band must be +1 or -1, got {band!r}")
    c = np.cos(0.5 * theta)
    k = np.asarray(k, dtype=float)
    den_sq = 1.0 - (c * np.cos(k)) ** 2
    num = band * c * np.sin(k)
    with np.errstate(divide="ignore", invalid="ignore"):
        vg = np.where(den_sq > 1e-28, num / np.sqrt(np.maximum(den_sq, 1e-300)), 0.0)
    return vg if vg.ndim else float(vg)


def eigenspinor_angles(theta: float, k) -> tuple[np.ndarray, np.ndarray]:
    """Bloch angles (theta_+, phi_+) of the upper-band eigenspinor of W(k).

    Numerically stable on the whole zone: with t = tan(theta/2), s = sin k,
    r = hypot(t, s), the polar angle is 2*atan2(t, r+s) for s >= 0 and
    2*atan2(r-s, t) otherwise (equivalent branches of the same eigenvector);
    the azimuth is phi_+ = pi/2 + k. The lower band has theta_- = pi - theta_+
    and phi_- = phi_+ + pi.
    """
    k = np.asarray(k, dtype=float)
    t = math.tan(0.5 * theta)
    s = np.sin(k)
    r = np.hypot(t, s)
    tp = np.where(s >= 0, 2.0 * np.arctan2(t, r + s), 2.0 * np.arctan2(r - s, t))
    ph = 0.5 * math.pi + k
    return tp, ph


def spinor_from_angles(polar, azimuth) -> np.ndarray:
    """Unit spinor (cos(polar/2), e^{i azimuth} sin(polar/2)); shape (2, ...)."""
    polar = np.asarray(polar, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    return np.stack([np.cos(0.5 * polar) + 0j, np.exp(1j * azimuth) * np.sin(0.5 * polar)])


def eigenspinor(theta: float, k, band: int = +1) -> np.ndarray:
    """Eigenspinor |s_band(k)> of W(k), shape (2, ...) over the k input."""
    tp, ph = eigenspinor_angles(theta, k)
    if band == +1:
        return spinor_from_angles(tp, ph)
    if band == -1:
        return spinor_from_angles(np.pi - tp, ph + np.pi)
    raise InvalidArgumentError(f"band must be +1 or -1, got {band!r}")


@dataclass(frozen=True)
class BandPoint:
    """Spectrum of W(k) at one quasi momentum.

    Quasi energies are the per-step phases omega_+- = +-arccos(cos(theta/2)
    cos k); eigenspinors are reported as Bloch angles (polar, azimuth); group
    velocities are analytic derivatives of the bands.
    """

    k: float
    omega_plus: float
    omega_minus: float
    eigenspinor_plus: tuple[float, float]
    eigenspinor_minus: tuple[float, float]
    vg_plus: float
    vg_minus: float


def band_structure(theta: float, k_grid=None) -> list[BandPoint]:
    """Evaluate bands, eigenspinors, and group velocities on a k grid.

    All k must lie in the Brillouin zone (-pi, pi].
    """
    if k_grid is None:
        k_grid = brillouin_grid(DEFAULT_K_GRID_SIZE)
    k_grid = np.atleast_1d(np.asarray(k_grid, dtype=float))
    if np.any(k_grid <= -np.pi - 1e-12) or np.any(k_grid > np.pi + 1e-12):
        raise InvalidArgumentError("k values must lie in (-pi, pi]")
    omega = dispersion(theta, k_grid)
    tp, ph = eigenspinor_angles(theta, k_grid)
    vg = group_velocity(theta, k_grid, +1)
    out = []
    for i, k in enumerate(k_grid):
        out.append(
            BandPoint(
                k=float(k),
                omega_plus=float(omega[i]),
                omega_minus=float(-omega[i]),
                eigenspinor_plus=(float(tp[i]), float(np.atleast_1d(ph)[i])),
                eigenspinor_minus=(float(np.pi - tp[i]), float(np.atleast_1d(ph)[i] + np.pi)),
                vg_plus=float(vg[i]),
                vg_minus=float(-vg[i]),
            )
        )
    return out


def brillouin_grid(m: int) -> np.ndarray:
    """m uniform quasi-momentum points in (-pi, pi]."""
    j = np.arange(1, m + 1)
    return -np.pi + 2.0 * np.pi * j / m


def ballistic_variance(theta: float, n: int) -> float:
    """Asymptotic coherent-walk variance n^2 (1 - |sin(theta/2)|).

    Note the convention: an alternating-shift walk at angle theta behaves as a
    plain walk at theta + pi (with a spin-flipped start), so e.g. the
    "coin-free" alternating walk maps to theta = 0 here and spreads with the
    full n^2.
    """
    if n < 0:
        raise InvalidArgumentError("step count must be nonnegative")
    return float(n) ** 2 * (1.0 - abs(math.sin(0.5 * theta)))


def effective_mass(theta: float, band: int = +1) -> float:
    """Band curvature mass at k=0: +-|tan(theta/2)| for the upper/lower band."""
    if band not in (+1, -1):
        raise InvalidArgumentError(f"band must be +1 or -1, got {band!r}")
    if abs(normalize_angle(theta) - math.pi) < 1e-12:
        raise SingularMassError("effective mass diverges at theta = pi")
    return band * abs(math.tan(0.5 * theta))


# --- initial states ---------------------------------------------------------


def default_halfwidth(steps: int, kind: str = "localized", dx0: float = 0.0) -> int:
    """Lattice halfwidth guaranteeing lossless evolution for ``steps`` steps.

    Localized starts need L = steps; Gaussian envelopes get 6 sigma of extra
    room (edge mass < 1e-15 of the packet).
    """
    extra = int(math.ceil(6.0 * dx0)) if kind in ("gaussian_packet", "k_cat") else 0
    return max(int(steps) + extra, 1)


def make_initial_state(
    kind: str,
    halfwidth: int,
    theta: float = math.pi / 2,
    k0: float = 0.0,
    dx0: float = 8.0 / math.sqrt(2.0),
    band: int = +1,
) -> SpinorLatticeState:
    """Canonical initial states.

    kind:
      localized_up        |up, 0>
      localized_symmetric (|up,0> + i|down,0>)/sqrt(2)
      gaussian_packet     |s_band(k0)> (x) sum_x exp(-x^2/(4 dx0^2)) e^{i k0 x}
      k_cat               equal superposition of gaussian packets at k0 = +-pi/2
                          in the same band

    ``theta`` fixes the band eigenspinor attached to packet states; localized
    states ignore it.
    """
    L = int(halfwidth)
    N = 2 * L + 1
    amps = np.zeros((2, N), dtype=complex)
    if kind == "localized_up":
        amps[0, L] = 1.0
    elif kind == "localized_symmetric":
        amps[0, L] = 1.0 / math.sqrt(2.0)
        amps[1, L] = 1j / math.sqrt(2.0)
    elif kind == "gaussian_packet":
        amps = _gaussian_packet(L, theta, k0, dx0, band)
        amps /= np.linalg.norm(amps)
    elif kind == "k_cat":
        amps = _gaussian_packet(L, theta, +math.pi / 2, dx0, band)
        amps = amps + _gaussian_packet(L, theta, -math.pi / 2, dx0, band)
        amps /= np.linalg.norm(amps)
    else:
        raise InvalidArgumentError(f"unknown initial-state kind {kind!r}")
    return SpinorLatticeState(amps, L)


def _gaussian_packet(L: int, theta: float, k0: float, dx0: float, band: int) -> np.ndarray:
    if dx0 <= 0:
        raise InvalidArgumentError(f"packet width dx0 must be positive, got {dx0!r}")
    x = np.arange(-L, L + 1)
    envelope = np.exp(-(x.astype(float) ** 2) / (4.0 * dx0**2)) * np.exp(1j * k0 * x)
    spin = eigenspinor(theta, k0, band)
    return spin[:, None] * envelope[None, :]
