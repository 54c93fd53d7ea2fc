"""Density-matrix evolution under the per-step dephasing channel.

The state is stored as a rank-4 array rho[s, x, s', x'] of shape
(2, N, 2, N), N = 2L+1, which is the (s,x) x (s',x') matrix reshaped for
cache-friendly spin/position masking. One channel step is: unitary walk step
(coin conjugation + spin-conditioned shifts) followed by an elementwise
dephasing mask that multiplies spin-off-diagonal blocks by (1 - p_C),
position-off-diagonal entries by (1 - p_S), and entries off-diagonal in both
by (1 - p_C - p_S). The additive combination on doubly-off-diagonal entries
is what the operator-sum channel

    rho -> (1-p_C-p_S) W rho W^+  +  p_C sum_s P_s W rho W^+ P_s
                                  +  p_S sum_x P_x W rho W^+ P_x

produces, and ``kraus_step_operator_sum`` below reproduces it explicitly for
small lattices; the equivalence is pinned by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SpinorLatticeState,
    WalkParameters,
    brillouin_grid,
    coin_matrix,
)
from .errors import InvalidArgumentError, TruncationError

OBSERVABLES = frozenset(
    {
        "position_distribution",
        "momentum_distribution",
        "moments",
        "density_matrix_snapshot",
        "correlation_profile",
        "wigner",
    }
)


@dataclass(frozen=True)
class DecoherenceParameters:
    """Per-step spin (p_C) and spatial (p_S) dephasing rates.

    p_C + p_S <= 1 is required for the operator-sum decomposition to have
    nonnegative weights.
    """

    p_C: float = 0.0
    p_S: float = 0.0

    def __post_init__(self):
        for name, v in (("p_C", self.p_C), ("p_S", self.p_S)):
            if not (0.0 <= v <= 1.0):
                raise InvalidArgumentError(f"{name} must lie in [0, 1], got {v!r}")
        if self.p_C + self.p_S > 1.0 + 1e-12:
            raise InvalidArgumentError(
                f"p_C + p_S = {self.p_C + self.p_S} > 1: not a valid channel decomposition"
            )


@dataclass(frozen=True)
class WalkMoments:
    step: int
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < -1e-9:
            raise InvalidArgumentError(f"variance must be nonnegative, got {self.variance}")


def state_to_density(state: SpinorLatticeState) -> np.ndarray:
    """Outer product |psi><psi| as a (2, N, 2, N) array."""
    a = state.amplitudes
    return np.einsum("sx,ty->sxty", a, a.conj())


def density_as_matrix(rho4: np.ndarray) -> np.ndarray:
    """Reshape (2,N,2,N) -> (2N, 2N) in the (s,x) row-major basis."""
    n = rho4.shape[1]
    return rho4.reshape(2 * n, 2 * n)


def validate_density(rho4: np.ndarray, atol: float = 1e-10, check_psd: bool = False) -> None:
    m = density_as_matrix(rho4)
    if np.abs(m - m.conj().T).max() > atol:
        raise InvalidArgumentError("density matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > atol:
        raise InvalidArgumentError(f"density matrix trace {np.trace(m).real} != 1")
    if check_psd:
        w = np.linalg.eigvalsh(m)
        if w.min() < -1e-10:
            raise InvalidArgumentError(f"density matrix has negative eigenvalue {w.min()}")


def dephasing_mask(n_sites: int, dec: DecoherenceParameters) -> np.ndarray:
    """Elementwise per-step dephasing factors, shape (2, N, 2, N)."""
    spin_off = 1.0 - np.eye(2)
    pos_off = 1.0 - np.eye(n_sites)
    return (
        1.0
        - dec.p_C * spin_off[:, None, :, None]
        - dec.p_S * pos_off[None, :, None, :]
    )


def _shift_density(rho4: np.ndarray, up_shift: int) -> np.ndarray:
    """Apply the spin-conditioned shift to both sides of rho (no wraparound)."""
    # occupancy about to exit the lattice must be numerically empty
    edge = (-1, 0) if up_shift > 0 else (0, -1)
    leak = max(abs(rho4[0, edge[0], 0, edge[0]]), abs(rho4[1, edge[1], 1, edge[1]]))
    if leak > 1e-12:
        raise TruncationError(
            "density support reached the lattice edge; enlarge lattice_halfwidth"
        )
    out = np.zeros_like(rho4)
    u = up_shift
    # left index (s, x)
    if u > 0:
        out[0, 1:] = rho4[0, :-1]
        out[1, :-1] = rho4[1, 1:]
    else:
        out[0, :-1] = rho4[0, 1:]
        out[1, 1:] = rho4[1, :-1]
    rho4, out = out, np.zeros_like(out)
    # right index (s', x')
    if u > 0:
        out[:, :, 0, 1:] = rho4[:, :, 0, :-1]
        out[:, :, 1, :-1] = rho4[:, :, 1, 1:]
    else:
        out[:, :, 0, :-1] = rho4[:, :, 0, 1:]
        out[:, :, 1, 1:] = rho4[:, :, 1, :-1]
    return out


def kraus_step(
    rho4: np.ndarray,
    walk: WalkParameters,
    dec: DecoherenceParameters,
    step_index: int = 0,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """One channel step: walk unitary conjugation, then the dephasing mask.

    ``mask`` may be passed in to avoid rebuilding it every step.
    """
    C = coin_matrix(walk.theta)
    rho4 = np.einsum("ab,bxcy->axcy", C, rho4)
    rho4 = np.einsum("axby,cb->axcy", rho4, C.conj())
    dagger = walk.alternating_shift and (step_index % 2 == 1)
    rho4 = _shift_density(rho4, -1 if dagger else +1)
    if dec.p_C != 0.0 or dec.p_S != 0.0:
        if mask is None:
            mask = dephasing_mask(rho4.shape[1], dec)
        rho4 = rho4 * mask
    return rho4


def kraus_step_operator_sum(
    rho4: np.ndarray,
    walk: WalkParameters,
    dec: DecoherenceParameters,
    step_index: int = 0,
) -> np.ndarray:
    """Explicit operator-sum form of :func:`kraus_step` (small lattices only).

    Builds the full 2N x 2N Kraus operators; O(N^3), used as the in-repo
    oracle for the masked implementation.
    """
    n = rho4.shape[1]
    d = 2 * n
    C_full = np.kron(coin_matrix(walk.theta), np.eye(n))
    dagger = walk.alternating_shift and (step_index % 2 == 1)
    up = -1 if dagger else +1
    S = np.zeros((d, d))
    for x in range(n):
        if 0 <= x + up < n:
            S[x + up, x] = 1.0  # spin up block
        if 0 <= x - up < n:
            S[n + x - up, n + x] = 1.0  # spin down block
    U = S @ C_full
    rho = density_as_matrix(rho4)
    rho_u = U @ rho @ U.conj().T
    out = (1.0 - dec.p_C - dec.p_S) * rho_u
    for s in range(2):
        P = np.zeros((d, d))
        P[s * n : (s + 1) * n, s * n : (s + 1) * n] = np.eye(n)
        out += dec.p_C * (P @ rho_u @ P)
    for x in range(n):
        P = np.zeros((d, d))
        P[x, x] = 1.0
        P[n + x, n + x] = 1.0
        out += dec.p_S * (P @ rho_u @ P)
    return out.reshape(2, n, 2, n)


# --- observables -------------------------------------------------------------


def position_distribution(rho4: np.ndarray) -> np.ndarray:
    """P(x) = sum_s rho[s,x,s,x], clamped at the reporting boundary."""
    p = np.einsum("sxsx->x", rho4).real
    return np.clip(p, 0.0, None)


def moments(rho4: np.ndarray, step: int = 0) -> WalkMoments:
    p = position_distribution(rho4)
    n = rho4.shape[1]
    x = np.arange(-(n // 2), n // 2 + 1)
    mean = float(np.dot(x, p))
    var = float(np.dot(x.astype(float) ** 2, p) - mean**2)
    return WalkMoments(step=step, mean=mean, variance=max(var, 0.0))


def momentum_distribution(rho4: np.ndarray, m: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-spin quasi-momentum densities p_s(k) = <k,s|rho|k,s>.

    Returns (k_values, densities) with densities shaped (2, m); the density
    integrates to the spin population with the grid weight 2 pi / m.
    """
    n = rho4.shape[1]
    if m is None:
        m = 2 * n
    k = brillouin_grid(m)
    x = np.arange(-(n // 2), n // 2 + 1)
    E = np.exp(-1j * np.outer(k, x))  # (m, N)
    dens = np.empty((2, m))
    for s in range(2):
        dens[s] = np.einsum("jx,xy,jy->j", E, rho4[s, :, s, :], E.conj()).real / (2.0 * math.pi)
    return k, dens


def diffusion_constant(p_C: float) -> float:
    """Long-time variance growth rate D(p_C) = [1+(1-p_C)^2] / [1-(1-p_C)^2]."""
    if not (0.0 < p_C <= 1.0):
        raise InvalidArgumentError(
            f"diffusion constant requires 0 < p_C <= 1 (diverges at p_C=0), got {p_C!r}"
        )
    q = (1.0 - p_C) ** 2
    return (1.0 + q) / (1.0 - q)


def evolve(
    initial: SpinorLatticeState | np.ndarray,
    walk: WalkParameters,
    dec: DecoherenceParameters | None = None,
    record: set[str] | frozenset[str] = frozenset({"position_distribution"}),
    record_steps=None,
    k_points: int | None = None,
):
    """Run ``walk.steps`` channel steps, recording observables along the way.

    ``record`` is a subset of OBSERVABLES; ``record_steps`` selects the step
    indices to record (default: every step including step 0). Returns a dict
    mapping observable name -> list of (step, value) pairs. Deterministic.
    """
    dec = dec or DecoherenceParameters()
    bad = set(record) - OBSERVABLES
    if bad:
        raise InvalidArgumentError(f"unknown observables: {sorted(bad)}")
    rho4 = state_to_density(initial) if isinstance(initial, SpinorLatticeState) else initial.copy()
    if rho4.shape[1] != walk.n_sites:
        raise InvalidArgumentError(
            f"state lattice ({rho4.shape[1]} sites) does not match walk ({walk.n_sites})"
        )
    wanted = set(range(walk.steps + 1)) if record_steps is None else set(record_steps)
    mask = dephasing_mask(walk.n_sites, dec) if (dec.p_C or dec.p_S) else None
    out = {name: [] for name in record}

    def snapshot(step):
        if step not in wanted:
            return
        for name in record:
            if name == "position_distribution":
                val = position_distribution(rho4)
            elif name == "moments":
                val = moments(rho4, step)
            elif name == "momentum_distribution":
                val = momentum_distribution(rho4)
            elif name == "density_matrix_snapshot":
                val = rho4.copy()
            elif name == "correlation_profile":
                from .coherence import correlation_function

                val = correlation_function(rho4)
            elif name == "wigner":
                from .wigner import wigner

                val = wigner(rho4, walk.theta, k_points)
            out[name].append((step, val))

    snapshot(0)
    for t in range(walk.steps):
        rho4 = kraus_step(rho4, walk, dec, t, mask)
        snapshot(t + 1)
    return out
