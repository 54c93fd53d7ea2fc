"""Request/response schemas shared by the HTTP API and the CLI."""

from __future__ import annotations

import math
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

DEFAULT_PACKET_WIDTH = 8.0 / math.sqrt(2.0)


class WalkSpec(BaseModel):
    theta: float = math.pi / 2
    steps: int = Field(default=20, ge=0)
    lattice_halfwidth: Optional[int] = None
    alternating_shift: bool = False


class DecoherenceSpec(BaseModel):
    p_c: float = Field(default=0.0, ge=0.0, le=1.0)
    p_s: float = Field(default=0.0, ge=0.0, le=1.0)


class InitialStateSpec(BaseModel):
    kind: Literal["localized_up", "localized_symmetric", "gaussian_packet", "k_cat"] = (
        "localized_symmetric"
    )
    k0: float = 0.0
    dx0: float = Field(default=DEFAULT_PACKET_WIDTH, gt=0.0)
    band: Literal[-1, 1] = 1


class SimulateRequest(BaseModel):
    walk: WalkSpec = WalkSpec()
    decoherence: DecoherenceSpec = DecoherenceSpec()
    initial: InitialStateSpec = InitialStateSpec()
    observables: list[str] = ["position_distribution", "moments"]
    record_steps: Optional[list[int]] = None
    k_points: Optional[int] = None


class MomentsOut(BaseModel):
    step: int
    mean: float
    variance: float


class DistributionOut(BaseModel):
    step: int
    sites: list[int]
    values: list[float]


class MomentumOut(BaseModel):
    step: int
    k: list[float]
    spin_up: list[float]
    spin_down: list[float]


class CorrelationOut(BaseModel):
    step: int
    halfwidth: int
    re_g: list[list[float]]
    im_g: list[list[float]]
    antidiagonal_abs: list[float]


class WignerOut(BaseModel):
    step: int
    x: list[int]
    k: list[float]
    trace: list[list[float]]
    band_plus: list[list[float]]
    band_minus: list[list[float]]
    min_trace: float


class SimulateResponse(BaseModel):
    position_distribution: Optional[list[DistributionOut]] = None
    moments: Optional[list[MomentsOut]] = None
    momentum_distribution: Optional[list[MomentumOut]] = None
    correlation_profile: Optional[list[CorrelationOut]] = None
    wigner: Optional[list[WignerOut]] = None


class HistogramSpec(BaseModel):
    counts: list[int]
    halfwidth: int
    steps: int = Field(ge=0)


class DetectionSpec(BaseModel):
    efficiency: float = Field(default=0.9, gt=0.0, le=1.0)
    offsets: list[int] = [-1, 1]
    weights: list[float] = [0.5, 0.5]


class FitRequest(BaseModel):
    histogram: HistogramSpec
    free: list[str] = ["p_C"]
    fixed: dict[str, float] = {}
    detection: DetectionSpec = DetectionSpec()
    initial: str = "localized_symmetric"
    alternating: bool = False
    confidence: float = Field(default=0.68, gt=0.0, lt=1.0)


class FitResponse(BaseModel):
    estimates: dict[str, float]
    intervals: dict[str, tuple[float, float]]
    log_likelihood: float
    excluded_counts: int
    confidence: float
    free: list[str]
    fixed: dict[str, float]


class SpectrumSpec(BaseModel):
    kind: Literal["white", "tabulated"] = "white"
    density: float = 0.0
    omega: Optional[list[float]] = None
    values: Optional[list[float]] = None


class RatesRequest(BaseModel):
    params: Optional[dict[str, float]] = None  # None -> packaged cesium defaults
    calibrate_gamma_tot: Optional[float] = None
    magnetic_noise: Optional[SpectrumSpec] = None
    rin: Optional[SpectrumSpec] = None
    ellipticity_noise: Optional[SpectrumSpec] = None


class MechanismRowOut(BaseModel):
    mechanism: str
    spin_env: str
    spin_coin: str
    spin_shift: str
    spatial_env: str
    annotation: str
    qualitative: bool


class RatesResponse(BaseModel):
    eta_s: float
    eta_v_prime: float
    eta_perp: float
    T2: dict[str, Any]
    ell: dict[str, Any]
    delta_phi_sq: dict[str, float]
    p_C: dict[str, float]
    scattering: dict[str, Any]
    table: list[MechanismRowOut]
    rendered_table: str


class DephasingSpec(BaseModel):
    family: Literal["gaussian", "thermal_exponential", "point_mass"] = "thermal_exponential"
    delta_zeta: float = Field(default=0.0, ge=0.0)
    offset: float = 0.0


class MemoryRequest(BaseModel):
    walk: WalkSpec = WalkSpec()
    dist: DephasingSpec = DephasingSpec()
    spin: str = "symmetric"
    x0: int = 0
    mc_samples: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None


class MemoryResponse(BaseModel):
    sites: list[int]
    abs_g_analytic: list[float]
    abs_g_coherent: list[float]
    suppression: list[float]
    abs_g_mc: Optional[list[float]] = None
    mc_max_abs_difference: Optional[float] = None


class WignerRequest(BaseModel):
    walk: WalkSpec = WalkSpec()
    decoherence: DecoherenceSpec = DecoherenceSpec()
    initial: InitialStateSpec = InitialStateSpec()
    k_points: Optional[int] = None


class HealthResponse(BaseModel):
    status: str
    version: str
