"""Pydantic models for parameters, states, analysis reports and run artifacts."""

from __future__ import annotations

from enum import Enum
from typing import Any, ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import settings


class UnitSystem(str, Enum):
    """Unit system a value is expressed in."""

    ORIGINAL = "original"
    NORMALIZED = "normalized"


# Parameter models
class OriginalParams(BaseModel):
    """Parameters of the released model in original (dimensional) units."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    unit_system: ClassVar[UnitSystem] = UnitSystem.ORIGINAL

    r: float = Field(..., gt=0, description="Pest birth rate (1/time)", examples=[2.0])
    k: float = Field(
        default=0.0, ge=0, description="Inhibition level (1/density)", examples=[0.5]
    )
    c: float = Field(
        ..., gt=0, description="Predation/conversion rate (1/(density*time))", examples=[2.0]
    )
    m: float = Field(..., gt=0, description="Nematode death rate (1/time)", examples=[0.4])
    u: float = Field(
        default=0.0, ge=0, description="Nematode release rate (density/time)", examples=[0.2]
    )

    def with_release(self, u: float) -> OriginalParams:
        """Copy with a different release rate (validated)."""
        return OriginalParams(r=self.r, k=self.k, c=self.c, m=self.m, u=u)


class NormalizedParams(BaseModel):
    """Dimensionless parameters (k̄ = kr/c, m̄ = m/r, ū = cu/r²)."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    unit_system: ClassVar[UnitSystem] = UnitSystem.NORMALIZED

    k: float = Field(default=0.0, ge=0, description="Dimensionless inhibition", examples=[0.5])
    m: float = Field(..., gt=0, description="Dimensionless death rate", examples=[0.2])
    u: float = Field(default=0.0, ge=0, description="Dimensionless release rate", examples=[0.1])

    def with_release(self, u: float) -> NormalizedParams:
        """Copy with a different release rate (validated)."""
        return NormalizedParams(k=self.k, m=self.m, u=u)


Params = OriginalParams | NormalizedParams


class ScaleMap(BaseModel):
    """Rescaling ȳ = (c/r)·y, τ = r·t; x is unchanged."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    state_scale_y: float = Field(..., gt=0, description="Factor c/r applied to y")
    time_scale: float = Field(..., gt=0, description="Factor r applied to t")

    def to_normalized(self, t: Any, y: Any) -> tuple[Any, Any]:
        return t * self.time_scale, y * self.state_scale_y

    def to_original(self, tau: Any, y_bar: Any) -> tuple[Any, Any]:
        return tau / self.time_scale, y_bar / self.state_scale_y


class State(BaseModel):
    """Pest density x and nematode density y (first quadrant)."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float = Field(..., ge=0, description="Pest density")
    y: float = Field(..., ge=0, description="Nematode density")

    @classmethod
    def clamped(cls, x: float, y: float) -> State:
        """Build a state from computed values, clamping round-off negatives to 0."""
        return cls(x=max(float(x), 0.0), y=max(float(y), 0.0))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


class Jacobian2(BaseModel):
    """2x2 Jacobian matrix ((j11, j12), (j21, j22))."""

    model_config = ConfigDict(frozen=True)

    j11: float
    j12: float
    j21: float
    j22: float

    @property
    def trace(self) -> float:
        return self.j11 + self.j22

    @property
    def det(self) -> float:
        return self.j11 * self.j22 - self.j12 * self.j21

    @property
    def discriminant(self) -> float:
        return self.trace**2 - 4.0 * self.det

    def as_array(self) -> np.ndarray:
        return np.array([[self.j11, self.j12], [self.j21, self.j22]], dtype=float)

    def eigenvalues(self) -> tuple[complex, complex]:
        lam = np.linalg.eigvals(self.as_array()).astype(complex)
        # Deterministic order: by real part, then imaginary part.
        lam = sorted(lam, key=lambda z: (z.real, z.imag))
        return complex(lam[0]), complex(lam[1])


# Equilibria
class StabilityClass(str, Enum):
    """Linear/nonlinear verdict for a planar equilibrium."""

    SADDLE = "saddle"
    STABLE_NODE = "stable node"
    UNSTABLE_NODE = "unstable node"
    STABLE_FOCUS = "stable focus"
    UNSTABLE_FOCUS = "unstable focus"
    CENTER_TYPE_STABLE_FOCUS = "center type stable focus"
    ATTRACTING_SADDLE_NODE = "attracting saddle node"
    LINEAR_CENTER = "linear center"
    DEGENERATE_OTHER = "degenerate"

    @property
    def is_attracting(self) -> bool:
        return self in _ATTRACTING

    @property
    def is_repelling(self) -> bool:
        return self in (StabilityClass.UNSTABLE_NODE, StabilityClass.UNSTABLE_FOCUS)


_ATTRACTING = frozenset(
    {
        StabilityClass.STABLE_NODE,
        StabilityClass.STABLE_FOCUS,
        StabilityClass.CENTER_TYPE_STABLE_FOCUS,
        StabilityClass.ATTRACTING_SADDLE_NODE,
    }
)


class SystemKind(str, Enum):
    """Which member of the model family an equilibrium belongs to."""

    NO_RELEASE = "no_release"
    WITH_RELEASE = "with_release"


class Eigenvalue(BaseModel):
    """Complex eigenvalue split into real and imaginary parts."""

    model_config = ConfigDict(frozen=True)

    real: float
    imag: float

    @classmethod
    def from_complex(cls, z: complex) -> Eigenvalue:
        return cls(real=float(z.real), imag=float(z.imag))

    def as_complex(self) -> complex:
        return complex(self.real, self.imag)


class Equilibrium(BaseModel):
    """A fixed point together with its stability verdict."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., description="E0, E1, E2 or E3")
    location: State
    stability: StabilityClass
    system: SystemKind
    eigenvalues: tuple[Eigenvalue, Eigenvalue]
    unit_system: UnitSystem


class Thresholds(BaseModel):
    """Release-rate thresholds of the normalized system."""

    model_config = ConfigDict(frozen=True)

    y3: float = Field(..., gt=0, le=1, description="Nematode level of the positive equilibrium")
    u0: float = Field(..., gt=0, description="Elimination threshold m·y3")
    u_hopf: float = Field(..., gt=0, description="Hopf threshold u0/2")


class DulacReport(BaseModel):
    """Bendixson–Dulac certificate for the no-release system with B = 1/(xy)."""

    model_config = ConfigDict(frozen=True)

    symbolic_divergence: float
    sample_count: int
    min_divergence: float
    max_divergence: float
    max_deviation: float
    passed: bool


# Bifurcation reports
class HopfReport(BaseModel):
    """Hopf analysis of the positive equilibrium at ū = u0/2."""

    model_config = ConfigDict(frozen=True)

    u_critical: float
    x3: float
    y3: float
    alpha: float = Field(..., description="Real part of the eigenvalues at u_critical")
    beta: float = Field(..., gt=0, description="Imaginary part at u_critical")
    alpha_prime: float
    alpha1: float = Field(..., description="First focus quantity (closed form)")
    alpha1_numeric: float = Field(..., description="First focus quantity (numeric partials)")
    l1: float = Field(..., description="First Lyapunov coefficient -alpha1/alpha_prime")
    omega: float
    predicted_period: float
    third_focus_value: float
    stable_cycles_below_critical: bool
    verdict: str
    published_label: str = "subcritical"
    naming_note: str


class SaddleNodeReport(BaseModel):
    """Center-manifold normal form of E2 at ū = u0."""

    model_config = ConfigDict(frozen=True)

    u_critical: float
    y2: float
    quadratic_coefficient: float
    cubic_coefficient: float
    verdict: StabilityClass = StabilityClass.ATTRACTING_SADDLE_NODE


# Simulation
class IntegratorConfig(BaseModel):
    """Tolerances, horizon and sampling for one integration."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    rel_tol: float = Field(default_factory=lambda: settings.rel_tol, gt=0)
    abs_tol: float = Field(default_factory=lambda: settings.abs_tol, gt=0)
    max_step: float = Field(default_factory=lambda: settings.max_step, gt=0)
    t_end: float = Field(default_factory=lambda: settings.t_end, gt=0)
    dense_output_dt: float = Field(default_factory=lambda: settings.dense_output_dt, gt=0)


class Trajectory(BaseModel):
    """Sampled solution: times (n,) and states (n, 2) with their unit system."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    states: np.ndarray
    unit_system: UnitSystem
    params: OriginalParams | NormalizedParams
    complete: bool = True

    @model_validator(mode="after")
    def _check_samples(self) -> Trajectory:
        if self.times.ndim != 1 or self.states.shape != (self.times.size, 2):
            raise ValueError("states must have shape (len(times), 2)")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.states))):
            raise ValueError("trajectory contains non-finite values")
        if self.params.unit_system is not self.unit_system:
            raise ValueError("params snapshot and unit system disagree")
        self.times.setflags(write=False)
        self.states.setflags(write=False)
        return self

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 1]

    def __len__(self) -> int:
        return int(self.times.size)

    def terminal_state(self) -> State:
        return State.clamped(*self.states[-1])


class AttractorKind(str, Enum):
    EQUILIBRIUM = "equilibrium"
    LIMIT_CYCLE = "limit_cycle"
    UNDECIDED = "undecided"


class AttractorReport(BaseModel):
    """Terminal behaviour of a trajectory."""

    model_config = ConfigDict(frozen=True)

    kind: AttractorKind
    target: Equilibrium | None = None
    period: float | None = None
    amplitude_x: float | None = None
    amplitude_y: float | None = None
    evidence: dict[str, float] = Field(default_factory=dict)


class PeriodEstimate(BaseModel):
    """Limit-cycle period from successive section crossings."""

    model_config = ConfigDict(frozen=True)

    mean: float = Field(..., gt=0)
    spread: float = Field(..., ge=0, description="Standard deviation of crossing spacings")
    crossings: int = Field(..., ge=2)


class Nullclines(BaseModel):
    """x-nullcline (lines x = 0 and y = y3) and y-nullcline x = (m̄y − ū)/y²."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x_nullcline: tuple[np.ndarray, np.ndarray]
    y_nullcline: np.ndarray


class PortraitEntry(BaseModel):
    """One trajectory of a phase-portrait batch, or the reason it failed."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    index: int
    initial: State
    trajectory: Trajectory | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


# Planning
class RegimeLabel(str, Enum):
    """Qualitative regime of the released system indexed by ū."""

    BELOW_HOPF = "below_hopf"
    AT_HOPF = "at_hopf"
    CONTROLLED = "controlled"
    AT_ELIMINATION = "at_elimination"
    ELIMINATING = "eliminating"


class SweepRow(BaseModel):
    """Equilibria, classes and regime for one release rate."""

    model_config = ConfigDict(frozen=True)

    u: float
    e2: Equilibrium
    e3: Equilibrium | None = None
    regime: RegimeLabel
    spot_check: AttractorReport | None = None
    spot_check_consistent: bool | None = None


class SweepTable(BaseModel):
    """Rows sorted by ū for fixed (k̄, m̄)."""

    model_config = ConfigDict(frozen=True)

    k: float
    m: float
    thresholds: Thresholds
    rows: list[SweepRow]

    def labels(self) -> list[RegimeLabel]:
        return [row.regime for row in self.rows]


class ReleasePlan(BaseModel):
    """Recommended release rates in original units."""

    model_config = ConfigDict(frozen=True)

    params: OriginalParams
    u_eliminate: float = Field(..., gt=0, description="Rate guaranteeing pest elimination")
    u_control: float = Field(..., gt=0, description="Rate giving stable coexistence")
    y3_original: float = Field(..., gt=0, description="Pest-free nematode level")
    published_u_eliminate: float | None = None
    published_u_control: float | None = None
    notes: list[str] = Field(default_factory=list)


# Reports and run artifacts
class AnalysisReport(BaseModel):
    """Everything `analyze` emits for one parameter set."""

    model_config = ConfigDict(frozen=True)

    unit_system: UnitSystem
    params: dict[str, float]
    normalized: NormalizedParams
    thresholds: Thresholds
    regime: RegimeLabel
    equilibria: list[Equilibrium]
    normalized_equilibria: list[Equilibrium]
    hopf: HopfReport
    saddle_node: SaddleNodeReport | None = None
    no_release_equilibria: list[Equilibrium] | None = None
    dulac: DulacReport | None = None


class RunManifest(BaseModel):
    """Provenance written next to every output artifact."""

    command: str
    parameters: dict[str, Any]
    tool: str
    version: str
    tolerances: dict[str, float]
    timestamp: str
    outputs: list[str] = Field(default_factory=list)
    partial: bool = False
    error: str | None = None
