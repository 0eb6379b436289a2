"""
Report models and schemas
"""
from typing import Any, Dict, List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.problem import ProblemSpec


class FitReport(BaseModel):
    """Least-squares slope of log y against log x"""
    slope_or_exponent: float
    target: Optional[float] = None
    window: Tuple[float, float]
    r2: float
    n_points: int = Field(..., ge=8)
    intercept: float = 0.0

    @property
    def relative_error(self) -> Optional[float]:
        if self.target is None or self.target == 0:
            return None
        return abs(self.slope_or_exponent - self.target) / abs(self.target)


class ResidualReport(BaseModel):
    """Maximum residual of the equation over a sample set"""
    max_abs: float = Field(..., ge=0.0)
    max_rel: float = Field(..., ge=0.0)
    location: float
    n_samples: int = Field(..., ge=0)
    derivative_mismatch: float = Field(0.0, ge=0.0)
    label: str = "radial"


class BlowupReport(BaseModel):
    """Finite maximal radius of a supercritical trajectory"""
    spec: ProblemSpec
    a0: float
    r_star: float = Field(..., gt=0.0)
    bracket: Tuple[float, float]
    caps_used: List[float]
    cap_radii: List[float]
    extrapolation_residual: float
    low_confidence: bool = False

    @field_validator('bracket')
    @classmethod
    def validate_bracket(cls, v):
        if not v[0] <= v[1]:
            raise ValueError('bracket must be ordered')
        return v

    @property
    def bracket_width(self) -> float:
        return self.bracket[1] - self.bracket[0]


class LargeSolutionFit(BaseModel):
    """Large solution on the ball B_R with its fitted boundary exponent"""
    spec: ProblemSpec
    R: float
    a_star: float
    a_bracket: Tuple[float, float]
    r_star: float
    bisection_steps: int
    alpha_fit: float
    alpha_target: float
    fit_window: Tuple[float, float]
    fit_r2: float
    fit: FitReport
    asymptotic_constant: Optional[float] = None
    profile: Any = Field(default=None, exclude=True)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def bracket_width(self) -> float:
        return self.a_bracket[1] - self.a_bracket[0]


class DecayRow(BaseModel):
    """One radius of the central-value decay table"""
    R: float
    a_star: float
    product: float


class DecayTable(BaseModel):
    spec: ProblemSpec
    rows: List[DecayRow]
    spread: float
    monotone: bool
    scaling_power: float


class CheckResult(BaseModel):
    """Outcome of one invariant check"""
    name: str
    value: Optional[float] = None
    target: Optional[float] = None
    tolerance: Optional[float] = None
    passed: bool = Field(..., serialization_alias='pass')

    model_config = ConfigDict(populate_by_name=True)


class RunSummary(BaseModel):
    """JSON summary written next to every run"""
    config: Dict[str, Any]
    results: List[CheckResult] = Field(default_factory=list)
    residuals: List[ResidualReport] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    extra: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.results)

    def failures(self) -> List[str]:
        return [c.name for c in self.results if not c.passed]


class ConvexityReport(BaseModel):
    """Sampled monotonicity and convexity of a radial profile"""
    min_relative_curvature: float
    increasing: bool
    derivative_positive: bool
    convex: bool
    strictly_convex: bool


class BarrierSample(BaseModel):
    """Assembled barrier u(x, y) = y^alpha phi(e^x y^beta) at one point"""
    x: float
    y: float
    r: float
    phi: float
    u: float
    ux: float
    uy: float
    uxx: float
    uxy: float
    uyy: float
    det: float
    u_p: float

    @property
    def relative_residual(self) -> float:
        return abs(self.det - self.u_p) / max(self.u_p, 1e-300)

    @property
    def psd(self) -> bool:
        return self.uxx > 0 and self.det >= -1e-8 * self.u_p


class LemmaReport(BaseModel):
    """Growth bounds of zeta beyond the seeded region"""
    upper_bound_ok: bool
    upper_bound_worst: float
    upper_bound_first_positive: Optional[float] = None
    lower_bound_constant: float
    lower_bound_identity_error: float
    lower_bound_threshold: Optional[float] = None
    tail_slope: float
    tail_slope_target: float
    tail_slope_error: float
