"""
Problem and solver-control schemas
"""
import math
from typing import Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings

Regime = Literal['subcritical', 'critical', 'supercritical']


class ProblemSpec(BaseModel):
    """Equation instance det D^2 u = A u^p in dimension n"""
    n: int = Field(..., ge=2)
    p: float
    A: float = Field(1.0, gt=0.0)

    model_config = ConfigDict(frozen=True)

    @field_validator('p')
    @classmethod
    def validate_p(cls, v):
        if not math.isfinite(v):
            raise ValueError('exponent p must be finite')
        return v

    @property
    def regime(self) -> Regime:
        if self.p < self.n:
            return 'subcritical'
        if self.p == self.n:
            return 'critical'
        return 'supercritical'

    @property
    def singular_exponent(self) -> float:
        """alpha = 2n/(n-p) of the singular entire solution"""
        return 2.0 * self.n / (self.n - self.p)

    @property
    def boundary_exponent(self) -> float:
        """alpha = (n+1)/(p-n) of the boundary blow-up rate"""
        return (self.n + 1.0) / (self.p - self.n)

    @property
    def scaling_exponent(self) -> float:
        """r_star(lam a0) = lam^(-(p-n)/(2n)) r_star(a0)"""
        return -(self.p - self.n) / (2.0 * self.n)

    def label(self) -> str:
        return f"n{self.n}_p{self.p:g}_A{self.A:g}"


class IntegratorControls(BaseModel):
    """Tolerances and limits for the radial integrator"""
    rel_tol: float = Field(default_factory=lambda: settings.ODE_REL_TOL, gt=0.0)
    abs_tol: float = Field(default_factory=lambda: settings.ODE_ABS_TOL, gt=0.0)
    max_step: float = Field(default_factory=lambda: settings.ODE_MAX_STEP, gt=0.0)
    value_cap: float = Field(default_factory=lambda: settings.ODE_VALUE_CAP, gt=1.0)
    min_step: float = Field(default_factory=lambda: settings.ODE_MIN_STEP, gt=0.0)
    samples: int = Field(default_factory=lambda: settings.PROFILE_SAMPLES, ge=8)

    model_config = ConfigDict(frozen=True)

    @property
    def log_cap(self) -> float:
        return math.log(self.value_cap)

    def with_cap(self, value_cap: float) -> "IntegratorControls":
        return self.model_copy(update={'value_cap': value_cap})


class BarrierParams(BaseModel):
    """Constants of the two-dimensional wiping barrier u = y^alpha phi(e^x y^beta)"""
    p: float
    beta: float
    alpha: float
    gamma_beta: float
    q: float
    delta: float = Field(..., gt=0.0, lt=1.0)
    r1: float = Field(..., gt=0.0)
    phi1: float = Field(..., gt=0.0)

    model_config = ConfigDict(frozen=True)

    @staticmethod
    def alpha_for(p: float) -> float:
        return 2.0 / (2.0 - p)

    @staticmethod
    def gamma_for(p: float, beta: float) -> float:
        return (3.0 / (abs(beta) * (p + 1.0))) ** (1.0 / 3.0)

    @classmethod
    def build(
        cls,
        p: float,
        beta: float,
        q: Optional[float] = None,
        delta: Optional[float] = None,
        r1: Optional[float] = None,
        phi1: Optional[float] = None,
    ) -> "BarrierParams":
        """Derive alpha and gamma_beta from (p, beta) and fill defaults from settings"""
        delta = settings.BARRIER_DELTA if delta is None else delta
        return cls(
            p=p,
            beta=beta,
            alpha=cls.alpha_for(p),
            gamma_beta=cls.gamma_for(p, beta) if beta != 0 else float('nan'),
            q=settings.BARRIER_Q if q is None else q,
            delta=delta,
            r1=settings.BARRIER_R1 if r1 is None else r1,
            phi1=delta if phi1 is None else phi1,
        )

    @model_validator(mode='after')
    def validate_constants(self):
        if not 0.0 < self.p < 0.5:
            raise ValueError(f'barrier needs p in (0, 1/2), got {self.p}')
        if not self.beta < 0.0:
            raise ValueError(f'barrier needs beta < 0, got {self.beta}')
        if not (self.p + 1.0) / 3.0 < self.q < 1.0:
            raise ValueError(f'q must lie in ((p+1)/3, 1), got {self.q}')
        if abs(self.alpha - self.alpha_for(self.p)) > 1e-14 * abs(self.alpha):
            raise ValueError('alpha does not match 2/(2-p)')
        gamma = self.gamma_for(self.p, self.beta)
        if abs(self.gamma_beta - gamma) > 1e-14 * gamma:
            raise ValueError('gamma_beta does not match [3/(|beta|(p+1))]^(1/3)')
        if not self.band_ratio < 1.0:
            raise ValueError('2|beta|^-1 gamma_beta^-3 must be below 1')
        return self

    @property
    def band_ratio(self) -> float:
        """2|beta|^-1 gamma_beta^-3, equal to 2(p+1)/3"""
        return 2.0 / (abs(self.beta) * self.gamma_beta ** 3)

    @property
    def tail_slope_target(self) -> float:
        """alpha/|beta|, the limit of zeta/phi"""
        return self.alpha / abs(self.beta)

    @property
    def lower_bound_constant(self) -> float:
        """alpha^2 (2-p) / (2|beta|), which reduces to alpha/|beta|"""
        return self.alpha ** 2 * (2.0 - self.p) / (2.0 * abs(self.beta))

    @property
    def a2_constant(self) -> float:
        """A_2 = 2p / (alpha (alpha-1) (4 - p^2))"""
        return 2.0 * self.p / (self.alpha * (self.alpha - 1.0) * (4.0 - self.p ** 2))

    @property
    def growth_exponent(self) -> float:
        """2 alpha/(alpha-1), which equals 4/p"""
        return 2.0 * self.alpha / (self.alpha - 1.0)

    def with_delta(self, delta: float) -> "BarrierParams":
        """Same constants with a new seed radius; phi1 follows delta when it was tied to it"""
        phi1 = delta if self.phi1 == self.delta else self.phi1
        return self.model_copy(update={'delta': delta, 'phi1': phi1})
