"""
Solution profiles produced by the solvers
"""
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional

import numpy as np
from numpy.polynomial import Chebyshev

from app.core.series import TruncatedSeries
from app.models.problem import BarrierParams, ProblemSpec

ProfileStatus = Literal['completed', 'blowup_detected', 'cap_reached']


@dataclass
class SeriesSeed:
    """Converged Taylor seed of a radial profile on [0, delta]"""
    spec: ProblemSpec
    a0: float
    kappa: int
    delta: float
    sigma: float
    series: TruncatedSeries
    iterations: int
    contraction_estimate: float
    residual: float = 0.0
    band_excursion: float = 0.0
    truncation_check: Optional[float] = None

    @property
    def a2(self) -> float:
        return 2.0 * self.series[2]

    @property
    def order(self) -> int:
        return self.series.order

    def derivative_coefficients(self) -> np.ndarray:
        """a_j = j! c_j"""
        return self.series.derivatives()

    def state_at(self, r: float):
        """(u, u') from the series at r"""
        return self.series(r), self.series.derivative()(r)


@dataclass
class RadialProfile:
    """Sampled radial trajectory (r, u, u')"""
    spec: ProblemSpec
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    r_end: float
    status: ProfileStatus
    seed: Optional[SeriesSeed] = None
    log_u: Optional[np.ndarray] = None
    handoff_radius: Optional[float] = None
    handoff_jump: float = 0.0
    cap_radii: Dict[float, float] = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return int(self.r.size)

    @property
    def completed(self) -> bool:
        return self.status == 'completed'

    def log_values(self) -> np.ndarray:
        """log u, exact where the log formulation stored it"""
        if self.log_u is not None:
            return self.log_u
        return np.log(self.u)

    def rows(self) -> List[List[float]]:
        return [[float(a), float(b), float(c)] for a, b, c in zip(self.r, self.u, self.du)]


@dataclass
class ZetaSeed:
    """
    Fixed point of the seed map on (0, delta].

    zeta(phi) = gamma_beta * phi^((p+1)/3) * H(s) with s = phi^((2-p)/3)
    and H a Chebyshev interpolant on [0, s_delta].
    """
    params: BarrierParams
    H: Chebyshev
    iterations: int
    residual: float
    halvings: int = 0
    band_margin: float = 0.0
    history: List[float] = field(default_factory=list)

    @property
    def s_delta(self) -> float:
        return self.params.delta ** ((2.0 - self.params.p) / 3.0)

    def s_of(self, phi):
        return np.asarray(phi, dtype=float) ** ((2.0 - self.params.p) / 3.0)

    def zeta(self, phi):
        """Seeded zeta at phi in [0, delta]"""
        pr = self.params
        phi = np.asarray(phi, dtype=float)
        return pr.gamma_beta * phi ** ((pr.p + 1.0) / 3.0) * self.H(self.s_of(phi))

    def leading(self, phi):
        pr = self.params
        return pr.gamma_beta * np.asarray(phi, dtype=float) ** ((pr.p + 1.0) / 3.0)


@dataclass
class BarrierProfile:
    """zeta(phi) on (0, phi_max] with the cumulative log-radius Lambda(phi) = int_0^phi dphi/zeta"""
    params: BarrierParams
    seed: ZetaSeed
    phi_grid: np.ndarray
    zeta: np.ndarray
    lam: np.ndarray
    phi_max: float
    dense: object = None
    r0: Optional[float] = None
    tail_slope: Optional[float] = None
    r_grid: Optional[np.ndarray] = None
    phi_of_r: Optional[np.ndarray] = None

    @property
    def delta(self) -> float:
        return self.params.delta

    @property
    def r_of_phi(self) -> Optional[np.ndarray]:
        """r on phi_grid, available once r0 is known"""
        if self.r0 is None:
            return None
        return self.r0 * np.exp(self.lam)
