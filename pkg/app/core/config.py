"""
Configuration management for MongeLab
"""
from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False
    )

    # Output settings
    OUTPUT_DIR: str = "./runs"
    RECORD_TIMINGS: bool = False  # Wall-clock seconds in the JSON summary
    PLOT_HASH_SALT: str = "mongelab"

    # Sweep settings
    MAX_CONCURRENT_RUNS: int = 4

    # Series fixed point
    SERIES_MIN_KAPPA: int = 3  # kappa = max(SERIES_MIN_KAPPA, n)
    SERIES_DELTA: float = 0.05
    SERIES_SIGMA: float = 0.1
    SERIES_TOL: float = 1e-13
    SERIES_MAX_ITER: int = 200
    SERIES_CONTRACTION_SLACK: float = 0.05

    # Radial integrator
    ODE_REL_TOL: float = 1e-10
    ODE_ABS_TOL: float = 1e-12
    ODE_MAX_STEP: float = float("inf")
    ODE_MIN_STEP: float = 1e-14
    ODE_VALUE_CAP: float = 1e12
    PROFILE_SAMPLES: int = 8001
    PROFILE_SERIES_FRACTION: float = 0.01  # grid starts at this multiple of delta

    # Blow-up radius and large solutions
    BLOWUP_CAPS: list[float] = [1e6, 1e8, 1e10, 1e12]
    BLOWUP_MISFIT_LIMIT: float = 0.05
    BLOWUP_BRACKET_RTOL: float = 1e-6  # bracket width relative to r_star
    LARGE_A0_MIN: float = 1e-8
    LARGE_A0_MAX: float = 1e8
    LARGE_BISECTION_RTOL: float = 1e-8
    LARGE_FIT_WINDOW: list[float] = [1e-4, 1e-2]  # boundary distance, in units of R
    LARGE_FIT_POINTS: int = 64
    LARGE_LOG_CAP: float = 60.0  # log u at which fit trajectories stop
    CRITICAL_VALUE_CAP: float = 1e300

    # Barrier pipeline
    BARRIER_Q: float = 0.9
    BARRIER_DELTA: float = 1e-3
    BARRIER_PHI_MAX: float = 1e4
    BARRIER_R1: float = 1.0
    BARRIER_TOL: float = 1e-12
    BARRIER_QUAD_TOL: float = 1e-12
    BARRIER_ODE_TOL: float = 1e-13  # continuation; its dense output feeds the FD Hessian
    BARRIER_NODES: int = 24
    BARRIER_RELAXATION: float = 0.5
    BARRIER_MAX_ITER: int = 400
    BARRIER_MAX_HALVINGS: int = 6
    BARRIER_FD_STEP: float = 3e-3  # x step; the y step is this times y

    # Logging settings
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "./logs"
    LOG_FILE: str = "mongelab.log"
    SOLVER_LOG_LEVEL: str = "DEBUG"
    LOG_ROTATION_SIZE: str = "10MB"
    LOG_RETENTION_COUNT: int = 5
    LOG_FORMAT: str = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"
    LOG_TO_FILE: bool = True

    # Optional default config file for runs
    RUN_CONFIG_FILE: Optional[str] = None

    def get_output_dir(self) -> Path:
        """Get output directory as Path object"""
        return Path(self.OUTPUT_DIR)

    def get_log_dir(self) -> Path:
        """Get log directory as Path object"""
        return Path(self.LOG_DIR)

    def get_log_file_path(self) -> Path:
        """Get full log file path"""
        return self.get_log_dir() / self.LOG_FILE

    def default_kappa(self, n: int) -> int:
        """Series half-order used when a caller does not pick one"""
        return max(self.SERIES_MIN_KAPPA, n)


# Global settings instance
settings = Settings()
