"""
Run configuration schema
"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings
from app.models.problem import BarrierParams, ProblemSpec

Command = Literal['entire', 'large', 'barrier', 'verify', 'sweep', 'accept']
SweepTarget = Literal['entire', 'large', 'barrier']

LIST_FIELDS = ('R', 'a0_list', 'p_list', 'beta_list')


class RunConfig(BaseModel):
    """One experiment: command plus its parameters"""
    command: Command
    n: int = Field(2, ge=2)
    p: float = 1.0
    A: float = Field(1.0, gt=0.0)

    # entire / borderline
    a0: float = Field(1.0, gt=0.0)
    r_max: float = Field(100.0, gt=0.0)
    kappa: Optional[int] = Field(None, ge=1)

    # large
    R: List[float] = Field(default_factory=lambda: [1.0])

    # barrier
    beta: float = -1.0
    q: float = Field(default_factory=lambda: settings.BARRIER_Q)
    delta: float = Field(default_factory=lambda: settings.BARRIER_DELTA)
    r1: float = Field(default_factory=lambda: settings.BARRIER_R1)
    phi_max: float = Field(default_factory=lambda: settings.BARRIER_PHI_MAX)

    # sweep
    sweep_command: SweepTarget = 'entire'
    a0_list: Optional[List[float]] = None
    p_list: Optional[List[float]] = None
    beta_list: Optional[List[float]] = None

    # accept
    criteria: Optional[List[int]] = None

    # output
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    output_format: Literal['csv', 'json'] = 'csv'
    plot: bool = False
    label: Optional[str] = None

    model_config = ConfigDict(extra='forbid')

    @field_validator(*LIST_FIELDS, mode='before')
    @classmethod
    def split_lists(cls, v):
        if isinstance(v, str):
            return [float(x) for x in v.replace(';', ',').split(',') if x.strip()]
        if isinstance(v, (int, float)):
            return [float(v)]
        return v

    @field_validator('criteria', mode='before')
    @classmethod
    def split_criteria(cls, v):
        if isinstance(v, str):
            return [int(x) for x in v.replace(';', ',').split(',') if x.strip()]
        return v

    @field_validator('R')
    @classmethod
    def validate_radii(cls, v):
        if not v:
            raise ValueError('at least one radius is required')
        if any(x <= 0 for x in v):
            raise ValueError('radii must be positive')
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError('radii must be strictly increasing')
        return v

    @model_validator(mode='after')
    def validate_regime(self):
        if self.command == 'entire' and not self.p < self.n:
            raise ValueError(f'entire requires p < n, got n={self.n}, p={self.p}')
        if self.command == 'large' and not self.p >= self.n:
            raise ValueError(f'large requires p >= n, got n={self.n}, p={self.p}')
        if self.command == 'entire' and self.r_max <= settings.SERIES_DELTA:
            raise ValueError('r_max must exceed the series handoff radius')
        if self.command == 'barrier':
            # raises on p outside (0, 1/2), beta >= 0 or a bad q
            self.barrier_params()
        if self.command == 'sweep':
            self._validate_sweep()
        return self

    def _validate_sweep(self) -> None:
        lists = {'a0_list': self.a0_list, 'p_list': self.p_list, 'beta_list': self.beta_list}
        given = [k for k, v in lists.items() if v]
        if len(given) != 1:
            raise ValueError('sweep takes exactly one of a0_list, p_list, beta_list')
        key = given[0]
        if key == 'beta_list' and self.sweep_command != 'barrier':
            raise ValueError('beta_list only sweeps the barrier command')
        self.sweep_variants()

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(n=self.n, p=self.p, A=self.A)

    def barrier_params(self) -> BarrierParams:
        return BarrierParams.build(p=self.p, beta=self.beta, q=self.q, delta=self.delta, r1=self.r1)

    def resolved_kappa(self) -> int:
        return self.kappa if self.kappa is not None else settings.default_kappa(self.n)

    def get_output_dir(self) -> Path:
        return Path(self.output_dir)

    def run_label(self) -> str:
        if self.label:
            return self.label
        if self.command == 'barrier':
            return f"barrier_p{self.p:g}_beta{self.beta:g}"
        if self.command == 'large':
            return f"large_n{self.n}_p{self.p:g}"
        return f"{self.command}_n{self.n}_p{self.p:g}_a0{self.a0:g}"

    def sweep_variants(self) -> List["RunConfig"]:
        """One config per swept value, each with its own label"""
        base = self.model_dump(exclude={'a0_list', 'p_list', 'beta_list', 'sweep_command', 'label'})
        base['command'] = self.sweep_command
        if self.a0_list:
            key, values = 'a0', self.a0_list
        elif self.p_list:
            key, values = 'p', self.p_list
        else:
            key, values = 'beta', self.beta_list
        variants = []
        for value in values:
            data = dict(base, **{key: value})
            data['label'] = f"{self.sweep_command}_{key}{value:g}"
            variants.append(RunConfig(**data))
        return variants

    def echo(self) -> Dict[str, Any]:
        """Config as written into the JSON summary"""
        return self.model_dump(mode='json', exclude={'output_dir'})


def read_config_file(path: str) -> Dict[str, Any]:
    """Flat KEY=VALUE file; keys are matched case-insensitively against RunConfig fields"""
    raw = dotenv_values(path)
    fields = {name.lower(): name for name in RunConfig.model_fields}
    data = {}
    for key, value in raw.items():
        if value is None:
            continue
        name = fields.get(key.lower().replace('-', '_'), key.lower())
        data[name] = value
    return data


def load_run_config(command: str, config_file: Optional[str] = None, **overrides) -> RunConfig:
    """Merge file values with flag overrides; flags win, None means not given"""
    data: Dict[str, Any] = {}
    config_file = config_file or settings.RUN_CONFIG_FILE
    if config_file:
        data.update(read_config_file(config_file))
    data.update({k: v for k, v in overrides.items() if v is not None})
    data['command'] = command
    return RunConfig(**data)
