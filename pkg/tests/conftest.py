"""
Shared fixtures
"""
import pytest

from app.core.barrier import build_barrier
from app.core.config import settings
from app.models.problem import BarrierParams, IntegratorControls, ProblemSpec


@pytest.fixture(autouse=True)
def isolated_output(monkeypatch, tmp_path):
    """Keep logs and run folders inside the test's temporary directory"""
    monkeypatch.setattr(settings, "LOG_TO_FILE", False)
    monkeypatch.setattr(settings, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(tmp_path / "runs"))
    return tmp_path


@pytest.fixture
def subcritical():
    return ProblemSpec(n=2, p=1.0)


@pytest.fixture
def supercritical():
    return ProblemSpec(n=2, p=3.0)


@pytest.fixture
def tight_controls():
    return IntegratorControls(rel_tol=1e-12, abs_tol=1e-14, samples=401)


@pytest.fixture(scope="session")
def barrier_params():
    return BarrierParams.build(p=0.25, beta=-1.0)


@pytest.fixture(scope="session")
def barrier_profile(barrier_params):
    """Converged barrier for p = 1/4, beta = -1, built once per session"""
    return build_barrier(barrier_params)
