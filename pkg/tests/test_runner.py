import json

import pytest

from app.core.runner import ACCEPTANCE_CRITERIA, determinism, run, run_sweep
from app.models.run_config import RunConfig


async def test_sweep_writes_one_folder_per_value(isolated_output):
    config = RunConfig(command="sweep", sweep_command="entire", n=2, p=0.0, r_max=5.0, a0_list="0.5,1,2")
    outcome = await run_sweep(config)
    folders = sorted(p.name for p in outcome.run_dir.iterdir() if p.is_dir())
    assert folders == ["entire_a00.5", "entire_a01", "entire_a02"]
    summary = json.loads((outcome.run_dir / "summary.json").read_text())
    assert summary['extra']['runs'] == ["entire_a00.5", "entire_a01", "entire_a02"]
    assert all(r['name'].startswith("entire_a0") for r in summary['results'])


async def test_sweep_reports_failures(isolated_output):
    config = RunConfig(command="sweep", sweep_command="entire", n=2, p_list="0.5,1", r_max=5.0)
    outcome = await run_sweep(config)
    assert len(outcome.summary.results) == 2 * 8


def test_verify_run():
    outcome = run(RunConfig(command="verify", n=2))
    assert outcome.exit_code == 0, outcome.summary.failures()
    names = [c.name for c in outcome.summary.results]
    assert "exact_oracle[n=2,p=0]" in names
    assert "series.a4[n=2,p=1,a0=1]" in names
    assert (outcome.run_dir / "checks.csv").exists()


def test_critical_large_run_uses_borderline_demo():
    outcome = run(RunConfig(command="large", n=2, p=2.0, a0=1.0, r_max=20.0))
    assert {c.name for c in outcome.summary.results} == {"completed", "homogeneity"}


def test_large_run_checks_fit_quality():
    outcome = run(RunConfig(command="large", n=2, p=3.0))
    rows = {c.name: c for c in outcome.summary.results}
    assert rows["fit_r2[R=1]"].passed
    assert rows["fit_r2[R=1]"].target == 0.999


def test_timings_recorded_only_on_request(monkeypatch):
    from app.core.config import settings

    config = RunConfig(command="entire", n=2, p=0.0, r_max=5.0)
    assert run(config).summary.timings == {}
    monkeypatch.setattr(settings, "RECORD_TIMINGS", True)
    assert set(run(config).summary.timings) == {"seed", "extend"}


@pytest.mark.slow
def test_barrier_sweep(isolated_output):
    config = RunConfig(command="sweep", sweep_command="barrier", p=0.25, beta_list="-0.5,-2")
    outcome = run(config)
    assert outcome.exit_code == 0, outcome.summary.failures()


def test_entire_artifacts_are_byte_identical():
    runs = [{'command': 'entire', 'n': 2, 'p': 1.0, 'a0': 1.0, 'r_max': 10.0}]
    checks = determinism(runs)
    assert [c.name for c in checks] == ["determinism[entire]"]
    assert checks[0].passed


def test_accept_table_adds_determinism():
    assert sorted(ACCEPTANCE_CRITERIA) == list(range(1, 9))
    assert ACCEPTANCE_CRITERIA[8] is determinism
