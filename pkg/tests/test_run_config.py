import pytest
from pydantic import ValidationError

from app.models.run_config import RunConfig, load_run_config, read_config_file


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError):
        RunConfig(command="entire", bogus=1)


@pytest.mark.parametrize("data", [
    {'command': 'entire', 'n': 2, 'p': 2.0},
    {'command': 'large', 'n': 2, 'p': 1.0},
    {'command': 'barrier', 'p': 0.6, 'beta': -1.0},
    {'command': 'barrier', 'p': 0.25, 'beta': 1.0},
    {'command': 'large', 'n': 2, 'p': 3.0, 'R': [2.0, 1.0]},
    {'command': 'sweep', 'sweep_command': 'entire', 'a0_list': [1.0], 'p_list': [0.5]},
    {'command': 'sweep', 'sweep_command': 'entire', 'beta_list': [-1.0]},
])
def test_regime_validation(data):
    with pytest.raises(ValidationError):
        RunConfig(**data)


def test_list_fields_split_from_strings():
    config = RunConfig(command="sweep", sweep_command="entire", a0_list="0.5, 1,2")
    assert config.a0_list == [0.5, 1.0, 2.0]
    assert RunConfig(command="large", n=2, p=3.0, R="0.5,1").R == [0.5, 1.0]


def test_sweep_variants():
    config = RunConfig(command="sweep", sweep_command="barrier", p=0.25, beta_list="-0.5,-1,-2")
    variants = config.sweep_variants()
    assert [v.beta for v in variants] == [-0.5, -1.0, -2.0]
    assert all(v.command == "barrier" for v in variants)
    assert len({v.run_label() for v in variants}) == 3


def test_sweep_variant_validated():
    with pytest.raises(ValidationError):
        RunConfig(command="sweep", sweep_command="entire", n=2, p_list="0.5,2.5")


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("N=3\nP=1\nA0=2\nR_MAX=50\n")
    assert read_config_file(str(path))['a0'] == '2'

    config = load_run_config("entire", config_file=str(path), a0=4.0, r_max=None)
    assert config.n == 3
    assert config.a0 == 4.0
    assert config.r_max == 50.0


def test_echo_excludes_output_dir():
    echo = RunConfig(command="entire").echo()
    assert 'output_dir' not in echo
    assert echo['command'] == 'entire'


def test_barrier_params_from_config():
    params = RunConfig(command="barrier", p=0.25, beta=-1.0).barrier_params()
    assert params.alpha == pytest.approx(8 / 7)
    assert params.phi1 == params.delta
