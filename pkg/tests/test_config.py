import pytest

from qde import config
from qde.errors import ConfigError


def test_defaults_are_reference_set():
    cfg = config.defaults()
    assert cfg["qubit.delta_ghz"] == 30.0
    assert cfg["qubit.t_c_ghz"] == 14.0
    assert cfg["mediator.lambda_nm"] == 200.0
    assert cfg["geometry.a_nm"] == 500.0
    assert cfg["drive.field_v_per_m"] == 2.0
    assert cfg["geometry.permittivity"] == 11.7
    assert (cfg["noise.gamma_mhz"], cfg["noise.gamma_m_mhz"]) == (0.25, 0.37)
    assert cfg["drive.r"] == -100


def test_example_text_round_trips():
    cfg = config.parse_text(config.example_text())
    assert cfg.digest == config.defaults().digest


def test_override_changes_digest():
    cfg = config.parse_text("[qubit]\nt_c_ghz = 15.4\n")
    assert cfg["qubit.t_c_ghz"] == 15.4
    assert cfg.digest != config.defaults().digest
    assert cfg.with_values(qubit__t_c_ghz=14.0).digest == config.defaults().digest


@pytest.mark.parametrize("text", [
    "[qubits]\ndelta_ghz = 1\n",
    "[qubit]\ndelta = 30\n",
    "[qubit]\ndelta_ghz = -1\n",
    "[drive]\nr = 1.5\n",
    "[drive]\nresonant = no\n",
    "[output]\nformats = xml\n",
    "[grids]\nsweep_lambda_nm = 50, 300\n",
    "not an ini file",
])
def test_bad_configs_rejected(text):
    with pytest.raises(ConfigError):
        config.parse_text(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        config.load(tmp_path / "absent.ini")


def test_optional_value():
    assert config.parse_text("[mediator]\nomega_s_ghz = 16\n")["mediator.omega_s_ghz"] == 16.0
    assert config.parse_text("[mediator]\nomega_s_ghz = none\n")["mediator.omega_s_ghz"] is None
