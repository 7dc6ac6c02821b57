import pytest

from dickebattery.config import ConfigError, parse_config, parse_grid
from dickebattery.dynamics import IntegratorConfig
from dickebattery.experiments import STEADY_CFG
from dickebattery.model import Scenario

MINIMAL = """
scenario = nonlinear_dicke
F = 0.5
g1 = 0.1
g2 = 0.1
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    p = cfg.params
    assert p.scenario is Scenario.NONLINEAR_DICKE
    assert (p.F, p.g1, p.g2) == (0.5, 0.1, 0.1)
    assert p.omega0 == 1.0 and p.n_cavity == 10
    assert (p.bath.beta, p.bath.alpha, p.bath.omega_max) == (1.0, 1.0, 1000.0)
    assert cfg.integrator == IntegratorConfig()
    assert cfg.integrator.dt == 1e-3
    assert cfg.sweep is None
    assert set(cfg.explicit) == {"scenario", "F", "g1", "g2"}


def test_comments_and_sections():
    cfg = parse_config("""
    # a comment
    scenario = direct_drive   # trailing comment
    F = 0.5
    bath.beta = 2
    integrator.t_end = 50
    integrator.record_stride = 10
    steady.window = 2.5
    output.path = out.csv
    parallelism = 2
    """)
    assert cfg.params.bath.beta == 2.0
    assert cfg.integrator.t_end == 50 and cfg.integrator.record_stride == 10
    assert cfg.steady.window == 2.5
    assert cfg.output_path == "out.csv" and cfg.parallelism == 2


def test_empty_scenario_names_scenario():
    with pytest.raises(ConfigError) as info:
        parse_config("scenario =\nF = 0.5\n")
    assert info.value.key == "scenario"
    assert "scenario" in str(info.value)


def test_missing_scenario():
    with pytest.raises(ConfigError) as info:
        parse_config("F = 0.5\n")
    assert info.value.key == "scenario"


def test_negative_coupling_is_an_invariant_error():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("g2 = 0.1", "g2 = -0.1"))
    assert info.value.key == "g2"
    assert info.value.line == 5


@pytest.mark.parametrize("text, key", [
    ("scenario = nonlinear_dicke\ngamma = 1\n", "gamma"),
    ("scenario = nonlinear_dicke\nF = lots\n", "F"),
    ("scenario = nonlinear_dicke\nF = 1\nF = 2\n", "F"),
    ("scenario = quantum_toaster\n", "scenario"),
    ("scenario = nonlinear_dicke\nn_cavity = 2.5\n", "n_cavity"),
    ("scenario = nonlinear_dicke\nbath.beta = 0\n", "bath.beta"),
    ("scenario = nonlinear_dicke\nintegrator.dt = -1\n", "integrator.dt"),
    ("scenario = nonlinear_dicke\nmerge_degenerate = maybe\n", "merge_degenerate"),
    ("scenario = nonlinear_dicke\nsweep.beta = 1,2\n", "sweep.beta"),
    ("scenario = nonlinear_dicke\nsweep.g2 = 0:1\n", "sweep.g2"),
    ("scenario = nonlinear_dicke\nsweep.observable = tau_s\n", "sweep.observable"),
])
def test_bad_keys_are_named(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key


def test_line_without_equals():
    with pytest.raises(ConfigError) as info:
        parse_config("scenario = nonlinear_dicke\njust words\n")
    assert info.value.line == 2


def test_transmon_inversion_rejected_at_parse_time():
    with pytest.raises(ConfigError):
        parse_config("scenario = anharmonic_linear\nomega_tilde1 = 0.3\n")


def test_sweep_config():
    cfg = parse_config(MINIMAL + "sweep.g2 = 0:0.1:0.01\nsweep.F = 0.5, 1.0, 1.5\n")
    assert cfg.sweep.shape == (11, 3)
    assert [n for n, _ in cfg.sweep.axes] == ["g2", "F"]
    assert cfg.sweep.observable == "steady_ergotropy"
    assert cfg.integrator == STEADY_CFG


def test_sweep_points_validated():
    text = "scenario = anharmonic_linear\nsweep.omega_tilde1 = 0, 0.5\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == "sweep"


def test_parse_grid():
    assert parse_grid("0:0.2:0.1") == (0.0, 0.1, 0.2)
    assert parse_grid("1, 2,3") == (1.0, 2.0, 3.0)
    with pytest.raises(ValueError):
        parse_grid(" , ")


def test_rate_prefactor_default_keyword():
    cfg = parse_config("scenario = anharmonic_linear\nrate_prefactor = default\n")
    assert cfg.params.rate_prefactor is None
    cfg = parse_config("scenario = anharmonic_linear\nrate_prefactor = 1\n")
    assert cfg.params.rate_prefactor == 1.0
