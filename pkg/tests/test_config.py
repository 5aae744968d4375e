import pytest

from ftbqc.config import ConfigError, RunConfig, distance_range, load_config, parse_config


def test_default_parameters():
    cfg = RunConfig()
    assert (cfg.alpha, cfg.t_s, cfg.eta_s, cfg.mu, cfg.v1, cfg.v2) == (0.2, 0.45, 0.1, 0.6, 0.125, 0.0)
    assert (cfg.p_mu, cfg.p_v1, cfg.p_v2, cfg.S, cfg.epsilon, cfg.e0, cfg.C, cfg.f) == (
        0.9, 0.05, 0.05, 1000, 1e-10, 0.01, 1774, 1e6)
    assert cfg.distances[0] == 0 and cfg.distances[-1] == 100
    assert cfg.level_distances == (25.0, 50.0, 100.0)


def test_parse_key_values():
    vals = parse_config("""
        # comment
        alpha = 0.25   # trailing
        levels = 0, 1, 2
        distance_range = 0 50 10
        experiment = sweep-level
        seed = 7
    """)
    assert vals["alpha"] == 0.25
    assert vals["levels"] == (0, 1, 2)
    assert vals["distances"] == (0, 10, 20, 30, 40, 50)
    assert vals["experiment"] == "sweep-level"
    assert vals["seed"] == 7


@pytest.mark.parametrize("text", ["alpha 0.2", "bogus = 1", "alpha = x", "alpha = 1\nalpha = 2", "= 3"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_with_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("seed = 3\ne0 = 0.02\n")
    cfg = load_config(p, {"seed": 9, "samples": None})
    assert cfg.seed == 9 and cfg.e0 == 0.02 and cfg.samples == 10_000


@pytest.mark.parametrize("bad", [
    {"levels": ()}, {"levels": (5,)}, {"seed": -1}, {"experiment": "nope"},
    {"t_s": 2.0}, {"mu": 0.1}, {"samples": 0}, {"distances": ()},
])
def test_invalid_config(bad):
    with pytest.raises(ConfigError):
        RunConfig(**bad)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


def test_distance_range():
    assert distance_range(10, 20, 5) == (10, 15, 20)
    with pytest.raises(ConfigError):
        distance_range(0, 10, 0)
