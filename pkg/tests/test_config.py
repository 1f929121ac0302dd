import pytest

from eulerlab import ConfigError, ParamError, Variant
from eulerlab.config import (OUTPUT_DIR_ENV, build_run_config,
                             load_config_file)


def write_cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


class TestConfigFile:
    def test_parses_keys_comments_blanks(self, tmp_path):
        path = write_cfg(tmp_path, """
# a comment
a = 2.0
k = -0.5   # trailing comment
variant = ns_inverse_r
nu = 0.25

seed = 7
""")
        values = load_config_file(path)
        assert values == {"a": "2.0", "k": "-0.5",
                          "variant": "ns_inverse_r", "nu": "0.25",
                          "seed": "7"}

    def test_unknown_key_with_location(self, tmp_path):
        path = write_cfg(tmp_path, "bogus = 1\n")
        with pytest.raises(ConfigError, match=r":1: unknown key"):
            load_config_file(path)

    def test_duplicate_key(self, tmp_path):
        path = write_cfg(tmp_path, "a = 1\na = 2\n")
        with pytest.raises(ConfigError, match=r":2: duplicate"):
            load_config_file(path)

    def test_missing_separator(self, tmp_path):
        path = write_cfg(tmp_path, "a 2.0\n")
        with pytest.raises(ConfigError, match=r":1:"):
            load_config_file(path)

    def test_empty_value(self, tmp_path):
        path = write_cfg(tmp_path, "a =\n")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_file(str(tmp_path / "absent.cfg"))


class TestBuildRunConfig:
    def test_defaults(self):
        cfg = build_run_config()
        assert cfg.params.a == 1.0 and cfg.params.k == 1.0
        assert cfg.params.t_star == 1.0
        assert cfg.params.variant is Variant.EULER
        assert (cfg.r_lo, cfg.r_hi) == (0.5, 2.0)
        assert (cfg.z_lo, cfg.z_hi) == (-1.0, 1.0)
        assert cfg.nr == cfg.nz == 65
        assert cfg.tol == 1e-10
        assert cfg.t_end is None

    def test_file_values_applied(self, tmp_path):
        path = write_cfg(tmp_path, "a = 2.0\nnr = 33\n")
        cfg = build_run_config(load_config_file(path))
        assert cfg.params.a == 2.0
        assert cfg.nr == 33

    def test_overrides_beat_file(self, tmp_path):
        path = write_cfg(tmp_path, "a = 2.0\nk = 3.0\n")
        cfg = build_run_config(load_config_file(path),
                               overrides={"a": 5.0, "k": None})
        assert cfg.params.a == 5.0     # flag wins
        assert cfg.params.k == 3.0     # absent flag leaves file value

    def test_bad_numeric_value(self, tmp_path):
        path = write_cfg(tmp_path, "a = fast\n")
        with pytest.raises(ConfigError, match="a"):
            build_run_config(load_config_file(path))

    def test_parameter_validation_propagates(self):
        with pytest.raises(ParamError, match="a must be nonzero"):
            build_run_config(overrides={"a": 0.0})

    def test_region_and_grid_validation(self):
        for bad in ({"nr": 4}, {"tol": -1.0}, {"cfl": 2.0},
                    {"t_end": 2.0}, {"r_lo": -1.0}):
            with pytest.raises(ConfigError):
                build_run_config(overrides=bad)

    def test_derived_times(self):
        cfg = build_run_config()
        assert cfg.sample_t_hi == pytest.approx(0.8)
        assert cfg.march_t_end == pytest.approx(0.5)
        cfg2 = build_run_config(overrides={"t_end": 0.3})
        assert cfg2.sample_t_hi == 0.3
        assert cfg2.march_t_end == 0.3

    def test_output_dir_from_environment(self, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, "elsewhere")
        cfg = build_run_config()
        assert cfg.output_dir == "elsewhere"
        cfg2 = build_run_config(overrides={"output_dir": "flagged"})
        assert cfg2.output_dir == "flagged"

    def test_ns_variant_from_strings(self):
        cfg = build_run_config(overrides={"variant": "ns_decaying_swirl",
                                          "a": 0.5, "nu": 0.3})
        assert cfg.params.variant is Variant.NS_DECAYING_SWIRL
        assert cfg.params.nu == 0.3
