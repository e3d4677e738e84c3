import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hygrotherm.config import SimulationConfig, parse_config, parse_config_text
from hygrotherm.errors import ConfigError


class TestParse:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.ini"
        path.write_text("")
        cfg = parse_config(path)
        assert cfg == SimulationConfig()
        assert cfg.ell == 0.12 and cfg.n_elements == 240 and cfg.dt == 0.5 and cfg.t_end == 1800.0
        assert cfg.build_scenario().kind == "iso"
        assert cfg.build_boundary().alpha_c == 25.0
        assert cfg.snapshot_times == (900.0, 1800.0)
        assert cfg.probe_points == (0.12, 0.11)

    @pytest.mark.parametrize("text", ['scenario = "HC"', "scenario = hc", "[scenario]\nkind = HC"])
    def test_hydrocarbon_selects_film_coefficient(self, text):
        cfg = parse_config_text(text)
        assert cfg.build_boundary().alpha_c == 50.0

    def test_film_coefficient_override(self):
        cfg = parse_config_text('scenario = "HC"\n[boundary]\nalpha_c = 20')
        assert cfg.build_boundary().alpha_c == 20.0

    def test_parametric_parameters(self):
        cfg = parse_config_text("[scenario]\nkind = pm\nq_td = 200\ngrowth = fast")
        sc = cfg.build_scenario()
        assert sc.q_td == 200.0 and sc.growth == "fast"
        assert cfg.build_boundary().alpha_c == 35.0

    def test_material_override(self):
        assert parse_config_text("[materials]\ntau = 100").build_materials().tau == 100.0

    def test_profile_initial_condition(self):
        cfg = parse_config_text("[mesh]\nn_elements = 4\n[initial]\nw0 = 0:70, 0.12:50")
        state = cfg.initial()
        np.testing.assert_allclose(state.w, [70.0, 65.0, 60.0, 55.0, 50.0])

    def test_solver_switches(self):
        cfg = parse_config_text("[solver]\nadvection = centered\ndense_output = yes")
        opts = cfg.build_options()
        assert opts.advection == "centered" and opts.dense_output is True

    @pytest.mark.parametrize("text, key", [
        ("[time]\ndt = -1", "dt"),
        ("[time]\nfoo = 1", "foo"),
        ("[nonsense]\na = 1", "nonsense"),
        ("[mesh]\nn_elements = 1", "n_elements"),
        ("[time]\nt_end = 1.2", "t_end"),
        ("[scenario]\nkind = iso\nq_td = 100", "q_td"),
        ("[scenario]\nkind = bogus", "kind"),
        ("[boundary]\nbeta_c = 0", "beta_c"),
        ("[materials]\ndelta_min = 1\ndelta_max = 0.1", "delta_min"),
        ("[initial]\ntheta0 = 0", "theta0"),
        ("[output]\nsnapshots = 5000", "snapshot"),
        ("[output]\nprobes = 0.5", "probe"),
        ("[solver]\nadvection = sideways", "advection"),
        ("[time]\ndt = fast", "dt"),
    ])
    def test_rejections_name_the_key(self, text, key):
        with pytest.raises(ConfigError) as info:
            parse_config_text(text)
        assert key in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "absent.ini")

    def test_zero_end_time_schedule(self):
        assert parse_config_text("[time]\nt_end = 0").snapshot_times == (0.0,)


class TestRoundTrip:
    @pytest.mark.parametrize("text", [
        "",
        'scenario = "HC"\n[boundary]\nalpha_c = 42.5',
        "[scenario]\nkind = pm\nopening = 0.08\n[materials]\nA_lambda = -0.001",
        "[initial]\ntheta0 = 0:300, 0.12:320\n[output]\nsnapshots = 0, 10\nprobes = 0.05",
        "[scenario]\nkind = constant\ntemperature = 400\n[solver]\nmonitor_policy = abort",
    ])
    def test_serialize_round_trip(self, text):
        cfg = parse_config_text(text)
        again = parse_config_text(cfg.serialize())
        assert again == cfg
        assert again.serialize() == cfg.serialize()
        assert again.digest() == cfg.digest()

    @settings(max_examples=50)
    @given(st.floats(0.01, 1.0), st.integers(2, 500), st.floats(1e-3, 10.0), st.integers(0, 100),
           st.floats(1.0, 100.0))
    def test_round_trip_property(self, ell, n, dt, steps, alpha):
        cfg = SimulationConfig(ell=ell, n_elements=n, dt=dt, t_end=steps * dt, snapshots=(),
                               probes=(ell,), boundary=(("alpha_c", alpha),))
        assert parse_config_text(cfg.serialize()) == cfg

    def test_digest_changes_with_content(self):
        assert parse_config_text("[time]\ndt = 0.25").digest() != SimulationConfig().digest()
