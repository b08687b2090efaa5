"""Unit tests for JSON config parsing and validation."""

from __future__ import annotations

import json

import pytest

from dabss import ConfigError, load_config
from tests.conftest import REFERENCE_KWARGS


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestDefaults:
    def test_minimal_config_fills_every_default(self, tmp_path):
        cfg = load_config(write(tmp_path, {"converter": dict(REFERENCE_KWARGS)}))
        assert cfg.converter.fs == 100e3
        assert cfg.sim.periods == 2000
        assert cfg.sim.substeps_per_interval == 32
        assert cfg.sim.convergence_tol == 1e-9
        assert cfg.sim.injection is None
        # sweep defaults derive from the switching frequency
        assert cfg.sweep.f_min == pytest.approx(100.0)
        assert cfg.sweep.f_max == pytest.approx(10e3)
        assert (cfg.sweep.points, cfg.sweep.spacing) == (25, "log")
        assert cfg.tolerances.half_wave_symmetry == 1e-12
        assert cfg.tolerances.surface_equivalence == 1e-10
        assert cfg.t3_skew == 0.0
        assert cfg.polarity_override == {}

    def test_sections_override_field_by_field(self, tmp_path):
        doc = {
            "converter": dict(REFERENCE_KWARGS),
            "sim": {"periods": 500, "injection": {"f": 2000.0, "amplitude": 1e-4}},
            "sweep": {"points": 7},
            "tolerances": {"half_cycle": 1e-8},
        }
        cfg = load_config(write(tmp_path, doc))
        assert cfg.sim.periods == 500
        assert cfg.sim.injection.f == 2000.0
        assert cfg.sim.injection.settle_periods == 800
        assert cfg.sweep.points == 7
        assert cfg.sweep.f_min == pytest.approx(100.0)
        assert cfg.tolerances.half_cycle == 1e-8
        assert cfg.tolerances.similarity == 1e-12


class TestUnsafeKeys:
    def test_t3_skew_parsed(self, tmp_path):
        doc = {"converter": dict(REFERENCE_KWARGS), "unsafe_t3_skew": 5e-8}
        assert load_config(write(tmp_path, doc)).t3_skew == 5e-8

    def test_polarity_override_parsed(self, tmp_path):
        doc = {"converter": dict(REFERENCE_KWARGS),
               "unsafe_polarity_override": {"S+": -1, "P-": 1}}
        cfg = load_config(write(tmp_path, doc))
        assert cfg.polarity_override == {"S+": -1, "P-": 1}

    def test_unknown_surface_label_rejected(self, tmp_path):
        doc = {"converter": dict(REFERENCE_KWARGS),
               "unsafe_polarity_override": {"Q+": -1}}
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, doc))

    def test_non_sign_polarity_rejected(self, tmp_path):
        doc = {"converter": dict(REFERENCE_KWARGS),
               "unsafe_polarity_override": {"S+": 2}}
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, doc))


class TestRejection:
    def test_missing_converter_section(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, {"sim": {}}))

    def test_missing_converter_field(self, tmp_path):
        conv = dict(REFERENCE_KWARGS)
        del conv["Vr"]
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, {"converter": conv}))

    @pytest.mark.parametrize("section,key", [
        ("<root>", "extra"), ("converter", "esr"), ("sim", "budget"),
        ("sweep", "n"), ("tolerances", "slack"),
    ])
    def test_unknown_keys_rejected_everywhere(self, tmp_path, section, key):
        doc = {"converter": dict(REFERENCE_KWARGS)}
        if section == "<root>":
            doc[key] = 1
        elif section == "converter":
            doc["converter"][key] = 1
        else:
            doc[section] = {key: 1}
        with pytest.raises(ConfigError) as err:
            load_config(write(tmp_path, doc))
        assert key in str(err.value)

    def test_non_numeric_field_rejected(self, tmp_path):
        conv = dict(REFERENCE_KWARGS)
        conv["L"] = "10u"
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, {"converter": conv}))

    def test_non_integer_periods_rejected(self, tmp_path):
        doc = {"converter": dict(REFERENCE_KWARGS), "sim": {"periods": 2.5}}
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, doc))

    def test_boolean_is_not_a_number(self, tmp_path):
        conv = dict(REFERENCE_KWARGS)
        conv["Ro"] = True
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, {"converter": conv}))

    def test_scalar_document_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("42")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_out_of_range_physical_value_is_a_config_error(self, tmp_path):
        # ParameterError from DabParams must surface as ConfigError through
        # the loader so the CLI maps it to exit code 2.
        conv = dict(REFERENCE_KWARGS)
        conv["D_phase"] = 1.5
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, {"converter": conv}))
