import copy
import json
import logging
import math

import pytest
from hypothesis import given, strategies as st

from cotrap import core
from cotrap.core import ConfigError, PhysicalConstants


def raw_default():
    return copy.deepcopy(core.load_config("default.cfg").raw)


def test_bundled_default_loads(cfg):
    assert cfg.drive.frequency_convention == "angular"
    assert cfg.drive.omega_slow == 7000.0
    assert cfg.drive.omega_fast == 1.75e7
    assert cfg.geometry.r0 == 9.0e-4
    assert cfg.geometry.z0_ax == 3.4e-3
    assert cfg.ion.charge_e == 1.0
    assert cfg.nanoparticle.charge_e == 800.0
    assert cfg.gravity_on and cfg.coulomb_on and cfg.np_above
    assert cfg.source_path.endswith("default.cfg")


def test_ordinary_file_numbers_scale_by_two_pi(cfg, cfg_ordinary):
    assert cfg_ordinary.drive.frequency_convention == "ordinary"
    assert cfg_ordinary.drive.omega_slow == 2.0 * math.pi * cfg.drive.omega_slow
    assert cfg_ordinary.drive.omega_fast == 2.0 * math.pi * cfg.drive.omega_fast


def test_charge_property(cfg):
    assert cfg.ion.charge == core.E_CHARGE
    assert cfg.nanoparticle.charge == 800.0 * core.E_CHARGE


def test_constants_codata_values():
    c = PhysicalConstants()
    assert c.hbar == 1.054571817e-34
    assert c.e_charge == 1.602176634e-19
    assert c.c_light == 299792458.0
    assert c.h_planck == 2.0 * math.pi * c.hbar


def test_missing_field_is_named():
    raw = raw_default()
    del raw["drive"]["v_end_v"]
    with pytest.raises(ConfigError, match="drive.v_end_v"):
        core.parse_config(raw)
    raw = raw_default()
    del raw["nanoparticle"]["mass_kg"]
    with pytest.raises(ConfigError, match="nanoparticle.mass_kg"):
        core.parse_config(raw)


def test_missing_section_is_named():
    raw = raw_default()
    del raw["geometry"]
    with pytest.raises(ConfigError, match="geometry"):
        core.parse_config(raw)


def test_unknown_key_rejected():
    raw = raw_default()
    raw["geometry"]["bogus"] = 1.0
    with pytest.raises(ConfigError, match="unknown key 'geometry.bogus'"):
        core.parse_config(raw)


def test_unparseable_number_is_named():
    raw = raw_default()
    raw["drive"]["v_end_v"] = "two hundred"
    with pytest.raises(ConfigError, match="drive.v_end_v"):
        core.parse_config(raw)
    raw["drive"]["v_end_v"] = True  # bool is not a voltage
    with pytest.raises(ConfigError, match="drive.v_end_v"):
        core.parse_config(raw)


def test_mixed_frequency_conventions_name_both_keys():
    raw = raw_default()
    del raw["drive"]["f_slow_rads"]
    raw["drive"]["f_slow_hz"] = 7000.0
    with pytest.raises(ConfigError, match="f_slow_hz.*f_fast_rads"):
        core.parse_config(raw)


def test_duplicate_tone_keys_rejected():
    raw = raw_default()
    raw["drive"]["f_slow_hz"] = 7000.0  # alongside f_slow_rads
    with pytest.raises(ConfigError, match="exactly one"):
        core.parse_config(raw)


def test_tone_ordering_enforced():
    raw = raw_default()
    raw["drive"]["f_fast_rads"] = 100.0  # below the slow tone
    with pytest.raises(ConfigError, match="f_fast"):
        core.parse_config(raw)


def test_kappa_bounds():
    for bad in (0.0, -0.2, 1.5):
        raw = raw_default()
        raw["geometry"]["kappa_rf"] = bad
        with pytest.raises(ConfigError, match="kappa_rf"):
            core.parse_config(raw)


def test_negative_voltage_rejected():
    raw = raw_default()
    raw["drive"]["v_fast_v"] = -5.0
    with pytest.raises(ConfigError, match="v_fast_v"):
        core.parse_config(raw)


def test_offset_voltage_may_be_signed():
    raw = raw_default()
    raw["drive"]["v_offset_v"] = -3.5
    assert core.parse_config(raw).drive.v_offset == -3.5


def test_ion_must_be_lighter():
    raw = raw_default()
    raw["ion"]["mass_kg"] = 1.0e-15
    with pytest.raises(ConfigError, match="mass_kg"):
        core.parse_config(raw)


def test_permittivity_below_one_needs_point_particle():
    raw = raw_default()
    raw["nanoparticle"]["rel_permittivity"] = 0.5
    with pytest.raises(ConfigError, match="rel_permittivity"):
        core.parse_config(raw)
    raw["nanoparticle"]["radius_m"] = 0.0
    assert core.parse_config(raw).nanoparticle.radius == 0.0


def test_gravity_override():
    raw = raw_default()
    raw["options"]["g_grav_ms2"] = 3.71
    c = core.parse_config(raw)
    assert c.constants.g_grav == 3.71
    assert c.constants.hbar == 1.054571817e-34


def test_round_trip_is_bit_identical(tmp_path, cfg):
    out = tmp_path / "echo.cfg"
    core.save_config(cfg, out)
    again = core.load_config(out)
    assert again.raw == cfg.raw
    out2 = tmp_path / "echo2.cfg"
    core.save_config(again, out2)
    assert out.read_text() == out2.read_text()


def test_missing_file_error():
    with pytest.raises(ConfigError, match="not found"):
        core.load_config("/nowhere/else.cfg")


def test_invalid_json(tmp_path):
    p = tmp_path / "broken.cfg"
    p.write_text("{ not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        core.load_config(p)


def test_root_must_be_object(tmp_path):
    p = tmp_path / "list.cfg"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="object"):
        core.load_config(p)


def test_self_check_warns_on_unstable_radial(caplog):
    raw = raw_default()
    raw["drive"]["v_offset_v"] = 2000.0
    with caplog.at_level(logging.WARNING):
        core.parse_config(raw)
    assert "self-check" in caplog.text


@given(st.floats(min_value=1.0, max_value=1e4),
       st.floats(min_value=1e-17, max_value=1e-13))
def test_numbers_survive_parsing(v_end, mass):
    raw = raw_default()
    raw["drive"]["v_end_v"] = v_end
    raw["nanoparticle"]["mass_kg"] = mass
    c = core.parse_config(raw)
    assert c.drive.v_end == v_end
    assert c.nanoparticle.mass == mass
