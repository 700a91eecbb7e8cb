"""Physical constants, particle and trap configuration, config file handling.

All internal frequencies are angular [rad/s]. Config files give each drive
tone either as an ordinary frequency (``f_*_hz``, multiplied by 2*pi on load)
or directly in angular units (``f_*_rads``); exactly one key per tone.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

logger = logging.getLogger("cotrap")

# CODATA 2018 values, SI units.
HBAR = 1.054571817e-34          # J s
E_CHARGE = 1.602176634e-19      # C (exact)
K_COULOMB = 8.9875517873681764e9  # N m^2 / C^2, 1/(4 pi eps0)
G_STANDARD = 9.80665            # m / s^2
MU_BOHR = 9.2740100783e-24      # J / T
C_LIGHT = 299792458.0           # m / s (exact)
MU_0 = 1.25663706212e-6         # T m / A
ATOMIC_MASS = 1.66053906660e-27  # kg
H_PLANCK = 2.0 * math.pi * HBAR  # J s


class ConfigError(ValueError):
    """Bad or missing configuration input. CLI maps this to exit code 2."""


class NumericalError(RuntimeError):
    """Numerical or physical failure during a computation. CLI exit code 3."""


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR                      # J s
    e_charge: float = E_CHARGE              # C
    epsilon0_4pi_inv: float = K_COULOMB     # N m^2 / C^2
    g_grav: float = G_STANDARD              # m / s^2, only user-adjustable entry
    mu_bohr: float = MU_BOHR                # J / T
    c_light: float = C_LIGHT                # m / s
    mu0: float = MU_0                       # T m / A

    @property
    def h_planck(self):
        return 2.0 * math.pi * self.hbar


@dataclass(frozen=True)
class ParticleSpec:
    mass: float                    # kg
    charge_e: float                # signed multiple of e
    radius: float = 0.0            # m, 0 for a point ion
    rel_permittivity: float = 1.0  # dimensionless
    label: str = "particle"

    @property
    def charge(self):
        """Charge in coulombs."""
        return self.charge_e * E_CHARGE


@dataclass(frozen=True)
class TrapGeometry:
    r0: float        # m, radial half-distance
    z0_ax: float     # m, axial half-distance
    kappa_rf: float  # dimensionless RF-electrode scale
    kappa_end: float  # dimensionless end-cap scale


@dataclass(frozen=True)
class DriveConfig:
    omega_slow: float  # rad/s
    omega_fast: float  # rad/s
    v_slow: float      # V
    v_fast: float      # V
    v_offset: float    # V, signed
    v_end: float       # V
    frequency_convention: str = "ordinary"  # how the file numbers were read


@dataclass(frozen=True)
class SimConfig:
    constants: PhysicalConstants
    geometry: TrapGeometry
    drive: DriveConfig
    ion: ParticleSpec
    nanoparticle: ParticleSpec
    gravity_on: bool = True
    coulomb_on: bool = True
    np_above: bool = True
    mu_ion_bohr: float = 1.0
    mu_np_bohr: float = 1.0e4
    ion_polarizability: float = 1.1158e-29  # m^3, Ca+ static value
    raw: dict = field(default_factory=dict, repr=False, compare=False)
    source_path: str = ""


def charge_to_mass(p):
    """Charge-to-mass ratio in C/kg."""
    return p.charge / p.mass


_GEOMETRY_KEYS = ("r0_m", "z0_m", "kappa_rf", "kappa_end")
_DRIVE_PLAIN_KEYS = ("v_slow_v", "v_fast_v", "v_offset_v", "v_end_v")
_PARTICLE_KEYS = ("mass_kg", "charge_e", "radius_m", "rel_permittivity", "label")
_OPTION_KEYS = ("gravity", "coulomb", "g_grav_ms2", "mu_ion_bohr",
                "mu_np_bohr", "ion_polarizability_m3", "np_above")


def _require(section, name, keys):
    for k in keys:
        if k not in section:
            raise ConfigError("missing required field '%s.%s'" % (name, k))


def _number(section, name, key):
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("unparseable number for '%s.%s'" % (name, key))
    return float(v)


def _check_unknown(section, name, allowed):
    for k in section:
        if k not in allowed:
            raise ConfigError("unknown key '%s.%s' in config" % (name, k))


def _positive(value, name):
    if not value > 0.0:
        raise ConfigError("non-positive value for '%s'" % name)
    return value


def _parse_particle(section, name):
    _check_unknown(section, name, _PARTICLE_KEYS)
    _require(section, name, _PARTICLE_KEYS)
    mass = _positive(_number(section, name, "mass_kg"), name + ".mass_kg")
    radius = _number(section, name, "radius_m")
    if radius < 0.0:
        raise ConfigError("negative value for '%s.radius_m'" % name)
    eps = _number(section, name, "rel_permittivity")
    if radius > 0.0 and eps < 1.0:
        raise ConfigError("'%s.rel_permittivity' must be >= 1 for a finite radius" % name)
    label = section["label"]
    if not isinstance(label, str):
        raise ConfigError("'%s.label' must be a string" % name)
    return ParticleSpec(mass=mass, charge_e=_number(section, name, "charge_e"),
                        radius=radius, rel_permittivity=eps, label=label)


def _parse_tone(drive, tone):
    """Return (omega_rads, convention) for one tone, enforcing exactly one key."""
    hz_key = "f_%s_hz" % tone
    rad_key = "f_%s_rads" % tone
    has_hz = hz_key in drive
    has_rad = rad_key in drive
    if has_hz == has_rad:
        raise ConfigError(
            "drive must carry exactly one of 'drive.%s' or 'drive.%s'" % (hz_key, rad_key))
    if has_hz:
        return 2.0 * math.pi * _number(drive, "drive", hz_key), "ordinary"
    return _number(drive, "drive", rad_key), "angular"


def _bundled_config_path(name):
    cand = resources.files(__package__) / "configs" / name
    return cand if cand.is_file() else None


def load_config(path):
    """Load and validate a simulation config from a JSON file.

    If ``path`` does not exist but its basename matches a bundled config,
    the bundled copy is used.
    """
    p = Path(path)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
        source = str(p)
    else:
        cand = _bundled_config_path(p.name)
        if cand is None:
            raise ConfigError("config file not found: %s" % path)
        text = cand.read_text(encoding="utf-8")
        source = str(cand)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config file %s is not valid JSON: %s" % (source, exc)) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    cfg = parse_config(raw)
    return replace(cfg, source_path=source)


def parse_config(raw):
    """Build a SimConfig from an already-parsed config dict."""
    _check_unknown(raw, "config", ("geometry", "drive", "ion", "nanoparticle", "options"))
    for sec in ("geometry", "drive", "ion", "nanoparticle"):
        if sec not in raw:
            raise ConfigError("missing required section '%s'" % sec)
        if not isinstance(raw[sec], dict):
            raise ConfigError("section '%s' must be an object" % sec)

    geo = raw["geometry"]
    _check_unknown(geo, "geometry", _GEOMETRY_KEYS)
    _require(geo, "geometry", _GEOMETRY_KEYS)
    geometry = TrapGeometry(
        r0=_positive(_number(geo, "geometry", "r0_m"), "geometry.r0_m"),
        z0_ax=_positive(_number(geo, "geometry", "z0_m"), "geometry.z0_m"),
        kappa_rf=_number(geo, "geometry", "kappa_rf"),
        kappa_end=_number(geo, "geometry", "kappa_end"))
    for name, kappa in (("kappa_rf", geometry.kappa_rf), ("kappa_end", geometry.kappa_end)):
        if not 0.0 < kappa <= 1.0:
            raise ConfigError("'geometry.%s' must be in (0, 1]" % name)

    drv = raw["drive"]
    tone_keys = ("f_slow_hz", "f_slow_rads", "f_fast_hz", "f_fast_rads")
    _check_unknown(drv, "drive", _DRIVE_PLAIN_KEYS + tone_keys)
    _require(drv, "drive", _DRIVE_PLAIN_KEYS)
    omega_slow, conv_slow = _parse_tone(drv, "slow")
    omega_fast, conv_fast = _parse_tone(drv, "fast")
    if conv_slow != conv_fast:
        raise ConfigError(
            "mixed frequency conventions: 'drive.f_slow_%s' vs 'drive.f_fast_%s'"
            % ("hz" if conv_slow == "ordinary" else "rads",
               "hz" if conv_fast == "ordinary" else "rads"))
    if not omega_slow > 0.0:
        raise ConfigError("non-positive value for 'drive.f_slow'")
    if not omega_fast > omega_slow:
        raise ConfigError("'drive.f_fast' must exceed 'drive.f_slow'")
    for key in ("v_slow_v", "v_fast_v", "v_end_v"):
        if _number(drv, "drive", key) < 0.0:
            raise ConfigError("negative value for 'drive.%s'" % key)
    drive = DriveConfig(
        omega_slow=omega_slow, omega_fast=omega_fast,
        v_slow=_number(drv, "drive", "v_slow_v"),
        v_fast=_number(drv, "drive", "v_fast_v"),
        v_offset=_number(drv, "drive", "v_offset_v"),
        v_end=_number(drv, "drive", "v_end_v"),
        frequency_convention=conv_slow)

    ion = _parse_particle(raw["ion"], "ion")
    nanoparticle = _parse_particle(raw["nanoparticle"], "nanoparticle")
    if not ion.mass < nanoparticle.mass:
        raise ConfigError("'ion.mass_kg' must be smaller than 'nanoparticle.mass_kg'")

    opts = raw.get("options", {})
    if not isinstance(opts, dict):
        raise ConfigError("section 'options' must be an object")
    _check_unknown(opts, "options", _OPTION_KEYS)
    for key in ("gravity", "coulomb", "np_above"):
        if key in opts and not isinstance(opts[key], bool):
            raise ConfigError("'options.%s' must be a boolean" % key)
    constants = PhysicalConstants()
    if "g_grav_ms2" in opts:
        constants = PhysicalConstants(g_grav=_number(opts, "options", "g_grav_ms2"))

    cfg = SimConfig(
        constants=constants,
        geometry=geometry,
        drive=drive,
        ion=ion,
        nanoparticle=nanoparticle,
        gravity_on=opts.get("gravity", True),
        coulomb_on=opts.get("coulomb", True),
        np_above=opts.get("np_above", True),
        mu_ion_bohr=_number(opts, "options", "mu_ion_bohr") if "mu_ion_bohr" in opts else 1.0,
        mu_np_bohr=_number(opts, "options", "mu_np_bohr") if "mu_np_bohr" in opts else 1.0e4,
        ion_polarizability=(_number(opts, "options", "ion_polarizability_m3")
                            if "ion_polarizability_m3" in opts else 1.1158e-29),
        raw=raw)
    _stability_self_check(cfg)
    return cfg


def save_config(config, path):
    """Write the config back out; raw input numbers round-trip bit-identically."""
    Path(path).write_text(json.dumps(config.raw, indent=2) + "\n", encoding="utf-8")


def _stability_self_check(config):
    # Warn-only: a config that parses is returned even if the trap it
    # describes is pseudopotential-unstable.
    try:
        from . import stability
        for particle in ("nanoparticle", "ion"):
            t = stability.stability_params(config, particle, "x")
            tone = t.q if t.reference_tone == "slow" else t.p
            char = t.a + 0.5 * tone * tone
            if not 0.0 <= char <= 1.0:
                logger.warning(
                    "config self-check: %s radial pseudopotential parameter "
                    "a + q^2/2 = %.4g lies outside [0, 1]",
                    getattr(config, particle).label, char)
    except Exception:
        logger.debug("config stability self-check skipped", exc_info=True)
