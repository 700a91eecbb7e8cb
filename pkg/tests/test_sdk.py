import logging
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from cotrap import sdk
from cotrap.core import HBAR, H_PLANCK, MU_BOHR

SCHEME = sdk.IonLevelScheme()
TWO_PI = 2.0 * math.pi


def make_laser(rabi_hz=5e7, big_hz=1e10, x_hz=1e4, trap_hz=1e6,
               g_scale=1.0, **overrides):
    g = g_scale * HBAR * TWO_PI * rabi_hz
    fields = dict(
        k_alpha=TWO_PI / SCHEME.lambda_down_e,
        k_beta=-TWO_PI / SCHEME.lambda_up_e,
        g_down_alpha=g, g_up_alpha=g, g_down_beta=g, g_up_beta=g,
        detuning_big=TWO_PI * big_hz,
        detuning_small=TWO_PI * (trap_hz - x_hz),
        trap_omega=TWO_PI * trap_hz,
    )
    fields.update(overrides)
    return sdk.LaserConfig(**fields)


def test_zeeman_shift_values_and_ratio():
    b = 0.012
    down = sdk.zeeman_shift("down", SCHEME, b)
    up = sdk.zeeman_shift("up", SCHEME, b)
    assert down == pytest.approx(MU_BOHR * 1.0 * b / H_PLANCK, rel=1e-12)
    assert up / down == pytest.approx(1.8, rel=1e-12)
    assert sdk.zeeman_shift("u", SCHEME, b) == up
    assert sdk.zeeman_shift("D", SCHEME, b) == down
    assert sdk.qubit_splitting(SCHEME, b) == pytest.approx(up - down, rel=1e-12)
    with pytest.raises(ValueError, match="b_field"):
        sdk.zeeman_shift("down", SCHEME, -1e-3)
    with pytest.raises(ValueError, match="unknown level"):
        sdk.zeeman_shift("sideways", SCHEME, b)


@given(st.floats(min_value=1e-6, max_value=1.0))
def test_zeeman_shift_is_linear_in_field(b):
    one = sdk.zeeman_shift("up", SCHEME, b)
    assert sdk.zeeman_shift("up", SCHEME, 2.0 * b) == 2.0 * one
    assert one > 0.0


def test_lamb_dicke_geometry_and_scaling():
    m = 6.6421562664e-26
    w = TWO_PI * 1e6
    eta = sdk.lamb_dicke(SCHEME, m, w)
    k_down = TWO_PI / SCHEME.lambda_down_e
    k_up = TWO_PI / SCHEME.lambda_up_e
    assert eta ** 2 * (2.0 * m * w / HBAR) == pytest.approx(
        (k_down + k_up) ** 2, rel=1e-12)
    co = sdk.lamb_dicke(SCHEME, m, w, counter_propagating=False)
    assert co / eta == pytest.approx((k_down - k_up) / (k_down + k_up), rel=1e-12)
    assert sdk.lamb_dicke(SCHEME, m, 4.0 * w) == pytest.approx(0.5 * eta, rel=1e-12)
    with pytest.raises(ValueError, match="trap_omega"):
        sdk.lamb_dicke(SCHEME, m, 0.0)


def test_prefactor_formula_and_conjugation():
    laser = make_laser(g_down_alpha=HBAR * TWO_PI * 5e7 * np.exp(0.3j),
                       g_up_beta=HBAR * TWO_PI * 5e7 * np.exp(0.8j))
    pref = sdk.sdk_prefactor(laser, 0.26)
    expect = (0.26 * np.conj(laser.g_down_alpha) * laser.g_up_beta
              / (HBAR ** 2 * laser.detuning_big))
    assert pref == expect
    assert np.angle(pref) == pytest.approx(0.8 - 0.3, rel=1e-12)


def test_alpha_trivial_zeros():
    dead = make_laser(g_down_alpha=0.0)
    t = np.linspace(0.0, 1e-3, 20)
    assert np.all(sdk.sdk_alpha(dead, 0.26, t) == 0.0)
    live = make_laser()
    assert sdk.sdk_alpha(live, 0.26, 0.0) == 0.0


def test_alpha_off_resonance_circle_modulus():
    laser = make_laser()
    eta = 0.26
    pref = sdk.sdk_prefactor(laser, eta)
    x = laser.trap_omega - laser.detuning_small
    rng = np.random.default_rng(8932)
    t = rng.uniform(1e-3, 1.0, size=400)  # far from the series window
    alpha = sdk.sdk_alpha(laser, eta, t)
    expect = 2.0 * abs(pref / x) * np.abs(np.sin(0.5 * x * t))
    assert np.max(np.abs(np.abs(alpha) - expect)) < 1e-12 * abs(2.0 * pref / x)
    assert np.max(np.abs(alpha)) <= 2.0 * abs(pref / x) * (1.0 + 1e-12)


def test_alpha_on_resonance_linear_growth():
    laser = make_laser(x_hz=0.0)
    assert laser.trap_omega == laser.detuning_small
    pref = sdk.sdk_prefactor(laser, 0.26)
    for t in (1e-8, 1e-6, 1e-4):
        assert abs(sdk.sdk_alpha(laser, 0.26, t)) == pytest.approx(
            abs(pref) * t, rel=1e-15)


def test_alpha_series_meets_closed_form_at_the_seam():
    laser = make_laser()
    eta = 0.26
    x = laser.trap_omega - laser.detuning_small
    pref = sdk.sdk_prefactor(laser, eta)
    t_seam = sdk.RESONANCE_PHASE_TOL / x

    def high_precision(t):
        # 50-digit (1 - e^{ixt}) / (ix); the float closed form loses
        # ~1e-10 of relative accuracy here to cancellation
        xs = sympy.Float(repr(x), 50)
        ts = sympy.Float(repr(t), 50)
        w = (1 - sympy.exp(sympy.I * xs * ts)) / (sympy.I * xs)
        return pref * complex(w.evalf(50))

    below = t_seam * (1.0 - 1e-9)
    above = t_seam * (1.0 + 1e-9)
    got_b = sdk.sdk_alpha(laser, eta, below)
    got_a = sdk.sdk_alpha(laser, eta, above)
    # series branch tracks the true value essentially to machine precision
    assert abs(got_b - high_precision(below)) < 1e-13 * abs(got_b)
    # closed-form branch is within its cancellation noise floor
    assert abs(got_a - high_precision(above)) < 1e-8 * abs(got_a)
    # no visible jump at the switchover
    assert abs(got_a - got_b) < 1e-8 * abs(got_b)


def test_alpha_scalar_array_round_trip():
    laser = make_laser()
    one = sdk.sdk_alpha(laser, 0.26, 3e-4)
    assert isinstance(one, complex)
    arr = sdk.sdk_alpha(laser, 0.26, np.array([3e-4, 5e-4]))
    assert isinstance(arr, np.ndarray) and arr.shape == (2,)
    assert arr[0] == one
    zero_d = sdk.sdk_alpha(laser, 0.26, np.float64(3e-4))
    assert isinstance(zero_d, complex) and zero_d == one


def test_alpha_phase_tracks_geometry():
    base = make_laser()
    moved = make_laser(ion_position=5e-9)
    shifted = make_laser(phi_beta=0.4)
    t = 2e-4
    a0 = sdk.sdk_alpha(base, 0.26, t)
    am = sdk.sdk_alpha(moved, 0.26, t)
    ash = sdk.sdk_alpha(shifted, 0.26, t)
    assert abs(am) == pytest.approx(abs(a0), rel=1e-12)
    dk = base.k_beta - base.k_alpha
    assert np.angle(am / a0) == pytest.approx(
        math.remainder(dk * 5e-9, TWO_PI), rel=1e-9)
    assert np.angle(ash / a0) == pytest.approx(-0.4, rel=1e-9)


def test_phase_circle_closure_and_enclosed_area():
    laser = make_laser()
    eta = 0.26
    pref = sdk.sdk_prefactor(laser, eta)
    x = laser.trap_omega - laser.detuning_small
    period = TWO_PI / x
    r = abs(pref / x)
    t = np.linspace(0.0, period, 4096)
    alpha = sdk.sdk_alpha(laser, eta, t)
    assert abs(alpha[-1]) < 1e-8 * r
    phi = sdk.sdk_phase(laser, eta, t)
    assert phi[0] == 0.0
    # counterclockwise loop for x > 0, enclosing pi r^2 twice over
    assert phi[-1] == pytest.approx(TWO_PI * r * r, rel=1e-3)

    # the trapezoid increments are exactly twice the shoelace area terms
    xs, ys = alpha.real, alpha.imag
    shoelace = 0.5 * np.sum(xs[:-1] * ys[1:] - xs[1:] * ys[:-1])
    assert phi[-1] == pytest.approx(2.0 * shoelace, rel=1e-12)


def test_phase_converges_second_order():
    laser = make_laser()
    eta = 0.26
    pref = sdk.sdk_prefactor(laser, eta)
    x = laser.trap_omega - laser.detuning_small
    exact = np.sign(x) * TWO_PI * abs(pref / x) ** 2

    def err(n):
        t = np.linspace(0.0, TWO_PI / x, n)
        return abs(sdk.sdk_phase(laser, eta, t)[-1] - exact)

    assert err(256) / err(512) == pytest.approx(4.0, rel=0.05)


def test_phase_path_rotation_invariance():
    rng = np.random.default_rng(417)
    path = rng.normal(size=32) + 1j * rng.normal(size=32)
    base = sdk.phase_from_alpha_path(path)
    spun = sdk.phase_from_alpha_path(path * np.exp(0.7j))
    assert np.max(np.abs(spun - base)) < 1e-12 * np.max(np.abs(base))
    with pytest.raises(ValueError, match="at least 2"):
        sdk.phase_from_alpha_path([1.0 + 0j])
    with pytest.raises(ValueError, match="at least 2"):
        sdk.phase_from_alpha_path(np.ones((4, 4), dtype=complex))


def test_phase_grid_validation():
    laser = make_laser()
    with pytest.raises(ValueError, match="16"):
        sdk.sdk_phase(laser, 0.26, np.linspace(0.0, 1e-4, 8))
    bad = np.linspace(0.0, 1e-4, 32)
    bad[5] *= 1.01
    with pytest.raises(ValueError, match="uniform"):
        sdk.sdk_phase(laser, 0.26, bad)
    t = np.linspace(0.0, 1e-4, 32)
    assert sdk.sdk_phase(laser, 0.26, t).shape == t.shape


def test_kick_from_alpha():
    z0 = 1.1e-8
    k = sdk.kick_from_alpha(3.0 + 4.0j, z0)
    assert k.beta == 3.0 + 4.0j
    assert k.delta_z_ion == 2.0 * z0 * 3.0
    assert sdk.kick_from_alpha(2.0j, z0).delta_z_ion == 0.0
    assert sdk.kick_from_alpha(0.0, z0).delta_z_ion == 0.0
    with pytest.raises(ValueError, match="sanity"):
        sdk.kick_from_alpha(25.0, z0)


def test_benchmark_displacement_reaches_target():
    laser = make_laser(rabi_hz=5e7, big_hz=1e10, x_hz=1e4)
    eta = 0.26
    pref = sdk.sdk_prefactor(laser, eta)
    x = laser.trap_omega - laser.detuning_small
    peak = 2.0 * abs(pref / x)
    assert peak >= 9.75
    assert peak < sdk.BETA_SANITY_MAX
    sdk.kick_from_alpha(peak, 1.1e-8)  # packable without tripping the cap


def test_ac_stark_formula():
    laser = make_laser(g_up_alpha=HBAR * TWO_PI * 3e7)
    up = sdk.ac_stark(laser, "up")
    expect = -(abs(laser.g_up_alpha) ** 2 + abs(laser.g_up_beta) ** 2) / (
        HBAR * laser.detuning_big)
    assert up == pytest.approx(expect, rel=1e-12)
    assert sdk.ac_stark(laser, "down") != up
    with pytest.raises(ValueError, match="unknown level"):
        sdk.ac_stark(laser, 7)


def test_adiabatic_elimination_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="cotrap"):
        make_laser(rabi_hz=5e7, big_hz=1e8)
    assert any("adiabatic elimination marginal" in r.message for r in caplog.records)
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="cotrap"):
        make_laser(rabi_hz=5e7, big_hz=1e10)
    assert not caplog.records
