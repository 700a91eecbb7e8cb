"""Quadratic Hamiltonian of the axial pair modes and the spin-conditional
nanoparticle displacement it predicts.

Per mode the Hamiltonian is organized as

    lin (a + a^dag) + pot (a + a^dag)^2 - kin (a^dag - a)^2 + c12 (a+a^dag)(b+b^dag)

with all coefficients in joules. Mode energies carry energy units throughout;
time evolution uses the phase omega_tilde * t / hbar. Two bookkeeping bases
are used downstream: the vacuum shift works with (lin, pot) directly, while
the squeeze transformation maps to a1 = pot - kin, a2 = pot + kin.

The kinetic weights are exactly hbar*omega/4, so with the 1/d^3 corrections
dropped (the default) pot = kin for each mode and the mode energies reduce to
hbar*omega_z of each particle. With the corrections kept, the b-mode energy
follows the same general formula and lands at the stiffened hbar*omega_z,ion,
not at the nanoparticle value.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import HBAR, NumericalError
from .equilibrium import EquilibriumSolution, axial_spring, coulomb_prefactor
from .sdk import KickSpec
from .stability import axial_frequency


@dataclass(frozen=True)
class ZeroPointData:
    z0_ion: float     # m
    z0_np: float      # m
    omega_ion: float  # rad/s, axial
    omega_np: float   # rad/s, axial


@dataclass(frozen=True)
class NormalFormCoefficients:
    lin_a: float   # J, coefficient of (a + a^dag)
    lin_b: float   # J
    pot_a: float   # J, coefficient of (a + a^dag)^2
    pot_b: float   # J
    kin_a: float   # J, weight of -(a^dag - a)^2, exactly hbar omega_np / 4
    kin_b: float   # J, exactly hbar omega_ion / 4
    c12: float     # J, bilinear (a + a^dag)(b + b^dag) weight
    include_higher_order: bool
    d_eq_branch: float  # m, separation the Coulomb terms were evaluated at


@dataclass(frozen=True)
class ModeShift:
    c_a: float
    c_b: float
    coupled: bool  # True when the co-dependent formulas were used


@dataclass(frozen=True)
class BogoliubovModes:
    r_a: float
    r_b: float
    omega_tilde_a: float  # J
    omega_tilde_b: float  # J
    c12_tilde: float      # J


@dataclass(frozen=True)
class BranchPair:
    d_plus: float   # m
    d_minus: float  # m
    kick: KickSpec


@dataclass(frozen=True)
class DisplacementTrace:
    times: np.ndarray
    delta_z: np.ndarray
    delta_z_max: float  # m
    t_max: float        # s


def zero_point_width(mass, omega):
    """Ground-state width sqrt(hbar / (2 m omega)) [m]."""
    if mass <= 0.0 or omega <= 0.0:
        raise ValueError("mass and omega must be positive")
    return math.sqrt(HBAR / (2.0 * mass * omega))


def zero_point_data(config):
    w_i = axial_frequency(config, "ion")
    w_np = axial_frequency(config, "np")
    return ZeroPointData(
        z0_ion=zero_point_width(config.ion.mass, w_i),
        z0_np=zero_point_width(config.nanoparticle.mass, w_np),
        omega_ion=w_i, omega_np=w_np)


def _as_equilibrium(config, eq):
    """Accept a solved equilibrium or a bare separation [m].

    A bare separation builds a virtual equilibrium: positions where each
    spring balances the Coulomb push evaluated at that separation, so the
    stated distance can stand in for the solver's own root.
    """
    if isinstance(eq, EquilibriumSolution):
        return eq
    d0 = float(eq)
    if d0 <= 0.0:
        raise ValueError("separation must be positive")
    sigma = 1.0 if config.np_above else -1.0
    cc = coulomb_prefactor(config)
    gam = config.constants.g_grav if config.gravity_on else 0.0
    z_i = (-sigma * cc / (d0 * d0) - config.ion.mass * gam) / axial_spring(config, "ion")
    z_np = (sigma * cc / (d0 * d0) - config.nanoparticle.mass * gam) / axial_spring(config, "np")
    return EquilibriumSolution(z_ion=z_i, z_np=z_np, d_eq=d0,
                               residual_force_ion=0.0, residual_force_np=0.0,
                               iterations=0)


def hamiltonian_coeffs(config, eq, d_branch=None, include_higher_order=False):
    """Coefficients of the quadratic pair Hamiltonian at one branch separation.

    eq fixes the expansion point (positions); d_branch is the separation the
    Coulomb terms see, defaulting to the equilibrium one. With
    include_higher_order False the three O(z0^2/d^3) terms (both quadratic
    Coulomb corrections and the bilinear coupling) are dropped.
    """
    eq = _as_equilibrium(config, eq)
    if d_branch is None:
        d_branch = eq.d_eq
    if d_branch <= 0.0:
        raise ValueError("d_branch must be positive")
    zpd = zero_point_data(config)
    sigma = 1.0 if config.np_above else -1.0
    cc = coulomb_prefactor(config)
    gam = config.constants.g_grav if config.gravity_on else 0.0
    k_i = axial_spring(config, "ion")
    k_np = axial_spring(config, "np")
    d2 = d_branch * d_branch
    lin_a = zpd.z0_np * (k_np * eq.z_np + config.nanoparticle.mass * gam
                         - sigma * cc / d2)
    lin_b = zpd.z0_ion * (k_i * eq.z_ion + config.ion.mass * gam
                          + sigma * cc / d2)
    quad_cc = cc / (d2 * d_branch) if include_higher_order else 0.0
    pot_a = zpd.z0_np ** 2 * (0.5 * k_np + quad_cc)
    pot_b = zpd.z0_ion ** 2 * (0.5 * k_i + quad_cc)
    c12 = -2.0 * quad_cc * zpd.z0_ion * zpd.z0_np
    return NormalFormCoefficients(
        lin_a=lin_a, lin_b=lin_b, pot_a=pot_a, pot_b=pot_b,
        kin_a=HBAR * zpd.omega_np / 4.0, kin_b=HBAR * zpd.omega_ion / 4.0,
        c12=c12, include_higher_order=include_higher_order,
        d_eq_branch=d_branch)


def vacuum_shift(coeffs):
    """Real mode displacements that cancel the linear terms.

    With the bilinear weight present the two shifts are co-dependent; with it
    zero they decouple to -lin/(4 pot) per mode.
    """
    a1, a2 = coeffs.lin_a, coeffs.pot_a
    b1, b2 = coeffs.lin_b, coeffs.pot_b
    c12 = coeffs.c12
    if c12 == 0.0:
        if a2 == 0.0 or b2 == 0.0:
            raise NumericalError("degenerate quadratic form")
        return ModeShift(c_a=-a1 / (4.0 * a2), c_b=-b1 / (4.0 * b2),
                         coupled=False)
    den = 16.0 * a2 * b2 - 4.0 * c12 * c12
    if den == 0.0 or not math.isfinite(den):
        raise NumericalError("degenerate quadratic form")
    return ModeShift(c_a=(2.0 * b1 * c12 - 4.0 * a1 * b2) / den,
                     c_b=(2.0 * a1 * c12 - 4.0 * a2 * b1) / den,
                     coupled=True)


def _mode_squeeze(pot, kin):
    a1 = pot - kin
    a2 = pot + kin
    if not abs(a1) < abs(a2):
        raise NumericalError("unstable quadratic form")
    r = 0.5 * math.atanh(a1 / a2)
    omega_tilde = 2.0 * math.sqrt(a2 * a2 - a1 * a1)
    return r, omega_tilde


def bogoliubov(coeffs):
    """Squeeze each mode until its quadratures balance; energies 2 sqrt(a2^2 - a1^2)."""
    r_a, wt_a = _mode_squeeze(coeffs.pot_a, coeffs.kin_a)
    r_b, wt_b = _mode_squeeze(coeffs.pot_b, coeffs.kin_b)
    ra = (coeffs.pot_a - coeffs.kin_a) / (coeffs.pot_a + coeffs.kin_a)
    rb = (coeffs.pot_b - coeffs.kin_b) / (coeffs.pot_b + coeffs.kin_b)
    c12_tilde = (coeffs.c12 * math.sqrt(1.0 - ra * ra) * math.sqrt(1.0 - rb * rb)
                 * (1.0 - ra) * (1.0 - rb))
    return BogoliubovModes(r_a=r_a, r_b=r_b, omega_tilde_a=wt_a,
                           omega_tilde_b=wt_b, c12_tilde=c12_tilde)


def branch_distances(eq, kick, zpd):
    """The two spin-branch separations d0 +- 2 z0_ion Re(beta)."""
    d0 = getattr(eq, "d_eq", None)
    if d0 is None:
        d0 = float(eq)
    shift = 2.0 * zpd.z0_ion * complex(kick.beta).real
    d_plus = d0 + shift
    d_minus = d0 - shift
    if d_plus <= 0.0 or d_minus <= 0.0:
        raise NumericalError("branch separation not positive")
    return BranchPair(d_plus=d_plus, d_minus=d_minus, kick=kick)


def superposition_size(config, eq, kick, times=None):
    """Conditional nanoparticle displacement trace between the spin branches.

    eq may be a solved EquilibriumSolution or a separation [m] to use
    directly. Uses the decoupled shifts per branch:

        delta_z(t) = 2 z0_np |c_a(-) - c_a(+)| (1 - cos(omega_tilde_a t / hbar))

    delta_z_max and t_max are the closed-form values 4 z0_np |dc| and
    pi hbar / omega_tilde_a; the sampled trace approaches delta_z_max to
    grid resolution.
    """
    eq = _as_equilibrium(config, eq)
    zpd = zero_point_data(config)
    branch = branch_distances(eq, kick, zpd)
    modes = bogoliubov(hamiltonian_coeffs(config, eq, d_branch=eq.d_eq))
    c_plus = vacuum_shift(hamiltonian_coeffs(config, eq, d_branch=branch.d_plus)).c_a
    c_minus = vacuum_shift(hamiltonian_coeffs(config, eq, d_branch=branch.d_minus)).c_a
    dc = abs(c_minus - c_plus)
    omega_t = modes.omega_tilde_a / HBAR  # rad/s
    if times is None:
        times = np.linspace(0.0, 2.0 * math.pi / omega_t, 2048)
    else:
        times = np.asarray(times, dtype=float)
    delta_z = 2.0 * zpd.z0_np * dc * (1.0 - np.cos(omega_t * times))
    return DisplacementTrace(times=times, delta_z=delta_z,
                             delta_z_max=4.0 * zpd.z0_np * dc,
                             t_max=math.pi / omega_t)


def classical_branch_oracle(config, d_override, kick, times=None,
                            exact_coulomb=False):
    """Independent check of the displacement trace by classical centroids.

    Per spin branch the nanoparticle centroid obeys m u'' = -k u + F with the
    ion pinned at its branch displacement, so F is the branch's constant
    Coulomb-force offset C/d_s^2 - C/d0^2 (u measured from the unkicked
    equilibrium, along the separation axis). The trace is the difference of
    the two branch trajectories, integrated by RK4 on the sample grid.

    exact_coulomb=True swaps in F(u) = C/(d_s + u)^2 - C/d0^2, exposing how
    fast the linearized picture degrades with kick size.
    """
    d0 = getattr(d_override, "d_eq", None)
    if d0 is None:
        d0 = float(d_override)
    if d0 <= 0.0:
        raise ValueError("separation must be positive")
    zpd = zero_point_data(config)
    shift = 2.0 * zpd.z0_ion * complex(kick.beta).real
    d_branches = (d0 + shift, d0 - shift)
    if min(d_branches) <= 0.0:
        raise NumericalError("branch separation not positive")
    cc = coulomb_prefactor(config)
    k_np = axial_spring(config, "np")
    m = config.nanoparticle.mass
    omega = math.sqrt(k_np / m)
    if times is None:
        times = np.linspace(0.0, 2.0 * math.pi / omega, 2048)
    else:
        times = np.asarray(times, dtype=float)

    def branch_traj(d_s):
        if exact_coulomb:
            def force(u):
                r = d_s + u
                if r <= 0.0:
                    raise NumericalError("zero separation")
                return -k_np * u + cc / (r * r) - cc / (d0 * d0)
        else:
            f_const = cc / (d_s * d_s) - cc / (d0 * d0)

            def force(u):
                return -k_np * u + f_const

        u, v = 0.0, 0.0
        out = np.empty(times.shape)
        out[0] = u
        for i in range(1, times.size):
            h = times[i] - times[i - 1]
            k1u, k1v = v, force(u) / m
            k2u = v + 0.5 * h * k1v
            k2v = force(u + 0.5 * h * k1u) / m
            k3u = v + 0.5 * h * k2v
            k3v = force(u + 0.5 * h * k2u) / m
            k4u = v + h * k3v
            k4v = force(u + h * k3u) / m
            u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            out[i] = u
        return out

    delta_z = branch_traj(d_branches[1]) - branch_traj(d_branches[0])
    idx = int(np.argmax(delta_z))
    return DisplacementTrace(times=times, delta_z=delta_z,
                             delta_z_max=float(delta_z[idx]),
                             t_max=float(times[idx]))


def higher_order_frequencies(config, branch):
    """Branch-dependent mode energies with the 1/d^3 stiffening kept.

    Returns ((wt_a_plus, wt_a_minus), (wt_b_plus, wt_b_minus)) in joules.
    """
    out_a = []
    out_b = []
    for d_s in (branch.d_plus, branch.d_minus):
        coeffs = hamiltonian_coeffs(config, d_s, d_branch=d_s,
                                    include_higher_order=True)
        modes = bogoliubov(coeffs)
        out_a.append(modes.omega_tilde_a)
        out_b.append(modes.omega_tilde_b)
    return tuple(out_a), tuple(out_b)


SWEEP_CSV_HEADER = "scenario,kick_m,delta_z_max_m,z0_np_m,omega_tilde_a_J,d_eq_m"


def superposition_sweep(config, kick_range, scenarios):
    """Max displacement vs ion kick for each scenario, as CSV rows.

    scenarios: iterable of (label, v_end [V], np_charge [e], d_override [m]).
    Returns a list of strings, header first.
    """
    rows = [SWEEP_CSV_HEADER]
    t0 = np.array([0.0])
    for label, v_end, q_np_e, d_override in scenarios:
        cfg = replace(config,
                      drive=replace(config.drive, v_end=float(v_end)),
                      nanoparticle=replace(config.nanoparticle,
                                           charge_e=float(q_np_e)))
        zpd = zero_point_data(cfg)
        for kick_m in kick_range:
            beta = float(kick_m) / (2.0 * zpd.z0_ion)
            kick = KickSpec(beta=beta, delta_z_ion=float(kick_m))
            trace = superposition_size(cfg, float(d_override), kick, times=t0)
            modes = bogoliubov(hamiltonian_coeffs(cfg, float(d_override)))
            rows.append("%s,%.16e,%.16e,%.16e,%.16e,%.16e" % (
                label, kick_m, trace.delta_z_max, zpd.z0_np,
                modes.omega_tilde_a, float(d_override)))
    return rows
