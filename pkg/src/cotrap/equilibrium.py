"""Static equilibrium of the ion-nanoparticle pair and time integration of the
full equations of motion as a cross-check.

The axial trap is static, so each particle feels a spring k = 2 Q kappa_end
V_end / z0^2 plus gravity plus the exact Coulomb force from its partner.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import NumericalError

NEWTON_TOL = 1e-22       # N, absolute force residual
NEWTON_MAX_ITER = 200
BISECT_BRACKET = (1e-8, 1e-2)  # m
COLLAPSE_D = 1e-9        # m, separation below which the pair is treated as collapsing


@dataclass(frozen=True)
class EquilibriumSolution:
    z_ion: float            # m
    z_np: float             # m
    d_eq: float             # m, |z_np - z_ion|
    residual_force_ion: float  # N
    residual_force_np: float   # N
    iterations: int
    coincident: bool = False


@dataclass(frozen=True)
class TrajectoryTrace:
    times: np.ndarray               # (N+1,)
    positions: np.ndarray           # (N+1, 2, 3), particle index 0=ion 1=np
    velocities: np.ndarray          # (N+1, 2, 3)
    time_avg_positions: np.ndarray  # (2, 3), mean over [0, t_end)
    micromotion_amplitude: np.ndarray  # (2,), max |pos - avg| per particle


def _particle(config, selector):
    key = str(selector).lower()
    if key in ("np", "nanoparticle"):
        return config.nanoparticle
    if key in ("ion", "i"):
        return config.ion
    raise ValueError("unknown particle selector: %r" % (selector,))


def axial_spring(config, particle):
    """Static axial spring constant 2 Q kappa_end V_end / z0^2 in N/m."""
    spec = _particle(config, particle)
    geo = config.geometry
    return (2.0 * spec.charge * geo.kappa_end * config.drive.v_end
            / (geo.z0_ax * geo.z0_ax))


def coulomb_prefactor(config):
    """Q_i Q_NP / (4 pi eps0) in J m; zero when the coupling is switched off."""
    if not config.coulomb_on:
        return 0.0
    return (config.constants.epsilon0_4pi_inv
            * config.ion.charge * config.nanoparticle.charge)


def axial_force(config, particle, z_self, z_other):
    """Axial force on one particle: spring + exact Coulomb + gravity [N]."""
    spec = _particle(config, particle)
    force = -axial_spring(config, particle) * z_self
    cc = coulomb_prefactor(config)
    if cc != 0.0:
        delta = z_self - z_other
        if delta == 0.0:
            raise NumericalError("zero separation")
        force += cc * math.copysign(1.0, delta) / (delta * delta)
    if config.gravity_on:
        force -= spec.mass * config.constants.g_grav
    return force


def _scalar_positions(config, d, sigma):
    # One-sided force balance at fixed separation d: each particle sits where
    # its spring cancels the (constant) Coulomb push and gravity.
    cc = coulomb_prefactor(config)
    gam = config.constants.g_grav if config.gravity_on else 0.0
    k_i = axial_spring(config, "ion")
    k_np = axial_spring(config, "np")
    z_i = (-sigma * cc / (d * d) - config.ion.mass * gam) / k_i
    z_np = (sigma * cc / (d * d) - config.nanoparticle.mass * gam) / k_np
    return z_i, z_np


def static_equilibrium(config, initial_guess_d=50e-6):
    """Solve the coupled z force balance by Newton iteration.

    Falls back to bisection on the separation when Newton leaves the branch.
    Residuals of the returned solution are below 1e-22 N."""
    if initial_guess_d <= 0.0:
        raise ValueError("initial_guess_d must be positive")
    k_i = axial_spring(config, "ion")
    k_np = axial_spring(config, "np")
    if k_i <= 0.0 or k_np <= 0.0:
        raise NumericalError("no axial confinement: a_z <= 0")
    cc = coulomb_prefactor(config)
    gam = config.constants.g_grav if config.gravity_on else 0.0
    m_i = config.ion.mass
    m_np = config.nanoparticle.mass

    if cc == 0.0:
        z_i = -m_i * gam / k_i
        z_np = -m_np * gam / k_np
        return EquilibriumSolution(
            z_ion=z_i, z_np=z_np, d_eq=abs(z_np - z_i),
            residual_force_ion=axial_force(config, "ion", z_i, z_np),
            residual_force_np=axial_force(config, "np", z_np, z_i),
            iterations=0, coincident=(gam == 0.0))

    sigma = 1.0 if config.np_above else -1.0

    def forces(z_i, z_np):
        delta = z_np - z_i
        f_i = -k_i * z_i - cc * math.copysign(1.0, delta) / (delta * delta) - m_i * gam
        f_np = -k_np * z_np + cc * math.copysign(1.0, delta) / (delta * delta) - m_np * gam
        return f_i, f_np

    def newton(z_i, z_np, max_iter):
        for it in range(1, max_iter + 1):
            d = z_np - z_i
            if not math.isfinite(d) or sigma * d <= 0.0:
                return None, it
            if abs(d) < COLLAPSE_D:
                raise NumericalError("collapse: separation shrank below %.1e m" % COLLAPSE_D)
            f_i, f_np = forces(z_i, z_np)
            converged = max(abs(f_i), abs(f_np)) < NEWTON_TOL
            d3 = abs(d) ** 3
            j11 = -k_i - 2.0 * cc / d3
            j12 = 2.0 * cc / d3
            j22 = -k_np - 2.0 * cc / d3
            det = j11 * j22 - j12 * j12
            if det == 0.0 or not math.isfinite(det):
                return None, it
            dz_i = (-f_i * j22 + f_np * j12) / det
            dz_np = (-f_np * j11 + f_i * j12) / det
            z_i += dz_i
            z_np += dz_np
            if converged:
                # one polish step past the tolerance leaves the residual at
                # the float noise floor, well under NEWTON_TOL
                return (z_i, z_np), it
        return None, max_iter

    z_i0, z_np0 = _scalar_positions(config, initial_guess_d, sigma)
    solution, used = newton(z_i0, z_np0, NEWTON_MAX_ITER)

    if solution is None:
        d = _bisect_separation(config, k_i, k_np, cc, gam, sigma)
        z_i0, z_np0 = _scalar_positions(config, d, sigma)
        solution, extra = newton(z_i0, z_np0, 50)
        used += extra
        if solution is None:
            raise NumericalError("no equilibrium")

    z_i, z_np = solution
    return EquilibriumSolution(
        z_ion=z_i, z_np=z_np, d_eq=abs(z_np - z_i),
        residual_force_ion=axial_force(config, "ion", z_i, z_np),
        residual_force_np=axial_force(config, "np", z_np, z_i),
        iterations=used)


def _bisect_separation(config, k_i, k_np, cc, gam, sigma):
    # Separation equation d - cc*S/d^2 + sigma*g*D = 0 is monotone in d.
    s_compl = 1.0 / k_i + 1.0 / k_np
    d_grav = config.nanoparticle.mass / k_np - config.ion.mass / k_i

    def phi(d):
        return d - cc * s_compl / (d * d) + sigma * gam * d_grav

    lo, hi = BISECT_BRACKET
    if phi(lo) > 0.0 or phi(hi) < 0.0:
        raise NumericalError("no equilibrium: no sign change in [%g, %g] m" % (lo, hi))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if phi(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def state_from_equilibrium(eq):
    """12-component state [x,y,z per particle, then velocities], at rest."""
    return [0.0, 0.0, eq.z_ion, 0.0, 0.0, eq.z_np,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0]


def integrate_eom(config, initial, t_end, dt=None):
    """Fixed-step RK4 of the full 6-DOF pair with exact Coulomb coupling.

    Parameters
    ----------
    initial : EquilibriumSolution or 12-sequence
        [x_i, y_i, z_i, x_np, y_np, z_np, vx_i, ..., vz_np].
    t_end : float
        Total integration time [s], >= 0.
    dt : float, optional
        Step [s]; sign sets the direction. |dt| must resolve the fast drive:
        |dt| <= 2 pi / (50 Omega_fast). Default 2 pi / (200 Omega_fast).
    """
    if isinstance(initial, EquilibriumSolution):
        state = state_from_equilibrium(initial)
    else:
        state = [float(v) for v in initial]
        if len(state) != 12:
            raise ValueError("initial state needs 12 components")
    drv = config.drive
    if dt is None:
        dt = 2.0 * math.pi / (200.0 * drv.omega_fast)
    if abs(dt) > 2.0 * math.pi / (50.0 * drv.omega_fast):
        raise ValueError("dt too large: must be <= 2 pi / (50 Omega_fast)")
    if t_end < 0.0:
        raise ValueError("t_end must be >= 0")
    steps = int(round(t_end / abs(dt)))

    geo = config.geometry
    r0sq = geo.r0 * geo.r0
    z0sq = geo.z0_ax * geo.z0_ax
    kap = geo.kappa_rf
    vs, vf, voff, vend = drv.v_slow, drv.v_fast, drv.v_offset, drv.v_end
    ws, wf = drv.omega_slow, drv.omega_fast
    q_i, q_np = config.ion.charge, config.nanoparticle.charge
    m_i, m_np = config.ion.mass, config.nanoparticle.mass
    focus_i = q_i * geo.kappa_end * vend / z0sq
    focus_np = q_np * geo.kappa_end * vend / z0sq
    cc = coulomb_prefactor(config)
    grav = config.constants.g_grav if config.gravity_on else 0.0

    def deriv(t, s):
        rf = kap * (vs * math.cos(ws * t) + vf * math.cos(wf * t)) + voff
        dx = s[0] - s[3]
        dy = s[1] - s[4]
        dz = s[2] - s[5]
        if cc != 0.0:
            r2 = dx * dx + dy * dy + dz * dz
            if r2 == 0.0:
                raise NumericalError("zero separation")
            inv_r3 = cc / (r2 * math.sqrt(r2))
        else:
            inv_r3 = 0.0
        ax_i = (q_i * rf / r0sq + focus_i) * s[0] / m_i + inv_r3 * dx / m_i
        ay_i = (-q_i * rf / r0sq + focus_i) * s[1] / m_i + inv_r3 * dy / m_i
        az_i = -2.0 * focus_i * s[2] / m_i + inv_r3 * dz / m_i - grav
        ax_n = (q_np * rf / r0sq + focus_np) * s[3] / m_np - inv_r3 * dx / m_np
        ay_n = (-q_np * rf / r0sq + focus_np) * s[4] / m_np - inv_r3 * dy / m_np
        az_n = -2.0 * focus_np * s[5] / m_np - inv_r3 * dz / m_np - grav
        return (s[6], s[7], s[8], s[9], s[10], s[11],
                ax_i, ay_i, az_i, ax_n, ay_n, az_n)

    times = np.empty(steps + 1)
    pos = np.empty((steps + 1, 2, 3))
    vel = np.empty((steps + 1, 2, 3))

    def record(idx, t, s):
        times[idx] = t
        pos[idx, 0] = s[0:3]
        pos[idx, 1] = s[3:6]
        vel[idx, 0] = s[6:9]
        vel[idx, 1] = s[9:12]

    record(0, 0.0, state)
    t = 0.0
    h = dt
    last_finite = 0.0
    for i in range(1, steps + 1):
        k1 = deriv(t, state)
        s2 = [state[j] + 0.5 * h * k1[j] for j in range(12)]
        k2 = deriv(t + 0.5 * h, s2)
        s3 = [state[j] + 0.5 * h * k2[j] for j in range(12)]
        k3 = deriv(t + 0.5 * h, s3)
        s4 = [state[j] + h * k3[j] for j in range(12)]
        k4 = deriv(t + h, s4)
        state = [state[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                 for j in range(12)]
        t = i * h
        record(i, t, state)
        if i % 64 == 0 or i == steps:
            if all(math.isfinite(v) for v in state):
                last_finite = t
            else:
                raise NumericalError(
                    "trajectory blow-up: non-finite state, last finite t = %.6e s"
                    % last_finite)

    avg = pos[:-1].mean(axis=0) if steps > 0 else pos[0].copy()
    amp = np.abs(pos - avg[None, :, :]).max(axis=(0, 2))
    return TrajectoryTrace(times=times, positions=pos, velocities=vel,
                           time_avg_positions=avg, micromotion_amplitude=amp)


def separation_vs_voltage(config, v_end_list):
    """Equilibrium separation for each end-cap voltage, warm-starting the solver."""
    out = []
    guess = 50e-6
    for v in v_end_list:
        if v <= 0.0:
            raise ValueError("v_end values must be positive")
        cfg = replace(config, drive=replace(config.drive, v_end=float(v)))
        eq = static_equilibrium(cfg, initial_guess_d=guess)
        out.append((float(v), eq.d_eq))
        if eq.d_eq > 0.0:
            guess = eq.d_eq
    return out
