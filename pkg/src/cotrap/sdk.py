"""State-dependent kick on the ion: Zeeman splitting of the pseudo-spin,
Lamb-Dicke parameter of the Raman pair, first-order displacement alpha(t)
and the geometric phase accumulated along the alpha path.

Couplings g are energies [J]; the displacement prefactor
eta g_da* g_ub / (hbar^2 Delta) then carries 1/s and alpha is dimensionless.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import HBAR, MU_BOHR, H_PLANCK

log = logging.getLogger("cotrap")

RESONANCE_PHASE_TOL = 1e-6  # |x t| below which the series form of alpha is used
BETA_SANITY_MAX = 20.0


@dataclass(frozen=True)
class IonLevelScheme:
    """Pseudo-spin levels and their transitions to the shared excited state.

    Defaults encode down = S_1/2 (g_J = 2, M_J = 1/2), up = D_5/2
    (g_J = 6/5, M_J = 3/2) with the 393.366 nm and 854.209 nm lines.
    """
    g_lande_down: float = 2.0
    g_lande_up: float = 1.2
    m_j_down: float = 0.5
    m_j_up: float = 1.5
    lambda_down_e: float = 393.366e-9  # m
    lambda_up_e: float = 854.209e-9   # m

    def __post_init__(self):
        if self.lambda_down_e <= 0.0 or self.lambda_up_e <= 0.0:
            raise ValueError("transition wavelengths must be positive")


@dataclass(frozen=True)
class LaserConfig:
    k_alpha: float            # 1/m, signed
    k_beta: float             # 1/m, signed
    g_down_alpha: complex     # J
    g_up_alpha: complex       # J
    g_down_beta: complex      # J
    g_up_beta: complex        # J
    detuning_big: float       # rad/s, from the excited state
    detuning_small: float     # rad/s, from the qubit splitting
    trap_omega: float         # rad/s
    phi_alpha: float = 0.0    # rad
    phi_beta: float = 0.0     # rad
    ion_position: float = 0.0  # m

    def __post_init__(self):
        g_max = max(abs(self.g_down_alpha), abs(self.g_up_alpha),
                    abs(self.g_down_beta), abs(self.g_up_beta))
        if g_max > 0.0 and abs(HBAR * self.detuning_big) < 10.0 * g_max:
            log.warning("adiabatic elimination marginal: hbar*Delta / max|g| = %.3g < 10",
                        abs(HBAR * self.detuning_big) / g_max)


@dataclass(frozen=True)
class KickSpec:
    beta: complex          # displacement handed to the ion
    delta_z_ion: float     # m, 2 z0_ion Re(beta)
    duration: float = 0.0  # s
    npbar: float = 0.0     # initial nanoparticle occupation, carried as metadata

    def __post_init__(self):
        if not abs(self.beta) <= BETA_SANITY_MAX:
            raise ValueError("|beta| outside sanity range [0, %g]" % BETA_SANITY_MAX)


def _level_factor(level, scheme):
    key = str(level).lower()
    if key in ("up", "u"):
        return scheme.g_lande_up * scheme.m_j_up
    if key in ("down", "d"):
        return scheme.g_lande_down * scheme.m_j_down
    raise ValueError("unknown level selector: %r" % (level,))


def zeeman_shift(level, scheme, b_field):
    """Linear Zeeman shift mu_B g_J M_J B of one level, in Hz."""
    if b_field < 0.0:
        raise ValueError("b_field must be >= 0")
    return MU_BOHR * _level_factor(level, scheme) * b_field / H_PLANCK


def qubit_splitting(scheme, b_field):
    """Frequency splitting [Hz] between the two pseudo-spin levels."""
    return zeeman_shift("up", scheme, b_field) - zeeman_shift("down", scheme, b_field)


def lamb_dicke(scheme, ion_mass, trap_omega, counter_propagating=True):
    """eta = |dk| sqrt(hbar / (2 m omega_T)) for the Raman beam pair."""
    if trap_omega <= 0.0:
        raise ValueError("trap_omega must be positive")
    k_down = 2.0 * math.pi / scheme.lambda_down_e
    k_up = 2.0 * math.pi / scheme.lambda_up_e
    dk = k_down + k_up if counter_propagating else abs(k_down - k_up)
    return dk * math.sqrt(HBAR / (2.0 * ion_mass * trap_omega))


def sdk_prefactor(laser, eta):
    """Complex prefactor eta g_da* g_ub / (hbar^2 Delta) [1/s] of alpha(t)."""
    return (eta * np.conj(laser.g_down_alpha) * laser.g_up_beta
            / (HBAR * HBAR * laser.detuning_big))


def sdk_alpha(laser, eta, t):
    """First-order displacement alpha(t) of the ion motional state.

    alpha = pref e^{i theta} (1 - e^{i x t}) / (i x) with x = omega_T - delta
    and theta = (k_beta - k_alpha) Z0 - (phi_beta - phi_alpha). Near resonance
    (|x t| < 1e-6) the series -pref e^{i theta} t sum (i x t)^k / (k+1)! is
    used: there the closed form loses ~1e-10 of relative accuracy to
    cancellation in 1 - e^{ixt}, while the series truncation stays below
    1e-30, so the switchover is seamless at the closed form's noise floor.

    t may be a scalar or an array; the return matches.
    """
    theta = ((laser.k_beta - laser.k_alpha) * laser.ion_position
             - (laser.phi_beta - laser.phi_alpha))
    pref = sdk_prefactor(laser, eta) * np.exp(1j * theta)
    x = laser.trap_omega - laser.detuning_small
    t_arr = np.asarray(t, dtype=float)

    u = 1j * x * t_arr
    series = np.zeros_like(t_arr, dtype=complex)
    term = np.ones_like(t_arr, dtype=complex)
    fact = 1.0
    for k in range(5):
        fact *= (k + 1)
        series = series + term / fact
        term = term * u
    series = -pref * t_arr * series

    if x == 0.0:
        out = series
    else:
        closed = pref * (1.0 - np.exp(u)) / (1j * x)
        out = np.where(np.abs(x * t_arr) < RESONANCE_PHASE_TOL, series, closed)
    if np.isscalar(t) or getattr(t, "ndim", 1) == 0:
        return complex(out)
    return out


def phase_from_alpha_path(alphas):
    """Accumulated Im integral of alpha* d(alpha) along a sampled path.

    Trapezoidal rule on the path samples: each segment contributes
    Im(conj(midpoint) * step). Returns the running phase, starting at 0.
    """
    a = np.asarray(alphas, dtype=complex)
    if a.ndim != 1 or a.size < 2:
        raise ValueError("alpha path needs at least 2 samples")
    mid = 0.5 * (a[1:] + a[:-1])
    steps = np.diff(a)
    inc = np.imag(np.conj(mid) * steps)
    return np.concatenate(([0.0], np.cumsum(inc)))


def sdk_phase(laser, eta, t_grid):
    """Second-order phase Phi(t) accumulated along the alpha(t) trajectory."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 16:
        raise ValueError("t_grid must be 1-D with at least 16 points")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("t_grid must be uniform")
    return phase_from_alpha_path(sdk_alpha(laser, eta, t))


def kick_from_alpha(alpha, z0_ion):
    """Package a displacement as a kick; the real part moves the ion by
    2 z0_ion Re(alpha)."""
    alpha = complex(alpha)
    return KickSpec(beta=alpha, delta_z_ion=2.0 * z0_ion * alpha.real)


def ac_stark(laser, level):
    """Diagonal light shift -(|g_s,alpha|^2 + |g_s,beta|^2)/(hbar Delta) [J].

    Reported for planning; the first-order displacement above does not
    include it.
    """
    key = str(level).lower()
    if key in ("up", "u"):
        chi = abs(laser.g_up_alpha) ** 2 + abs(laser.g_up_beta) ** 2
    elif key in ("down", "d"):
        chi = abs(laser.g_down_alpha) ** 2 + abs(laser.g_down_beta) ** 2
    else:
        raise ValueError("unknown level selector: %r" % (level,))
    return -chi / (HBAR * laser.detuning_big)
