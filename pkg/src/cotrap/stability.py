"""Hill-equation stability parameters, secular frequencies, Floquet classification.

The radial motion of a trapped particle in the dual-tone drive obeys, in the
scaled time T = Omega_ref*t/2,

    x'' + [a - 2q cos(2T) - 2p cos(2nT)] x = 0,

with n = Omega_fast/Omega_slow when referenced to the slow tone. Stability is
decided either from the pseudopotential characteristic a + q^2/2 or exactly
from the monodromy matrix of one period T = pi.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import NumericalError

logger = logging.getLogger("cotrap")

MARGINAL_TRACE_TOL = 1e-9


@dataclass(frozen=True)
class StabilityTriplet:
    a: float
    q: float  # slow-tone amplitude
    p: float  # fast-tone amplitude
    axis: str
    reference_tone: str  # "slow" or "fast"


@dataclass(frozen=True)
class SecularFrequencies:
    omega_x: float  # rad/s
    omega_y: float  # rad/s
    omega_z: float  # rad/s
    particle_label: str


@dataclass(frozen=True)
class FloquetResult:
    monodromy: np.ndarray
    trace: float
    stable: bool
    marginal: bool
    period_used: float
    step_count: int
    note: str = ""


def _select_particle(config, particle):
    key = str(particle).lower()
    if key in ("np", "nanoparticle"):
        return config.nanoparticle, "slow"
    if key in ("ion", "i"):
        return config.ion, "fast"
    raise ValueError("unknown particle selector: %r" % (particle,))


def stability_params(config, particle, axis, reference_tone=None):
    """Dimensionless (a, q, p) for one axis of one particle.

    The nanoparticle is referenced to the slow tone with both RF tones kept;
    the ion is referenced to the fast tone with the slow tone folded into a
    as a quasi-static term (q = 0). Passing reference_tone overrides the
    default. kappa_rf scales V_slow and V_fast, kappa_end scales V_end.
    """
    spec, default_tone = _select_particle(config, particle)
    tone = default_tone if reference_tone is None else reference_tone
    if tone not in ("slow", "fast"):
        raise ValueError("reference_tone must be 'slow' or 'fast'")
    geo, drv = config.geometry, config.drive
    q_over = spec.charge
    omega = drv.omega_slow if tone == "slow" else drv.omega_fast
    denom = spec.mass * omega * omega
    r0sq = geo.r0 * geo.r0
    z0sq = geo.z0_ax * geo.z0_ax
    defocus = geo.kappa_end * drv.v_end / z0sq
    off = drv.v_offset / r0sq

    ax = str(axis).lower()
    if ax == "z":
        a_z = 8.0 * q_over * geo.kappa_end * drv.v_end / (z0sq * denom)
        return StabilityTriplet(a=a_z, q=0.0, p=0.0, axis="z", reference_tone=tone)

    q_amp = 2.0 * q_over * geo.kappa_rf * drv.v_slow / (r0sq * denom)
    p_amp = 2.0 * q_over * geo.kappa_rf * drv.v_fast / (r0sq * denom)
    if ax == "x":
        a_val = -(off + defocus) * 4.0 * q_over / denom
        sign = 1.0
    elif ax == "y":
        a_val = (off - defocus) * 4.0 * q_over / denom
        sign = -1.0
    else:
        raise ValueError("axis must be 'x', 'y' or 'z'")

    if tone == "fast":
        # Slow tone treated as static: folds into a with the cosine at 1.
        a_val += -sign * 4.0 * q_over * geo.kappa_rf * drv.v_slow / (r0sq * denom)
        return StabilityTriplet(a=a_val, q=0.0, p=sign * p_amp, axis=ax, reference_tone=tone)
    return StabilityTriplet(a=a_val, q=sign * q_amp, p=sign * p_amp, axis=ax,
                            reference_tone=tone)


def is_stable_pseudopotential(t):
    """Pseudopotential criterion 0 <= a + q^2/2 <= 1 (p for fast-referenced)."""
    amp = t.q if t.reference_tone == "slow" else t.p
    char = t.a + 0.5 * amp * amp
    return 0.0 <= char <= 1.0


def secular_frequency(t, omega_ref):
    """Secular frequency omega = (Omega/2) sqrt(a + q^2/2) in rad/s."""
    amp = t.q if t.reference_tone == "slow" else t.p
    char = t.a + 0.5 * amp * amp
    if char < 0.0:
        raise NumericalError("pseudopotential-unstable: a + q^2/2 = %.4g < 0" % char)
    return 0.5 * omega_ref * math.sqrt(char)


def axial_frequency(config, particle):
    """Axial frequency sqrt(2 Q kappa_end V_end / (m z0^2)), drive-free."""
    spec, _ = _select_particle(config, particle)
    geo, drv = config.geometry, config.drive
    a_z_unscaled = (2.0 * spec.charge * geo.kappa_end * drv.v_end
                    / (spec.mass * geo.z0_ax * geo.z0_ax))
    if a_z_unscaled <= 0.0:
        raise NumericalError("no axial confinement: a_z <= 0")
    return math.sqrt(a_z_unscaled)


def secular_frequencies(config, particle):
    spec, tone = _select_particle(config, particle)
    omega_ref = config.drive.omega_slow if tone == "slow" else config.drive.omega_fast
    wx = secular_frequency(stability_params(config, particle, "x"), omega_ref)
    wy = secular_frequency(stability_params(config, particle, "y"), omega_ref)
    wz = axial_frequency(config, particle)
    return SecularFrequencies(omega_x=wx, omega_y=wy, omega_z=wz,
                              particle_label=spec.label)


def tone_ratio(config):
    """Integer tone ratio n = Omega_fast/Omega_slow used in the Hill cosine."""
    ratio = config.drive.omega_fast / config.drive.omega_slow
    n = max(1, int(round(ratio)))
    if abs(ratio - n) / ratio > 0.01:
        logger.warning(
            "tone ratio Omega_f/Omega_s = %.6g is non-integer by more than 1%%; "
            "using n = %d in the Hill cosine", ratio, n)
    return n


def _step_matrices(b1, b2, b3, h):
    """Per-step RK4 update matrices for y' = A(T) y with A = [[0,1],[-b,0]].

    b1, b2, b3 are the coefficient arrays at T, T+h/2 and T+h; shapes
    broadcast to (..., ). Returns (..., 2, 2) update matrices."""
    shape = np.broadcast(b1, b2, b3).shape
    a1 = np.zeros(shape + (2, 2))
    a1[..., 0, 1] = 1.0
    a1[..., 1, 0] = -b1
    a2 = np.zeros(shape + (2, 2))
    a2[..., 0, 1] = 1.0
    a2[..., 1, 0] = -b2
    a3 = np.zeros(shape + (2, 2))
    a3[..., 0, 1] = 1.0
    a3[..., 1, 0] = -b3
    k1 = a1
    k2 = a2 + (0.5 * h) * np.matmul(a2, k1)
    k3 = a2 + (0.5 * h) * np.matmul(a2, k2)
    k4 = a3 + h * np.matmul(a3, k3)
    m = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    m[..., 0, 0] += 1.0
    m[..., 1, 1] += 1.0
    return m


def _ordered_product(mats):
    # Product M_{S-1} ... M_1 M_0 by pairwise tree reduction; mats is
    # time-ordered along axis 0 and later factors multiply from the left.
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            tail = mats[-1:]
            body = mats[:-1]
        else:
            tail = None
            body = mats
        body = np.matmul(body[1::2], body[0::2])
        mats = body if tail is None else np.concatenate([body, tail])
    return mats[0]


def _hill_coefficient(a, q, p, n, t):
    return a - 2.0 * q * np.cos(2.0 * t) - 2.0 * p * np.cos(2.0 * n * t)


def floquet_classify(t, tone_ratio_n=1, steps=None):
    """Exact stability of the Hill equation by one-period monodromy.

    Parameters
    ----------
    t : StabilityTriplet
        Coefficients of x'' + [a - 2q cos(2T) - 2p cos(2nT)] x = 0.
    tone_ratio_n : int
        Frequency ratio n of the fast cosine. For fast-referenced triplets
        (q = 0) the p cosine is the only active tone and n = 1 puts it at
        the reference frequency itself.
    steps : int, optional
        Fixed RK4 steps over the period T = pi; default 200 per tone cycle.

    Returns
    -------
    FloquetResult with the 2x2 monodromy, its trace and the stability flag
    |trace| <= 2. det(monodromy) = 1 up to integration error.
    """
    n = int(tone_ratio_n)
    if n < 1:
        raise ValueError("tone_ratio_n must be >= 1")
    if steps is None:
        steps = 200 * n
    steps = int(steps)
    if steps < 10 * n:
        raise ValueError("need at least 10 steps per tone cycle")
    h = math.pi / steps
    grid = np.arange(steps) * h
    b1 = _hill_coefficient(t.a, t.q, t.p, n, grid)
    b2 = _hill_coefficient(t.a, t.q, t.p, n, grid + 0.5 * h)
    b3 = _hill_coefficient(t.a, t.q, t.p, n, grid + h)
    mono = _ordered_product(_step_matrices(b1, b2, b3, h))
    return _classify_monodromy(mono, steps)


def _classify_monodromy(mono, steps):
    trace = float(mono[0, 0] + mono[1, 1])
    if not math.isfinite(trace):
        return FloquetResult(monodromy=mono, trace=trace, stable=False,
                             marginal=False, period_used=math.pi,
                             step_count=steps, note="numerical blow-up")
    stable = abs(trace) <= 2.0
    marginal = abs(abs(trace) - 2.0) <= MARGINAL_TRACE_TOL
    return FloquetResult(monodromy=mono, trace=trace, stable=stable,
                         marginal=marginal, period_used=math.pi,
                         step_count=steps)


@dataclass(frozen=True)
class ScanResult:
    a: np.ndarray       # flattened, a-major ordering
    q: np.ndarray
    p: float
    trace: np.ndarray
    stable: np.ndarray  # bool
    tone_ratio_n: int
    step_count: int

    def rows(self):
        for i in range(self.a.size):
            yield (float(self.a[i]), float(self.q[i]), self.p,
                   float(self.trace[i]), bool(self.stable[i]))


def stability_scan(config, particle, a_range, q_range, grid, p=0.0, steps=None):
    """Floquet-classify a rectangular (a, q) grid at fixed p.

    grid may be one integer or a pair (n_a, n_q). The config fixes the tone
    ratio n of the p cosine; with p = 0 the fast tone is absent and n = 1 is
    used regardless. Points are ordered a-major then q."""
    del particle  # the scan plane is dimensionless; selector kept for symmetry
    if isinstance(grid, int):
        n_a = n_q = grid
    else:
        n_a, n_q = (int(grid[0]), int(grid[1]))
    if n_a < 1 or n_q < 1:
        raise ValueError("grid must be at least 1x1")
    a_lo, a_hi = (float(a_range[0]), float(a_range[1]))
    q_lo, q_hi = (float(q_range[0]), float(q_range[1]))
    if not all(map(math.isfinite, (a_lo, a_hi, q_lo, q_hi))):
        raise ValueError("scan ranges must be finite")
    n = tone_ratio(config) if p != 0.0 else 1
    if steps is None:
        steps = 200 * n
    steps = int(steps)
    a_vals = np.linspace(a_lo, a_hi, n_a)
    q_vals = np.linspace(q_lo, q_hi, n_q)
    aa, qq = np.meshgrid(a_vals, q_vals, indexing="ij")
    a_flat = aa.ravel()
    q_flat = qq.ravel()

    h = math.pi / steps
    mono = np.zeros((a_flat.size, 2, 2))
    mono[:, 0, 0] = 1.0
    mono[:, 1, 1] = 1.0
    for i in range(steps):
        t0 = i * h
        b1 = _hill_coefficient(a_flat, q_flat, p, n, t0)
        b2 = _hill_coefficient(a_flat, q_flat, p, n, t0 + 0.5 * h)
        b3 = _hill_coefficient(a_flat, q_flat, p, n, t0 + h)
        mono = np.matmul(_step_matrices(b1, b2, b3, h), mono)

    trace = mono[:, 0, 0] + mono[:, 1, 1]
    stable = np.abs(trace) <= 2.0
    return ScanResult(a=a_flat, q=q_flat, p=float(p), trace=trace,
                      stable=stable, tone_ratio_n=n, step_count=steps)


def mathieu_boundary_q(a=0.0, q_lo=0.5, q_hi=1.5, tol=1e-4, steps=800):
    """First stability-boundary q at fixed a, by bisection on the Floquet flag."""
    def stable_at(qv):
        return floquet_classify(
            StabilityTriplet(a=a, q=qv, p=0.0, axis="x", reference_tone="slow"),
            tone_ratio_n=1, steps=steps).stable
    lo, hi = q_lo, q_hi
    if not stable_at(lo) or stable_at(hi):
        raise NumericalError("bisection bracket does not straddle the boundary")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable_at(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
