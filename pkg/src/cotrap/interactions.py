"""Coulomb coupling of the trapped pair: exact distance, second-order series
of the interaction energy about equilibrium, truncation-error control, and a
ledger comparing the Coulomb force with the sub-leading pair interactions.
"""

import math
from dataclasses import dataclass, field

from .core import NumericalError


@dataclass(frozen=True)
class CoulombExpansion:
    """Second-order series of U = C/r about the equilibrium separation.

    Written as a polynomial in the displacement differences
    dz = dz_np - dz_i (same for x, y):

        U ~ u0 + linear_coeff*dz + quad_zz*dz^2 + quad_xx*dx^2 + quad_yy*dy^2

    cross_coeff is the coefficient of the product dz_np*dz_i when the zz term
    is expanded into the individual coordinates (it is -2*quad_zz).
    """
    d_eq: float          # m
    u0: float            # J, C/d_eq
    linear_coeff: float  # J/m, -u0/d_eq
    quad_zz: float       # J/m^2, +u0/d_eq^2
    quad_xx: float       # J/m^2, -u0/(2 d_eq^2)
    quad_yy: float       # J/m^2
    cross_coeff: float   # J/m^2, -2 u0/d_eq^2

    def evaluate(self, delta_np, delta_ion):
        """Series energy [J] for 3-vector displacements (x, y, z) of each particle."""
        dx = delta_np[0] - delta_ion[0]
        dy = delta_np[1] - delta_ion[1]
        dz = delta_np[2] - delta_ion[2]
        return (self.u0 + self.linear_coeff * dz
                + self.quad_zz * dz * dz
                + self.quad_xx * dx * dx + self.quad_yy * dy * dy)


@dataclass(frozen=True)
class LedgerEntry:
    name: str
    energy_j: float   # J, magnitude
    force_n: float    # N, magnitude
    relative: float   # energy magnitude relative to the Coulomb entry
    force_relative: float
    note: str = ""


@dataclass(frozen=True)
class ForceLedger:
    separation: float  # m
    entries: list = field(default_factory=list)

    def csv_rows(self):
        yield "name,energy_J,force_N,relative"
        for e in self.entries:
            yield "%s,%.16e,%.16e,%.16e" % (e.name, e.energy_j, e.force_n, e.relative)

    def text_table(self):
        lines = ["pair interactions at d = %.6e m" % self.separation,
                 "%-22s %14s %14s %12s %12s  %s" % (
                     "name", "energy [J]", "force [N]", "rel energy", "rel force", "note")]
        for e in self.entries:
            lines.append("%-22s %14.4e %14.4e %12.3e %12.3e  %s" % (
                e.name, e.energy_j, e.force_n, e.relative, e.force_relative, e.note))
        return "\n".join(lines)


def pair_distance(positions):
    """Euclidean ion-nanoparticle distance [m].

    positions: 6-sequence (x_i, y_i, z_i, x_np, y_np, z_np). The distance is
    assembled from the z separation and the transverse offsets.
    """
    x_i, y_i, z_i, x_np, y_np, z_np = (float(v) for v in positions)
    dz = z_np - z_i
    dx = x_np - x_i
    dy = y_np - y_i
    r = math.sqrt(dz * dz + dx * dx + dy * dy)
    if r == 0.0:
        raise NumericalError("zero separation")
    return r


def coulomb_energy(config, r):
    """Exact interaction energy C/r [J] at distance r."""
    if r <= 0.0:
        raise NumericalError("zero separation")
    return (config.constants.epsilon0_4pi_inv
            * config.ion.charge * config.nanoparticle.charge / r)


def coulomb_expand(config, d_eq):
    """Series coefficients of the interaction energy about separation d_eq."""
    if d_eq <= 0.0:
        raise ValueError("d_eq must be positive")
    u0 = coulomb_energy(config, d_eq)
    quad = u0 / (d_eq * d_eq)
    return CoulombExpansion(
        d_eq=d_eq, u0=u0,
        linear_coeff=-u0 / d_eq,
        quad_zz=quad, quad_xx=-0.5 * quad, quad_yy=-0.5 * quad,
        cross_coeff=-2.0 * quad)


def expansion_error(config, d_eq, delta):
    """Worst relative truncation error of the series for a pure z excursion.

    Checks dz = +delta and dz = -delta against the exact 1/r energy and
    returns the larger relative deviation. Scales as (delta/d_eq)^3.
    """
    if delta == 0.0:
        return 0.0
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    if delta >= d_eq:
        raise ValueError("expansion invalid: delta >= d_eq")
    series = coulomb_expand(config, d_eq)
    worst = 0.0
    for dz in (delta, -delta):
        approx = series.evaluate((0.0, 0.0, dz), (0.0, 0.0, 0.0))
        exact = coulomb_energy(config, d_eq + dz)
        worst = max(worst, abs(approx - exact) / abs(exact))
    return worst


def sphere_polarizability(radius, rel_permittivity):
    """Polarizability volume R^3 (eps-1)/(eps+2) [m^3] of a dielectric sphere."""
    if radius < 0.0:
        raise ValueError("radius must be >= 0")
    return radius ** 3 * (rel_permittivity - 1.0) / (rel_permittivity + 2.0)


def force_ledger(config, separation):
    """Energy and force magnitudes of the pair interactions at one separation.

    Entries: monopole Coulomb, charge with induced dipole on the partner,
    magnetic dipole-dipole, retarded Casimir between the two polarizabilities.
    Relative columns are normalized to the Coulomb entry; entries are sorted
    by energy, largest first.
    """
    if separation <= 0.0:
        raise NumericalError("zero separation")
    d = separation
    con = config.constants
    q_abs = abs(config.ion.charge * config.nanoparticle.charge)
    u_coul = con.epsilon0_4pi_inv * q_abs / d
    f_coul = u_coul / d

    alpha_np = sphere_polarizability(config.nanoparticle.radius,
                                     config.nanoparticle.rel_permittivity)
    alpha_ion = config.ion_polarizability
    point_np = config.nanoparticle.radius == 0.0

    if point_np:
        u_ind, f_ind = 0.0, 0.0
        u_cas, f_cas = 0.0, 0.0
        note_pp = "point-particle"
    else:
        u_ind = con.epsilon0_4pi_inv * alpha_np * q_abs / (2.0 * d ** 4)
        f_ind = 4.0 * u_ind / d
        u_cas = 23.0 * con.hbar * con.c_light * alpha_ion * alpha_np / (4.0 * math.pi * d ** 7)
        f_cas = 7.0 * u_cas / d
        note_pp = ""

    mu1 = config.mu_ion_bohr * con.mu_bohr
    mu2 = config.mu_np_bohr * con.mu_bohr
    u_mag = (con.mu0 / (4.0 * math.pi)) * mu1 * mu2 / d ** 3
    f_mag = 3.0 * u_mag / d

    entries = [
        LedgerEntry("coulomb", u_coul, f_coul, 1.0, 1.0),
        LedgerEntry("charge-induced-dipole", u_ind, f_ind,
                    u_ind / u_coul, f_ind / f_coul, note_pp),
        LedgerEntry("magnetic-dipole", u_mag, f_mag,
                    u_mag / u_coul, f_mag / f_coul),
        LedgerEntry("casimir", u_cas, f_cas,
                    u_cas / u_coul, f_cas / f_coul, note_pp),
    ]
    entries.sort(key=lambda e: e.energy_j, reverse=True)
    return ForceLedger(separation=d, entries=entries)
