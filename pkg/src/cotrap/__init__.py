"""Simulator for a charged nanoparticle co-trapped with an atomic ion in a
dual-frequency linear Paul trap, and for the spin-conditional nanoparticle
displacement a state-dependent ion kick produces."""

from .core import (ConfigError, DriveConfig, NumericalError, ParticleSpec,
                   PhysicalConstants, SimConfig, TrapGeometry, load_config,
                   parse_config, save_config)
from .equilibrium import (EquilibriumSolution, TrajectoryTrace, axial_force,
                          integrate_eom, separation_vs_voltage,
                          static_equilibrium)
from .interactions import (CoulombExpansion, ForceLedger, coulomb_expand,
                           expansion_error, force_ledger, pair_distance)
from .quantum import (BogoliubovModes, BranchPair, DisplacementTrace,
                      ModeShift, NormalFormCoefficients, ZeroPointData,
                      bogoliubov, branch_distances, classical_branch_oracle,
                      hamiltonian_coeffs, higher_order_frequencies,
                      superposition_size, superposition_sweep, vacuum_shift,
                      zero_point_data, zero_point_width)
from .sdk import (IonLevelScheme, KickSpec, LaserConfig, kick_from_alpha,
                  lamb_dicke, qubit_splitting, sdk_alpha, sdk_phase,
                  zeeman_shift)
from .stability import (FloquetResult, ScanResult, SecularFrequencies,
                        StabilityTriplet, floquet_classify, secular_frequencies,
                        stability_params, stability_scan)

__version__ = "0.1.0"
