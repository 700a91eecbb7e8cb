"""Command line front end. Subcommands cover stability analysis, the static
equilibrium and its voltage sweep, the conditional-displacement sweep, the
pair-interaction ledger, and the state-dependent-kick report.

Exit codes: 0 success, 2 usage or config error, 3 numerical failure.
All file outputs are CSV (LF endings, 17 significant digits) under --out-dir.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import equilibrium as eqlib
from . import interactions, quantum, sdk, stability
from .core import ConfigError, NumericalError, load_config

FLOAT_FMT = "%.16e"

SCENARIO_PRESETS = {
    # label: (v_end [V], nanoparticle charge [e], separation override [m])
    "q800": (400.0, 800.0, 43e-6),
    "q300": (400.0, 300.0, 33e-6),
}


@dataclass
class CommandResult:
    exit_code: int
    output_paths: list = field(default_factory=list)
    log: str = ""


def _fmt(value):
    return FLOAT_FMT % float(value)


def _write_csv(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for row in rows:
            fh.write(row + "\n")
    return str(path)


def _parse_count_range(text, what="range"):
    """'lo:hi:count' -> count evenly spaced values; a single number -> [value]."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError("bad %s %r: expected lo:hi:count or a single value"
                          % (what, text))
    if count < 1:
        raise ConfigError("bad %s %r: count must be >= 1" % (what, text))
    if count == 1:
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, count)]


def _resolve_config(args):
    path = args.config or os.environ.get("COTRAP_CONFIG") or "default.cfg"
    return load_config(path)


def _apply_switches(config, args):
    updates = {}
    if getattr(args, "gravity", None) is not None:
        updates["gravity_on"] = args.gravity == "on"
    if getattr(args, "coulomb", None) is not None:
        updates["coulomb_on"] = args.coulomb == "on"
    if getattr(args, "branch", None) is not None:
        updates["np_above"] = args.branch == "above"
    return replace(config, **updates) if updates else config


def cmd_stability(args):
    config = _resolve_config(args)
    particle = args.particle
    lines = ["stability report for particle '%s'" % particle,
             "%-5s %14s %14s %14s %14s  %s" % ("axis", "a", "q", "p",
                                               "a+amp^2/2", "pseudopotential")]
    triplets = {ax: stability.stability_params(config, particle, ax)
                for ax in ("x", "y", "z")}
    for ax, t in triplets.items():
        amp = t.q if t.reference_tone == "slow" else t.p
        char = t.a + 0.5 * amp * amp
        verdict = "stable" if stability.is_stable_pseudopotential(t) else "unstable"
        lines.append("%-5s %14.6e %14.6e %14.6e %14.6e  %s" % (
            ax, t.a, t.q, t.p, char, verdict))

    omega_ref = (config.drive.omega_slow if triplets["x"].reference_tone == "slow"
                 else config.drive.omega_fast)
    for ax in ("x", "y"):
        try:
            w = stability.secular_frequency(triplets[ax], omega_ref)
            lines.append("secular omega_%s = %.6e rad/s" % (ax, w))
        except NumericalError as exc:
            lines.append("secular omega_%s: %s" % (ax, exc))
    try:
        lines.append("axial omega_z = %.6e rad/s"
                     % stability.axial_frequency(config, particle))
    except NumericalError as exc:
        lines.append("axial omega_z: %s" % exc)

    for ax in ("x", "y"):
        t = triplets[ax]
        n = stability.tone_ratio(config) if t.reference_tone == "slow" else 1
        fr = stability.floquet_classify(t, tone_ratio_n=n)
        lines.append("floquet %s: |trace| = %.9g, stable = %s, marginal = %s%s" % (
            ax, abs(fr.trace), str(fr.stable).lower(), str(fr.marginal).lower(),
            (", " + fr.note) if fr.note else ""))

    outputs = []
    if args.scan:
        spec = {}
        for item in args.scan:
            if "=" not in item:
                raise ConfigError("bad --scan item %r: expected key=value" % item)
            key, _, val = item.partition("=")
            spec[key.strip()] = val.strip()
        missing = [k for k in ("a", "q", "n") if k not in spec]
        if missing:
            raise ConfigError("--scan needs a=lo:hi q=lo:hi n=count (missing %s)"
                              % ", ".join(missing))

        def _span(text, name):
            parts = text.split(":")
            if len(parts) != 2:
                raise ConfigError("bad --scan %s=%r: expected lo:hi" % (name, text))
            return float(parts[0]), float(parts[1])

        a_range = _span(spec["a"], "a")
        q_range = _span(spec["q"], "q")
        try:
            n_grid = int(spec["n"])
        except ValueError:
            raise ConfigError("bad --scan n=%r: expected an integer" % spec["n"])
        p_val = float(spec.get("p", "0"))
        scan = stability.stability_scan(config, particle, a_range, q_range,
                                        n_grid, p=p_val)
        rows = ["a,q,p,trace,stable"]
        for a, q, p, trace, stab in scan.rows():
            rows.append("%s,%s,%s,%s,%s" % (_fmt(a), _fmt(q), _fmt(p), _fmt(trace),
                                            "true" if stab else "false"))
        path = _write_csv(Path(args.out_dir) / "stability_scan.csv", rows)
        outputs.append(path)
        lines.append("scan written to %s (%d points, %d stable)" % (
            path, scan.a.size, int(np.count_nonzero(scan.stable))))
    return CommandResult(0, outputs, "\n".join(lines))


def cmd_equilibrium(args):
    config = _apply_switches(_resolve_config(args), args)
    eq = eqlib.static_equilibrium(config, initial_guess_d=args.guess_um * 1e-6)
    lines = ["z_ion  = %.12e m" % eq.z_ion,
             "z_np   = %.12e m" % eq.z_np,
             "d_eq   = %.12e m" % eq.d_eq,
             "residual_ion = %.3e N" % eq.residual_force_ion,
             "residual_np  = %.3e N" % eq.residual_force_np,
             "iterations = %d" % eq.iterations,
             "coincident = %s" % str(eq.coincident).lower()]
    rows = ["z_ion_m,z_np_m,d_eq_m,residual_ion_N,residual_np_N,iterations,coincident",
            "%s,%s,%s,%s,%s,%d,%s" % (
                _fmt(eq.z_ion), _fmt(eq.z_np), _fmt(eq.d_eq),
                _fmt(eq.residual_force_ion), _fmt(eq.residual_force_np),
                eq.iterations, "true" if eq.coincident else "false")]
    outputs = [_write_csv(Path(args.out_dir) / "equilibrium.csv", rows)]

    if args.sweep_vend:
        v_list = _parse_count_range(args.sweep_vend, "--sweep-vend")
        if args.jobs > 1:
            # warm start is skipped here so the result order and values do
            # not depend on scheduling
            def solve(v):
                cfg = replace(config, drive=replace(config.drive, v_end=float(v)))
                return eqlib.static_equilibrium(cfg).d_eq
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                pairs = list(zip(v_list, pool.map(solve, v_list)))
        else:
            pairs = eqlib.separation_vs_voltage(config, v_list)
        rows = ["v_end_v,d_eq_m"] + ["%s,%s" % (_fmt(v), _fmt(d)) for v, d in pairs]
        path = _write_csv(Path(args.out_dir) / "sweep_vend.csv", rows)
        outputs.append(path)
        lines.append("voltage sweep written to %s (%d points)" % (path, len(pairs)))
    return CommandResult(0, outputs, "\n".join(lines))


def cmd_superpose(args):
    config = _resolve_config(args)
    kicks_m = [k * 1e-9 for k in _parse_count_range(args.kick_nm, "--kick-nm")]
    if args.scenario:
        scenarios = [(name,) + SCENARIO_PRESETS[name] for name in args.scenario]
    else:
        v_end = args.vend if args.vend is not None else config.drive.v_end
        cfg_v = replace(config, drive=replace(config.drive, v_end=float(v_end)))
        if args.d_eq_um is not None:
            d0 = args.d_eq_um * 1e-6
        else:
            d0 = eqlib.static_equilibrium(cfg_v).d_eq
        scenarios = [("custom", v_end, config.nanoparticle.charge_e, d0)]

    if args.jobs > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            chunks = list(pool.map(
                lambda sc: quantum.superposition_sweep(config, kicks_m, [sc]),
                scenarios))
        rows = [quantum.SWEEP_CSV_HEADER]
        for chunk in chunks:
            rows.extend(chunk[1:])
    else:
        rows = quantum.superposition_sweep(config, kicks_m, scenarios)
    path = _write_csv(Path(args.out_dir) / "superpose_sweep.csv", rows)

    lines = []
    for label, v_end, q_np, d0 in scenarios:
        tail = [r for r in rows[1:] if r.startswith(label + ",")]
        if tail:
            last = tail[-1].split(",")
            lines.append("%s: V_end = %g V, Q_np = %g e, d = %.3e m, "
                         "max delta_z = %.6e m at kick %.3e m (z0_np = %.3e m)"
                         % (label, v_end, q_np, d0, float(last[2]),
                            float(last[1]), float(last[3])))
        else:
            lines.append("%s: empty kick range" % label)
    lines.append("sweep written to %s" % path)
    return CommandResult(0, [path], "\n".join(lines))


def cmd_forces(args):
    config = _resolve_config(args)
    ledger = interactions.force_ledger(config, args.separation_um * 1e-6)
    path = _write_csv(Path(args.out_dir) / "forces.csv", list(ledger.csv_rows()))
    return CommandResult(0, [path],
                         ledger.text_table() + "\nledger written to %s" % path)


def cmd_sdk(args):
    config = _resolve_config(args)
    scheme = sdk.IonLevelScheme()
    b_field = args.b_mt * 1e-3
    shift_up = sdk.zeeman_shift("up", scheme, b_field)
    shift_down = sdk.zeeman_shift("down", scheme, b_field)
    splitting = sdk.qubit_splitting(scheme, b_field)
    omega_t = 2.0 * math.pi * args.trap_omega_hz
    eta = sdk.lamb_dicke(scheme, config.ion.mass, omega_t)
    lines = ["B = %g mT" % args.b_mt,
             "zeeman shift up   = %.6f MHz" % (shift_up / 1e6),
             "zeeman shift down = %.6f MHz" % (shift_down / 1e6),
             "qubit splitting   = %.6f MHz" % (splitting / 1e6),
             "lamb-dicke eta = %.6f at omega_T = 2 pi * %g Hz"
             % (eta, args.trap_omega_hz)]

    g = complex(sdk.HBAR * 2.0 * math.pi * args.rabi_hz)
    laser = sdk.LaserConfig(
        k_alpha=2.0 * math.pi / scheme.lambda_down_e,
        k_beta=-2.0 * math.pi / scheme.lambda_up_e,
        g_down_alpha=g, g_up_alpha=g, g_down_beta=g, g_up_beta=g,
        detuning_big=2.0 * math.pi * args.detuning_big_hz,
        detuning_small=omega_t - 2.0 * math.pi * args.offset_hz,
        trap_omega=omega_t)
    pref = sdk.sdk_prefactor(laser, eta)
    x = laser.trap_omega - laser.detuning_small
    lines.append("alpha prefactor |pref| = %.6e 1/s" % abs(pref))
    if x != 0.0:
        lines.append("off-resonance |alpha| bound 2|pref/x| = %.6e" % (2.0 * abs(pref / x)))
    for level in ("up", "down"):
        lines.append("ac stark %-4s = %.6e J (%.3f kHz)" % (
            level, sdk.ac_stark(laser, level),
            sdk.ac_stark(laser, level) / sdk.H_PLANCK / 1e3))

    outputs = []
    if args.alpha_t:
        if x != 0.0:
            t_end = 2.0 * math.pi / abs(x)
        else:
            t_end = args.samples / args.trap_omega_hz
        t_grid = np.linspace(0.0, t_end, args.samples)
        alphas = np.asarray(sdk.sdk_alpha(laser, eta, t_grid))
        phi = sdk.phase_from_alpha_path(alphas)
        rows = ["t_s,re_alpha,im_alpha,abs_alpha,phi"]
        for i in range(t_grid.size):
            rows.append("%s,%s,%s,%s,%s" % (
                _fmt(t_grid[i]), _fmt(alphas[i].real), _fmt(alphas[i].imag),
                _fmt(abs(alphas[i])), _fmt(phi[i])))
        path = _write_csv(Path(args.out_dir) / "alpha_t.csv", rows)
        outputs.append(path)
        lines.append("alpha trace written to %s (max |alpha| = %.6e)"
                     % (path, float(np.max(np.abs(alphas)))))
    return CommandResult(0, outputs, "\n".join(lines))


def _add_common(sp):
    sp.add_argument("--config", default=None,
                    help="config file path (default: $COTRAP_CONFIG, then the "
                         "bundled default.cfg)")
    sp.add_argument("--out-dir", default="./out", help="output directory")
    sp.add_argument("--seed", type=int, default=None,
                    help="accepted for interface uniformity; nothing here is stochastic")
    sp.add_argument("--jobs", type=int, default=1,
                    help="worker threads for sweeps (deterministic output order)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cotrap",
        description="dual-frequency trap simulator for an ion-nanoparticle pair")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("stability", help="stability parameters, secular "
                        "frequencies, Floquet verdicts, optional (a, q) scan")
    _add_common(sp)
    sp.add_argument("--particle", choices=("np", "ion"), default="np")
    sp.add_argument("--scan", nargs="+", metavar="KEY=VAL",
                    help="grid scan, e.g. --scan a=-0.2:0.2 q=0:1 n=50 [p=0]")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("equilibrium", help="static equilibrium report and "
                        "voltage sweep")
    _add_common(sp)
    sp.add_argument("--guess-um", type=float, default=50.0,
                    help="initial separation guess [um]")
    sp.add_argument("--sweep-vend", default=None, metavar="LO:HI:N",
                    help="sweep the end-cap voltage, e.g. 200:500:4")
    sp.add_argument("--gravity", choices=("on", "off"), default=None)
    sp.add_argument("--coulomb", choices=("on", "off"), default=None)
    sp.add_argument("--branch", choices=("above", "below"), default=None,
                    help="which side of the ion the nanoparticle sits on")
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("superpose", help="conditional-displacement sweep "
                        "over kick sizes")
    _add_common(sp)
    sp.add_argument("--kick-nm", default="1:100:50", metavar="LO:HI:N",
                    help="ion kick displacement range [nm]")
    sp.add_argument("--vend", type=float, default=None, help="end-cap voltage [V]")
    sp.add_argument("--d-eq-um", type=float, default=None,
                    help="use this separation [um] instead of solving for it")
    sp.add_argument("--scenario", action="append",
                    choices=sorted(SCENARIO_PRESETS),
                    help="preset scenario; repeat for several curves")
    sp.set_defaults(func=cmd_superpose)

    sp = sub.add_parser("forces", help="pair-interaction ledger at a separation")
    _add_common(sp)
    sp.add_argument("--separation-um", type=float, default=20.0)
    sp.set_defaults(func=cmd_forces)

    sp = sub.add_parser("sdk", help="state-dependent kick report")
    _add_common(sp)
    sp.add_argument("--b-mt", type=float, default=12.0, help="magnetic field [mT]")
    sp.add_argument("--trap-omega-hz", type=float, default=1e6,
                    help="ion trap frequency [Hz, ordinary]")
    sp.add_argument("--rabi-hz", type=float, default=1e7,
                    help="coupling magnitude |g|/(2 pi hbar) [Hz]")
    sp.add_argument("--detuning-big-hz", type=float, default=1e10,
                    help="detuning from the excited state [Hz]")
    sp.add_argument("--offset-hz", type=float, default=1e3,
                    help="omega_T - delta offset [Hz]")
    sp.add_argument("--alpha-t", action="store_true",
                    help="emit the alpha(t) trace CSV")
    sp.add_argument("--samples", type=int, default=512,
                    help="samples in the alpha(t) trace")
    sp.set_defaults(func=cmd_sdk)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        result = args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except NumericalError as exc:
        print("numerical error: %s" % exc, file=sys.stderr)
        return 3
    except ValueError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    if result.log:
        print(result.log)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
