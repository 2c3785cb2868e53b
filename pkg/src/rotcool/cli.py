"""Command-line front end.

Subcommands: cooling-time, trajectory, collide, estimate, fit-kappa, cycle,
reproduce.  All physical flags carry explicit units in their names; values
are converted to Hartree atomic units on entry.  Flags mirror config-file
keys one-to-one (JSON, keys named like the flag dests); flags override file
values.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import defaults as dft
from .csvio import emit_csv, write_csv
from .cycle import ENGINES, accumulate, single_collision_excitation
from .estimators import (
    ChiParameters,
    fit_kappa,
    kappa_integral,
    nonadiabaticity_2level,
    pt_amplitude,
)
from .kinematics import EnergySchedule, cooling_time
from .params import (
    CollisionSystem,
    CoulombCrystal,
    MissingParameterError,
    SingleAtom,
    load_molecule_file,
    lookup,
)
from .rotor import CollisionOptions, PropagationError, propagate_collision
from .trajectory import TrajectoryError, propagate_trajectory
from .units import (
    AU_TIME_S,
    bohr_to_um,
    ev_to_hartree,
    hartree_to_ev,
    hz_to_au_omega,
    um_to_bohr,
)


class ConfigError(ValueError):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with flag defaults (keys = flag dests)")
    p.add_argument("--output", help="output CSV path (default: stdout)")
    p.add_argument("--summary", help="write a JSON summary with totals to this path")
    p.add_argument("--dry-run", action="store_true",
                   help="validate the configuration and print resolved "
                        "atomic-unit values without computing")


def _add_system(p: argparse.ArgumentParser) -> None:
    p.add_argument("--system", help="built-in system name (e.g. MgH+)")
    p.add_argument("--molecule-file", help="molecule definition file")


def _add_scenario(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d-um", type=float, help="crystal lattice spacing, micrometres")
    p.add_argument("--d-bohr", type=float, help="crystal lattice spacing, Bohr")
    p.add_argument("--omega-hz", type=float,
                   help="single-atom trap frequency f in Hz (omega = 2 pi f)")


def _add_schedule(p: argparse.ArgumentParser) -> None:
    p.add_argument("--einit-ev", type=float, help="initial energy, eV")
    p.add_argument("--efinal-ev", type=float, default=0.1, help="final energy, eV")
    p.add_argument("--de-ev", type=float, help="energy bin width, eV")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    ap = argparse.ArgumentParser(prog="rotcool")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    parsers = {}

    p = sub.add_parser("cooling-time",
                       help="closed-form cooling time over a lab-frame ramp")
    _add_system(p)
    _add_scenario(p)
    _add_schedule(p)
    _add_common(p)

    p = sub.add_parser("trajectory", help="classical trajectory and field samples")
    _add_system(p)
    p.add_argument("--energy-ev", type=float, required=True, help="CM energy, eV")
    p.add_argument("--b-bohr", type=float, default=0.0, help="impact parameter, Bohr")
    p.add_argument("--samples", type=int, default=2001)
    _add_common(p)

    p = sub.add_parser("collide", help="propagate one collision, emit P_J(t) trace")
    _add_system(p)
    p.add_argument("--energy-ev", type=float, required=True, help="CM energy, eV")
    p.add_argument("--b-bohr", type=float, default=0.0, help="impact parameter, Bohr")
    p.add_argument("--jmax", type=int)
    p.add_argument("--rtol", type=float)
    p.add_argument("--field-model", choices=["exact", "lorentzian"], default="exact")
    _add_common(p)

    p = sub.add_parser("estimate",
                       help="closed-form excitation estimators vs impact parameter")
    _add_system(p)
    p.add_argument("--energy-ev", type=float, required=True, help="CM energy, eV")
    p.add_argument("--bmax-bohr", type=float, default=800.0)
    p.add_argument("--points", type=int, default=40)
    _add_common(p)

    p = sub.add_parser("fit-kappa", help="refit the pulse-shape integral")
    _add_common(p)

    p = sub.add_parser("cycle", help="accumulated excitation over a cooling ramp")
    _add_system(p)
    _add_scenario(p)
    _add_schedule(p)
    p.add_argument("--engine", choices=list(ENGINES), default="pt")
    p.add_argument("--nodes", type=int, default=24, help="b-quadrature node count")
    p.add_argument("--jmax", type=int)
    p.add_argument("--rtol", type=float)
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("reproduce", help="emit the pinned reference datasets")
    p.add_argument("target", choices=["fig2", "fig3", "fig4", "timing"])
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)

    for name, sp in sub.choices.items():
        parsers[name] = sp
    return ap, parsers


def _apply_config(args: argparse.Namespace, parser_defaults: dict) -> None:
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"--config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("--config: top level must be a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ConfigError(f"--config: unknown key {key!r}")
        # flags given on the command line win over the file
        if getattr(args, dest) == parser_defaults.get(dest):
            setattr(args, dest, value)


def _resolve_system(args) -> CollisionSystem:
    if getattr(args, "molecule_file", None):
        if getattr(args, "system", None):
            raise ConfigError("give either --system or --molecule-file, not both")
        return load_molecule_file(args.molecule_file)
    if not getattr(args, "system", None):
        raise ConfigError("a system is required (--system or --molecule-file)")
    try:
        return lookup(args.system)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_scenario(args):
    given = [x for x in (args.d_um, args.d_bohr, args.omega_hz) if x is not None]
    if len(given) != 1:
        raise ConfigError("exactly one of --d-um, --d-bohr, --omega-hz is required")
    if args.omega_hz is not None:
        return SingleAtom(hz_to_au_omega(args.omega_hz))
    d = um_to_bohr(args.d_um) if args.d_um is not None else args.d_bohr
    return CoulombCrystal(d)


def _resolve_schedule(args) -> EnergySchedule:
    if args.einit_ev is None or args.de_ev is None:
        raise ConfigError("--einit-ev and --de-ev are required")
    return EnergySchedule.build(ev_to_hartree(args.einit_ev),
                                ev_to_hartree(args.efinal_ev),
                                ev_to_hartree(args.de_ev))


def _emit(args, rows, header=None) -> None:
    text = emit_csv(rows, header)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_summary(args, summary: dict) -> None:
    if getattr(args, "summary", None):
        with open(args.summary, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _dry_run_dump(values: dict) -> int:
    for key in sorted(values):
        print(f"{key} = {values[key]!r}")
    return 0


def _cmd_cooling_time(args) -> int:
    system = _resolve_system(args)
    scenario = _resolve_scenario(args)
    schedule = _resolve_schedule(args)
    if args.dry_run:
        return _dry_run_dump({
            "system": system.name, "mu_me": system.mu, "xi": system.xi,
            "scenario": scenario,
            "E_init_ha": schedule.E_init, "E_final_ha": schedule.E_final,
            "dE_ha": schedule.dE, "n_bins": schedule.n_bins})
    report = cooling_time(scenario, system, schedule)
    _emit(args, report.rows())
    _write_summary(args, {
        "system": system.name,
        "T_total_s": report.T_total_s,
        "n_total": float(np.sum(report.n)),
    })
    return 0


def _cmd_trajectory(args) -> int:
    system = _resolve_system(args)
    E = ev_to_hartree(args.energy_ev)
    if args.dry_run:
        return _dry_run_dump({
            "system": system.name, "mu_me": system.mu,
            "E_ha": E, "b_bohr": args.b_bohr, "samples": args.samples})
    traj = propagate_trajectory(E, args.b_bohr, system.mu,
                                n_samples=args.samples)
    rows = ({"t_au": traj.t[i], "r_bohr": traj.r[i],
             "beta_rad": traj.beta[i], "eps_au": traj.eps[i]}
            for i in range(len(traj.t)))
    _emit(args, rows)
    _write_summary(args, {"system": system.name,
                          "beta_total_rad": float(traj.beta[-1] - traj.beta[0])})
    return 0


def _cmd_collide(args) -> int:
    system = _resolve_system(args)
    E = ev_to_hartree(args.energy_ev)
    opts = CollisionOptions(J_max=args.jmax, rtol=args.rtol,
                            field_model=args.field_model, trace=True)
    if args.dry_run:
        resolved = opts.resolved(system.molecule.polarity)
        return _dry_run_dump({
            "system": system.name, "E_ha": E, "b_bohr": args.b_bohr,
            "J_max": resolved.J_max, "rtol": resolved.rtol,
            "field_model": resolved.field_model})
    result = propagate_collision(system, E, args.b_bohr, opts)
    t, pops = result.trace
    header = ["t_au"] + [f"P_J{j}" for j in range(pops.shape[1])]
    rows = ({"t_au": t[i], **{f"P_J{j}": pops[i, j]
                              for j in range(pops.shape[1])}}
            for i in range(len(t)))
    _emit(args, rows, header)
    _write_summary(args, {
        "system": system.name, "excitation": result.excitation,
        "norm_drift": result.norm_drift, "J_max": result.J_max})
    return 0


def _cmd_estimate(args) -> int:
    system = _resolve_system(args)
    E = ev_to_hartree(args.energy_ev)
    b_grid = np.linspace(0.0, args.bmax_bohr, args.points)
    if args.dry_run:
        return _dry_run_dump({
            "system": system.name, "E_ha": E,
            "polarity": system.molecule.polarity,
            "b_bohr_max": args.bmax_bohr, "points": args.points})
    polar = system.molecule.polarity == "polar"
    rows = []
    for b in b_grid:
        chi = ChiParameters.build(system, E, b)
        row = {"b_bohr": b, "kappa": chi.kappa, "chi_D": chi.chi_D,
               "chi_Q": chi.chi_Q}
        if polar:
            row["eta2l"] = nonadiabaticity_2level(system, E, b)
        else:
            row["pt_abs2"] = abs(pt_amplitude(system, E, b)) ** 2
        rows.append(row)
    _emit(args, rows)
    _write_summary(args, {"system": system.name,
                          "estimator": "eta2l" if polar else "pt"})
    return 0


def _cmd_fit_kappa(args) -> int:
    if args.dry_run:
        return _dry_run_dump({"grid": "linspace(3.4e-4, 165, 2000)"})
    fit = fit_kappa()
    grid = np.linspace(3.4e-4, 165.0, 2000)
    fitted = fit(grid)
    rows = []
    for k, f in zip(grid, fitted):
        v = abs(kappa_integral(k))
        rows.append({"kappa": k, "I_abs": v, "fit": f, "residual": v - f})
    _emit(args, rows)
    _write_summary(args, {"a1": fit.a1, "a2": fit.a2, "a3": fit.a3})
    return 0


def _cycle_options(args) -> CollisionOptions:
    return CollisionOptions(J_max=args.jmax, rtol=args.rtol)


def _cmd_cycle(args) -> int:
    system = _resolve_system(args)
    scenario = _resolve_scenario(args)
    schedule = _resolve_schedule(args)
    if args.dry_run:
        return _dry_run_dump({
            "system": system.name, "scenario": scenario,
            "engine": args.engine, "nodes": args.nodes,
            "E_init_ha": schedule.E_init, "E_final_ha": schedule.E_final,
            "dE_ha": schedule.dE, "n_bins": schedule.n_bins,
            "jobs": args.jobs})
    result = accumulate(args.engine, system, scenario, schedule,
                        n_nodes=args.nodes, options=_cycle_options(args),
                        jobs=args.jobs)
    _emit(args, result.rows())
    _write_summary(args, {
        "system": system.name, "engine": args.engine,
        "Sigma_mean": result.total_linear,
        "Sigma_product": result.total_product,
        "T_total_s": float(result.T_cum[-1]) * AU_TIME_S,
    })
    return 0


def _out_path(args, name: str) -> str:
    base = args.output if getattr(args, "output", None) else "."
    return f"{base.rstrip('/')}/{name}"


def _reproduce_fig2(args) -> dict:
    summary = {}
    for panel, cfg in dft.FIG2.items():
        system = lookup(cfg["system"])
        result = propagate_collision(
            system, ev_to_hartree(cfg["E_eV"]), cfg["b_bohr"],
            CollisionOptions(trace=True))
        t, pops = result.trace
        header = ["t_au"] + [f"P_J{j}" for j in range(pops.shape[1])]
        rows = ({"t_au": t[i], **{f"P_J{j}": pops[i, j]
                                  for j in range(pops.shape[1])}}
                for i in range(len(t)))
        write_csv(_out_path(args, f"fig2{panel}.csv"), rows, header)
        summary[f"fig2{panel}_excitation"] = result.excitation
    return summary


def _reproduce_fig3(args) -> dict:
    summary = {}
    cfg_a = dft.FIG3["a"]
    d = cfg_a["d_bohr"]
    for name in cfg_a["systems"]:
        system = lookup(name)
        for engine in ("eta2l", "full"):
            ecfg = cfg_a[engine]
            schedule = EnergySchedule.build(
                ev_to_hartree(ecfg["E_init_eV"]),
                ev_to_hartree(cfg_a["E_final_eV"]),
                ev_to_hartree(ecfg["dE_eV"]))
            result = accumulate(engine, system, CoulombCrystal(d), schedule,
                                n_nodes=ecfg.get("n_nodes", 24),
                                jobs=args.jobs)
            tag = name.strip("+").lower()
            write_csv(_out_path(args, f"fig3a_{tag}_{engine}.csv"), result.rows())
            summary[f"fig3a_{tag}_{engine}_Sigma"] = result.total_linear
    cfg_bc = dft.FIG3["bc"]
    E = ev_to_hartree(cfg_bc["E_eV"])
    from .estimators import nonadiabaticity_exact
    for panel, name in cfg_bc["systems"].items():
        system = lookup(name)
        rows = []
        for b in cfg_bc["b_grid_bohr"]:
            exc = propagate_collision(system, E, b).excitation
            _, eta = nonadiabaticity_exact(system, E, b, n_samples=401)
            rows.append({
                "b_bohr": b,
                "excitation": exc,
                "eta_exact_max": float(np.max(np.abs(eta))),
                "eta2l": nonadiabaticity_2level(system, E, b),
            })
        write_csv(_out_path(args, f"fig3{panel}.csv"), rows)
    return summary


def _reproduce_fig4(args) -> dict:
    summary = {}
    cfg = dft.FIG4
    d = cfg["d_bohr"]
    for engine, names in (("full", cfg["systems_full"]),
                          ("pt", cfg["systems_pt"])):
        for name in names:
            system = lookup(name)
            rows = []
            for e_init in cfg["E_init_eV"]:
                schedule = EnergySchedule.build(
                    ev_to_hartree(e_init), ev_to_hartree(cfg["E_final_eV"]),
                    ev_to_hartree(cfg["dE_eV"]))
                result = accumulate(engine, system, CoulombCrystal(d),
                                    schedule, n_nodes=cfg["n_nodes"],
                                    jobs=args.jobs)
                rows.append({"E_init_eV": e_init,
                             "Sigma_mean": result.total_linear,
                             "Sigma_product": result.total_product})
            tag = name.strip("+").lower()
            write_csv(_out_path(args, f"fig4_{tag}_{engine}.csv"), rows)
            summary[f"fig4_{tag}_{engine}_Sigma_max"] = rows[-1]["Sigma_mean"]
    return summary


def _reproduce_timing(args) -> dict:
    cfg = dft.TIMING
    system = lookup(cfg["system"])
    # the headline ramp is quoted in lab-frame energy
    schedule = EnergySchedule.build(ev_to_hartree(cfg["E_init_eV"]),
                                    ev_to_hartree(cfg["E_final_eV"]),
                                    ev_to_hartree(cfg["dE_eV"]))
    cc = CoulombCrystal(um_to_bohr(cfg["crystal_d_um"]))
    report_cc = cooling_time(cc, system, schedule)
    sa = SingleAtom(hz_to_au_omega(cfg["sa_omega_hz"]))
    report_sa = cooling_time(sa, system, schedule)
    cc_cmp = CoulombCrystal(um_to_bohr(cfg["sa_compare_d_um"]))
    report_cc_cmp = cooling_time(cc_cmp, system, schedule)
    rows = [
        {"quantity": "T_CC_s", "value": report_cc.T_total_s},
        {"quantity": "T_SA_s", "value": report_sa.T_total_s},
        {"quantity": "T_CC_d10um_s", "value": report_cc_cmp.T_total_s},
        {"quantity": "T_SA_over_T_CC_d10um",
         "value": report_sa.T_total_s / report_cc_cmp.T_total_s},
    ]
    write_csv(_out_path(args, "timing.csv"), rows)
    return {row["quantity"]: row["value"] for row in rows}


def _cmd_reproduce(args) -> int:
    if args.dry_run:
        pinned = {"fig2": dft.FIG2, "fig3": dft.FIG3, "fig4": dft.FIG4,
                  "timing": dft.TIMING}[args.target]
        return _dry_run_dump({"target": args.target,
                              "defaults_version": dft.DEFAULTS_VERSION,
                              "pinned": pinned})
    handler = {"fig2": _reproduce_fig2, "fig3": _reproduce_fig3,
               "fig4": _reproduce_fig4, "timing": _reproduce_timing}[args.target]
    summary = handler(args)
    summary["defaults_version"] = dft.DEFAULTS_VERSION
    _write_summary(args, summary)
    return 0


_HANDLERS = {
    "cooling-time": _cmd_cooling_time,
    "trajectory": _cmd_trajectory,
    "collide": _cmd_collide,
    "estimate": _cmd_estimate,
    "fit-kappa": _cmd_fit_kappa,
    "cycle": _cmd_cycle,
    "reproduce": _cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    sub_defaults = {a.dest: a.default
                    for a in subparsers[args.subcommand]._actions
                    if a.dest != "help"}
    try:
        _apply_config(args, sub_defaults)
        return _HANDLERS[args.subcommand](args)
    except (ConfigError, MissingParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrajectoryError, PropagationError, FloatingPointError,
            RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
