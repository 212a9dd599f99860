"""Command-line entry point: ``dssh <command> --config FILE [--out DIR]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analytic, dynamics, fitting, oracle, thirdq
from .config import ConfigError, load_config
from .model import ModelError
from .reports import RunManifest, write_json, write_tsv

DEFAULT_TOL = 1e-8


class CommandError(RuntimeError):
    pass


def _manifest(args, cfg, model, **params) -> RunManifest:
    m = RunManifest(
        args.command,
        None if model is None else model.as_dict(),
        parameters={k: v for k, v in sorted(params.items())},
        tolerances={"tol": args.tol},
    )
    return m.stamp() if args.timestamp else m


def _classify_kw(cfg):
    kw = {}
    if cfg.has("bound_ipr"):
        kw["ipr_threshold"] = cfg.get_float("bound_ipr")
    if cfg.has("bound_weight"):
        kw["boundary_weight"] = cfg.get_float("bound_weight")
    if cfg.has("edge_sites"):
        kw["edge_sites"] = cfg.get_int("edge_sites")
    return kw


def _time_grid(cfg):
    if cfg.has("times"):
        grid = np.array(sorted(cfg.get_float_list("times")))
    else:
        grid = dynamics.log_time_grid(
            cfg.get_float("t_min", 1e-2),
            cfg.get_float("t_max", 1e3),
            cfg.get_int("n_times", 200),
            include_zero=cfg.get_bool("include_zero", True),
        )
    return grid


def cmd_rapidity(args, cfg):
    model = cfg.model()
    spec = thirdq.rapidity_spectrum(model, **_classify_kw(cfg))
    man = _manifest(args, cfg, model, **_classify_kw(cfg))
    rows = [
        (k, c, e.real, e.imag, bool(b))
        for k, (c, e, b) in enumerate(zip(spec.copy_index, spec.values, spec.bound_flags))
    ]
    out = Path(args.out)
    if args.format == "json":
        payload = {
            "rapidities": [{"copy": r[1], "re": r[2], "im": r[3], "bound": r[4]} for r in rows],
            "n_bound_per_copy": spec.n_bound,
            "gap": thirdq.liouvillian_gap(spec),
        }
        single = (model.gamma_left == 0) != (model.gamma_right == 0)
        if single and model.t1 > 0 and np.isclose(model.t2, 1.0):
            g = max(model.gamma_left, model.gamma_right)
            payload["predictions"] = {
                "dark": analytic.dark_state_for_model(model),
                "bound": analytic.boundary_bound_state_prediction(model.t1, model.t2, g),
            }
        write_json(out / "rapidity.json", man, payload)
    else:
        write_tsv(out / "rapidity.tsv", man, ["index", "copy", "re_E", "im_E", "bound"], rows)
    return 0


def _spectrum_outputs(args, cfg, model, suffix):
    spec = thirdq.rapidity_spectrum(model, **_classify_kw(cfg))
    max_terms = cfg.get_int("max_terms")
    budget = cfg.get_int("budget", thirdq.DEFAULT_BUDGET)
    lspec = thirdq.liouvillian_spectrum(spec, max_terms=max_terms, budget=budget)
    stripes = thirdq.stripe_decompose(lspec)
    man = _manifest(args, cfg, model, max_terms=max_terms, budget=budget)
    out = Path(args.out)
    if args.format == "json":
        write_json(
            out / f"spectrum{suffix}.json",
            man,
            {
                "complete": lspec.complete,
                "values": [{"re": v.real, "im": v.imag, "multiplicity": m, "stripe": s}
                           for v, m, s in zip(lspec.values, lspec.multiplicity, lspec.stripe_index)],
                "stripes": [vars(s) for s in stripes],
                "n_stripes": len(stripes),
            },
        )
    else:
        write_tsv(
            out / f"spectrum{suffix}.tsv",
            man,
            ["re_lambda", "im_lambda", "stripe", "multiplicity"],
            zip(lspec.values.real, lspec.values.imag, lspec.stripe_index, lspec.multiplicity),
        )
        write_tsv(
            out / f"stripes{suffix}.tsv",
            man,
            ["stripe", "count", "re_min", "re_max", "im_min", "im_max"],
            [(s.index, s.count, s.re_min, s.re_max, s.im_min, s.im_max) for s in stripes],
        )
    return len(stripes)


def cmd_spectrum(args, cfg):
    model = cfg.model()
    _spectrum_outputs(args, cfg, model, "")
    if cfg.get_bool("dual"):
        dual = model.with_strengths(
            dynamics.dual_strength(model.gamma_left), dynamics.dual_strength(model.gamma_right)
        )
        _spectrum_outputs(args, cfg, dual, "_dual")
    return 0


def cmd_dynamics(args, cfg):
    model = cfg.model()
    grid = _time_grid(cfg)
    profiles = cfg.get_bool("profiles")
    traj = dynamics.density_trajectory(model, grid, profiles=profiles)
    columns, cols = ["t", "n"], [grid, traj.density]
    payload = {"times": grid, "density": traj.density, "max_antisymmetry": traj.max_antisymmetry}
    params = {"profiles": profiles, "n_times": int(grid.size)}
    if cfg.get_bool("dual"):
        rep = dynamics.duality_report(
            model.t1, model.t2, model.gamma_left, model.gamma_right, model.n_cells, grid,
            left_kind=_kind(model, "left"), right_kind=_kind(model, "right"), threads=args.threads,
        )
        columns += ["n_dual", "abs_diff"]
        cols += [rep.dual.density, rep.difference]
        payload["dual"] = {
            "model": rep.dual_model.as_dict(),
            "density": rep.dual.density,
            "late_max_difference": rep.late_max_difference,
        }
    try:
        ss = dynamics.steady_state(model, tol=max(args.tol, 1e-10))
        payload["steady_state"] = {
            "density": dynamics.density(ss),
            "residual": dynamics.lyapunov_residual(dynamics.build_dynamics_matrices(model), ss.gamma),
        }
    except dynamics.SteadyStateError as exc:
        payload["steady_state"] = {"error": str(exc), "min_rate_sum": exc.min_rate_sum}
    if profiles:
        columns += [f"n_{x + 1}" for x in range(model.n_sites)]
        cols += list(traj.profiles.T)
        payload["profiles"] = traj.profiles
    man = _manifest(args, cfg, model, **params)
    out = Path(args.out)
    if args.format == "json":
        write_json(out / "trajectory.json", man, payload)
    else:
        write_tsv(out / "trajectory.tsv", man, columns, zip(*cols))
    return 0


def _kind(model, side):
    d = model.dissipator(side)
    return "loss" if d is None else d.kind.value


def cmd_gap_scan(args, cfg):
    model = cfg.model()
    n_list = cfg.get_int_list("n_list")
    if not n_list:
        raise ConfigError(f"{cfg.source}: gap-scan needs 'n_list'")
    series = fitting.gap_scan(model, n_list, floor=cfg.get_float("floor", fitting.GAP_FLOOR), threads=args.threads)
    fits = {}
    if len(series) >= 4:
        sel = fitting.model_select(series)
        fits = {"selected": sel.best, "degenerate": sel.degenerate,
                "exponential": sel.exponential, "powerlaw": sel.powerlaw}
    elif len(series) == 3:
        fits = {"exponential": fitting.fit_exponential(series), "powerlaw": fitting.fit_powerlaw(series)}
    man = _manifest(args, cfg, model, n_list=n_list)
    out = Path(args.out)
    if args.format == "json":
        payload = {"series": series.points, "excluded": list(series.excluded)}
        payload.update({k: (vars(v) if isinstance(v, fitting.ScalingFit) else v) for k, v in fits.items()})
        write_json(out / "gap_scan.json", man, payload)
    else:
        write_tsv(out / "gap_series.tsv", man, ["N", "gap"], series.points)
        rows = [
            (f.form, f.prefactor, f.rate, f.r_squared, fits.get("selected") == f.form)
            for f in fits.values() if isinstance(f, fitting.ScalingFit)
        ]
        write_tsv(out / "gap_fit.tsv", man, ["form", "prefactor", "rate", "r_squared", "selected"], rows)
    return 0


def dark_state_report(model, **classify_kw) -> dict:
    """Analytic prediction next to the numerically smallest-|E| rapidity."""
    pred = analytic.dark_state_for_model(model)
    spec = thirdq.rapidity_spectrum(model, **classify_kw)
    k = int(np.argmin(np.abs(spec.distinct)))
    vec = spec.vectors[:, k]
    cells = np.sqrt((np.abs(vec) ** 2).reshape(-1, 2).sum(axis=1))
    ratios = cells[:-1] / cells[1:]
    return {
        "prediction": pred,
        "message": "dark state predicted" if pred.exists else "no dark state",
        "numeric_min_abs_E": float(np.abs(spec.distinct[k])),
        "numeric_E": spec.distinct[k],
        "cell_amplitudes": cells,
        "decay_ratio": ratio_near_edge(cells, pred.localized_side or "right"),
        "cell_ratios": ratios,
    }


def ratio_near_edge(cells, side, n_ratios=5):
    """Median amplitude ratio between consecutive cells, starting from the
    localization edge and moving inward."""
    seq = cells[::-1] if side == "right" else cells
    r = seq[1 : n_ratios + 1] / seq[:n_ratios]
    return float(np.median(r))


def cmd_dark_state(args, cfg):
    model = cfg.model()
    try:
        rep = dark_state_report(model, **_classify_kw(cfg))
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    man = _manifest(args, cfg, model)
    out = Path(args.out)
    if args.format == "json":
        write_json(out / "dark_state.json", man, rep)
    else:
        pred = rep["prediction"]
        write_tsv(
            out / "dark_state.tsv",
            man,
            ["cell", "amplitude"],
            [(i + 1, a) for i, a in enumerate(rep["cell_amplitudes"])],
        )
        write_tsv(
            out / "dark_state_summary.tsv",
            man,
            ["exists", "x_analytic", "numeric_min_abs_E", "decay_ratio", "localized_side"],
            [(pred.exists, pred.x, rep["numeric_min_abs_E"], rep["decay_ratio"], pred.localized_side or "none")],
        )
    print(rep["message"])
    return 0


def validation_checks(model, times, tol=DEFAULT_TOL, jump_factor=2.0) -> list[dict]:
    """Oracle comparisons; each entry has name, value, tolerance and pass."""
    sop = oracle.full_liouvillian_matrix(model, jump_factor=jump_factor)
    checks = []

    def add(name, value, tolerance):
        checks.append({"check": name, "value": float(value), "tolerance": tolerance, "pass": bool(value < tolerance)})

    ed = oracle.ed_spectrum(sop)
    lspec = thirdq.liouvillian_spectrum(thirdq.rapidity_spectrum(model))
    add("spectrum_pairing_distance", thirdq.pairing_distance(ed, lspec.expanded()), tol)
    add("max_re_lambda_ed", max(0.0, ed.real.max()), 1e-10)
    traj = dynamics.density_trajectory(model, times)
    rho0 = oracle.fully_occupied_density_matrix(model.n_sites)
    edt = oracle.ed_evolve(rho0, sop, times)
    add("dynamics_max_density_delta", np.abs(traj.density - edt.density).max(), max(tol, 1e-6))
    add("ed_trace_deviation", np.abs(edt.traces - 1).max(), 1e-10)
    if model.gamma_left > 0 or model.gamma_right > 0:
        try:
            ss = dynamics.steady_state(model)
            rho_ss = oracle.ed_steady_state(sop)
            g_ed = oracle.correlation_from_density_matrix(rho_ss, model.n_sites)
            add("steady_state_gamma_delta", np.abs(ss.gamma - g_ed).max(), tol)
        except (dynamics.SteadyStateError, RuntimeError) as exc:
            checks.append({"check": "steady_state_gamma_delta", "value": None, "tolerance": tol,
                           "pass": False, "error": str(exc)})
    else:
        add("closed_system_max_abs_re_lambda", np.abs(ed.real).max(), 1e-10)
    return checks


def cmd_validate(args, cfg):
    model = cfg.model()
    if model.n_cells > oracle.MAX_CELLS:
        raise CommandError(f"validate supports n_cells <= {oracle.MAX_CELLS}")
    times = np.array(sorted(cfg.get_float_list("times"))) if cfg.has("times") else np.logspace(-1, 2, 20)
    jump = cfg.get_float("jump_factor", 2.0)
    checks = validation_checks(model, times, args.tol, jump)
    man = _manifest(args, cfg, model, jump_factor=jump, n_times=int(times.size))
    out = Path(args.out)
    if args.format == "json":
        write_json(out / "validate.json", man, {"checks": checks, "all_pass": all(c["pass"] for c in checks)})
    else:
        write_tsv(out / "validate.tsv", man, ["check", "value", "tolerance", "pass"],
                  [(c["check"], c["value"], c["tolerance"], c["pass"]) for c in checks])
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['check']}  {c['value']}  (tol {c['tolerance']:g})")
    return 0 if all(c["pass"] for c in checks) else 1


COMMANDS = {
    "rapidity": cmd_rapidity,
    "spectrum": cmd_spectrum,
    "dynamics": cmd_dynamics,
    "gap-scan": cmd_gap_scan,
    "dark-state": cmd_dark_state,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dssh", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value model/command file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("tsv", "json"), default="tsv")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--timestamp", action="store_true", help="record wall-clock time in the manifest")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ModelError, CommandError, thirdq.EnumerationBudgetError, oracle.OracleCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
