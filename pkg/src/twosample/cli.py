"""Batch command-line interface.

Subcommands cover the full pipeline: solving similar ("ideal") and
variance-angle (Fisher-Behrens) criterion tables, evaluating exact
probabilities, seeded simulation runs with confidence assignment,
power comparison against the harmonic-ratio t test, and the
cross-level consistency scan.  Outputs go through the stable file
formats; every invocation prints a JSON manifest sufficient to
reproduce it.

Exit codes: 0 success, 1 validation or I/O error, 2 numerical
non-convergence (best-effort outputs are still written and flagged).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .criteria import CriterionTable, ConstantCriterion, build_c_lattice
from .design import Design, VariancePoint, theta_deg_from_c
from .distributions import INFINITY, normal_quantile, student_t_quantile
from .fisher_behrens import fb_criterion_inf_n1, solve_fb_criterion
from .ideal import (
    ResidualReport,
    SolverSettings,
    residual_report,
    solve_ideal_criterion,
)
from .kernel import prob_v_below, prob_v_below_inf_n1
from .linnik import LINNIK_SETTINGS, estimate_alpha_L
from .power import PowerSpec, power_table
from .simulate import (
    assign_confidence_fb,
    assign_confidence_ideal,
    build_level_set,
    ks_band,
    ks_to_curve,
    ks_to_diagonal,
    ranked_ecdf,
    run_simulation,
    theoretical_curve,
)
from . import io_formats as io

__all__ = ["main", "entry"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


# --------------------------------------------------------------------------
# argument plumbing


def _df_value(text: str, *, allow_inf: bool) -> float:
    if text.strip().lower() == "inf":
        if not allow_inf:
            raise argparse.ArgumentTypeError(
                "n2 = inf is not supported; swap the samples so the infinite one is n1"
            )
        return INFINITY
    try:
        return float(int(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer or 'inf', got {text!r}") from exc


def _n1_arg(text: str) -> float:
    return _df_value(text, allow_inf=True)


def _n2_arg(text: str) -> float:
    return _df_value(text, allow_inf=False)


def _alpha_arg(text: str) -> float:
    value = float(text)
    if not (0.0 < value < 0.5):
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 0.5), got {text}")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _add_design_flags(p: argparse.ArgumentParser, *, inf_ok: bool = True) -> None:
    p.add_argument("--n1", required=True, type=_n1_arg if inf_ok else _n2_arg,
                   help="sample size of the first sample (or 'inf')" if inf_ok
                   else "sample size of the first sample")
    p.add_argument("--n2", required=True, type=_n2_arg,
                   help="sample size of the second sample")


def _add_nuisance_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--zeta", type=float, help="variance ratio sigma1^2/sigma2^2")
    g.add_argument("--gamma", type=float, help="bounded ratio n2*zeta/(n1+n2*zeta)")
    g.add_argument("--psi-deg", type=float, help="variance angle in degrees")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None,
                   help="residual goal override (both solver regimes)")
    p.add_argument("--max-sweeps", type=int, default=None, help="solver sweep limit")


def _threads_arg(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return value


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--threads", type=_threads_arg, default=1,
                   help="worker pool size (reserved; evaluation is deterministic)")


def _design(args: argparse.Namespace) -> Design:
    return Design(args.n1 if args.n1 == INFINITY else int(args.n1), int(args.n2))


def _nuisance(args: argparse.Namespace, d: Design) -> VariancePoint:
    if args.zeta is not None:
        return VariancePoint.from_zeta(args.zeta, d)
    if args.gamma is not None:
        return VariancePoint.from_gamma(args.gamma, d)
    return VariancePoint.from_psi_deg(args.psi_deg, d)


def _settings(args: argparse.Namespace) -> SolverSettings | None:
    overrides = {}
    if getattr(args, "tol", None) is not None:
        overrides["tolerance"] = args.tol
        overrides["defect_tolerance"] = args.tol
    if getattr(args, "max_sweeps", None) is not None:
        overrides["max_sweeps"] = args.max_sweeps
    return SolverSettings(**overrides) if overrides else None


def _out_dir(args: argparse.Namespace) -> Path | None:
    if args.out is None:
        return None
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _df_tag(value: float) -> str:
    return "inf" if value == INFINITY else str(int(value))


def _emit_manifest(command: str, params: dict, files: dict[str, str],
                   out: Path | None) -> None:
    payload = {
        "kind": "twosample-command",
        "schema": io.SCHEMA_VERSION,
        "command": command,
        "params": params,
        "files": files,
        "version": __version__,
    }
    text = json.dumps(payload, sort_keys=True)
    print(f"manifest: {text}")
    if out is not None:
        io._atomic_write(out / "manifest.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _report_table(t: CriterionTable) -> None:
    mid = float(t.value_at_c(0.5))
    print(
        f"family={t.family} n1={_df_tag(t.design.n1)} n2={_df_tag(t.design.n2)} "
        f"alpha={t.alpha:g} lattice={t.lattice_kind} converged={t.converged} "
        f"sweeps={t.sweeps} max|residual|={t.max_abs_residual:.3e} v(c=0.5)={mid:.4f}"
    )


# --------------------------------------------------------------------------
# subcommands


def _cmd_solve_ideal(args: argparse.Namespace) -> int:
    d = _design(args)
    t = solve_ideal_criterion(d, args.alpha, settings=_settings(args))
    _report_table(t)
    out = _out_dir(args)
    files = {}
    if out is not None:
        name = f"ideal_{_df_tag(d.n1)}x{_df_tag(d.n2)}_a{args.alpha:g}.csv"
        io.write_table(t, out / name)
        files["table"] = name
    _emit_manifest("solve-ideal", {
        "n1": _df_tag(d.n1), "n2": _df_tag(d.n2), "alpha": args.alpha,
        "tol": args.tol, "max_sweeps": args.max_sweeps,
    }, files, out)
    return EXIT_OK if t.converged else EXIT_NOT_CONVERGED


def _fb_table(d: Design, alpha: float) -> CriterionTable:
    if not d.is_infinite:
        return solve_fb_criterion(d, alpha)
    nodes = build_c_lattice()
    values = np.array([
        fb_criterion_inf_n1(d.nu2, theta_deg_from_c(c), alpha) for c in nodes
    ])
    # exact limits at the corners (c=0 -> t_{nu2}, c=1 -> normal)
    values[0] = student_t_quantile(1.0 - alpha, d.nu2)
    values[-1] = normal_quantile(1.0 - alpha)
    return CriterionTable(
        family="fisher-behrens", design=d, alpha=alpha, lattice_kind="c101",
        nodes=nodes, values=values, residuals=np.zeros(nodes.size),
        converged=True, tolerance=1e-12, sweeps=0,
    )


def _cmd_solve_fb(args: argparse.Namespace) -> int:
    d = _design(args)
    t = _fb_table(d, args.alpha)
    _report_table(t)
    out = _out_dir(args)
    files = {}
    if out is not None:
        name = f"fb_{_df_tag(d.n1)}x{_df_tag(d.n2)}_a{args.alpha:g}.csv"
        io.write_table(t, out / name)
        files["table"] = name
    _emit_manifest("solve-fb", {
        "n1": _df_tag(d.n1), "n2": _df_tag(d.n2), "alpha": args.alpha,
    }, files, out)
    return EXIT_OK


def _cmd_prob(args: argparse.Namespace) -> int:
    d = _design(args)
    if args.table is not None:
        criterion = io.read_table(args.table).criterion()
        source = str(args.table)
    else:
        criterion = ConstantCriterion(
            normal_quantile(1.0 - args.alpha) if d.is_infinite
            else student_t_quantile(1.0 - args.alpha, d.nu))
        source = "constant t_nu(alpha)"
    if d.is_infinite:
        if args.gamma is None:
            raise ValueError("with n1 = inf the nuisance value must be --gamma")
        p = prob_v_below_inf_n1(criterion, args.gamma, d.nu2)
        nuisance = {"gamma": args.gamma}
    else:
        vp = _nuisance(args, d)
        p = prob_v_below(criterion, vp, d)
        nuisance = {"zeta": vp.zeta}
    print(f"Pr{{V <= v(Theta)}} = {p:.10f}   (criterion: {source})")
    _emit_manifest("prob", {
        "n1": _df_tag(d.n1), "n2": _df_tag(d.n2), "alpha": args.alpha,
        **nuisance, "table": None if args.table is None else str(args.table),
    }, {}, None)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    d = _design(args)
    if d.is_infinite:
        raise ValueError("simulation requires finite sample sizes")
    vp = _nuisance(args, d)
    run = run_simulation(args.seed, d, vp, args.reps)

    code = EXIT_OK
    curve = None
    if args.family == "ideal":
        ls = build_level_set(d, levels=args.levels, settings=_settings(args))
        if not all(t.converged for t in ls.tables):
            print("warning: some level tables did not converge", file=sys.stderr)
            code = EXIT_NOT_CONVERGED
        run = assign_confidence_ideal(run, ls)
        upper = ls.top_level
        ks = ks_to_diagonal(run.assigned_pis(), upper=upper)
        print(f"assigned {run.n_assigned}/{run.n_reps} records "
              f"(clamped {int(np.sum(run.clamped))}); "
              f"KS to diagonal over [0, {upper:g}] = {ks:.4f} "
              f"(95% band {ks_band(run.n_assigned):.4f})")
    else:
        run = assign_confidence_fb(run)
        ls = build_level_set(d, levels=args.levels, family="fisher-behrens",
                             inverse_tail=False)
        curve = theoretical_curve(ls, vp, d)
        ks = ks_to_curve(run.assigned_pis(), curve)
        print(f"assigned {run.n_reps}/{run.n_reps} records; "
              f"KS to theoretical curve = {ks:.4f} "
              f"(95% band {ks_band(run.n_reps):.4f})")

    out = _out_dir(args)
    files = {}
    if out is not None:
        io.write_records(run, out / "records.csv")
        files["records"] = "records.csv"
        io.write_ecdf(ranked_ecdf(run.assigned_pis()), out / "ecdf.csv")
        files["ecdf"] = "ecdf.csv"
        if curve is not None:
            io.write_curve(curve, out / "curve.csv")
            files["curve"] = "curve.csv"
        io.write_manifest(io.RunManifest.for_run(run, files), out / "run_manifest.json")
        files["run_manifest"] = "run_manifest.json"
    _emit_manifest("simulate", {
        "n1": _df_tag(d.n1), "n2": _df_tag(d.n2), "seed": args.seed,
        "reps": args.reps, "zeta": vp.zeta, "psi_deg": vp.psi_deg,
        "family": args.family,
        "levels": args.levels,
    }, files, out)
    return code


def _cmd_power(args: argparse.Namespace) -> int:
    d = _design(args)
    if d.is_infinite:
        raise ValueError("power comparison requires finite sample sizes")
    zeta = args.zeta if args.zeta is not None else 1.0
    criterion = solve_ideal_criterion(d, args.alpha, settings=_settings(args))
    spec = PowerSpec(design=d, alpha=args.alpha, criterion=criterion, zeta=zeta)
    rows = power_table(spec)
    print("delta    power_T    power_V    gap")
    for row in rows:
        print(f"{row.delta:5.2f} {row.power_t:10.6f} {row.power_v:10.6f} {row.gap:+.6f}")
    worst = max(abs(row.gap) for row in rows)
    print(f"max |gap| = {worst:.6f}")
    out = _out_dir(args)
    files = {}
    if out is not None:
        io.write_power_table(rows, out / "power.csv", design=d, alpha=args.alpha, zeta=zeta)
        files["power"] = "power.csv"
    _emit_manifest("power", {
        "n1": _df_tag(d.n1), "n2": _df_tag(d.n2), "alpha": args.alpha, "zeta": zeta,
    }, files, out)
    return EXIT_OK if criterion.converged else EXIT_NOT_CONVERGED


def _cmd_linnik(args: argparse.Namespace) -> int:
    d = _design(args)
    if d.is_infinite:
        raise ValueError("consistency scan requires finite sample sizes")
    grid = args.levels or [0.25, 0.3, 0.35, 0.4]
    settings = _settings(args) or LINNIK_SETTINGS
    bracket = estimate_alpha_L(d, grid, settings=settings)
    for rep in bracket.reports:
        state = "crossing" if rep.has_crossing else ("inconclusive" if rep.inconclusive else "nested")
        print(f"alpha pair {rep.alpha_pair}: {state} "
              f"(residual quality {rep.residual_quality:.1e})")
    if bracket.status == "bracketed":
        print(f"alpha_L bracket: ({bracket.lower}, {bracket.upper})")
    else:
        print(f"alpha_L: {bracket.status}")
    out = _out_dir(args)
    files = {}
    if out is not None:
        io.write_crossings(bracket.reports, out / "crossings.csv")
        files["crossings"] = "crossings.csv"
    _emit_manifest("linnik", {
        "n1": _df_tag(d.n1), "n2": _df_tag(d.n2), "levels": list(grid),
    }, files, out)
    return EXIT_OK


def _table2_batch(alpha: float, settings: SolverSettings | None) -> list[CriterionTable]:
    tables = []
    for nu2 in (10, 15, 30):
        for nu1 in (10, 15, 30):
            tables.append(solve_ideal_criterion(Design(nu1 + 1, nu2 + 1), alpha,
                                                settings=settings))
        tables.append(solve_ideal_criterion(Design(INFINITY, nu2 + 1), alpha,
                                            settings=settings))
    tables.append(solve_ideal_criterion(Design(INFINITY, INFINITY), alpha))
    return tables


def _cmd_table2(args: argparse.Namespace) -> int:
    tables = _table2_batch(args.alpha, _settings(args))
    grid = io.emit_table2(tables)
    print(grid, end="")
    out = _out_dir(args)
    files = {}
    code = EXIT_OK
    if not all(t.converged for t in tables):
        print("warning: some tables did not converge", file=sys.stderr)
        code = EXIT_NOT_CONVERGED
    if out is not None:
        io.write_table2(tables, out / "table2.txt")
        files["table2"] = "table2.txt"
        reports = []
        for t in tables:
            name = f"ideal_{_df_tag(t.design.n1)}x{_df_tag(t.design.n2)}_a{args.alpha:g}.csv"
            io.write_table(t, out / name)
            files[f"table_{_df_tag(t.design.nu2)}_{_df_tag(t.design.nu1)}"] = name
            reports.append(residual_report(t))
        io.write_residual_report(reports, out / "residuals.csv")
        files["residuals"] = "residuals.csv"
    _emit_manifest("table2", {"alpha": args.alpha}, files, out)
    return code


def _cmd_residuals(args: argparse.Namespace) -> int:
    if args.table is not None:
        t = io.read_table(args.table)
    else:
        if args.n1 is None or args.n2 is None:
            raise ValueError("either --table or both --n1 and --n2 are required")
        d = _design(args)
        t = solve_ideal_criterion(d, args.alpha, settings=_settings(args))
    rep = residual_report(t)
    print(
        f"n1={_df_tag(rep.design.n1)} n2={_df_tag(rep.design.n2)} alpha={rep.alpha:g}: "
        f"min d = {rep.min_d:+.2e} at gamma={rep.gamma_at_min:.3f}, "
        f"max d = {rep.max_d:+.2e} at gamma={rep.gamma_at_max:.3f}, "
        f"mean |d| = {rep.mean_abs_d:.2e}"
    )
    out = _out_dir(args)
    files = {}
    if out is not None:
        io.write_residual_report([rep], out / "residuals.csv")
        files["residuals"] = "residuals.csv"
    _emit_manifest("residuals", {
        "table": None if args.table is None else str(args.table),
        "n1": _df_tag(rep.design.n1), "n2": _df_tag(rep.design.n2),
        "alpha": t.alpha,
    }, files, out)
    return EXIT_OK if t.converged else EXIT_NOT_CONVERGED


def _cmd_ecdf(args: argparse.Namespace) -> int:
    run = io.read_records(args.records)
    if run.pi is None:
        raise ValueError("records carry no assigned confidences")
    pis = run.assigned_pis()
    curve_ecdf = ranked_ecdf(pis)
    print(f"{pis.size} assigned records; KS to diagonal = "
          f"{curve_ecdf.ks_to_diagonal():.4f} (95% band {ks_band(pis.size):.4f})")
    if args.curve is not None:
        curve = io.read_curve(args.curve)
        print(f"KS to theoretical curve = {ks_to_curve(pis, curve):.4f}")
    out = _out_dir(args)
    files = {}
    if out is not None:
        io.write_ecdf(curve_ecdf, out / "ecdf.csv")
        files["ecdf"] = "ecdf.csv"
    _emit_manifest("ecdf", {
        "records": str(args.records),
        "curve": None if args.curve is None else str(args.curve),
    }, files, out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twosample",
        description="Exact criteria, power, and calibration runs for the "
                    "two-sample problem with unequal variances.",
    )
    parser.add_argument("--version", action="version", version=f"twosample {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable[[argparse.Namespace], int], help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    p = add("solve-ideal", _cmd_solve_ideal, "solve the similar-criterion table")
    _add_design_flags(p)
    p.add_argument("--alpha", required=True, type=_alpha_arg)
    _add_solver_flags(p)
    _add_common_flags(p)

    p = add("solve-fb", _cmd_solve_fb, "solve the variance-angle criterion table")
    _add_design_flags(p)
    p.add_argument("--alpha", required=True, type=_alpha_arg)
    _add_common_flags(p)

    p = add("prob", _cmd_prob, "exact Pr{V <= v(Theta)} at a nuisance value")
    _add_design_flags(p)
    p.add_argument("--alpha", required=True, type=_alpha_arg)
    _add_nuisance_flags(p)
    p.add_argument("--table", type=Path, default=None,
                   help="criterion table file (default: constant t_nu(alpha))")
    _add_common_flags(p)

    p = add("simulate", _cmd_simulate, "seeded replicates with confidence assignment")
    _add_design_flags(p, inf_ok=False)
    _add_nuisance_flags(p)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--reps", type=int, default=5000)
    p.add_argument("--family", choices=("fisher-behrens", "ideal"), default="fisher-behrens")
    p.add_argument("--levels", type=_float_list, default=None,
                   help="confidence levels 1-2*alpha, e.g. 0.1,0.2,...,0.9")
    _add_solver_flags(p)
    _add_common_flags(p)

    p = add("power", _cmd_power, "power of the similar criterion vs the harmonic t test")
    _add_design_flags(p, inf_ok=False)
    p.add_argument("--alpha", required=True, type=_alpha_arg)
    p.add_argument("--zeta", type=float, default=None, help="variance ratio (default 1)")
    _add_solver_flags(p)
    _add_common_flags(p)

    p = add("linnik", _cmd_linnik, "cross-level consistency scan and alpha_L bracket")
    _add_design_flags(p, inf_ok=False)
    p.add_argument("--levels", type=_float_list, default=None,
                   help="significance levels alpha, ascending (default 0.25,0.3,0.35,0.4)")
    _add_solver_flags(p)
    _add_common_flags(p)

    p = add("table2", _cmd_table2, "reproduce the printed 2.5%% critical-value grid")
    p.add_argument("--alpha", type=_alpha_arg, default=0.025)
    _add_solver_flags(p)
    _add_common_flags(p)

    p = add("residuals", _cmd_residuals, "similarity-defect report for a table")
    p.add_argument("--n1", type=_n1_arg, default=None,
                   help="sample size of the first sample (or 'inf')")
    p.add_argument("--n2", type=_n2_arg, default=None,
                   help="sample size of the second sample")
    p.add_argument("--alpha", type=_alpha_arg, default=0.025)
    p.add_argument("--table", type=Path, default=None, help="read table instead of solving")
    _add_solver_flags(p)
    _add_common_flags(p)

    p = add("ecdf", _cmd_ecdf, "ranked ECDF and KS distances from a records file")
    p.add_argument("--records", required=True, type=Path)
    p.add_argument("--curve", type=Path, default=None, help="theoretical-curve file")
    _add_common_flags(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # normalize argparse's exit(2) to the validation code
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
