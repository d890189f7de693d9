"""Command-line entry point: one binary, eleven subcommands, CSV and
snapshot outputs with a config-hash provenance header.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 acceptance failure under verify-all.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, fundamental, heat, scaling, solver
from .config import ExperimentConfig, load_config
from .errors import ConfigError, NldiffError, NonfiniteState
from .fields import Field, integrate, save, sup_norm
from .kernel import diffusivity, discrete_mass_defect, spectral_symbol
from .scaling import representative_datum, rescale_field, scaling_law


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: str, columns, rows, config_hash: str) -> None:
    """Atomic CSV write with a one-line provenance header."""
    lines = [f"# config {config_hash}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    payload = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _tag(value: float) -> str:
    """Filename-safe tag for a time or ladder value."""
    text = format(float(value), "g")
    return text.replace(".", "p").replace("-", "m").replace("+", "")


def cmd_kernel(cfg: ExperimentConfig, outdir: str, args) -> int:
    kern = cfg.kernel()
    grid = cfg.grid()
    sym = spectral_symbol(kern, grid)
    rows = [(kern.family, kern.support_radius, kern.dimension,
             kern.normalization, diffusivity(kern),
             discrete_mass_defect(kern, grid.points_per_axis, grid.half_length),
             float(sym.values.min()), grid.spacing)]
    write_csv(os.path.join(outdir, "kernel.csv"),
              ("family", "support_radius", "dimension", "normalization",
               "diffusivity", "mass_defect", "symbol_min", "dx"),
              rows, cfg.config_hash)
    return 0


def cmd_w_table(cfg: ExperimentConfig, outdir: str, args) -> int:
    report = fundamental.barrier_report(cfg.kernel(), cfg.grid(), cfg.w_t_list,
                                        K=cfg.exclusion_K)
    rows = [(r.t, r.mass, r.sup_w, r.c_w, r.c_grad, r.c_t, r.l1_grad, r.l1_wt)
            for r in report.rows]
    write_csv(os.path.join(outdir, "w_table.csv"),
              ("t", "mass", "sup", "C_W", "C_grad", "C_T", "l1_grad", "l1_wt"),
              rows, cfg.config_hash)
    return 0


def cmd_w_snapshot(cfg: ExperimentConfig, outdir: str, args) -> int:
    kern, grid, t = cfg.kernel(), cfg.grid(), cfg.w_t
    tag = _tag(t)
    evaluation = fundamental.w_field(kern, grid, t)
    paths = [os.path.join(outdir, f"w_t{tag}.nldf")]
    save(evaluation.field, paths[0])
    for axis, comp in enumerate(fundamental.grad_w_field(kern, grid, t)):
        paths.append(os.path.join(outdir, f"gradw{axis}_t{tag}.nldf"))
        save(comp, paths[-1])
    paths.append(os.path.join(outdir, f"wt_t{tag}.nldf"))
    save(fundamental.wt_field(kern, grid, t), paths[-1])
    for path in paths:
        print(path)
    return 0


def _simulate(cfg: ExperimentConfig):
    u0 = representative_datum(cfg.family(), cfg.grid())
    return u0, solver.evolve(cfg.solve_config(), u0)


def cmd_simulate(cfg: ExperimentConfig, outdir: str, args) -> int:
    _, traj = _simulate(cfg)
    rows = []
    for snap, absorbed in zip(traj.snapshots, traj.absorbed_at):
        save(snap, os.path.join(outdir, f"u_t{_tag(snap.time)}.nldf"))
        rows.append((snap.time, integrate(snap), sup_norm(snap), absorbed))
    write_csv(os.path.join(outdir, "simulate.csv"),
              ("t", "mass", "sup", "absorbed"), rows, cfg.config_hash)
    return 0


def cmd_limit(cfg: ExperimentConfig, outdir: str, args) -> int:
    problem = cfg.limit_problem()
    traj = heat.evolve_limit(problem, cfg.grid(), cfg.dt, cfg.snapshot_times)
    rows = []
    for snap in traj.snapshots:
        save(snap, os.path.join(outdir, f"U_t{_tag(snap.time)}.nldf"))
        rows.append((snap.time, integrate(snap), sup_norm(snap)))
    write_csv(os.path.join(outdir, "limit.csv"), ("t", "mass", "sup"),
              rows, cfg.config_hash)
    return 0


def _fine_solve_for_ladder(cfg: ExperimentConfig):
    """Fine solve whose snapshots sit at k^2 for every ladder k."""
    times = tuple(sorted(set(float(k) ** 2 for k in cfg.k_ladder)))
    fine = solver.SolveConfig(kernel=cfg.kernel(), grid=cfg.grid(), p=cfg.p,
                              dt=cfg.dt, t_end=max(times),
                              snapshot_times=times)
    u0 = representative_datum(cfg.family(), cfg.grid())
    return solver.evolve(fine, u0)


def _ladder_entries(cfg: ExperimentConfig, traj, threads: int):
    fam = cfg.family()
    law = scaling_law(fam, cfg.p) if cfg.p is not None else None
    target = cfg.target_grid()

    def one(k: float):
        f_k = float(law.f(k)) if law is not None else float(scaling.f_value(fam, k))
        F_k = float(law.F(k)) if law is not None else None
        uk = rescale_field(traj.snapshot_at(k * k), k, f_k, target)
        return k, f_k, F_k, uk

    ladder = [float(k) for k in cfg.k_ladder]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, ladder))
    return [one(k) for k in ladder]


def cmd_rescale(cfg: ExperimentConfig, outdir: str, args) -> int:
    traj = _fine_solve_for_ladder(cfg)
    rows = []
    for k, f_k, F_k, uk in _ladder_entries(cfg, traj, args.threads):
        save(uk, os.path.join(outdir, f"uk_k{_tag(k)}.nldf"))
        rows.append((k, f_k, F_k, sup_norm(uk)))
    write_csv(os.path.join(outdir, "rescale.csv"),
              ("k", "f_k", "F_k", "sup_uk"), rows, cfg.config_hash)
    return 0


def cmd_compare(cfg: ExperimentConfig, outdir: str, args) -> int:
    if cfg.window_R > 0.5 * cfg.target_half_length:
        raise ConfigError("rescaling.window_R: exceeds half the target "
                          "half-length")
    traj = _fine_solve_for_ladder(cfg)
    fam = cfg.family()
    target = cfg.target_grid()
    mass = None
    if fam.kind.value == "integrable" and cfg.p is not None:
        mass = analysis.mass_audit(traj).M_limit
    problem = cfg.limit_problem(mass=mass)
    ref_dt = min(cfg.dt, 2.5e-3)
    reference = heat.solve_limit_at(problem, target, ref_dt, 1.0)
    window = target.radius() <= cfg.window_R
    rows = []
    for k, f_k, F_k, uk in _ladder_entries(cfg, traj, args.threads):
        metric = float(np.max(np.abs(uk.values - reference.values)[window]))
        rows.append((k, k * k, f_k, F_k, metric))
    write_csv(os.path.join(outdir, "compare.csv"),
              ("k", "t", "f_k", "F_k", "metric"), rows, cfg.config_hash)
    if len(rows) >= 5:
        fit = analysis.rate_fit([(row[1], row[4]) for row in rows])
        write_csv(os.path.join(outdir, "compare_rate.csv"),
                  ("exponent", "intercept", "r_squared", "t_min", "t_max",
                   "n_points"),
                  [(fit.exponent, fit.intercept, fit.r_squared, fit.window[0],
                    fit.window[1], fit.n_points)], cfg.config_hash)
    return 0


def cmd_rates(cfg: ExperimentConfig, outdir: str, args) -> int:
    _, traj = _simulate(cfg)
    rows = [(s.time, sup_norm(s), integrate(s)) for s in traj.snapshots]
    write_csv(os.path.join(outdir, "rates.csv"), ("t", "sup", "mass"),
              rows, cfg.config_hash)
    series = [(t, s) for t, s, _ in rows if t > 0 and s > 0]
    fit = analysis.rate_fit(series, window=(cfg.t_end / 100.0, cfg.t_end))
    write_csv(os.path.join(outdir, "rates_fit.csv"),
              ("exponent", "intercept", "r_squared", "t_min", "t_max",
               "n_points"),
              [(fit.exponent, fit.intercept, fit.r_squared, fit.window[0],
                fit.window[1], fit.n_points)], cfg.config_hash)
    return 0


def cmd_mass_audit(cfg: ExperimentConfig, outdir: str, args) -> int:
    _, traj = _simulate(cfg)
    audit = analysis.mass_audit(traj)
    rows = [(t, lhs, rhs, lhs - rhs)
            for t, lhs, rhs in zip(audit.t_list, audit.lhs, audit.rhs)]
    write_csv(os.path.join(outdir, "mass_audit.csv"),
              ("t", "mass", "expected", "residual"), rows, cfg.config_hash)
    print(f"M_limit {audit.M_limit:.17g}")
    return 0


def cmd_barrier(cfg: ExperimentConfig, outdir: str, args) -> int:
    fam = cfg.family()
    _, traj = _simulate(cfg)
    radius_min = 1.0 if fam.kind.value in ("power_law", "integrable") else 4.0
    summary = analysis.solution_barrier_report(traj, fam, p=cfg.p,
                                               radius_min=radius_min)
    rows = [(r.t, r.sup_time_weighted, r.sup_space_weighted, r.mu_envelope)
            for r in summary.rows]
    write_csv(os.path.join(outdir, "barrier.csv"),
              ("t", "sup_f_sqrt_t_u", "sup_f_x_u", "mu_envelope"),
              rows, cfg.config_hash)
    return 0


def cmd_verify_all(cfg: ExperimentConfig, outdir: str, args) -> int:
    from . import acceptance
    numbers = acceptance.criterion_numbers()
    if args.list:
        for num in numbers:
            print(f"{num:2d}  {acceptance.criterion_title(num)}")
        return 0
    if args.only:
        wanted = []
        for piece in args.only.split(","):
            piece = piece.strip()
            if not piece.isdigit() or int(piece) not in numbers:
                raise ConfigError(f"--only: unknown criterion {piece!r}")
            wanted.append(int(piece))
    else:
        wanted = list(numbers)
    rows = []
    failed = 0
    for num in wanted:
        result = acceptance.run_criterion(num)
        status = "PASS" if result.passed else "FAIL"
        if not result.passed:
            failed += 1
        print(f"criterion {num:2d}: {status}  {acceptance.criterion_title(num)}")
        for line in result.details:
            print(f"    {line}")
        rows.append((num, status, "; ".join(result.details)))
    write_csv(os.path.join(outdir, "verify_all.csv"),
              ("criterion", "status", "detail"), rows, cfg.config_hash)
    return 3 if failed else 0


_COMMANDS = {
    "kernel": cmd_kernel,
    "w-table": cmd_w_table,
    "w-snapshot": cmd_w_snapshot,
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "rescale": cmd_rescale,
    "compare": cmd_compare,
    "rates": cmd_rates,
    "mass-audit": cmd_mass_audit,
    "barrier": cmd_barrier,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nldiff",
        description="Numerical laboratory for nonlocal diffusion with "
                    "absorption: fundamental-solution tables, evolution, "
                    "rescaling ladders, and asymptotic-rate reports.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="TOML config path")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted config override")
        sp.add_argument("--threads", type=int, default=1,
                        help="workers for independent ladder entries")
        if name == "verify-all":
            sp.add_argument("--only", default=None,
                            help="comma-separated criterion numbers")
            sp.add_argument("--list", action="store_true",
                            help="list criteria without running")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.override)
        outdir = os.environ.get("NLDF_OUT") or args.out or cfg.directory
        os.makedirs(outdir, exist_ok=True)
        return _COMMANDS[args.command](cfg, outdir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NonfiniteState as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except NldiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
