"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 reproduction mismatch,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Optional

import numpy as np

from .aggregate import aggregate_distribution, discrete_aggregate_fft, discretize_severity, expected_s, variance_s
from .components import (CollectiveRiskModel, conditional_cov, conditional_mean, conditional_variance, cov_freq_sev,
                         cov_sev_sev)
from .config import RunConfig, load_config, load_model
from .dependence import make_family
from .distributions import GridSeverity
from .errors import AliasingError, ConfigError, MomentError, SupportError, TruncationError
from .ordering import icx_compare
from .reproduce import reproduce
from .simulate import mc_estimate, sample_method1, sample_method2

EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH, EXIT_NUMERIC = 0, 2, 3, 4


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_kappas(text: Optional[str]):
    if text is None:
        return None
    try:
        ks = tuple(float(k) for k in text.split(",") if k.strip())
    except ValueError as exc:
        raise ConfigError(f"--kappa: {exc}") from exc
    if not ks or any(not 0.0 < k < 1.0 for k in ks):
        raise ConfigError("--kappa values must lie in (0, 1)")
    return ks


def _model(cfg: RunConfig, args) -> CollectiveRiskModel:
    m = cfg.model
    if getattr(args, "family", None):
        try:
            m = m.with_dependence(make_family(args.family))
        except ValueError as exc:
            raise ConfigError(f"--family: {exc}") from exc
    return m


def _opt(args, name, cfg_value):
    v = getattr(args, name, None)
    return cfg_value if v is None else v


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_moments(cfg: RunConfig, args) -> str:
    m = _model(cfg, args)
    e, v = expected_s(m), variance_s(m)
    rows = [
        ("theta01", m.theta01), ("theta12", m.theta12), ("theta012", m.theta012),
        ("mean", e.total), ("mean_baseline", e.baseline), ("mean_dependence", e.dependence),
        ("variance", v.total), ("c_evar", v.c_evar), ("c_ecov", v.c_ecov), ("c_vare", v.c_vare),
        ("variance_baseline", v.baseline), ("c_dep", v.c_dep),
    ]
    return _csv(["quantity", "value"], rows)


def _lattice(cfg: RunConfig, args, m: CollectiveRiskModel):
    step = _opt(args, "grid_step", cfg.grid_step)
    length = _opt(args, "grid_len", cfg.grid_len)
    if isinstance(m.sev, GridSeverity):
        return discrete_aggregate_fft(m, length, cfg.eps_alias)
    if step is None:
        raise ConfigError("a lattice pmf needs --grid-step (or options.grid_step) for a continuous severity")
    grid = discretize_severity(m.sev, step)
    if len(grid.masses) > length:
        raise AliasingError("aliasing exceeds tolerance — increase L (severity grid longer than L)")
    return discrete_aggregate_fft(CollectiveRiskModel(m.freq, grid, m.dep), length, cfg.eps_alias)


def cmd_pmf(cfg: RunConfig, args) -> str:
    a = _lattice(cfg, args, _model(cfg, args))
    rows = zip(a.points, a.pmf, a.cdf_values)
    return _csv(["x", "pmf", "cdf"], rows)


def cmd_risk(cfg: RunConfig, args) -> str:
    m = _model(cfg, args)
    kappas = _parse_kappas(getattr(args, "kappa", None)) or cfg.kappa
    step = _opt(args, "grid_step", cfg.grid_step)
    if isinstance(m.sev, GridSeverity) or step is not None:
        a = _lattice(cfg, args, m)
    else:
        a = aggregate_distribution(m, length=_opt(args, "grid_len", cfg.grid_len))
    if a.kind == "moment-only":
        raise ConfigError("this severity has no exact representation; set --grid-step to discretise it")
    rows = [(k, q, t) for k, q, t in a.risk_measures(kappas)]
    rows = [(a.kind, k, q, t, a.mean, np.sqrt(a.variance)) for k, q, t in rows]
    return _csv(["method", "kappa", "var", "tvar", "mean", "sd"], rows)


def cmd_components(cfg: RunConfig, args) -> str:
    m = _model(cfg, args)
    f = m.freq
    rows = []
    for n in f.support:
        if f.pmf_at(int(n)) <= 0.0:
            continue
        cm = conditional_mean(m, int(n))
        cv = conditional_variance(m, int(n))
        cc = conditional_cov(m, int(n)) if n >= 2 else float("nan")
        rows.append((int(n), f.pmf_at(int(n)), float(m.ratio(int(n))), cm, cv, cc))
    cnx, cxx = cov_freq_sev(m), cov_sev_sev(m)
    rows = [r + (cnx, cxx) for r in rows]
    return _csv(["n", "pmf", "ratio", "cond_mean", "cond_var", "cond_cov", "cov_N_X", "cov_X1_X2"], rows)


def cmd_simulate(cfg: RunConfig, args) -> str:
    m = _model(cfg, args)
    reps = _opt(args, "reps", cfg.reps)
    seed = _opt(args, "seed", cfg.seed)
    algorithm = _opt(args, "algorithm", cfg.algorithm)
    kappas = _parse_kappas(getattr(args, "kappa", None)) or cfg.kappa
    if reps < 2:
        raise ConfigError("--reps must be at least 2")
    batch = sample_method1(m, reps, seed) if algorithm == 1 else sample_method2(m, reps, seed)
    exact_e = expected_s(m).total
    try:
        exact_v = variance_s(m).total
    except MomentError:
        exact_v = float("nan")
    rows = []
    for i, k in enumerate(kappas):
        est = mc_estimate(batch, k, n_boot=cfg.n_boot)
        if i == 0:
            rows.append((algorithm, seed, reps, "mean", "", est.mean, est.se_mean, exact_e))
            rows.append((algorithm, seed, reps, "variance", "", est.variance, est.se_variance, exact_v))
        rows.append((algorithm, seed, reps, "var", k, est.var_kappa, est.se_var_kappa, float("nan")))
        rows.append((algorithm, seed, reps, "tvar", k, est.tvar_kappa, est.se_tvar_kappa, float("nan")))
    samples = getattr(args, "samples", None)
    if samples:
        _emit(_csv(["s"], ((s,) for s in batch.s)), samples)
    return _csv(["algorithm", "seed", "reps", "statistic", "kappa", "estimate", "se", "exact"], rows)


def cmd_order(cfg: Optional[RunConfig], args) -> str:
    if not args.model_a or not args.model_b:
        raise ConfigError("order needs --model-a and --model-b")
    ma, mb = load_model(args.model_a), load_model(args.model_b)
    aa = aggregate_distribution(ma, step=args.grid_step, length=args.grid_len or 4096)
    ab = aggregate_distribution(mb, step=args.grid_step, length=args.grid_len or 4096)
    if "moment-only" in (aa.kind, ab.kind):
        raise ConfigError("order needs exact aggregate laws; set --grid-step to discretise the severities")
    v = icx_compare(aa, ab)
    sa, sb = aa.stop_loss(v.grid), ab.stop_loss(v.grid)
    rows = []
    for d, x, y, diff in zip(v.grid, sa, sb, v.difference):
        rel = "a>b" if d in set(v.witnesses_a_above) else "b>a" if d in set(v.witnesses_b_above) else "="
        rows.append((v.verdict, d, x, y, diff, rel))
    return _csv(["verdict", "retention", "stop_loss_a", "stop_loss_b", "difference", "relation"], rows)


def cmd_reproduce(args) -> tuple:
    if (args.table is None) == (args.figure is None):
        raise ConfigError("reproduce needs exactly one of --table or --figure")
    try:
        res = reproduce(table=args.table, figure=args.figure)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return res.to_csv(), res


COMMANDS = {
    "moments": cmd_moments, "pmf": cmd_pmf, "risk": cmd_risk, "components": cmd_components,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fgmcrm", description="Collective risk models with FGM dependence.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="TOML model/run configuration")
        sp.add_argument("--out", help="output CSV path (default: stdout)")
        sp.add_argument("--family", help="override the dependence family of the config")
        sp.add_argument("--grid-step", type=float, dest="grid_step")
        sp.add_argument("--grid-len", type=int, dest="grid_len")
        return sp

    common(sub.add_parser("moments", help="mean, variance and its components"))
    common(sub.add_parser("pmf", help="lattice pmf of S by FFT"))
    sp = common(sub.add_parser("risk", help="VaR and TVaR"))
    sp.add_argument("--kappa", help="comma-separated levels, e.g. 0.95,0.99")
    common(sub.add_parser("components", help="conditional moments given N = n"))
    sp = common(sub.add_parser("simulate", help="Monte Carlo estimates"))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--algorithm", type=int, choices=(1, 2))
    sp.add_argument("--kappa")
    sp.add_argument("--samples", help="also write the simulated totals to this CSV")
    sp = sub.add_parser("order", help="stop-loss comparison of two models")
    sp.add_argument("--model-a", dest="model_a")
    sp.add_argument("--model-b", dest="model_b")
    sp.add_argument("--out")
    sp.add_argument("--grid-step", type=float, dest="grid_step")
    sp.add_argument("--grid-len", type=int, dest="grid_len")
    sp = sub.add_parser("reproduce", help="recompute a published table or figure series")
    sp.add_argument("--table", type=int)
    sp.add_argument("--figure", type=int)
    sp.add_argument("--out")
    sp.add_argument("--diff", help="write the per-cell comparison to this CSV")
    sp = sub.add_parser("run", help="dispatch on options.request of a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            text, res = cmd_reproduce(args)
            _emit(text, args.out)
            if args.diff:
                _emit(res.diff_csv(), args.diff)
            if not res.ok:
                sys.stderr.write(f"{res.item}: {len(res.misses())} cell(s) outside tolerance\n")
                sys.stderr.write(_csv(["row", "column", "computed", "golden", "tolerance"],
                                      ((c.row, c.column, c.value, c.golden, c.tol) for c in res.misses())))
                return EXIT_MISMATCH
            return EXIT_OK
        if args.command == "order":
            _emit(cmd_order(None, args), args.out)
            return EXIT_OK
        cfg = load_config(args.config)
        command = args.command
        if command == "run":
            command = cfg.request
            if command == "order":
                raise ConfigError("request 'order' needs two models; use the order subcommand")
            if command == "reproduce":
                raise ConfigError("request 'reproduce' has no config form; use the reproduce subcommand")
        out = getattr(args, "out", None) or cfg.out
        _emit(COMMANDS[command](cfg, args), out)
        return EXIT_OK
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (AliasingError, TruncationError, MomentError, SupportError, ArithmeticError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
