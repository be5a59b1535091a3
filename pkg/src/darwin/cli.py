"""
Command-line front end.

Every subcommand accepts ``--format text|json|csv``, ``--seed`` and
``--output``.  Exit status is 0 on success, 1 on usage errors and 2 on data or
numerical errors; failures print one JSON line ``{"error": ..., "type": ...}``
on stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
import warnings

import numpy as np

from . import __version__
from .estimate import (
    dar_qmle_fit,
    log_volatility,
    lyapunov_estimate,
    plugin_lyapunov,
    qmle_fit,
    residual_acf,
    residual_pacf,
    wald_test,
)
from .exceptions import DataError, DegenerateEstimateError, NoStabilityBoundaryError, PathOverflowError
from .innovations import Innovation
from .io import TRANSFORMS, IngestConfig, dumps_json, load_series, rows_to_csv
from .montecarlo import (
    StudyConfig,
    default_power_grid,
    resolve_workers,
    run_estimation_study,
    run_size_power,
    sampling_distribution,
)
from .process import DarParams, DarwinParams, simulate_auxiliary, simulate_darwin
from .reference import compare as compare_reference
from .theory import asymptotic_sd, calibrate_alpha, clt_path_check, lyapunov_moments

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _matrix(text: str) -> list[list[float]]:
    return [_floats(row) for row in text.split(";") if row.strip()]


def _dist(text: str) -> Innovation:
    try:
        return Innovation.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _y0(text: str):
    if text == "random":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("y0 must be 'random' or a number") from None


def _f4(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and not math.isfinite(x)) else f"{x:.4f}"


# --- parser ---------------------------------------------------------------


def _common(p):
    p.add_argument("--format", choices=("text", "json", "csv"), default="text", help="output format")
    p.add_argument("--seed", type=int, default=1, help="master seed (default 1)")
    p.add_argument("--output", "-o", metavar="PATH", help="write to PATH instead of stdout")
    p.add_argument("--timing", action="store_true", help="report wall time (stderr; JSON field)")


def _data_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", "-i", metavar="CSV", help="CSV file with a header row")
    src.add_argument("--values", type=_floats, metavar="Y0,Y1,...", help="inline series; write --values=-1,2,... when it starts with a minus")
    p.add_argument("--column", default="0", help="column name or 0-based index (default 0)")
    p.add_argument("--transform", choices=TRANSFORMS, default="none", help="price-to-return transform")
    p.add_argument("--keep-na", action="store_true", help="treat missing cells as errors instead of dropping")


def _model_args(p, alpha_required=True):
    p.add_argument("--phi", type=float, default=0.5, help="autoregressive coefficient (default 0.5)")
    p.add_argument("--alpha", type=float, required=alpha_required, help="ARCH coefficient alpha > 0")
    p.add_argument("--dist", type=_dist, default=Innovation.GAUSSIAN, help="gaussian | t5std | laplace")


def _mc_args(p, reps=1000):
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--dist", type=_dist, default=Innovation.GAUSSIAN, help="gaussian | t5std | laplace")
    p.add_argument("--alphas", type=_floats, help="comma-separated alpha grid")
    p.add_argument("--ns", type=_ints, default=[100, 200], help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=reps, help=f"replications per cell (default {reps})")
    p.add_argument("--workers", type=int, help="threads (default $DARWIN_WORKERS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="darwin", description="Double AR(1) model without intercept: simulation, estimation, tests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="simulate a path (CSV: t,sign,logabs,level)")
    _model_args(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--y0", type=_y0, default="random", help="'random' (standard normal) or a nonzero number")
    p.add_argument("--auxiliary", action="store_true", help="simulate the positive chain x_t instead")
    _common(p)

    p = sub.add_parser("fit", help="closed-form QMLE of (phi, alpha) with standard errors")
    _data_args(p)
    _common(p)

    p = sub.add_parser("stability", help="Lyapunov exponent estimate and the T_n stability test")
    _data_args(p)
    p.add_argument("--level", type=float, default=0.05)
    _common(p)

    p = sub.add_parser("wald", help="Wald test of Gamma theta = r (default: phi = 0)")
    _data_args(p)
    p.add_argument("--gamma", type=_matrix, default=[[1.0, 0.0]], help="rows separated by ';', e.g. '1,0;0,1'")
    p.add_argument("--r", type=_floats, default=[0.0], help="comma-separated right-hand side")
    _common(p)

    p = sub.add_parser("calibrate", help="alpha on the stability boundary (or at --target)")
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--dist", type=_dist, default=Innovation.GAUSSIAN)
    p.add_argument("--target", type=float, default=0.0, help="Lyapunov exponent to hit (default 0)")
    p.add_argument("--bracket", type=_floats, default=[1e-6, 1e3], help="initial bracket lo,hi")
    _common(p)

    p = sub.add_parser("theory", help="theoretical gamma0, sigma2 and asymptotic standard deviations")
    _model_args(p)
    p.add_argument("--method", choices=("quadrature", "montecarlo"), default="quadrature")
    p.add_argument("--draws", type=int, default=10**7, help="Monte Carlo draws")
    p.add_argument("--n", type=int, help="also report asymptotic sds at sample size n")
    _common(p)

    p = sub.add_parser("mc-table", help="EM/ESD/ASD study of phi_hat, alpha_hat, gamma_hat")
    _mc_args(p)
    _common(p)

    p = sub.add_parser("mc-power", help="size and power of the stability test")
    _mc_args(p, reps=2000)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--uncoupled", action="store_true", help="independent streams per alpha")
    _common(p)

    p = sub.add_parser("mc-hist", help="sampling distribution of a standardised estimator")
    _mc_args(p)
    p.add_argument("--target", choices=("gamma_hat", "phi_hat", "alpha_hat"), default="gamma_hat")
    p.add_argument("--bins", type=int, default=30)
    _common(p)

    p = sub.add_parser("clt-check", help="functional CLT check of the log level")
    _model_args(p)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--grid", type=_floats, default=[0.25, 0.5, 0.75, 1.0])
    p.add_argument("--level", type=float, default=0.01)
    _common(p)

    p = sub.add_parser("dar-fit", help="QMLE of the double AR(1) model with intercept")
    _data_args(p)
    p.add_argument("--init", type=_floats, help="phi,omega,alpha starting point")
    p.add_argument("--max-iter", type=int, default=20000)
    _common(p)

    p = sub.add_parser("volatility", help="fitted log volatility log(alpha_hat y_{t-1}^2)")
    _data_args(p)
    p.add_argument("--with-dar", action="store_true", help="add the intercept model's log volatility")
    _common(p)

    p = sub.add_parser("acf", help="ACF and PACF of the model residuals (no bands)")
    _data_args(p)
    p.add_argument("--lags", type=int, default=20)
    p.add_argument("--squared", action="store_true", help="use squared residuals")
    _common(p)

    p = sub.add_parser("man", help="print the man page (roff)")
    return parser


# --- commands -------------------------------------------------------------


def _series(args):
    if args.values is not None:
        from ._validation import check_series

        return check_series(args.values), {"source": "values"}
    column = int(args.column) if args.column.lstrip("-").isdigit() else args.column
    cfg = IngestConfig(args.input, column, args.transform, not args.keep_na)
    return load_series(cfg), {"source": "csv", **cfg.to_dict()}


def _cmd_simulate(args):
    params = DarwinParams(args.phi, args.alpha)
    if args.auxiliary:
        x0 = args.y0 if args.y0 == "random" else abs(args.y0)
        path = simulate_auxiliary(params, args.dist, args.n, x0=x0, seed=args.seed)
    else:
        path = simulate_darwin(params, args.dist, args.n, y0=args.y0, seed=args.seed)
    config = {"phi": args.phi, "alpha": args.alpha, "dist": args.dist.value, "n": args.n, "y0": args.y0,
              "auxiliary": args.auxiliary}
    if args.format == "json":
        return {"config": config, "results": path.to_dict()}
    return path.to_csv()


def _cmd_fit(args):
    y, src = _series(args)
    fit = qmle_fit(y)
    plug = plugin_lyapunov(fit)
    res = fit.to_dict()
    res["plugin_gamma"] = plug.value
    res["plugin_skipped"] = plug.skipped
    if args.format == "json":
        return {"config": src, "results": res}
    if args.format == "csv":
        return rows_to_csv(
            ["t", "residual", "model_residual"],
            [(t + 1, a, b) for t, (a, b) in enumerate(zip(fit.residuals, fit.model_residuals))],
        )
    return "\n".join(
        [
            f"y_t = {_f4(fit.phi_hat)} ({_f4(fit.se_phi)}) y_(t-1) + eta_t sqrt({_f4(fit.alpha_hat)} ({_f4(fit.se_alpha)}) y_(t-1)^2)",
            f"phi_hat     {_f4(fit.phi_hat)} ({_f4(fit.se_phi)})",
            f"alpha_hat   {_f4(fit.alpha_hat)} ({_f4(fit.se_alpha)})",
            f"alpha_star  {_f4(fit.alpha_star)}",
            f"kappa_hat   {_f4(fit.kappa_hat)}",
            f"plugin_gamma {_f4(plug.value)}",
            f"n           {fit.n}",
        ]
    ) + "\n"


def _cmd_stability(args):
    y, src = _series(args)
    rep = lyapunov_estimate(y)
    res = rep.to_dict()
    res["level"] = args.level
    res["reject"] = rep.reject(args.level)
    if args.format == "json":
        return {"config": src, "results": res}
    if args.format == "csv":
        return rows_to_csv(list(res), [list(res.values())])
    return (
        f"gamma_hat   {_f4(rep.gamma_hat)}\nsigma2_hat  {_f4(rep.sigma2_hat)}\nT_n         {_f4(rep.t_stat)}\n"
        f"p_value     {_f4(rep.p_value)}\nreject      {res['reject']} (level {args.level})\nn           {rep.n}\n"
    )


def _cmd_wald(args):
    y, src = _series(args)
    fit = qmle_fit(y)
    rep = wald_test(fit, args.gamma, args.r)
    res = rep.to_dict()
    src = {**src, "gamma": args.gamma, "r": args.r}
    if args.format == "json":
        return {"config": src, "results": res}
    if args.format == "csv":
        return rows_to_csv(["w_stat", "df", "p_value"], [[rep.w_stat, rep.df, rep.p_value]])
    return f"W_n      {_f4(rep.w_stat)}\ndf       {rep.df}\np_value  {_f4(rep.p_value)}\n"


def _cmd_calibrate(args):
    if len(args.bracket) != 2:
        raise UsageError("--bracket needs two numbers")
    alpha = calibrate_alpha(args.phi, args.dist, tuple(args.bracket), target=args.target)
    res = {"alpha": alpha, "phi": args.phi, "dist": args.dist.value, "target": args.target}
    if args.format == "json":
        return {"config": {"bracket": args.bracket}, "results": res}
    if args.format == "csv":
        return rows_to_csv(list(res), [list(res.values())])
    return f"{alpha:.4f}\n"


def _cmd_theory(args, warn):
    params = DarwinParams(args.phi, args.alpha)
    prof = lyapunov_moments(params, args.dist, method=args.method, n_draws=args.draws, seed=args.seed)
    for msg in compare_reference(prof):
        warn.append(msg)
    res = prof.to_dict()
    if args.n:
        res.update(asymptotic_sd(params, args.dist, args.n, prof)._asdict())
        res["n"] = args.n
    if args.format == "json":
        return {"config": {"method": args.method}, "results": res}
    if args.format == "csv":
        return rows_to_csv(list(res), [list(res.values())])
    lines = [f"{k:<14}{_f4(v) if isinstance(v, float) else v}" for k, v in res.items()]
    return "\n".join(lines) + "\n"


def _study_config(args, alphas):
    return StudyConfig(args.dist, args.phi, tuple(alphas or ()), tuple(args.ns), args.reps, args.seed)


def _cmd_mc_table(args):
    cfg = _study_config(args, args.alphas)
    table = run_estimation_study(cfg, workers=resolve_workers(args.workers))
    if args.format == "json":
        return {"config": cfg.to_dict(), "results": table.to_dict()["rows"]}
    if args.format == "csv":
        return table.to_csv()
    out = [f"{'alpha0':>8} {'n':>5} {'':4} {'phi':>8} {'alpha':>8} {'gamma':>8}"]
    for r in table.rows:
        out.append(f"{r.alpha0:>8.4f} {r.n:>5} {'EM':4} {r.em_phi:>8.4f} {r.em_alpha:>8.4f} {r.em_gamma:>8.4f}")
        out.append(f"{'':>8} {'':>5} {'ESD':4} {r.esd_phi:>8.4f} {r.esd_alpha:>8.4f} {r.esd_gamma:>8.4f}")
        out.append(f"{'':>8} {'':>5} {'ASD':4} {r.asd_phi:>8.4f} {r.asd_alpha:>8.4f} {r.asd_gamma:>8.4f}")
    return "\n".join(out) + "\n"


def _cmd_mc_power(args):
    alphas = args.alphas or default_power_grid(args.phi, args.dist)
    cfg = _study_config(args, alphas)
    table = run_size_power(cfg, args.level, workers=resolve_workers(args.workers), coupled=not args.uncoupled)
    if args.format == "json":
        d = table.to_dict()
        return {"config": {**cfg.to_dict(), "level": args.level, "coupled": table.coupled}, "results": d["rows"]}
    if args.format == "csv":
        return table.to_csv()
    out = [f"{'alpha0':>8} {'gamma0':>8} {'n':>5} {'rate':>8}"]
    out += [f"{r.alpha0:>8.4f} {r.gamma0:>8.4f} {r.n:>5} {r.rate:>8.4f}" for r in table.rows]
    return "\n".join(out) + "\n"


def _cmd_mc_hist(args):
    cfg = _study_config(args, args.alphas)
    dists = sampling_distribution(cfg, args.target, workers=resolve_workers(args.workers))
    if args.format == "csv":
        rows = []
        for d in dists:
            rows += [(d.kind, d.alpha0, d.n, i, v, d.overlay_variance) for i, v in enumerate(d.values)]
        return rows_to_csv(["kind", "alpha0", "n", "replication", "value", "overlay_variance"], rows)
    results = []
    for d in dists:
        counts, edges = d.histogram(args.bins)
        results.append(
            {
                "alpha0": d.alpha0,
                "n": d.n,
                "target": d.target,
                "overlay_mean": d.overlay_mean,
                "overlay_variance": d.overlay_variance,
                "ks_stat": d.ks_stat,
                "ks_pvalue": d.ks_pvalue,
                "mean": d.mean,
                "mc_se": d.mc_se,
                "hist_density": counts.tolist(),
                "hist_edges": edges.tolist(),
                "values": d.values,
            }
        )
    if args.format == "json":
        return {"config": {**cfg.to_dict(), "target": args.target, "bins": args.bins}, "results": results}
    out = [f"{'alpha0':>8} {'n':>5} {'mean':>8} {'var':>8} {'overlay':>8} {'KS p':>8}"]
    for d, r in zip(dists, results):
        out.append(
            f"{d.alpha0:>8.4f} {d.n:>5} {r['mean']:>8.4f} {float(np.var(d.values, ddof=1)):>8.4f} "
            f"{d.overlay_variance:>8.4f} {d.ks_pvalue:>8.4f}"
        )
    return "\n".join(out) + "\n"


def _cmd_clt(args):
    rep = clt_path_check(DarwinParams(args.phi, args.alpha), args.dist, args.n, args.reps, args.grid, args.seed,
                         level=args.level)
    d = rep.to_dict()
    if args.format == "json":
        return {"config": {"n": args.n, "reps": args.reps, "grid": args.grid, "level": args.level}, "results": d}
    rows = list(zip(rep.s_grid, rep.variances, rep.targets, rep.ks_stats, rep.ks_pvalues, rep.passed))
    if args.format == "csv":
        return rows_to_csv(["s", "variance", "target", "ks_stat", "ks_pvalue", "passed"], rows)
    out = [f"{'s':>6} {'var':>8} {'target':>8} {'KS':>8} {'p':>8} pass"]
    out += [f"{s:>6.2f} {v:>8.4f} {t:>8.4f} {k:>8.4f} {p:>8.4f} {ok}" for s, v, t, k, p, ok in rows]
    return "\n".join(out) + "\n"


def _cmd_dar_fit(args):
    y, src = _series(args)
    init = DarParams(*args.init) if args.init else None
    if args.init and len(args.init) != 3:
        raise UsageError("--init needs phi,omega,alpha")
    fit = dar_qmle_fit(y, init=init, max_iter=args.max_iter)
    if args.format == "json":
        return {"config": src, "results": fit.to_dict()}
    if args.format == "csv":
        return rows_to_csv(["t", "residual"], [(t + 1, e) for t, e in enumerate(fit.residuals)])
    se = fit.se
    return (
        f"y_t = {_f4(fit.phi)} ({_f4(se[0])}) y_(t-1) + eta_t sqrt({fit.omega:.4g} ({_f4(se[1])}) "
        f"+ {_f4(fit.alpha)} ({_f4(se[2])}) y_(t-1)^2)\nloglik     {_f4(fit.loglik)}\nconverged  {fit.converged}\n"
    )


def _cmd_volatility(args):
    y, src = _series(args)
    fit = qmle_fit(y)
    lv = log_volatility(fit, y)
    header = ["t", "log_volatility"]
    cols = [lv]
    if args.with_dar:
        dar = dar_qmle_fit(y)
        cols.append(np.log(dar.omega + dar.alpha * y[:-1] ** 2))
        header.append("log_volatility_dar")
    rows = [(t + 1, *(c[t] for c in cols)) for t in range(len(lv))]
    if args.format == "json":
        return {"config": src, "results": {h: [r[i] for r in rows] for i, h in enumerate(header)}}
    if args.format == "csv":
        return rows_to_csv(header, rows)
    return "\n".join(" ".join(str(v) if isinstance(v, int) else _f4(v) for v in r) for r in rows) + "\n"


def _cmd_acf(args):
    y, src = _series(args)
    fit = qmle_fit(y)
    acf = residual_acf(fit.model_residuals, args.lags, args.squared)
    pacf = residual_pacf(fit.model_residuals, args.lags, args.squared)
    rows = [(k + 1, a, p) for k, (a, p) in enumerate(zip(acf, pacf))]
    if args.format == "json":
        return {"config": {**src, "lags": args.lags, "squared": args.squared},
                "results": {"lag": list(range(1, args.lags + 1)), "acf": acf, "pacf": pacf}}
    if args.format == "csv":
        return rows_to_csv(["lag", "acf", "pacf"], rows)
    return "\n".join(f"{k:>3} {_f4(a):>8} {_f4(p):>8}" for k, a, p in rows) + "\n"


def render_man(parser: argparse.ArgumentParser) -> str:
    """Render a roff man page from the argparse tree."""

    def esc(s):
        return (s or "").replace("\\", "\\\\").replace("-", "\\-")

    lines = [
        f'.TH DARWIN 1 "" "darwin {__version__}" "User Commands"',
        ".SH NAME",
        "darwin \\- " + esc(parser.description),
        ".SH SYNOPSIS",
        ".B darwin",
        "\\fICOMMAND\\fR [\\fIOPTIONS\\fR]",
        ".SH COMMANDS",
    ]
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    helps = {a.dest: a.help for a in sub._choices_actions}
    for name, p in sub.choices.items():
        lines += [f".SS {esc(name)}", esc(helps.get(name, ""))]
        for act in p._actions:
            if not act.option_strings or isinstance(act, argparse._HelpAction):
                continue
            flags = ", ".join(act.option_strings)
            meta = "" if act.nargs == 0 else f" {act.metavar or act.dest.upper()}"
            lines += [".TP", f"\\fB{esc(flags)}\\fR{esc(meta)}", esc(act.help or "")]
    lines += [
        ".SH ENVIRONMENT",
        ".TP",
        "\\fBDARWIN_WORKERS\\fR",
        "Thread count for mc\\- commands when \\-\\-workers is not given.",
        ".SH EXIT STATUS",
        "0 on success, 1 on usage errors, 2 on data or numerical errors.",
    ]
    return "\n".join(lines) + "\n"


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "stability": _cmd_stability,
    "wald": _cmd_wald,
    "calibrate": _cmd_calibrate,
    "mc-table": _cmd_mc_table,
    "mc-power": _cmd_mc_power,
    "mc-hist": _cmd_mc_hist,
    "clt-check": _cmd_clt,
    "dar-fit": _cmd_dar_fit,
    "volatility": _cmd_volatility,
    "acf": _cmd_acf,
}


def _fail(code: int, exc: Exception) -> int:
    import json

    sys.stderr.write(json.dumps({"error": str(exc), "type": type(exc).__name__, "exit": code}) + "\n")
    return code


def _run(args, parser) -> str:
    if args.command == "man":
        return render_man(parser)
    warn: list[str] = []
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.command == "theory":
            out = _cmd_theory(args, warn)
        else:
            out = _COMMANDS[args.command](args)
    warn += [str(w.message) for w in caught]
    elapsed = time.perf_counter() - start
    if args.timing:
        sys.stderr.write(f"wall time {elapsed:.3f}s\n")
    if isinstance(out, dict):
        envelope = {
            "command": args.command,
            "config": out.get("config", {}),
            "results": out["results"],
            "seeds": {"master_seed": args.seed},
            "warnings": warn,
        }
        if args.timing:
            envelope["wall_time"] = elapsed
        return dumps_json(envelope)
    for w in warn:
        sys.stderr.write(f"warning: {w}\n")
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = _run(args, parser)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except (DataError, DegenerateEstimateError, NoStabilityBoundaryError, PathOverflowError,
            np.linalg.LinAlgError, ValueError, OverflowError, ArithmeticError) as exc:
        return _fail(EXIT_DATA, exc)
    output = getattr(args, "output", None)
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
