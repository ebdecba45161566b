"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 fit did not converge
(the report is still written).
"""

import argparse
import contextlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, globalopt, local, metrics, models, plots, regress
from .dataset import complete_pairs, load_csv, read_columns, write_csv
from .errors import CurveFitError, InvalidBounds
from .impute import impute, parse_strategy
from .smooth import SGConfig, savitzky_golay
from .stats import summary_statistics

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOT_CONVERGED = 0, 1, 2, 3
SEED_ENV = "CURVEFIT_SEED"
# flags that change where output goes or how fast it arrives, never what it is
_NOT_ECHOED = {"func", "out", "out_dir", "n_jobs", "report"}


class UsageError(Exception):
    pass


@contextlib.contextmanager
def _as_usage_error():
    try:
        yield
    except (ValueError, KeyError) as exc:
        raise UsageError(exc.args[0] if exc.args else str(exc)) from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _floats(text):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _bounds(text):
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"bound {part!r} is not lo:hi")
        try:
            out.append((float(lo), float(hi)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bound {part!r} is not numeric") from None
    return out


def _model_name(text):
    if text not in models.MODEL_NAMES:
        raise argparse.ArgumentTypeError(
            f"unknown model {text!r}; valid names: {', '.join(models.MODEL_NAMES)}"
        )
    return text


def _name_list(valid):
    def parse(text):
        names = [t.strip() for t in text.split(",") if t.strip()]
        bad = [n for n in names if n not in valid]
        if bad or not names:
            raise argparse.ArgumentTypeError(f"unknown name(s) {bad or [text]}; valid names: {', '.join(valid)}")
        return names
    return parse


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


# --- JSON helpers ---------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _dumps(obj):
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _echo(args):
    return {"subcommand": args.command,
            "args": {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED | {"command"}}}


def _report(args, d, result, **extra):
    rep = {"command": _echo(args), "input": None, "result": result}
    if d is not None:
        rep["input"] = {"rows": len(d), "missing": d.missing_counts()}
    rep.update(extra)
    rep["seed"] = args.seed
    rep["version"] = __version__
    return rep


def _write_json(rep, path):
    text = _dumps(rep)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- subcommands ----------------------------------------------------------------

def cmd_fit(args):
    spec = models.get_model(args.model)
    raw = load_csv(args.data, args.x_col, args.y_col)
    d = complete_pairs(raw)
    with _as_usage_error():
        local_cfg = local.LocalConfig(max_iter=args.max_iter, method=args.method)
        cfg = globalopt.OptimizeConfig(
            bounds=args.bounds, max_iter=args.max_iter, restarts=args.restarts,
            mutation_rate=args.mutation_rate, n_jobs=args.n_jobs, seed=args.seed,
            population=args.population, crossover=args.crossover,
        )
    if args.use_global:
        try:
            cfg.resolved_bounds(spec.param_count)
        except InvalidBounds as exc:
            raise UsageError(str(exc)) from exc
        res = globalopt.global_fit(spec, d, cfg, local.LocalConfig(max_iter=args.max_iter))
    else:
        init = args.init if args.init is not None else models.default_init(spec, d)
        if len(init) != spec.param_count:
            raise UsageError(f"--init needs {spec.param_count} values for {spec.name}")
        res = local.fit(spec, d, init, local_cfg)
    y_hat = models.evaluate(spec, res.theta_hat, d.x)
    result = {"model": spec.name, **res.to_dict()}
    m = metrics.model_analysis(d.y, y_hat) if len(d) >= 2 else None
    _write_json(_report(args, raw, result, metrics=None if m is None else m.to_dict()), args.out)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_smooth(args):
    d = load_csv(args.data, args.x_col, args.y_col)
    if not d.is_complete:
        raise CurveFitError("data has missing entries; run `impute` first")
    y_sg = savitzky_golay(d.y, SGConfig(args.window, args.degree), x=d.x)
    write_csv(args.out, {args.x_col: d.x, args.y_col: y_sg})
    _write_json(_report(args, d, {"output": "csv", "rows": int(y_sg.size)}), args.report)
    return EXIT_OK


def cmd_impute(args):
    d = load_csv(args.data, args.x_col, args.y_col)
    with _as_usage_error():
        strategy = parse_strategy(args.strategy)
    out = impute(d, strategy)
    write_csv(args.out, {args.x_col: out.x, args.y_col: out.y})
    _write_json(_report(args, d, {"strategy": strategy.label, "rows_out": len(out)}), args.report)
    return EXIT_OK


def cmd_stats(args):
    col = read_columns(args.data, [args.column])[args.column]
    s = summary_statistics(col)
    rep = _report(args, None, s.to_dict(), degenerate=s.degenerate)
    rep["input"] = {"rows": int(col.size), "missing": int(np.isnan(col).sum())}
    _write_json(rep, args.out)
    return EXIT_OK


def cmd_select(args):
    raw = load_csv(args.data, args.x_col, args.y_col)
    d = complete_pairs(raw)
    table = regress.select_model(d.x, d.y, args.candidates)
    _write_json(_report(args, raw, [e.to_dict() for e in table]), args.out)
    return EXIT_OK


def _predictions(args, x, keep):
    if args.pred_col:
        return read_columns(args.data, [args.pred_col])[args.pred_col][keep]
    if not (args.model and args.params):
        raise UsageError("give either --pred-col or both --model and --params")
    spec = models.get_model(args.model)
    if len(args.params) != spec.param_count:
        raise UsageError(f"--params needs {spec.param_count} values for {spec.name}")
    return models.evaluate(spec, args.params, x[keep])


def cmd_evaluate(args):
    raw = load_csv(args.data, args.x_col, args.y_col)
    keep = raw.complete_mask
    pred = _predictions(args, raw.x, keep)
    ok = ~np.isnan(pred)
    m = metrics.model_analysis(raw.y[keep][ok], pred[ok])
    _write_json(_report(args, raw, m.to_dict()), args.out)
    return EXIT_OK


def cmd_plot(args):
    raw = load_csv(args.data, args.x_col, args.y_col)
    d = complete_pairs(raw)
    data = {args.x_col: d.x, args.y_col: d.y}
    if args.model:
        spec = models.get_model(args.model)
        theta = args.params if args.params else local.fit(spec, d, models.default_init(spec, d)).theta_hat
        fitted = models.evaluate(spec, theta, d.x)
        diag = metrics.residual_diagnostics(d.y, fitted)
        data["fitted"], data["residual"] = diag.fitted, diag.residuals
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in args.kinds:
        if kind == "residuals_vs_fitted":
            if not args.model:
                raise UsageError("residuals_vs_fitted needs --model")
            cols = ("fitted", "residual")
        elif plots.ARITY[kind] == 2:
            cols = (args.x_col, args.y_col)
        else:
            cols = ("residual",) if args.model and kind == "qq" else (args.y_col,)
        path = plots.emit_plot(plots.PlotRequest(kind, cols, str(out_dir / f"{kind}.svg")), data)
        written.append(path.name)
    _write_json(_report(args, raw, {"files": written}), args.report)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="curvefit", description="Curve fitting and regression analysis toolkit.")
    p.add_argument("--version", action="version", version=f"curvefit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, xy=True):
        sp.add_argument("--data", required=True, help="input CSV with a header row")
        if xy:
            sp.add_argument("--x-col", default="x")
            sp.add_argument("--y-col", default="y")
        sp.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV} or 0)")

    f = sub.add_parser("fit", help="nonlinear least-squares fit of a named model")
    common(f)
    f.add_argument("--model", required=True, type=_model_name)
    f.add_argument("--init", type=_floats, help="comma-separated starting parameters")
    f.add_argument("--method", default="levenberg_marquardt", choices=local.METHODS)
    f.add_argument("--global", dest="use_global", action="store_true",
                   help="differential evolution with restarts, then local polish")
    f.add_argument("--bounds", type=_bounds,
                   help="lo:hi per parameter, comma-separated; default +/-1e6 stands in for unbounded")
    f.add_argument("--max-iter", type=_positive_int, default=100)
    f.add_argument("--restarts", type=_positive_int, default=5)
    f.add_argument("--mutation-rate", type=float, default=0.05, help="differential weight F")
    f.add_argument("--n-jobs", type=int, default=-1)
    f.add_argument("--population", type=_positive_int)
    f.add_argument("--crossover", type=float, default=0.7)
    f.add_argument("--out", help="JSON report path (default: stdout)")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("smooth", help="Savitzky-Golay smoothing of the y column")
    common(s)
    s.add_argument("--window", type=_positive_int, required=True, help="half-window w (2w+1 points)")
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--out", required=True, help="output CSV")
    s.add_argument("--report", help="JSON report path (default: stdout)")
    s.set_defaults(func=cmd_smooth)

    i = sub.add_parser("impute", help="fill or drop missing values")
    common(i)
    i.add_argument("--strategy", required=True,
                   help="drop, mean, median, linear, ffill, bfill or model:<model-name>")
    i.add_argument("--out", required=True, help="output CSV")
    i.add_argument("--report", help="JSON report path (default: stdout)")
    i.set_defaults(func=cmd_impute)

    st = sub.add_parser("stats", help="summary statistics of one column")
    common(st, xy=False)
    st.add_argument("--column", default="y")
    st.add_argument("--out", help="JSON path (default: stdout)")
    st.set_defaults(func=cmd_stats)

    se = sub.add_parser("select", help="fit candidate models and rank by adjusted R^2")
    common(se)
    se.add_argument("--candidates", type=_name_list(models.MODEL_NAMES), default=list(models.MODEL_NAMES))
    se.add_argument("--out", help="JSON path (default: stdout)")
    se.set_defaults(func=cmd_select)

    ev = sub.add_parser("evaluate", help="R^2, MSE and RMSE of predictions")
    common(ev)
    ev.add_argument("--pred-col", help="column holding predictions")
    ev.add_argument("--model", type=_model_name)
    ev.add_argument("--params", type=_floats)
    ev.add_argument("--out", help="JSON path (default: stdout)")
    ev.set_defaults(func=cmd_evaluate)

    pl = sub.add_parser("plot", help="write SVG charts")
    common(pl)
    pl.add_argument("--kinds", type=_name_list(plots.KINDS), default=["scatter"],
                    help="comma-separated: " + ", ".join(plots.KINDS))
    pl.add_argument("--model", type=_model_name, help="fit this model for residual plots")
    pl.add_argument("--params", type=_floats, help="use these parameters instead of fitting")
    pl.add_argument("--out-dir", required=True)
    pl.add_argument("--report", help="JSON report path (default: stdout)")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except UsageError as exc:
        print(f"curvefit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CurveFitError, OSError, ValueError) as exc:
        print(f"curvefit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
