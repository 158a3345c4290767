"""Command-line front end.

Each subcommand writes CSV/JSON artifacts (and a companion PNG figure)
into the output directory.  Flag values override config-file values,
which override defaults; the effective numeric configuration is echoed
into every report so identical configurations reproduce identical bytes.

Exit codes: 0 all internal pass-flags true, 1 usage error, 2 verification
failure.
"""

import argparse
import os
import sys

import numpy as np

from . import plots, reports, specfun
from . import verify as verify_mod
from .compactify import (
    CrossCheckError,
    build_compactification,
    mean_curvature_weighted,
    weighted_J,
)
from .escobar import hemisphere_check
from .geometry import InvalidWarpError, WarpedMetric, make_warped_metric, volume_data
from .scattering import (
    IllConditionedFitError,
    SeriesStartError,
    StiffnessError,
    adapted_profile,
    scattering_multiplier,
)
from .yamabe import BasisError, InadmissibleTrialError, minimize_rayleigh, theorem_chain_report

USAGE_ERRORS = (ValueError, InvalidWarpError, OSError)
VERIFY_ERRORS = (
    CrossCheckError,
    BasisError,
    InadmissibleTrialError,
    StiffnessError,
    SeriesStartError,
    IllConditionedFitError,
)

DEFAULTS = {
    "constants": {"n": 3, "gamma": 0.5},
    "multiplier": {"n": 3, "gamma": 0.5, "kmax": 8},
    "adapted": {"n": 3, "gamma": 0.5, "tmax": 30.0},
    "volume": {"n": 3, "eps": 0.0, "decay": 3.0, "tmax": 20.0, "points": 200},
    "chain": {"n": 3, "gamma": 0.5, "eps": 0.0, "decay": 3.0, "tmax": 20.0, "points": 400},
    "rayleigh": {"n": 3, "gamma": 0.5, "kmax": 16, "restarts": 8, "seed": 0},
    "escobar": {"n": 3, "tmax": 20.0, "points": 200},
    "verify-all": {},
}


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; exit 2 is reserved for verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _add_common(sub):
    sub.add_argument("--config", help="key=value config file")
    sub.add_argument("--outdir", help="output directory (default $AHLAB_OUTDIR or .)")
    sub.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    sub.add_argument("--no-plots", action="store_true", help="skip the PNG figure")


def _build_parser():
    parser = _Parser(prog="ahlab", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)
    specs = {
        "constants": ("closed-form sphere constants", ["n", "gamma"]),
        "multiplier": ("numeric vs closed-form multiplier", ["n", "gamma", "kmax"]),
        "adapted": ("adapted radial profile and extracted coefficients", ["n", "gamma", "tmax"]),
        "volume": ("sphere/ball volume curves and ratios", ["n", "eps", "decay", "tmax", "points"]),
        "chain": ("volume-comparison chain report", ["n", "gamma", "eps", "decay", "tmax", "points"]),
        "rayleigh": ("minimize the zonal Rayleigh quotient", ["n", "gamma", "kmax", "restarts", "seed"]),
        "escobar": ("integer-order hemisphere suite", ["n", "tmax", "points"]),
        "verify-all": ("run every acceptance criterion", []),
    }
    for name, (help_text, keys) in specs.items():
        sub = subs.add_parser(name, help=help_text)
        for key in keys:
            proto = DEFAULTS[name][key]
            sub.add_argument("--%s" % key, type=type(proto), default=None)
        _add_common(sub)
    return parser


def _read_config(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key=value" % (path, lineno))
            key, _, raw = line.partition("=")
            values[key.strip()] = raw.strip()
    return values


def _coerce(key, raw, proto):
    if isinstance(proto, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError("config key %s: expected a boolean, got %r" % (key, raw))
    return type(proto)(raw)


def _merge_config(command, args, file_values):
    cfg = dict(DEFAULTS[command])
    for key, raw in file_values.items():
        if key == "outdir":
            continue
        if key not in cfg:
            raise ValueError("config key %r is not valid for %r" % (key, command))
        cfg[key] = _coerce(key, raw, cfg[key])
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    cfg["command"] = command
    return cfg


def _resolve_outdir(args, file_values):
    outdir = args.outdir or file_values.get("outdir") or os.environ.get("AHLAB_OUTDIR") or "."
    os.makedirs(outdir, exist_ok=True)
    return outdir


class _Run:
    """Paths and emission helpers for one subcommand invocation."""

    def __init__(self, cfg, outdir, want_json, no_plots):
        self.cfg = cfg
        self.outdir = outdir
        self.want_json = want_json
        self.no_plots = no_plots

    def path(self, name):
        return os.path.join(self.outdir, name)

    def csv(self, name, header, rows, comments=()):
        reports.write_csv(self.path(name), header, rows, config=self.cfg, comments=comments)

    def json(self, name, payload):
        path = self.path(name)
        reports.write_json(path, payload, config=self.cfg)
        if self.want_json:
            with open(path) as fh:
                sys.stdout.write(fh.read())

    def plot(self, fn, *fn_args):
        if not self.no_plots:
            fn(*fn_args)


def _metric_from(cfg):
    if cfg.get("eps", 0.0) == 0.0:
        return WarpedMetric(n=cfg["n"], kind="hyperbolic")
    return make_warped_metric(
        cfg["n"], {"kind": "perturbed", "eps": cfg["eps"], "decay": cfg["decay"]})


def _cmd_constants(run):
    cfg = run.cfg
    sc = specfun.sphere_constants(cfg["n"], cfg["gamma"])
    fields = {
        "n": sc.n, "gamma": sc.gamma, "d_gamma": sc.d_gamma,
        "sphere_volume": sc.sphere_volume, "q_curv": sc.q_curv, "yamabe": sc.yamabe,
    }
    run.csv("constants.csv", list(fields), [list(fields.values())])
    run.json("constants.json", fields)
    if not run.want_json:
        print("d_gamma=%s q_curv=%s yamabe=%s" % tuple(
            reports.fmt_float(v) for v in (sc.d_gamma, sc.q_curv, sc.yamabe)))
    return 0


def _cmd_multiplier(run):
    cfg = run.cfg
    ks = list(range(cfg["kmax"] + 1))
    numeric = [scattering_multiplier(cfg["n"], cfg["gamma"], k) for k in ks]
    closed = [specfun.sphere_multiplier(cfg["n"], cfg["gamma"], k) for k in ks]
    rel = [abs(a / b - 1.0) for a, b in zip(numeric, closed)]
    rows = [(k, a, b, d) for k, a, b, d in zip(ks, numeric, closed, rel)]
    run.csv("multiplier.csv", ["k", "numeric", "closed_form", "rel_dev"], rows)
    ok = max(rel) <= 1e-6
    run.json("multiplier.json", {"max_rel_dev": max(rel), "pass": ok})
    run.plot(plots.plot_multiplier, ks, numeric, closed, run.path("multiplier.png"))
    if not run.want_json:
        print("max relative deviation %s over %d modes" % (reports.fmt_float(max(rel)), len(ks)))
    return 0 if ok else 2


def _cmd_adapted(run):
    cfg = run.cfg
    prof = adapted_profile(cfg["n"], cfg["gamma"], T_max=cfg["tmax"])
    sol = prof.solution
    run.csv("adapted.csv", reports.SOLUTION_HEADER, reports.solution_rows(sol),
            comments=["# rescale_exponent: %s" % reports.fmt_float(sol.rescale_exponent)])
    ok = (prof.monotone and abs(prof.G0 - prof.g0_expected) <= 1e-6
          and abs(prof.x2_coeff - prof.x2_expected) <= 1e-5)
    run.json("adapted.json", {
        "G0": prof.G0, "g0_expected": prof.g0_expected,
        "x2_coeff": prof.x2_coeff, "x2_expected": prof.x2_expected,
        "monotone": prof.monotone, "pass": ok,
    })
    run.plot(plots.plot_adapted, prof, run.path("adapted.png"))
    if not run.want_json:
        print("G0=%s (expected %s), monotone=%s" % (
            reports.fmt_float(prof.G0), reports.fmt_float(prof.g0_expected), prof.monotone))
    return 0 if ok else 2


def _cmd_volume(run):
    cfg = run.cfg
    metric = _metric_from(cfg)
    grid = np.linspace(0.1, cfg["tmax"], cfg["points"])
    curve = volume_data(metric, grid)
    run.csv("volume.csv", reports.VOLUME_HEADER, reports.volume_rows(curve))
    run.json("volume.json", {
        "monotone": curve.monotone,
        "area_ratio_max_dev": float(np.max(np.abs(curve.area_ratio - 1.0))),
        "ball_ratio_max_dev": float(np.max(np.abs(curve.ball_ratio - 1.0))),
        "pass": curve.monotone,
    })
    run.plot(plots.plot_volume, curve, run.path("volume.png"))
    if not run.want_json:
        print("relative-volume ratio monotone: %s" % curve.monotone)
    return 0 if curve.monotone else 2


def _cmd_chain(run):
    cfg = run.cfg
    metric = _metric_from(cfg)
    grid = np.linspace(0.1, cfg["tmax"], cfg["points"])
    rep = theorem_chain_report(cfg["n"], cfg["gamma"], metric, grid=grid)
    eta = metric.eta(grid)[0]
    ok = rep.status == "pass"
    run.json("chain.json", {
        "inputs": dict(run.cfg),
        "lower_bound": rep.lower_bound,
        "eta": list(eta),
        "pass": ok,
        "status": rep.status,
        "area_ratio_max_dev": rep.area_ratio_max_dev,
        "ball_ratio_max_dev": rep.ball_ratio_max_dev,
        "bg_monotone": rep.bg_monotone,
        "ricci_gate": rep.ricci_gate,
        "eta_max": rep.eta_max,
    })
    run.csv("chain.csv", ["t", "eta"], zip(grid, eta))
    run.plot(plots.plot_chain, rep, run.path("chain.png"))
    if not run.want_json:
        print("status=%s lower_bound=%s" % (rep.status, reports.fmt_float(rep.lower_bound)))
    return 0 if ok else 2


def _cmd_rayleigh(run):
    cfg = run.cfg
    res = minimize_rayleigh(cfg["n"], cfg["gamma"], kmax=cfg["kmax"],
                            restarts=cfg["restarts"], seed=cfg["seed"])
    expected = specfun.sphere_constants(cfg["n"], cfg["gamma"]).yamabe
    ok = abs(res.minimum - expected) <= 1e-6
    run.json("rayleigh.json", {
        "minimum": res.minimum, "expected": expected,
        "deviation": abs(res.minimum - expected),
        "iterations": res.iterations,
        "per_restart": [[q, it] for q, it in res.per_restart],
        "coefficients": list(res.trial.coeffs),
        "pass": ok,
    })
    run.csv("rayleigh.csv", ["restart", "minimum", "iterations"],
            [(i, q, it) for i, (q, it) in enumerate(res.per_restart)])
    run.plot(plots.plot_rayleigh, res, expected, run.path("rayleigh.png"))
    if not run.want_json:
        print("minimum=%s expected=%s" % (
            reports.fmt_float(res.minimum), reports.fmt_float(expected)))
    return 0 if ok else 2


def _cmd_escobar(run):
    cfg = run.cfg
    grid = np.linspace(0.1, cfg["tmax"], cfg["points"])
    rep = hemisphere_check(cfg["n"], grid)
    ok = (rep.cosh_rel_dev <= 1e-10 and rep.rtilde_max_dev <= 1e-8
          and rep.sectional_max_dev <= 1e-8 and rep.ratio_nonincreasing
          and abs(rep.ratio_limit - 1.0) <= 1e-6)
    payload = {
        "n": rep.n, "ya_hemisphere": rep.ya_hemisphere,
        "yb_conversion": rep.yb_conversion,
        "cosh_rel_dev": rep.cosh_rel_dev, "x2_coeff": rep.x2_coeff,
        "g0_stray": rep.g0_stray, "rtilde_max_dev": rep.rtilde_max_dev,
        "sectional_max_dev": rep.sectional_max_dev,
        "equator_H": rep.equator_H,
        "equator_h_max_dev": rep.equator_h_max_dev,
        "equator_h_limit": rep.equator_h_limit,
        "volume_half_dev": rep.volume_half_dev,
        "ratio_limit": rep.ratio_limit, "ratio_max_dev": rep.ratio_max_dev,
        "ratio_nonincreasing": rep.ratio_nonincreasing,
        "pass": ok,
    }
    run.json("escobar.json", payload)
    run.csv("escobar.csv", ["t", "ratio"], zip(rep.grid, rep.ratio))
    run.plot(plots.plot_escobar, rep, run.path("escobar.png"))
    if not run.want_json:
        print("ya=%s ratio nonincreasing=%s" % (
            reports.fmt_float(rep.ya_hemisphere), rep.ratio_nonincreasing))
    return 0 if ok else 2


def _cmd_verify_all(run):
    results = verify_mod.run_all(printer=None if run.want_json else print)
    ok = all(r.passed for r in results)
    run.json("verify.json", {
        "criteria": [{
            "id": r.cid, "description": r.description, "measured": r.measured,
            "tolerance": r.tolerance, "passed": r.passed,
            "wall_time_s": r.wall_time_s,
            "checks": [{"label": c[0], "measured": c[1], "tolerance": c[2], "passed": c[3]}
                       for c in r.checks],
        } for r in results],
        "all_passed": ok,
    })
    run.csv("verify.csv", ["criterion", "measured", "tolerance", "passed", "wall_time_s"],
            [(r.cid, r.measured, r.tolerance, r.passed, r.wall_time_s) for r in results])
    run.plot(plots.plot_verify, results, run.path("verify.png"))
    return 0 if ok else 2


_RUNNERS = {
    "constants": _cmd_constants,
    "multiplier": _cmd_multiplier,
    "adapted": _cmd_adapted,
    "volume": _cmd_volume,
    "chain": _cmd_chain,
    "rayleigh": _cmd_rayleigh,
    "escobar": _cmd_escobar,
    "verify-all": _cmd_verify_all,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a subcommand is required")
    try:
        file_values = _read_config(args.config) if args.config else {}
        cfg = _merge_config(args.command, args, file_values)
        outdir = _resolve_outdir(args, file_values)
    except USAGE_ERRORS as exc:
        print("ahlab: error: %s" % exc, file=sys.stderr)
        return 1
    run = _Run(cfg, outdir, args.json, args.no_plots)
    try:
        return _RUNNERS[args.command](run)
    except VERIFY_ERRORS as exc:
        print("ahlab: verification failure: %s" % exc, file=sys.stderr)
        return 2
    except USAGE_ERRORS as exc:
        print("ahlab: error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
