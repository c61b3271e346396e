"""Command-line runner: ``klkit <command> [--config FILE] [flags]``.

Exit status is 0 on success, 1 when a check or study reports a failing
verdict, and 2 on a configuration or execution error.
"""
import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

import numpy as np

from . import approximants as ap
from .conditions import FAIL, check_location_scale, check_theorem
from .density import BUILTINS, MixingDistribution, make_density
from .kernels import make_kernel
from .kl import convergence_study
from .prior_mc import (BaseMeasure, DPSpec, hierarchical_mass_estimate,
                       kl_mass_estimate)

SCHEMA = "v1"
COMMANDS = ("check", "approximate", "converge", "priormass", "verify-bounds")

FAMILY_ALIASES = {"gamma": "gamma_eq15", "exponential": "exponential_truncated"}

# shortcut flags and where they go
F0_FLAGS = ("mu", "sigma", "loc", "scale", "shape", "rate", "a", "b", "weight")
KERNEL_FLAGS = ("nu", "lam")

_TOP_KEYS = {
    "command", "f0", "kernel", "theorem", "family", "eta", "delta",
    "declared_support", "ladder", "index", "grid", "tol", "eps_target",
    "m", "seed", "draws", "epsilon", "concentration", "truncation", "base",
    "hyper", "hyper_prior", "xi_prior", "p0", "threads", "output",
    "per_draw", "options",
}
_BLOCK_KEYS = {
    "f0": ("name", "params"), "kernel": ("family", "params"),
    "base": ("name", "params"), "hyper_prior": ("name", "params"),
    "xi_prior": ("name", "params"), "p0": ("name", "params"),
}


class ConfigError(ValueError):
    pass


# --- formatting and output -------------------------------------------------

def fmt(v):
    """12 significant digits for floats; other values as text."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    if v is None:
        return ""
    return str(v)


def csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["schema"] + list(columns))
    for r in rows:
        w.writerow([SCHEMA] + [fmt(v) for v in r])
    return buf.getvalue()


def write_atomic(path, text):
    """Write to a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".klkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- configuration ------------------------------------------------------------

def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _kv(items, flag):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"{flag} expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def _csv_numbers(text, cast, flag):
    try:
        return [cast(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{flag} expects a comma-separated list, got {text!r}") from None


def load_config(path):
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    validate_config(cfg, path)
    return cfg


def validate_config(cfg, where="config"):
    unknown = sorted(set(cfg) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")
    for key, allowed in _BLOCK_KEYS.items():
        block = cfg.get(key)
        if block is None:
            continue
        if not isinstance(block, dict):
            raise ConfigError(f"{where}: field {key} must be an object")
        bad = sorted(set(block) - set(allowed))
        if bad:
            raise ConfigError(f"{where}: unknown field(s) {key}.{', '.join(bad)}")
        if allowed[0] not in block:
            raise ConfigError(f"{where}: field {key}.{allowed[0]} is required")
        if not isinstance(block.get("params", {}), dict):
            raise ConfigError(f"{where}: field {key}.params must be an object")
    if "command" in cfg and cfg["command"] not in COMMANDS:
        raise ConfigError(f"{where}: command must be one of {', '.join(COMMANDS)}")


def merge_flags(cfg, args):
    """Overlay command-line flags on a (validated) config dict."""
    cfg = json.loads(json.dumps(cfg))
    cfg["command"] = args.command
    f0_params = {k: getattr(args, k) for k in F0_FLAGS if getattr(args, k) is not None}
    f0_params.update(_kv(args.f0_param, "--f0-param"))
    k_params = {k: getattr(args, k) for k in KERNEL_FLAGS if getattr(args, k) is not None}
    k_params.update(_kv(args.kernel_param, "--kernel-param"))
    if args.d is not None:
        k_params["d"] = args.d
        f0_params.setdefault("d", args.d)
    if args.f0 is not None:
        cfg["f0"] = {"name": args.f0, "params": f0_params}
    elif f0_params and "f0" in cfg:
        cfg["f0"].setdefault("params", {}).update(f0_params)
    if args.kernel is not None:
        cfg["kernel"] = {"family": args.kernel, "params": k_params}
    elif k_params and "kernel" in cfg:
        cfg["kernel"].setdefault("params", {}).update(k_params)
    for name in ("base", "hyper_prior", "xi_prior", "p0"):
        val = getattr(args, name, None)
        params = _kv(getattr(args, name + "_param", None), f"--{name.replace('_', '-')}-param")
        if val is not None:
            cfg[name] = {"name": val, "params": params}
        elif params and name in cfg:
            cfg[name].setdefault("params", {}).update(params)
    simple = ("theorem", "family", "eta", "delta", "index", "grid", "tol",
              "eps_target", "m", "seed", "draws", "concentration",
              "truncation", "hyper", "threads", "output", "per_draw")
    for key in simple:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if args.declared_support is not None:
        cfg["declared_support"] = args.declared_support
    if args.ladder is not None:
        cfg["ladder"] = _csv_numbers(args.ladder, int, "--ladder")
    if args.epsilon is not None:
        cfg["epsilon"] = _csv_numbers(args.epsilon, float, "--epsilon")
    if args.points is not None:
        cfg["grid"] = _csv_numbers(args.points, float, "--points")
    validate_config(cfg, "flags")
    return cfg


def _density(cfg):
    block = cfg.get("f0")
    if block is None:
        raise ConfigError("f0 is required")
    name = block["name"]
    if name not in BUILTINS:
        raise ConfigError(f"f0.name: unknown density {name!r}; known: {', '.join(BUILTINS)}")
    try:
        return make_density(name, **block.get("params", {}))
    except TypeError as exc:
        raise ConfigError(f"f0.params: {exc}") from None


def _kernel(cfg, required=True):
    block = cfg.get("kernel")
    if block is None:
        if required:
            raise ConfigError("kernel is required")
        return None
    try:
        return make_kernel(block["family"], **block.get("params", {}))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"kernel: {exc}") from None


def _measure(block, field):
    try:
        return BaseMeasure(block["name"], dict(block.get("params", {})))
    except ValueError as exc:
        raise ConfigError(f"{field}: {exc}") from None


def _sequence(cfg, f0):
    family = cfg.get("family")
    if family is None:
        raise ConfigError("family is required")
    family = FAMILY_ALIASES.get(family, family)
    if family not in ap.FAMILIES:
        raise ConfigError(f"family: unknown approximant {family!r}; known: {', '.join(ap.FAMILIES)}")
    kernel = _kernel(cfg, required=family == "location_scale")
    p0 = None
    if family == "exponential_truncated":
        block = cfg.get("p0")
        if block is None and f0.params.get("shape") is not None and f0.name.startswith("pareto"):
            p0 = ap.gamma_rate_measure(float(f0.params["shape"]))
        elif block is not None and block["name"] == "gamma_rate":
            p0 = ap.gamma_rate_measure(float(block.get("params", {}).get("shape", 2.0)))
        elif block is not None and block["name"] == "discrete":
            pr = block.get("params", {})
            p0 = MixingDistribution.discrete(pr["atoms"], pr["weights"])
        else:
            raise ConfigError("p0: exponential truncation needs p0 (gamma_rate or discrete)")
    return ap.ApproximantSequence(family, f0, kernel=kernel, eta=cfg.get("eta", 0.5),
                                  p0=p0, eps_target=cfg.get("eps_target"),
                                  options=cfg.get("options", {}))


# --- commands ---------------------------------------------------------------------

def cmd_check(cfg, out):
    f0 = _density(cfg)
    kernel = _kernel(cfg)
    declared = cfg.get("declared_support", True)
    if cfg.get("theorem") is None:
        rep = check_location_scale(f0, kernel, cfg.get("eta"), cfg.get("delta"), declared)
    else:
        rep = check_theorem(cfg["theorem"], f0, kernel, eta=cfg.get("eta"),
                            delta=cfg.get("delta"), declared_support=declared)
    rows = [(rep.theorem_id, i.tag, i.verdict, i.value, i.detail,
             json.dumps(i.witness) if i.witness is not None else "")
            for i in rep.items]
    text = csv_text(("theorem", "condition", "verdict", "value", "detail", "witness"), rows)
    lines = [f"theorem {rep.theorem_id}: f0={f0.name}, kernel={kernel.family}"]
    for i in rep.items:
        lines.append(f"  {i.tag:<16} {i.verdict:<13} {fmt(i.value):>20}  {i.detail}")
    extra = []
    if rep.eta_used is not None:
        extra.append(f"eta={fmt(rep.eta_used)}")
    if rep.delta_used is not None:
        extra.append(f"delta={fmt(rep.delta_used)}")
    for k, v in rep.radii.items():
        extra.append(f"{k}={fmt(v)}")
    lines.append(f"verdict: {rep.verdict}" + (f" ({', '.join(extra)})" if extra else ""))
    return text, "\n".join(lines), 1 if rep.verdict == FAIL else 0


def _default_grid(f0, n):
    if f0.support == "unit_interval":
        return np.linspace(0.0, 1.0, n)
    if f0.support == "positive_half_line":
        return np.linspace(0.0, 10.0 * f0.scale, n + 1)[1:]
    return np.linspace(-6.0 * f0.scale, 6.0 * f0.scale, n)


def cmd_approximate(cfg, out):
    f0 = _density(cfg)
    seq = _sequence(cfg, f0)
    index = cfg.get("index")
    if index is None:
        raise ConfigError("index is required")
    approx = seq.at(index)
    grid = cfg.get("grid", 201)
    xs = np.asarray(grid, float) if isinstance(grid, list) else _default_grid(f0, int(grid))
    fx = f0.eval(xs)
    gx = approx(xs)
    text = csv_text(("x", "f0", "approximant"), zip(xs, fx, gx))
    summary = (f"{seq.family} approximant of {f0.name} at index {index}: "
               f"{xs.size} points, max |f0 - f| = {fmt(float(np.max(np.abs(fx - gx))))}")
    return text, summary, 0


def cmd_converge(cfg, out):
    f0 = _density(cfg)
    seq = _sequence(cfg, f0)
    ladder = cfg.get("ladder") or list(ap.DEFAULT_LADDER)
    study = convergence_study(seq, ladder, tol=cfg.get("tol", 1e-7),
                              eps_target=cfg.get("eps_target"),
                              threads=cfg.get("threads"))
    rows = [(study.family, study.f0_name, r.index, r.result.value,
             r.result.abs_error_bound, r.result.tail_contribution,
             r.result.converged, r.runtime_ms, r.error)
            for r in study.rows]
    text = csv_text(("family", "f0", "index", "kl", "err_bound", "tail_contribution",
                     "quadrature_converged", "runtime_ms", "error"), rows)
    lines = [f"{study.family} approximants of {study.f0_name} (target {fmt(study.eps_target)})"]
    for r in study.rows:
        lines.append(f"  {r.index:>6}  kl={fmt(r.result.value):>20}  "
                     f"err<={fmt(r.result.abs_error_bound)}  {r.error}")
    lines.append(f"converged: {study.converged}")
    return text, "\n".join(lines), 0 if study.converged else 1


def cmd_priormass(cfg, out):
    f0 = _density(cfg)
    kernel = _kernel(cfg)
    if cfg.get("base") is None:
        raise ConfigError("base is required")
    base = _measure(cfg["base"], "base")
    c = float(cfg.get("concentration", 1.0))
    trunc = int(cfg.get("truncation", 500))
    try:
        dp = DPSpec(base, c, trunc)
    except ValueError as exc:
        raise ConfigError(f"concentration/truncation: {exc}") from None
    hp = _measure(cfg["hyper_prior"], "hyper_prior") if cfg.get("hyper_prior") else None
    eps_list = cfg.get("epsilon") or [0.5]
    if not isinstance(eps_list, list):
        eps_list = [eps_list]
    n = int(cfg.get("draws", 200))
    seed = int(cfg.get("seed", 0))
    estimates = []
    for eps in eps_list:
        if cfg.get("xi_prior"):
            xi = _measure(cfg["xi_prior"], "xi_prior")
            est = hierarchical_mass_estimate(
                xi, lambda v: DPSpec(base, v, trunc), f0, kernel, eps, n, seed,
                hyper=cfg.get("hyper"), hyper_family=(lambda v: hp) if hp else None,
                threads=cfg.get("threads"))
        else:
            est = kl_mass_estimate(f0, kernel, dp, eps, n, seed, hyper=cfg.get("hyper"),
                                   hyper_prior=hp, threads=cfg.get("threads"))
        estimates.append(est)
    rows = [(e.epsilon, e.hits, e.draws, e.fraction, *e.wilson_interval) for e in estimates]
    text = csv_text(("epsilon", "hits", "draws", "fraction", "wilson_lo", "wilson_hi"), rows)
    if cfg.get("per_draw"):
        recs = [(e.epsilon, r.index, r.kl, r.hit, r.hyper, r.xi, r.refined, r.error)
                for e in estimates for r in e.records]
        write_atomic(cfg["per_draw"], csv_text(
            ("epsilon", "draw", "kl", "hit", "hyper", "xi", "refined", "error"), recs))
    lines = [f"prior mass of KL neighbourhoods of {f0.name} ({kernel.family} kernel, "
             f"{n} draws, seed {seed})"]
    for e in estimates:
        lo, hi = e.wilson_interval
        lines.append(f"  eps={fmt(e.epsilon)}: {e.hits}/{e.draws} = {fmt(e.fraction)} "
                     f"[{fmt(lo)}, {fmt(hi)}]")
    return text, "\n".join(lines), 0


def cmd_verify_bounds(cfg, out):
    f0 = _density(cfg)
    seq = _sequence(cfg, f0)
    m = cfg.get("m")
    if m is None:
        raise ConfigError("m is required")
    grid = cfg.get("grid")
    if grid is None or not isinstance(grid, list):
        grid = np.concatenate([np.geomspace(0.5 / m, 1.0, 12), np.linspace(1.0, float(m), 12)[1:],
                               m + 1.0 / m + np.geomspace(0.05, 8.0, 6)])
    rep = ap.verify_lower_bounds(seq, m, np.asarray(grid, float),
                                 delta=cfg.get("delta", 0.25))
    rows = [(v.bound, v.x, v.value, v.floor) for v in rep.violations]
    text = csv_text(("bound", "x", "value", "floor"), rows)
    checked = ", ".join(f"{k}: {v}" for k, v in rep.checked.items())
    summary = (f"{rep.family} at m={m}: comparisons ({checked}), "
               f"{len(rep.violations)} violations, {len(rep.skipped)} skipped")
    return text, summary, 0 if rep.ok else 1


HANDLERS = {"check": cmd_check, "approximate": cmd_approximate,
            "converge": cmd_converge, "priormass": cmd_priormass,
            "verify-bounds": cmd_verify_bounds}


# --- argument parsing ----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="klkit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config; flags override its fields")
        s.add_argument("--output", "-o", help="CSV path (default: stdout)")
        s.add_argument("--f0", help="target density name")
        for k in F0_FLAGS:
            s.add_argument(f"--{k}", type=float, help=argparse.SUPPRESS)
        s.add_argument("--f0-param", action="append", metavar="KEY=VALUE")
        s.add_argument("--kernel", help="kernel family")
        for k in KERNEL_FLAGS:
            s.add_argument(f"--{k}", type=float, help=argparse.SUPPRESS)
        s.add_argument("--d", type=int, help="dimension (kernel and mv_normal target)")
        s.add_argument("--kernel-param", action="append", metavar="KEY=VALUE")
        s.add_argument("--threads", type=int)
        s.add_argument("--eta", type=float)
        s.add_argument("--delta", type=float)
        s.add_argument("--family", help="approximant family")
        s.add_argument("--p0", help="rate measure for exponential truncation")
        s.add_argument("--p0-param", action="append", metavar="KEY=VALUE")
        if name == "check":
            s.add_argument("--theorem", type=int)
            g = s.add_mutually_exclusive_group()
            g.add_argument("--declared-support", dest="declared_support",
                           action="store_true", default=None)
            g.add_argument("--no-declared-support", dest="declared_support",
                           action="store_false")
        if name in ("approximate",):
            s.add_argument("--index", type=int)
            s.add_argument("--grid", type=int, help="number of grid points")
        if name in ("converge",):
            s.add_argument("--ladder", help="comma-separated indices")
            s.add_argument("--tol", type=float)
            s.add_argument("--eps-target", type=float)
        if name == "verify-bounds":
            s.add_argument("--m", type=int)
            s.add_argument("--points", help="comma-separated x grid")
        if name == "priormass":
            s.add_argument("--base")
            s.add_argument("--base-param", action="append", metavar="KEY=VALUE")
            s.add_argument("--hyper", type=float)
            s.add_argument("--hyper-prior")
            s.add_argument("--hyper-prior-param", action="append", metavar="KEY=VALUE")
            s.add_argument("--xi-prior")
            s.add_argument("--xi-prior-param", action="append", metavar="KEY=VALUE")
            s.add_argument("--concentration", type=float)
            s.add_argument("--truncation", type=int)
            s.add_argument("--epsilon", help="comma-separated epsilons")
            s.add_argument("--draws", type=int)
            s.add_argument("--seed", type=int)
            s.add_argument("--per-draw", help="CSV path for per-draw records")
    return p


_ABSENT = ("theorem", "declared_support", "index", "grid", "ladder", "tol",
           "eps_target", "m", "points", "base", "base_param", "hyper",
           "hyper_prior", "hyper_prior_param", "xi_prior", "xi_prior_param",
           "concentration", "truncation", "epsilon", "draws", "seed", "per_draw")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for key in _ABSENT:
        if not hasattr(args, key):
            setattr(args, key, None)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else {}
        if cfg.get("command", args.command) != args.command:
            raise ConfigError(f"config command {cfg['command']!r} does not match {args.command!r}")
        cfg = merge_flags(cfg, args)
        text, summary, status = HANDLERS[args.command](cfg, None)
    except ConfigError as exc:
        print(f"klkit: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        logging.getLogger("klkit").debug("execution error", exc_info=True)
        print(f"klkit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if cfg.get("output"):
        write_atomic(cfg["output"], text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
