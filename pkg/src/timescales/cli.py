"""Command-line front end.

    timescales [--config PATH] [--tol NAME=VALUE ...] [--array] COMMAND ...

Commands read a JSON config of named scales, functions and variational
problems (the packaged default is used without ``--config``) and print JSON:
one object per line, or a single array with ``--array``.  Floats are written
with 17 significant digits and non-finite values as ``null``, so identical
runs give identical bytes.

Exit status: 0 success, 1 a checked identity failed, 2 bad config or
arguments, 3 numeric or domain error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import numpy as np

from .calculus import TsFunction, delta_derivative, integrate, nabla_derivative
from .duality import (
    DUAL_REGULARITY,
    FUNCTION_IDENTITIES,
    SCALE_IDENTITIES,
    dual_scale,
    run_duality_matrix,
)
from .errors import (
    ConfigError,
    ConvexityPreconditionFailed,
    DomainError,
    NonConvergence,
    SingularHessian,
    TimeScaleError,
)
from .expr import parse, substitute_negate
from .timescale import DEFAULT_DENSITY, TimeScale, parse_scale_literal, random_scale
from .variational import (
    Candidate,
    Lagrangian,
    VariationalProblem,
    check_euler_lagrange,
    check_weierstrass_delta,
    check_weierstrass_nabla,
    dual_problem,
    el_domain_description,
    el_points,
    el_residual_estimate,
    make_candidate,
    minimize_discrete,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_TOLERANCES = {"identity_tol": 1e-8, "integral_tol": 1e-9, "derivative_tol": 1e-6}
RANDOM_SCALES = 5
RANDOM_WINDOW = (-3.0, 3.0)
RANDOM_MIN_GAP = 0.05


# ---------------------------------------------------------------------------
# JSON output


def encode(obj: Any) -> str:
    """Deterministic JSON: insertion-ordered keys, floats as ``.17g``, inf/nan as null."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def emit(objs: list, as_array: bool, out) -> None:
    if as_array:
        out.write("[" + ",\n ".join(encode(o) for o in objs) + "]\n")
    else:
        for o in objs:
            out.write(encode(o) + "\n")


# ---------------------------------------------------------------------------
# config


@dataclass
class ProblemEntry:
    problem: VariationalProblem
    candidate: Candidate | None
    spec: dict


@dataclass
class Config:
    scales: dict[str, TimeScale] = field(default_factory=dict)
    functions: dict[str, TsFunction] = field(default_factory=dict)
    problems: dict[str, ProblemEntry] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


def _scale(obj, scales: dict[str, TimeScale], where: str) -> TimeScale:
    if isinstance(obj, str):
        if obj not in scales:
            raise ConfigError(f"{where}: unknown scale {obj!r}")
        return scales[obj]
    try:
        return parse_scale_literal(obj)
    except (ValueError, TimeScaleError) as exc:
        raise ConfigError(f"{where}: bad scale literal: {exc}") from None


def _function(spec: dict, scales, where: str) -> TsFunction:
    if not isinstance(spec, dict) or "expr" not in spec or "scale" not in spec:
        raise ConfigError(f"{where}: a function needs 'expr' and 'scale'")
    T = _scale(spec["scale"], scales, where)
    try:
        return TsFunction.from_source(spec["expr"], T, spec.get("regularity", "smooth"))
    except DomainError as exc:
        raise ConfigError(f"{where}: not defined on its scale: {exc}") from None
    except (ValueError, TimeScaleError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _candidate(spec: dict, p: VariationalProblem, where: str) -> Candidate:
    kinks = spec.get("kinks", ())
    try:
        if "y" in spec:
            y = TsFunction.from_source(str(spec["y"]), p.scale)
        elif "y_table" in spec:
            y = TsFunction.from_table(spec["y_table"], p.window)
        else:
            raise ConfigError(f"{where}: candidate needs 'y' or 'y_table'")
        return make_candidate(p, y, kinks)
    except ConfigError:
        raise
    except (ValueError, TypeError, TimeScaleError, ArithmeticError) as exc:
        raise ConfigError(f"{where}: bad candidate: {exc}") from None


PROBLEM_KEYS = ("lagrangian", "scale", "a", "b", "alpha", "beta", "setting")


def _problem(spec: dict, scales, where: str) -> ProblemEntry:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: a problem must be a JSON object")
    missing = [k for k in PROBLEM_KEYS if k not in spec]
    if missing:
        raise ConfigError(f"{where}: missing {', '.join(missing)}")
    T = _scale(spec["scale"], scales, where)
    try:
        p = VariationalProblem(Lagrangian.parse(spec["lagrangian"]), T, spec["a"], spec["b"],
                               spec["alpha"], spec["beta"], spec["setting"])
    except (ValueError, TypeError, TimeScaleError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    cand = _candidate(spec["candidate"], p, where) if "candidate" in spec else None
    return ProblemEntry(p, cand, spec)


def load_config(source=None) -> Config:
    """Build a :class:`Config` from a path, an already parsed dict, or the packaged default."""
    if source is None:
        text = resources.files("timescales").joinpath("data/default_config.json").read_text()
        raw = json.loads(text)
    elif isinstance(source, dict):
        raw = source
    else:
        try:
            with open(source) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - {"scales", "functions", "problems", "tolerances"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for section in ("scales", "functions", "problems", "tolerances"):
        if not isinstance(raw.get(section, {}), dict):
            raise ConfigError(f"config section {section!r} must be an object")
    cfg = Config()
    for name, lit in raw.get("scales", {}).items():
        cfg.scales[name] = _scale(lit, {}, f"scale {name}")
    for name, spec in raw.get("functions", {}).items():
        cfg.functions[name] = _function(spec, cfg.scales, f"function {name}")
    for name, spec in raw.get("problems", {}).items():
        cfg.problems[name] = _problem(spec, cfg.scales, f"problem {name}")
    cfg.tolerances.update(_tolerances(raw.get("tolerances", {}).items()))
    return cfg


def _tolerances(pairs) -> dict[str, float]:
    out = {}
    for name, value in pairs:
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {name!r}; expected one of {sorted(DEFAULT_TOLERANCES)}")
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"tolerance {name} must be a number") from None
        if not value >= 0:
            raise ConfigError(f"tolerance {name} must be nonnegative")
        out[name] = value
    return out


def _parse_tol_flags(flags) -> dict[str, float]:
    pairs = []
    for item in flags or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        pairs.append((name.strip(), value.strip()))
    return _tolerances(pairs)


# ---------------------------------------------------------------------------
# literal forms for dualize


def scale_literal(T: TimeScale) -> list:
    return T.to_literal()


def function_literal(f: TsFunction) -> dict:
    return {"expr": str(f.expr), "scale": scale_literal(f.scale), "regularity": f.regularity}


def problem_literal(p: VariationalProblem, cand: Candidate | None = None) -> dict:
    out = {"lagrangian": str(p.lagrangian), "scale": scale_literal(p.scale),
           "a": p.a, "b": p.b, "alpha": p.alpha, "beta": p.beta, "setting": p.setting}
    if cand is not None:
        out["candidate"] = _candidate_literal(cand)
    return out


def _candidate_literal(c: Candidate) -> dict:
    out: dict[str, Any] = {}
    if c.y.expr is not None:
        out["y"] = str(c.y.expr)
    else:
        out["y_table"] = [[t, v] for t, v in c.y.table]
    if c.kinks:
        out["kinks"] = list(c.kinks)
    return out


def _dual_candidate_spec(spec: dict) -> dict:
    """Candidate spec of the dual problem: ``y(-t)`` with kinks mirrored."""
    out: dict[str, Any] = {}
    if "y" in spec:
        out["y"] = str(substitute_negate(parse(str(spec["y"])), "t"))
    else:
        out["y_table"] = [[-float(t) + 0.0, v] for t, v in reversed(spec["y_table"])]
    if spec.get("kinks"):
        out["kinks"] = [-float(k) + 0.0 for k in reversed(spec["kinks"])]
    return out


def dualize_literal(obj) -> Any:
    """Dual of a scale literal, function literal or problem literal."""
    if isinstance(obj, list):
        return scale_literal(dual_scale(_scale(obj, {}, "literal")))
    if isinstance(obj, dict) and "expr" in obj:
        f = _function(obj, {}, "literal")
        return {"expr": str(substitute_negate(f.expr, "t")),
                "scale": scale_literal(dual_scale(f.scale)),
                "regularity": DUAL_REGULARITY[f.regularity]}
    if isinstance(obj, dict) and "lagrangian" in obj:
        entry = _problem(obj, {}, "literal")
        out = problem_literal(dual_problem(entry.problem))
        if "candidate" in obj:
            out["candidate"] = _dual_candidate_spec(obj["candidate"])
        return out
    raise ConfigError("literal must be a scale array, a function object or a problem object")


# ---------------------------------------------------------------------------
# commands


def _lookup(table: dict, name: str, kind: str):
    if name not in table:
        raise ConfigError(f"unknown {kind} {name!r}; known: {sorted(table)}")
    return table[name]


def cmd_classify(cfg: Config, args) -> tuple[list, int]:
    if args.literal is not None:
        T, label = _scale(_json_arg(args.literal), {}, "literal"), "literal"
    else:
        T, label = _lookup(cfg.scales, _need_name(args), "scale"), args.name
    rows = [{"t": t, "sigma": T.sigma(t), "rho": T.rho(t), "mu": T.mu(t), "nu": T.nu(t),
             "class": str(T.classify(t))} for t in T.sample_points(args.n)]
    return [{"scale": label, "literal": scale_literal(T),
             "dual": scale_literal(dual_scale(T)), "rows": rows}], EXIT_OK


def cmd_deriv(cfg: Config, args) -> tuple[list, int]:
    f = _lookup(cfg.functions, args.function, "function")
    d = (delta_derivative if args.setting == "delta" else nabla_derivative)(f, args.at)
    return [{"function": args.function, "setting": args.setting, "t": args.at,
             "value": d.value, "method": d.method, "est_error": d.est_error}], EXIT_OK


def cmd_integrate(cfg: Config, args) -> tuple[list, int]:
    f = _lookup(cfg.functions, args.function, "function")
    a = f.scale.min if args.lower is None else args.lower
    b = f.scale.max if args.upper is None else args.upper
    value = integrate(f.scale, a, b, args.setting, f)
    return [{"function": args.function, "setting": args.setting, "a": a, "b": b,
             "value": value}], EXIT_OK


def cmd_dualize(cfg: Config, args) -> tuple[list, int]:
    if args.literal is not None:
        return [dualize_literal(_json_arg(args.literal))], EXIT_OK
    name = _need_name(args)
    if name in cfg.scales:
        return [scale_literal(dual_scale(cfg.scales[name]))], EXIT_OK
    if name in cfg.functions:
        return [dualize_literal(function_literal(cfg.functions[name]))], EXIT_OK
    if name in cfg.problems:
        entry = cfg.problems[name]
        lit = problem_literal(entry.problem)
        if "candidate" in entry.spec:
            lit["candidate"] = entry.spec["candidate"]
        return [dualize_literal(lit)], EXIT_OK
    raise ConfigError(f"{name!r} is not a scale, function or problem of the config")


def _random_instances(cfg: Config, seed: int):
    rng = np.random.default_rng(seed)
    scales = {}
    funcs = {}
    for i in range(RANDOM_SCALES):
        sname = f"random{i}"
        T = random_scale(rng, window=RANDOM_WINDOW, min_gap=RANDOM_MIN_GAP)
        scales[sname] = T
        for fname, f in cfg.functions.items():
            try:
                funcs[f"{fname}~{sname}"] = TsFunction(f.expr, T, f.regularity)
            except DomainError:
                log.info("skipping %s on %s: not defined there", fname, sname)
    return scales, funcs


def cmd_verify(cfg: Config, args) -> tuple[list, int]:
    known = set(FUNCTION_IDENTITIES) | set(SCALE_IDENTITIES)
    if args.identity is not None and args.identity not in known:
        raise ConfigError(f"unknown identity {args.identity!r}; known: {sorted(known)}")
    scales = dict(cfg.scales)
    funcs = dict(cfg.functions)
    if args.seed is not None:
        extra_scales, extra_funcs = _random_instances(cfg, args.seed)
        scales.update(extra_scales)
        funcs.update(extra_funcs)
    tol = cfg.tolerances
    reports = run_duality_matrix(
        scales, funcs, tol["identity_tol"],
        identities=None if args.identity is None else [args.identity],
        tols={"derivative_duality": tol["derivative_tol"], "integral_duality": tol["integral_tol"]},
    )
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED
    return [r.to_dict() for r in reports], code


def _resolve_candidate(entry: ProblemEntry, args) -> tuple[Candidate, str]:
    p = entry.problem
    if getattr(args, "y", None) is not None:
        return _candidate({"y": args.y}, p, "--y"), "argument"
    if entry.candidate is not None:
        return entry.candidate, "config"
    if p.window.is_discrete:
        return minimize_discrete(p), "minimizer"
    raise ConfigError("problem has no candidate; pass --y or use a purely discrete window")


def cmd_el_check(cfg: Config, args) -> tuple[list, int]:
    entry = _lookup(cfg.problems, args.problem, "problem")
    p = entry.problem
    cand, source = _resolve_candidate(entry, args)
    tol = cfg.tolerances["identity_tol" if p.window.is_discrete else "derivative_tol"]
    report = check_euler_lagrange(p, cand, tol, args.n)
    out = report.to_dict()
    out["candidate"] = source
    out["domain"] = el_domain_description(p)
    out["residuals"] = [[t, el_residual_estimate(p, cand, t)[0]] for t in el_points(p, args.n)]
    return [out], EXIT_OK if report.passed else EXIT_FAILED


def cmd_weierstrass(cfg: Config, args) -> tuple[list, int]:
    entry = _lookup(cfg.problems, args.problem, "problem")
    p = entry.problem
    cand, source = _resolve_candidate(entry, args)
    check = check_weierstrass_delta if p.setting == "delta" else check_weierstrass_nabla
    report = check(p, cand, q_grid=args.q, n_per_segment=args.n)
    out = report.to_dict()
    out["candidate"] = source
    out["witness"] = report.witness
    return [out], EXIT_OK if report.passed else EXIT_FAILED


def cmd_minimize(cfg: Config, args) -> tuple[list, int]:
    entry = _lookup(cfg.problems, args.problem, "problem")
    p = entry.problem
    if not p.window.is_discrete:
        raise ConfigError(f"problem {args.problem!r} has a window with dense points; minimize needs a discrete one")
    cand = minimize_discrete(p, max_iter=args.max_iter)
    info = cand.info
    return [{"problem": args.problem, "setting": p.setting,
             "iterations": info["iterations"], "scaled_gradient": info["scaled_gradient"],
             "functional_value": info["functional_value"],
             "y_table": [[t, v] for t, v in cand.y.table]}], EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--literal is not valid JSON: {exc}") from None


def _need_name(args) -> str:
    if args.name is None:
        raise ConfigError("give a name or --literal")
    return args.name


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), metavar="PATH",
                   help="JSON config (default: the packaged example config)")
    p.add_argument("--tol", action="append", default=d(None), metavar="NAME=VALUE",
                   help="override identity_tol, integral_tol or derivative_tol")
    p.add_argument("--array", action="store_true", default=d(False),
                   help="print one JSON array instead of one object per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timescales", description=__doc__.split("\n\n")[0])
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text):
        sp = sub.add_parser(name, help=help_text)
        _add_common(sp, suppress=True)
        sp.set_defaults(handler=handler)
        return sp

    sp = command("classify", cmd_classify, "sigma, rho, graininess and class at sample points")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--literal", help="scale literal instead of a config name")
    sp.add_argument("--n", type=int, default=DEFAULT_DENSITY, help="sample points per segment")

    for name, handler in (("deriv", cmd_deriv), ("integrate", cmd_integrate)):
        sp = command(name, handler, f"{name} of a config function")
        sp.add_argument("function")
        sp.add_argument("--setting", choices=("delta", "nabla"), default="delta")
        if name == "deriv":
            sp.add_argument("--at", type=float, required=True, metavar="T")
        else:
            sp.add_argument("--from", dest="lower", type=float, metavar="A")
            sp.add_argument("--to", dest="upper", type=float, metavar="B")

    sp = command("dualize", cmd_dualize, "print the dual of a scale, function or problem")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--literal", help="JSON scale, function or problem literal")

    sp = command("verify", cmd_verify, "run the duality matrix over the config")
    sp.add_argument("--identity", help="only run this identity")
    sp.add_argument("--seed", type=int, help="add randomized scales drawn with this seed")

    for name, handler, text in (("el-check", cmd_el_check, "Euler-Lagrange residuals"),
                                ("weierstrass", cmd_weierstrass, "Weierstrass excess check")):
        sp = command(name, handler, text)
        sp.add_argument("problem")
        sp.add_argument("--y", help="candidate expression in t (overrides the config)")
        sp.add_argument("--n", type=int, default=DEFAULT_DENSITY, help="sample points per segment")
        if name == "weierstrass":
            sp.add_argument("--q", type=float, nargs="+", help="explicit q grid")

    sp = command("minimize", cmd_minimize, "Newton minimizer of a discrete problem")
    sp.add_argument("problem")
    sp.add_argument("--max-iter", type=int, default=200)
    return parser


def _fail(code: int, exc: BaseException, err, **payload) -> int:
    body = {"error": type(exc).__name__, "message": str(exc), **payload}
    err.write(encode(body) + "\n")
    return code


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg.tolerances.update(_parse_tol_flags(args.tol))
        objs, code = args.handler(cfg, args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc, err)
    except NonConvergence as exc:
        return _fail(EXIT_NUMERIC, exc, err, iterations=exc.iterations,
                     gradient_norm=exc.gradient_norm)
    except ConvexityPreconditionFailed as exc:
        return _fail(EXIT_NUMERIC, exc, err, witness=exc.witness)
    except (SingularHessian, TimeScaleError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, exc, err)
    emit(objs, args.array, out)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
