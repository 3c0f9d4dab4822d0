"""baire-lab: command-line front end for the engines."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .approx import pieces_from_stable, stable_check, stable_sequence
from .compositor import (BadWitness, base_compose, classify_report, compose_witness,
                         interval_base, left_demo, pieces_base, ramp_jumpsum_sequence,
                         random_open_intervals)
from .covers import (ConstantGauge, FormulaGauge, GaugeValidationError, RefinementFailure,
                     ThresholdUnresolvable, cover_from_gauge, gauge_for_epsilon)
from .dsl import (BuiltinDef, DomainError, EpsDef, FuncDef, GaugeDef, LexError, LimitDef,
                  ParseError, eval_ast, parse_expr, parse_program, parse_rset)
from .exact import parse_rational
from .falsify import EpsilonSpec, eps_delta_falsify
from .functions import (BUILTINS, ExprFunc, FuncSeq, LimitFunc, OutsideCover,
                        PiecewiseFunc, Unresolvable, builtin, oscillation, seq_from_ast)
from .sets import NotDiscrete

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ENGINE = 0, 1, 2, 3

DEFAULTS = {"seed": "0", "window": "-2,2", "trunc": "1000", "pairs": "100000", "scan": "10000",
            "workers": "1", "out": "", "format": "json", "horizon": "64", "levels": "32"}
CONFIG_ENV = "BAIRE_LAB_CONFIG"


class InputError(ValueError):
    pass


ENGINE_ERRORS = (Unresolvable, RefinementFailure, ThresholdUnresolvable, GaugeValidationError,
                 NotDiscrete, OutsideCover, DomainError)
INPUT_ERRORS = (InputError, ParseError, LexError, BadWitness, FileNotFoundError)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def read_config(path: str | None) -> dict:
    if not path:
        return {}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{k}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise InputError(f"{path}:{k}: unknown key {key!r}")
        out[key] = val
    return out


def _positive_int(name, text) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise InputError(f"{name} must be an integer, got {text!r}") from exc
    if v <= 0 and name != "seed":
        raise InputError(f"{name} must be positive")
    if name == "seed" and not 0 <= v < 2**64:
        raise InputError("seed must be a 64-bit unsigned integer")
    return v


def _rational(name, text) -> Fraction:
    try:
        return parse_rational(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{name}: not a number: {text!r}") from exc


def effective_config(args) -> dict:
    """CLI flag > config file > default."""
    path = args.config or os.environ.get(CONFIG_ENV)
    file_cfg = read_config(path)
    raw = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        raw[key] = str(flag) if flag is not None else file_cfg.get(key, default)
    cfg = {k: _positive_int(k, raw[k]) for k in ("seed", "trunc", "pairs", "scan", "workers",
                                                  "horizon", "levels")}
    parts = raw["window"].split(",")
    if len(parts) != 2:
        raise InputError("window must be 'a,b'")
    a, b = (_rational("window", p) for p in parts)
    if not a < b:
        raise InputError("window needs a < b")
    cfg["window"] = (a, b)
    if raw["format"] not in ("json", "csv"):
        raise InputError("format must be json or csv")
    cfg["format"] = raw["format"]
    cfg["out"] = raw["out"]
    cfg["config_file"] = path or None
    return cfg


def _echo(cfg: dict) -> dict:
    # the output path lives in the sidecar so reports written to different paths still match
    out = {k: v for k, v in cfg.items() if k != "out"}
    out["window"] = [str(cfg["window"][0]), str(cfg["window"][1])]
    return out


# ---------------------------------------------------------------------------
# loading functions and gauges
# ---------------------------------------------------------------------------

def _from_definition(d, prog_name: str, cfg: dict, jump_n):
    if isinstance(d, FuncDef):
        return PiecewiseFunc(d.pieces, name=d.name, window=cfg["window"])
    if isinstance(d, BuiltinDef):
        N = int(d.params[0]) if d.params else None
        return _builtin(d.builtin, cfg, jump_n if N is None else N)
    if isinstance(d, LimitDef):
        return LimitFunc(seq_from_ast(d.expr, d.mode, d.name), name=d.name)
    raise InputError(f"{prog_name}: {d.name!r} is not a function")


def _builtin(name: str, cfg: dict, jump_n=None):
    if name not in BUILTINS:
        raise InputError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
    if name == "jumpsum":
        return builtin(name, jump_n or 20)
    return builtin(name, cfg["trunc"])


def load_program(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    return parse_program(p.read_text())


def load_func(ref: str, cfg: dict, jump_n=None):
    """builtin:NAME, PATH.bdsl, PATH.bdsl:NAME, or an expression in x."""
    if ref is None:
        raise InputError("--func is required")
    if ref.startswith("builtin:"):
        return _builtin(ref.split(":", 1)[1], cfg, jump_n)
    path, _, name = ref.partition(".bdsl")
    if _ or ref.endswith(".bdsl"):
        prog = load_program(path + ".bdsl")
        name = name.lstrip(":")
        if name:
            if name not in prog.definitions:
                raise InputError(f"{path}.bdsl has no definition {name!r}")
            return _from_definition(prog[name], path, cfg, jump_n)
        for d in prog.definitions.values():
            if isinstance(d, (FuncDef, BuiltinDef, LimitDef)):
                return _from_definition(d, path, cfg, jump_n)
        raise InputError(f"{path}.bdsl defines no function")
    return ExprFunc(parse_expr(ref), name=ref)


def load_gauge(ref: str | None, f, eps, cfg: dict, args):
    if ref is None or ref == "auto":
        return gauge_for_epsilon(f, eps, cfg["window"], validate_pairs=0)
    if ref.startswith("const:"):
        return ConstantGauge(_rational("gauge", ref[6:]))
    if ".bdsl" in ref:
        path, _, name = ref.partition(".bdsl")
        prog = load_program(path + ".bdsl")
        gauges = [d for n, d in prog.definitions.items()
                  if isinstance(d, GaugeDef) and (not name.lstrip(":") or n == name.lstrip(":"))]
        if not gauges:
            raise InputError(f"{ref}: no gauge definition")
        return FormulaGauge(gauges[0].expr)
    return FormulaGauge(parse_expr(ref))


def parse_eps_list(text: str | None, default=("1/2", "1/4", "1/8")) -> list:
    items = text.split(",") if text else list(default)
    out = [_rational("eps", t) for t in items]
    if any(e <= 0 for e in out):
        raise InputError("eps must be positive")
    return out


def parse_eps_spec(text: str, cfg: dict) -> EpsilonSpec:
    if ".bdsl" in text:
        prog = load_program(text.partition(".bdsl")[0] + ".bdsl")
        eds = [d for d in prog.definitions.values() if isinstance(d, EpsDef)]
        if not eds:
            raise InputError(f"{text}: no eps definition")
        return EpsilonSpec(func=ExprFunc(eds[0].expr, name=eds[0].name))
    try:
        return EpsilonSpec.const(_rational("eps", text))
    except InputError:
        return EpsilonSpec(func=ExprFunc(parse_expr(text), name=text))


# ---------------------------------------------------------------------------
# commands: each returns (report dict, csv rows or None, success flag)
# ---------------------------------------------------------------------------

def cmd_classify(args, cfg):
    f = load_func(args.func, cfg, args.jump_n)
    rep = classify_report(f, parse_eps_list(args.eps), pairs=cfg["pairs"], scan=cfg["scan"],
                          seed=cfg["seed"], workers=cfg["workers"], window=cfg["window"],
                          horizon=cfg["horizon"])
    js = rep.to_json()
    rows = [{"id": c["id"], "verdict": c["verdict"]} for c in js["conditions"]]
    return js, rows, rep.consistency["consistent"]


def _plot_rows(f, gauge, cfg, points: int = 201):
    a, b = cfg["window"]
    rows = []
    for k in range(points):
        x = a + (b - a) * Fraction(k, points - 1)
        try:
            fx, dx = f(x), gauge(x)
        except (OutsideCover, DomainError):
            continue
        om = oscillation(f, x, K=12, m=4, seed=cfg["seed"]).final
        rows.append({"x": str(x), "fx": str(fx), "delta": str(dx), "omega": float(om)})
    return rows


def cmd_gauge(args, cfg):
    f = load_func(args.func, cfg, args.jump_n)
    out, ok, rows = [], True, []
    for e in parse_eps_list(args.eps):
        g = gauge_for_epsilon(f, e, cfg["window"], validate_pairs=cfg["pairs"], seed=cfg["seed"],
                              workers=cfg["workers"])
        out.append({"eps": str(e), "gauge": g.to_json()})
        ok &= g.validation is None or g.validation.passed
        if cfg["format"] == "csv" and not rows:
            rows = _plot_rows(f, g, cfg)
    return {"function": f.describe(), "gauges": out}, rows, ok


def cmd_cover(args, cfg):
    f = load_func(args.func, cfg, args.jump_n)
    eps = parse_eps_list(args.eps, ("1/2",))[0]
    g = load_gauge(args.gauge, f, eps, cfg, args)
    cover, cert = cover_from_gauge(f, g, eps, levels=cfg["levels"], window=cfg["window"],
                                   pairs=cfg["pairs"], seed=cfg["seed"])
    js = {"function": f.describe(), "gauge": g.describe(), "eps": str(eps),
          "certificate": cert.to_json(), "cover": cover.to_json(max_levels=2)}
    return js, [cert.to_json()], cert.passed


def cmd_falsify(args, cfg):
    f = load_func(args.func, cfg, args.jump_n)
    eps = parse_eps_spec(args.eps or "1/2", cfg)
    g = load_gauge(args.gauge, f, eps.value if eps.value is not None else Fraction(1, 2), cfg,
                   args)
    rep = eps_delta_falsify(f, g, eps, pairs=cfg["pairs"], seed=cfg["seed"],
                            window=cfg["window"], workers=cfg["workers"])
    return rep.to_json(), [v.row() for v in rep.violations], rep.passed


def cmd_stable(args, cfg):
    f = load_func(args.func, cfg, args.jump_n)
    seq = stable_sequence(f)
    st = stable_check(seq, f, samples=args.samples, horizon=cfg["horizon"], seed=cfg["seed"],
                      window=cfg["window"])
    sets = pieces_from_stable(seq, horizon=cfg["horizon"])
    U = seq.generator.closed_union(cfg["horizon"])
    missed = [str(x) for x, k in zip(st.points, st.indices) if k is None and U.contains(x)]
    rows = [{"x": str(x), "index": "" if k is None else k} for x, k in zip(st.points, st.indices)]
    return ({"function": f.describe(), "sequence": seq.name, "check": st.to_json(),
             "stabilization_sets": sets.to_json(),
             "unstabilized_inside_U_horizon": missed}, rows, not missed)


def _constant_seq(g):
    return FuncSeq(lambda n: g, "pointwise", g, None, f"const({g.describe()})")


def cmd_compose(args, cfg):
    f = load_func(args.func, cfg, args.jump_n)
    g_ref = args.g or "builtin:jumpsum"
    if g_ref == "builtin:jumpsum":
        g_seq = ramp_jumpsum_sequence(args.jump_n or 20)
    else:
        g_seq = _constant_seq(load_func(g_ref, cfg, args.jump_n))
    _, rep = compose_witness(stable_sequence(f), g_seq, samples=args.samples,
                             horizon=cfg["horizon"], seed=cfg["seed"], window=cfg["window"])
    js = rep.to_json()
    js.update({"f": f.describe(), "g_sequence": g_seq.name})
    rows = [{"n": n, "max_deviation": rep.deviation(n), "counted": rep.counted[n - 1]}
            for n in range(1, rep.horizon + 1)]
    return js, rows, True


def cmd_base_compose(args, cfg):
    f = load_func(args.func, cfg, args.jump_n)
    g = load_func(args.g or "3*x - 1", cfg, args.jump_n)
    corpus = random_open_intervals(args.corpus, cfg["seed"])
    cb, cert = base_compose(f, pieces_base(f), g, interval_base(cfg["window"], args.depth), corpus)
    js = {"f": f.describe(), "g": g.describe(), "certificate": cert.to_json(),
          "base": cb.to_json()}
    rows = [{"W": str(w), "equal": e} for w, _, _, e in cert.rows]
    return js, rows, cert.passed


def _xn_from(text: str):
    e = parse_expr(text)
    return lambda n: eval_ast(e, env={"n": Fraction(n)})


def cmd_left_demo(args, cfg):
    kw = dict(N=cfg["trunc"], samples=args.samples, scan_points=cfg["scan"], seed=cfg["seed"])
    if not args.default:
        if args.func:
            kw["f"] = load_func(args.func, cfg, args.jump_n)
        if args.x0 is not None:
            kw["x0"] = _rational("x0", args.x0)
        if args.xn:
            kw["x_n"] = _xn_from(args.xn)
        if args.V:
            kw["V"] = parse_rset(args.V)
    demo = left_demo(**kw)
    js = demo.to_json()
    rows = [{"n": n, "x_n": str(x), "f_x_n": str(y)} for n, (x, y) in
            enumerate(demo.witnesses[:100], 1)]
    return js, rows, demo.passed


COMMANDS = {"classify": cmd_classify, "gauge": cmd_gauge, "cover": cmd_cover,
            "falsify": cmd_falsify, "stable": cmd_stable, "compose": cmd_compose,
            "left-demo": cmd_left_demo, "base-compose": cmd_base_compose}


# ---------------------------------------------------------------------------
# parser and output
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed")
    common.add_argument("--window", help="a,b")
    common.add_argument("--trunc", help="truncation N for enumerated builtins")
    common.add_argument("--pairs")
    common.add_argument("--scan")
    common.add_argument("--workers")
    common.add_argument("--horizon")
    common.add_argument("--levels")
    common.add_argument("--out")
    common.add_argument("--format")
    common.add_argument("--config")
    common.add_argument("--expect-pass", action="store_true")
    common.add_argument("--func")
    common.add_argument("--jump-n", type=int)
    p = _Parser(prog="baire-lab", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sp = {name: sub.add_parser(name, parents=[common]) for name in COMMANDS}
    for name in ("classify", "gauge", "cover", "falsify"):
        sp[name].add_argument("--eps")
    for name in ("cover", "falsify"):
        sp[name].add_argument("--gauge", help="expression in x, const:V, auto or FILE.bdsl")
    for name in ("stable", "compose", "left-demo"):
        sp[name].add_argument("--samples", type=int, default=10_000 if name != "compose" else 1000)
    sp["compose"].add_argument("--g")
    sp["base-compose"].add_argument("--g")
    sp["base-compose"].add_argument("--corpus", type=int, default=20)
    sp["base-compose"].add_argument("--depth", type=int, default=6)
    ld = sp["left-demo"]
    ld.add_argument("--default", action="store_true")
    ld.add_argument("--x0")
    ld.add_argument("--xn", help="expression in n")
    ld.add_argument("--V", help="open set, e.g. (-1/2,1/2)")
    return p


def _csv_text(rows) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def emit(result: dict, rows, cfg: dict, meta: dict) -> None:
    text = _dumps(result) if cfg["format"] == "json" else _csv_text(rows)
    if not cfg["out"]:
        sys.stdout.write(text)
        return
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    if cfg["format"] == "json" and rows and result.get("command") == "falsify":
        out.with_suffix(".violations.csv").write_text(_csv_text(rows))
    Path(str(out) + ".meta.json").write_text(_dumps(meta))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.time()
    try:
        args = build_parser().parse_args(argv)
        cfg = effective_config(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report, rows, ok = COMMANDS[args.command](args, cfg)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ENGINE_ERRORS as exc:
        print(f"engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code = EXIT_FAIL if args.expect_pass and not ok else EXIT_OK
    result = {"command": args.command, "config": _echo(cfg), "report": report,
              "passed": bool(ok), "exit_code": code}
    meta = {"argv": argv, "out": cfg["out"], "started": started, "elapsed_s": round(time.time() - started, 3),
            "version": __version__, "numpy": np.__version__}
    emit(result, rows, cfg, meta)
    return code


if __name__ == "__main__":
    sys.exit(main())
