"""Command-line front end.

    selberg-det [--format json|csv|text] [--tol X] [--threads N] [--config FILE] [--no-meta] <command> ...

Exit codes: 0 success, 1 a verify check failed, 2 usage, 3 data, 4 numeric.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Sequence

import numpy as np

from . import geodesics as geo
from . import groupdata as gd
from . import jl
from . import laplacedet as ld
from . import regdet as rd
from . import specfun as sf
from . import traceformula as tf
from . import transferop as to
from . import verify
from . import zetas as zt
from .errors import (
    ConvergenceError,
    DataError,
    DomainError,
    FitError,
    NumericalOverflowError,
    SelbergDetError,
    UsageError,
    ValidationError,
)
from .specfun import EvalResult

__all__ = ["RunReport", "ResultRecord", "CliConfig", "run_command", "emit_report", "parse_report", "main"]

SCHEMA = "selberg-det/1"
EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class ResultRecord:
    point: dict
    value: Any
    error_estimate: float
    method: str


@dataclass
class RunReport:
    command: str
    inputs: dict
    results: list[ResultRecord] = field(default_factory=list)
    suite_outcomes: list[verify.CheckOutcome] = field(default_factory=list)
    runtime_ms: int | None = None


def _encode(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _decode(x):
    if isinstance(x, dict):
        if set(x) == {"re", "im"}:
            return complex(x["re"], x["im"])
        return {k: _decode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_decode(v) for v in x]
    return x


def _report_dict(r: RunReport) -> dict:
    out = {
        "schema": SCHEMA,
        "command": r.command,
        "inputs": _encode(r.inputs),
        "results": [_encode(asdict(rec)) for rec in r.results],
        "suite_outcomes": [
            {"check_name": c.check_name, "residual": c.residual, "tolerance": c.tolerance, "pass": c.passed}
            for c in r.suite_outcomes
        ],
    }
    if r.runtime_ms is not None:
        out["runtime_ms"] = r.runtime_ms
    return out


def _complex_str(v) -> str:
    if isinstance(v, complex):
        sign = "-" if math.copysign(1.0, v.imag) < 0 else "+"
        return f"{v.real!r}{sign}{abs(v.imag)!r}i"
    if isinstance(v, (list, dict)):
        return json.dumps(_encode(v), separators=(",", ":"))
    return repr(v) if isinstance(v, float) else str(v)


def emit_report(r: RunReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(_report_dict(r), indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if r.suite_outcomes or not r.results:
            w.writerow(["check_name", "residual", "tolerance", "pass"])
            for c in r.suite_outcomes:
                w.writerow([c.check_name, repr(c.residual), repr(c.tolerance), c.passed])
        if r.results:
            keys = sorted({k for rec in r.results for k in rec.point})
            w.writerow(keys + ["value", "error_estimate", "method"])
            for rec in r.results:
                w.writerow(
                    [_complex_str(rec.point.get(k, "")) for k in keys]
                    + [_complex_str(rec.value), repr(rec.error_estimate), rec.method]
                )
        return buf.getvalue().encode()
    if fmt == "text":
        lines = [f"{r.command}  {json.dumps(_encode(r.inputs), sort_keys=True)}"]
        for rec in r.results:
            pt = " ".join(f"{k}={_complex_str(v)}" for k, v in rec.point.items())
            lines.append(f"  {pt}: {_complex_str(rec.value)} +- {rec.error_estimate:.3g} [{rec.method}]")
        for c in r.suite_outcomes:
            lines.append(f"  {'PASS' if c.passed else 'FAIL'} {c.check_name}: {c.residual:.3g} (tol {c.tolerance:.3g})")
        if r.runtime_ms is not None:
            lines.append(f"  runtime {r.runtime_ms} ms")
        return ("\n".join(lines) + "\n").encode()
    raise UsageError(f"unknown format {fmt!r}")


def parse_report(data: bytes | str) -> RunReport:
    """Inverse of ``emit_report(r, 'json')``."""
    d = json.loads(data)
    if d.get("schema") != SCHEMA:
        raise DataError(f"unsupported schema {d.get('schema')!r}")
    return RunReport(
        command=d["command"],
        inputs=_decode(d["inputs"]),
        results=[ResultRecord(**_decode(rec)) for rec in d["results"]],
        suite_outcomes=[verify.CheckOutcome(c["check_name"], c["residual"], c["tolerance"]) for c in d["suite_outcomes"]],
        runtime_ms=d.get("runtime_ms"),
    )


# ---------------------------------------------------------------------------
# configuration and argument helpers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CliConfig:
    degree: int = to.DEFAULT_DEGREE
    norm_max: float = 1e5
    beta: float = 1.5
    quad_rel_tol: float = 1e-10
    k_max: int = 20

    @classmethod
    def load(cls, path: str | None) -> "CliConfig":
        if path is None:
            return cls()
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise DataError("config must be a JSON object")
        known = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise DataError(f"unknown config keys {unknown}")
        try:
            return cls(**{k: (int(v) if k in ("degree", "k_max") else float(v)) for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            raise DataError(f"bad config value: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_complex(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse point {text!r}; use re or re,im") from None
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise UsageError(f"cannot parse point {text!r}; use re or re,im")


def _points(args, name="s") -> list[complex]:
    pts = [_parse_complex(p) for p in (getattr(args, name) or [])]
    grid = getattr(args, f"{name}_grid", None)
    if grid:
        try:
            a, b, n = grid.split(":")
            pts += [complex(x) for x in np.linspace(float(a), float(b), int(n))]
        except ValueError:
            raise UsageError(f"grid must be a:b:n, got {grid!r}") from None
    if not pts:
        raise UsageError(f"no --{name} or --{name}-grid given")
    return pts


def _group(args) -> tuple[str, gd.SubgroupDescriptor]:
    if getattr(args, "descriptor", None):
        d = gd.load_descriptor(args.descriptor)
        if not isinstance(d, gd.SubgroupDescriptor):
            raise DataError("this command needs a subgroup descriptor")
        return d.name or args.descriptor, d
    name = args.group
    if name == "modular":
        return name, gd.builtin("psl2z")
    if name.startswith("gamma0_"):
        try:
            return name, gd.gamma0_subgroup(int(name.split("_", 1)[1]))
        except ValueError:
            raise UsageError(f"bad level in {name!r}") from None
    return name, gd.builtin(name)


def _provider(name: str) -> tf.ScatteringProvider:
    if name in ("modular", "psl2z", "psl2z_s3_trivial"):
        return tf.modular_scattering_provider()
    if name.startswith("gamma0_"):
        return tf.gamma0_scattering_provider(int(name.split("_", 1)[1]))
    raise DomainError(f"no scattering determinant available for group {name!r}")


def _closed(value, method="closed_form") -> tuple[complex, float, str]:
    # closed forms carry rounding-level estimates
    v = complex(value)
    return v, 16 * EPS * max(abs(v), 1.0), method


def _rec(point: dict, v, err: float, method: str) -> ResultRecord:
    return ResultRecord(point, v, float(err), method)


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

SPECFUN = {
    "log_gamma": lambda z, w, o: sf.log_gamma(z),
    "gamma": lambda z, w, o: EvalResult(sf.gamma(z), 0.0, "closed_form"),
    "digamma": lambda z, w, o: sf.digamma(z),
    "hurwitz_zeta": lambda z, w, o: sf.hurwitz_zeta(z, w),
    "riemann_zeta": lambda z, w, o: sf.riemann_zeta(z),
    "barnes_zeta2": lambda z, w, o: sf.barnes_zeta2(z, w),
    "barnes_psi": lambda z, w, o: sf.barnes_psi(o, z),
    "barnes_gamma2": lambda z, w, o: sf.barnes_gamma2(z),
    "log_barnes_gamma2": lambda z, w, o: sf.log_barnes_gamma2(z),
}


def cmd_specfun(args, cfg, ctx):
    w = _parse_complex(args.w) if args.w else None
    if args.fn in ("hurwitz_zeta", "barnes_zeta2") and w is None:
        raise UsageError(f"{args.fn} needs --w")

    def one(z):
        r = SPECFUN[args.fn](z, w, args.order)
        err = r.abs_error_estimate
        if args.fn == "gamma":
            err = abs(r.value) * sf.log_gamma(z).abs_error_estimate
        point = {"z": z} if w is None else {"z": z, "w": w}
        return _rec(point, complex(r.value), err, r.method_tag)

    return {"fn": args.fn}, _map(one, _points(args, "z"), ctx.threads)


def cmd_geodesics(args, cfg, ctx):
    norm_max = args.norm_max if args.norm_max is not None else cfg.norm_max
    classes = geo.enumerate_classes(norm_max)
    recs = [
        _rec({"cycle": list(c.cycle), "trace": c.trace}, c.norm, 4 * EPS * c.norm, "trace_formula_norm") for c in classes
    ]
    return {"norm_max": norm_max}, recs


def cmd_zeta(args, cfg, ctx):
    name, sub = _group(args)
    rep = gd.build_induced_rep(sub)
    d = gd.fuchsian_from_subgroup(sub)
    parts = [p.strip() for p in args.parts.split(",")]
    bad = sorted(set(parts) - {"euler", "identity", "elliptic", "parabolic", "complete"})
    if bad:
        raise UsageError(f"unknown parts {bad}")
    degree = args.degree or cfg.degree
    norm_max = args.norm_max or cfg.norm_max
    need_h = "euler" in parts or "complete" in parts
    classes = geo.enumerate_classes(norm_max) if need_h and args.method == "euler" else None
    eig = zt.class_eigenvalues(classes, rep) if classes else None

    def hyperbolic(s):
        if args.method == "transfer":
            r = to.zeta_via_transfer(s, sub, rep, degree)
            return r.value, r.abs_error_estimate, "transfer"
        r = zt.selberg_zeta_euler(s, classes, rep, cfg.k_max, norm_max, ctx.tol, eig)
        return r.value, r.abs_error_estimate, "euler_product"

    def one(s):
        out, h = [], None
        closed = {
            "identity": zt.zeta_identity,
            "elliptic": zt.zeta_elliptic,
            "parabolic": zt.zeta_parabolic,
        }
        for p in parts:
            if p in closed:
                out.append(_rec({"s": s, "part": p}, *_closed(closed[p](s, d))))
            else:
                h = h or hyperbolic(s)
                if p == "euler":
                    out.append(_rec({"s": s, "part": p}, complex(h[0]), h[1], h[2]))
                else:
                    rest = zt.zeta_identity(s, d) * zt.zeta_elliptic(s, d) * zt.zeta_parabolic(s, d)
                    v = rest * h[0]
                    out.append(_rec({"s": s, "part": p}, complex(v), abs(rest) * h[1] + 16 * EPS * abs(v), h[2]))
        return out

    recs = [r for group in _map(one, _points(args), ctx.threads) for r in group]
    return {"group": name, "parts": parts, "method": args.method, "degree": degree, "norm_max": norm_max}, recs


def cmd_transferop(args, cfg, ctx):
    name, sub = _group(args)
    rep = gd.build_induced_rep(sub)
    degree = args.degree or cfg.degree
    s = _parse_complex(args.s)
    if args.action == "det":
        r = to.zeta_via_transfer(s, sub, rep, degree)
        return {"group": name, "degree": degree}, [_rec({"s": s}, complex(r.value), r.abs_error_estimate, r.method_tag)]
    a = to.build_operator(s, sub, rep, degree, backend="hurwitz", cross_check=False).matrix
    b = to.build_operator(s, sub, rep, degree, backend="cauchy", cross_check=False).matrix
    recs = [
        _rec({"i": i, "j": j}, complex(a[i, j]), float(abs(a[i, j] - b[i, j])), "hurwitz_vs_cauchy")
        for i in range(a.shape[0])
        for j in range(a.shape[1])
    ]
    return {"group": name, "degree": degree, "s": s, "shape": list(a.shape)}, recs


def _params(text: str | None) -> dict:
    out = {}
    for item in (text or "").split(";"):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        out[key.strip()] = _parse_complex(val.strip())
    return out


def cmd_trace(args, cfg, ctx):
    name, sub = _group(args)
    rep = gd.build_induced_rep(sub)
    d = gd.fuchsian_from_subgroup(sub)
    p = _params(args.params)
    if args.kind == "heat":
        if "t" not in p:
            raise UsageError("heat kind needs --params t=...")
        pair = tf.TestFunctionPair.heat(p["t"].real)
    else:
        if "s" not in p:
            raise UsageError("resolvent kind needs --params s=...")
        pair = tf.TestFunctionPair.resolvent(p["s"], p.get("beta", complex(cfg.beta)).real)
    tail_tol = ctx.tol or 1e-12
    term = args.term
    if term in ("hyperbolic", "theta"):
        classes = geo.enumerate_classes(cfg.norm_max)
    if term == "identity":
        r = tf.identity_term(pair, d)
    elif term == "elliptic":
        r = tf.elliptic_term(pair, d)
    elif term == "parabolic":
        r = tf.parabolic_term(pair, d)
    elif term == "hyperbolic":
        r = tf.hyperbolic_term(pair, classes, rep, cfg.norm_max, tail_tol)
    elif term == "continuous":
        r = tf.continuous_term(pair, _provider(name))
    else:
        if pair.kind != "heat":
            raise UsageError("theta needs the heat kind")
        r = tf.heat_theta_geometric(pair.t, d, classes, rep, _provider(name), cfg.norm_max, tail_tol)
    point = {k: v for k, v in p.items()}
    return {"group": name, "term": term, "kind": args.kind}, [
        _rec(point, complex(r.value), r.abs_error_estimate, r.method_tag)
    ]


def cmd_det(args, cfg, ctx):
    pts = _points(args)
    if args.target == "sphere":
        return {"target": "sphere"}, [_rec({"s": s}, *_closed(rd.det_sphere(s))) for s in pts]
    if args.target == "harmonic":
        return {"target": "harmonic"}, [_rec({"lambda": s}, *_closed(rd.det_harmonic(s))) for s in pts]
    name, sub = _group(args)
    sp = _provider(name)
    rep = gd.build_induced_rep(sub)
    degree = args.degree or cfg.degree
    acfg = ld.DetAssemblyConfig(c1=args.c1, c2=args.c2, degree=degree, zp_power=args.zp_power)
    inputs = {"target": "laplacian", "group": name, "path": args.path, "degree": degree}
    if args.path == "factorized":
        norm_max = args.norm_max or cfg.norm_max
        classes = geo.enumerate_classes(norm_max)
        inputs.update(c1=args.c1, c2=args.c2, zp_power=args.zp_power)

        def one(s):
            r = ld.det_automorphic_factorized(s, sub, classes, rep, sp, acfg, norm_max)
            return _rec({"s": s}, complex(r.value), r.abs_error_estimate, r.method_tag)

        return inputs, _map(one, pts, ctx.threads)
    if args.path == "goaway":

        def one(s):
            r = ld.goaway_assembly(s, sub, sp, degree, rep, args.elliptic_sign)
            return _rec({"s": s}, complex(r.value), r.abs_error_estimate, r.method_tag)

        inputs["elliptic_sign"] = args.elliptic_sign
        return inputs, _map(one, pts, ctx.threads)
    heat = ld.SpectralHeatTrace(sub, sp, degree=degree)
    scfg = rd.SpectralZetaConfig(
        mellin_abscissa_split=ld.SPECTRAL_CONFIG.mellin_abscissa_split,
        quad_rel_tol=cfg.quad_rel_tol,
        t_floor=ld.SPECTRAL_CONFIG.t_floor,
    )
    recs = []
    for s in pts:
        if s.imag != 0:
            raise DomainError("the spectral path takes real s > 1")
        r = ld.det_automorphic_spectral(s.real, heat, scfg)
        recs.append(_rec({"s": s.real}, float(r.value), r.abs_error_estimate, r.method_tag))
    return inputs, recs


def cmd_jl(args, cfg, ctx):
    if args.action == "table":
        if not args.beta:
            raise UsageError("jl table needs --beta")
        return {"table": "beta", "max": args.max}, [
            _rec({"a": a}, jl.beta_coeff(a), 0.0, "exact") for a in range(1, args.max + 1)
        ]
    data = jl.level_data(args.level, args.degree or cfg.degree)
    pts = _points(args)
    if args.action == "F":
        recs = []
        for s in pts:
            f, rhs = jl.jl_determinant_F(s, data)
            recs.append(_rec({"s": s, "side": "F"}, complex(f.value), f.abs_error_estimate, f.method_tag))
            recs.append(_rec({"s": s, "side": "congruence_product"}, complex(rhs.value), rhs.abs_error_estimate, rhs.method_tag))
        return {"level": args.level}, recs

    def one(s):
        r = jl.newform_zeta(args.kind, s, data)
        return _rec({"s": s}, complex(r.value), r.abs_error_estimate, r.method_tag)

    return {"level": args.level, "kind": args.kind}, _map(one, pts, ctx.threads)


def cmd_verify(args, cfg, ctx):
    if args.suite != "all" and args.suite not in verify.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {sorted(verify.SUITES)} or all")
    return {"suite": args.suite}, verify.run_suite(args.suite, ctx.tol)


# ---------------------------------------------------------------------------
# parser and entry points
# ---------------------------------------------------------------------------


def _add_points(p, name="s"):
    p.add_argument(f"--{name}", action="append", help="point as re or re,im (repeatable)")
    p.add_argument(f"--{name}-grid", dest=f"{name}_grid", help="real grid a:b:n")


def _add_group(p):
    p.add_argument("--group", default="modular", help="modular, a built-in name or gamma0_N")
    p.add_argument("--descriptor", help="JSON subgroup descriptor (overrides --group)")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="selberg-det", description=__doc__.splitlines()[0])
    top.add_argument("--format", choices=["json", "csv", "text"], default="json")
    top.add_argument("--tol", type=float, help="tail/verify tolerance override")
    top.add_argument("--threads", type=int, default=1)
    top.add_argument("--config", help="JSON config: degree, norm_max, beta, quad_rel_tol, k_max")
    top.add_argument("--no-meta", action="store_true", help="omit runtime from the report")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("specfun")
    p.add_argument("action", choices=["eval"])
    p.add_argument("--fn", choices=sorted(SPECFUN), required=True)
    _add_points(p, "z")
    p.add_argument("--w")
    p.add_argument("--order", type=int, default=2)

    p = sub.add_parser("geodesics")
    p.add_argument("action", choices=["enumerate"])
    p.add_argument("--norm-max", type=float)

    p = sub.add_parser("zeta")
    p.add_argument("action", choices=["eval"])
    _add_group(p)
    _add_points(p)
    p.add_argument("--parts", default="complete")
    p.add_argument("--method", choices=["euler", "transfer"], default="euler")
    p.add_argument("--norm-max", type=float)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("transferop")
    p.add_argument("action", choices=["dump", "det"])
    _add_group(p)
    p.add_argument("--s", required=True)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("trace")
    p.add_argument("action", choices=["eval"])
    _add_group(p)
    p.add_argument("--term", choices=["identity", "elliptic", "parabolic", "hyperbolic", "continuous", "theta"], required=True)
    p.add_argument("--kind", choices=["resolvent", "heat"], required=True)
    p.add_argument("--params", help="e.g. 's=2;beta=1.5' or 't=0.5'")

    p = sub.add_parser("det")
    p.add_argument("action", choices=["eval"])
    p.add_argument("--target", choices=["laplacian", "sphere", "harmonic"], default="laplacian")
    p.add_argument("--path", choices=["factorized", "spectral", "goaway"], default="factorized")
    _add_group(p)
    _add_points(p)
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--c2", type=float, default=0.0)
    p.add_argument("--zp-power", type=float, default=-0.5)
    p.add_argument("--elliptic-sign", type=float, default=1.0)
    p.add_argument("--norm-max", type=float)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("jl")
    p.add_argument("action", choices=["eval", "F", "table"])
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--kind", choices=list(jl.KINDS), default="I")
    _add_points(p)
    p.add_argument("--beta", action="store_true")
    p.add_argument("--max", type=int, default=100)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("verify")
    p.add_argument("action", choices=["run"])
    p.add_argument("--suite", required=True)
    return top


COMMANDS = {
    "specfun": cmd_specfun,
    "geodesics": cmd_geodesics,
    "zeta": cmd_zeta,
    "transferop": cmd_transferop,
    "trace": cmd_trace,
    "det": cmd_det,
    "jl": cmd_jl,
    "verify": cmd_verify,
}


@dataclass(frozen=True)
class _Context:
    tol: float | None
    threads: int


def run_command(argv: Sequence[str]) -> tuple[RunReport, str]:
    """Parse and run; returns the report and the requested output format."""
    args = build_parser().parse_args(list(argv))
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg = CliConfig.load(args.config)
    ctx = _Context(args.tol, args.threads)
    start = time.perf_counter()
    inputs, out = COMMANDS[args.command](args, cfg, ctx)
    elapsed = int(round((time.perf_counter() - start) * 1000))
    name = f"{args.command} {args.action}"
    if args.command == "verify":
        report = RunReport(name, inputs, [], out)
    else:
        report = RunReport(name, inputs, out)
    if not args.no_meta:
        report.runtime_ms = elapsed
    return report, args.format


EXIT_CODES = [
    (UsageError, 2),
    (DataError, 3),
    (ValidationError, 3),
    (ConvergenceError, 4),
    (NumericalOverflowError, 4),
    (FitError, 4),
    (DomainError, 2),
    (SelbergDetError, 4),
]


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        report, fmt = run_command(argv)
    except SelbergDetError as exc:
        code = next(c for t, c in EXIT_CODES if isinstance(exc, t))
        print(f"error: {exc}", file=sys.stderr)
        return code
    sys.stdout.buffer.write(emit_report(report, fmt))
    sys.stdout.flush()
    if any(not c.passed for c in report.suite_outcomes):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
