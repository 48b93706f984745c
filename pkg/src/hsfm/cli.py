"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 input or configuration
error, 3 numerical divergence or non-finite values.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .fan import FanGrid, build_fan, hormander_functional, marcinkiewicz_report
from .hgroup import GroupGrid, lp_norm
from .io import (FormatError, parse_symbol_spec, read_group, read_json, read_spectral,
                 symbol_from_dict, write_group, write_json, write_kernel, write_spectral,
                 write_trajectory)
from .multiplier import kernel_coefficients, kernel_eval
from .pde import DivergenceError, MaxIterError, PDEProblem, TimeGrid, solve
from .samples import sample_gaussian, sample_problem
from .sft import THREADS_ENV, default_threads, forward, inverse
from .verify import CHECKS, run_report

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

SUITES = {
    "default": list(CHECKS),
    "plancherel": ["plancherel"],
    "hy": ["hy"],
    "dual_hy": ["dual_hy"],
    "paley": ["paley"],
    "hyp": ["hyp"],
    "lplq": ["lplq"],
    "endpoints": ["endpoints"],
    "hormander": None,
    "marcinkiewicz": None,
}

#: Roundtrip threshold for the packaged sample on the default grid (measured
#: 0.092 there, 0.074 on the refined grid; frozen with a 25% margin).
SAMPLE_ROUNDTRIP_TOL = 0.12


class InputError(Exception):
    pass


@dataclass(frozen=True)
class SessionConfig:
    n: int = 1
    Lz: float = 6.0
    Nz: int = 24
    Lt: float = 8.0
    Nt: int = 48
    Kmax: int = 12
    seed: int = 0
    threads: int = 1
    out: str = "."

    def grid(self) -> GroupGrid:
        return GroupGrid(self.n, self.Lz, self.Nz, self.Lt, self.Nt)

    def fan(self) -> FanGrid:
        return build_fan((self.Lt, self.Nt, self.n), self.Kmax)

    def echo(self) -> dict:
        """Configuration embedded in outputs.  Thread count and output directory
        are left out so that outputs do not depend on them."""
        d = asdict(self)
        d.pop("threads")
        d.pop("out")
        return d


def _session(args, doc: dict | None = None, need_grid: bool = True) -> SessionConfig:
    base = asdict(SessionConfig())
    if doc:
        for key in base:
            if key in doc:
                base[key] = doc[key]
    for key in ("n", "Lz", "Nz", "Lt", "Nt", "Kmax", "seed", "out"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    threads = getattr(args, "threads", None)
    base["threads"] = threads if threads is not None else default_threads()
    try:
        cfg = SessionConfig(int(base["n"]), float(base["Lz"]), int(base["Nz"]), float(base["Lt"]),
                            int(base["Nt"]), int(base["Kmax"]), int(base["seed"]), int(base["threads"]),
                            str(base["out"]))
        if cfg.seed < 0 or cfg.seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if cfg.threads < 1:
            raise ValueError("threads must be positive")
        cfg.fan()
        if need_grid:
            cfg.grid()
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid configuration: {exc}") from None
    return cfg


def _config_doc(args) -> dict:
    if getattr(args, "config", None):
        doc = read_json(args.config)
        if not isinstance(doc, dict):
            raise InputError("configuration must be a JSON object")
        return doc
    return {}


def _stamp(cfg: SessionConfig) -> dict:
    return {"config": cfg.echo(), "tool": f"hsfm {__version__}"}


def _outdir(cfg: SessionConfig) -> Path:
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------

def cmd_transform(args) -> int:
    doc = _config_doc(args)
    if args.sample:
        cfg = _session(args, doc)
        f = sample_gaussian(cfg.grid())
        src = "sample"
    elif args.input:
        path = Path(args.input)
        try:
            first = path.read_bytes().split(b"\n", 1)[0]
            fmt = json.loads(first.decode("utf-8")).get("format")
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from None
        except (UnicodeDecodeError, json.JSONDecodeError, AttributeError):
            raise InputError(f"{path}: header is not valid JSON") from None
        if fmt == "hsf-f":
            F, header = read_spectral(path)
            cfg = _session(args, {**doc, **{k: header[k] for k in ("n", "Lz", "Nz", "Lt", "Nt", "Kmax")}})
            g = inverse(F, cfg.threads)
            _check_finite(g.values)
            out = _outdir(cfg) / (args.name or "inverse.hsfg")
            write_group(out, g, _stamp(cfg))
            print(f"wrote {out}")
            return EXIT_OK
        f, header = read_group(path)
        cfg = _session(args, {**doc, **{k: header[k] for k in ("n", "Lz", "Nz", "Lt", "Nt")}})
        src = str(path)
    else:
        raise InputError("transform needs an input file or --sample")
    fan = cfg.fan()
    F = forward(f, fan, cfg.threads)
    _check_finite(F.values)
    out = _outdir(cfg) / (args.name or "forward.hsff")
    write_spectral(out, F, {**_stamp(cfg), "source": src})
    print(f"wrote {out}")
    if args.roundtrip:
        g = inverse(F, cfg.threads)
        _check_finite(g.values)
        norm = lp_norm(f, 2)
        err = lp_norm(g - f, 2) / norm if norm > 0 else lp_norm(g, 2)
        tol = float(doc.get("roundtrip_tol", args.tol if args.tol is not None else SAMPLE_ROUNDTRIP_TOL))
        print(f"roundtrip relative L2 error {err:.6e} (threshold {tol:g})")
        if err > tol:
            return EXIT_VERIFY
    return EXIT_OK


def _check_finite(a):
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("non-finite values in result")


def _refinement_verdict(m_spec: str, cfg: SessionConfig, p: float, q: float) -> dict:
    fan = FanGrid(cfg.n, cfg.Kmax, cfg.Lt, cfg.Nt)
    fine = fan.refined(2)
    m = parse_symbol_spec(m_spec, fan)
    if m.family != "power":
        raise InputError("the hormander suite needs a closed-form (power) symbol")
    a = hormander_functional(m, p, q, fan)
    b = hormander_functional(m, p, q, fine)
    change = (b - a) / a if a else float("inf")
    return {"symbol": m.descriptor, "p": p, "q": q, "n": cfg.n, "Kmax": [fan.Kmax, fine.Kmax],
            "dlambda": [fan.dlambda, fine.dlambda], "value": a, "refined": b,
            "relative_change": change, "verdict": "stable" if abs(change) <= 0.01 else "growing"}


def cmd_verify(args) -> int:
    doc = _config_doc(args)
    suite = args.suite or doc.get("suite_name", "default")
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; available suites: {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_INPUT
    # the symbol reports live on the fan alone
    cfg = _session(args, doc, need_grid=SUITES[suite] is not None)
    outdir = _outdir(cfg)
    if suite == "hormander":
        res = _refinement_verdict(args.symbol or "power:beta=0.5,gamma=1", cfg,
                                  args.p if args.p is not None else 2.0, args.q if args.q is not None else 4.0)
        res.update(_stamp(cfg))
        write_json(outdir / "hormander.json", res)
        print(f"hormander functional {res['value']:.9g} -> {res['refined']:.9g} "
              f"({100 * res['relative_change']:+.3f}%): {res['verdict']}")
        return EXIT_OK
    if suite == "marcinkiewicz":
        fan = cfg.fan()
        m = parse_symbol_spec(args.symbol or "power:beta=1,gamma=2", fan)
        try:
            table = marcinkiewicz_report(m, 2, 2, fan)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        write_json(outdir / "marcinkiewicz.json", {"symbol": m.descriptor, "table": table.tolist(), **_stamp(cfg)})
        for a, row in enumerate(table):
            print(f"alpha={a}: " + " ".join(f"{v:.6g}" for v in row))
        return EXIT_OK
    suite_cfg = dict(doc.get("suite", {}))
    suite_cfg.setdefault("checks", SUITES[suite])
    if args.symbol:
        m = parse_symbol_spec(args.symbol, cfg.fan())
        if m.family == "power":
            suite_cfg["symbol"] = {"family": "power", "beta": m.beta, "gamma": m.gamma}
        else:
            suite_cfg["symbol"] = m
    report = run_report(suite_cfg, cfg.grid(), cfg.fan(), cfg.seed, cfg.threads, environment=_stamp(cfg))
    (outdir / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (outdir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    for key, agg in report.aggregates().items():
        print(f"{key}: max {agg['max']:.6g} mean {agg['mean']:.6g} (n={agg['count']})")
    if report.failures:
        for msg in report.failures:
            print(f"FAIL {msg}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _load_problem(path: Path, cfg_args) -> tuple[PDEProblem, TimeGrid, float, int, SessionConfig]:
    doc = read_json(path)
    base = path.parent
    try:
        u0, h0 = read_group(base / doc["u0"])
        cfg = _session(cfg_args, {**_config_doc(cfg_args), **{k: h0[k] for k in ("n", "Lz", "Nz", "Lt", "Nt")},
                                  **{k: doc[k] for k in ("Kmax",) if k in doc}})
        fan = cfg.fan()
        u1 = read_group(base / doc["u1"])[0] if doc.get("u1") else None
        mdoc = doc["m"]
        if isinstance(mdoc, str):
            mdoc = read_json(base / mdoc)
        m = symbol_from_dict(mdoc, fan)[0]
        b = doc.get("b")
        if b is not None:
            b = (b["tau"], b["values"]) if isinstance(b, dict) else tuple(zip(*b))
        pb = PDEProblem(doc["kind"], m, float(doc["p"]), u0, fan, d=float(doc.get("d", 0.0)), b=b, u1=u1)
        tg = TimeGrid(float(doc["T"]), int(doc["Ntau"]))
        return pb, tg, float(doc.get("tol", 1e-8)), int(doc.get("maxiter", 50)), cfg
    except KeyError as exc:
        raise InputError(f"{path}: missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_solve(args) -> int:
    if args.example:
        cfg = _session(args, _config_doc(args))
        try:
            pb, tg, tol, maxiter = sample_problem(args.example, cfg.grid(), cfg.fan())
        except KeyError:
            raise InputError(f"unknown example {args.example!r}") from None
    elif args.problem:
        pb, tg, tol, maxiter, cfg = _load_problem(Path(args.problem), args)
    else:
        raise InputError("solve needs a problem file or --example")
    try:
        traj = solve(pb, tg, tol, maxiter, cfg.threads)
    except DivergenceError as exc:
        print(json.dumps({"error": "divergence", "message": str(exc), "increments": exc.increments}),
              file=sys.stderr)
        return EXIT_NUMERIC
    except MaxIterError as exc:
        print(json.dumps({"error": "maxiter", "message": str(exc), "increments": exc.increments}),
              file=sys.stderr)
        return EXIT_VERIFY
    out = _outdir(cfg) / "trajectory"
    write_trajectory(out, traj, {**_stamp(cfg), "kind": pb.kind, "p": pb.p, "tol": tol})
    print(f"iterations {traj.iterations}")
    print(f"final increment {traj.increments[-1]:.6e}")
    print(f"residual {traj.residual:.6e}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_fan_info(args) -> int:
    cfg = _session(args, _config_doc(args), need_grid=False)
    fan = cfg.fan()
    info = {"n": fan.n, "Kmax": fan.Kmax, "Lt": fan.Lt, "Nt": fan.Nt, "dlambda": fan.dlambda,
            "nodes": fan.lambdas.tolist(), "points": int(np.prod(fan.shape))}
    for kind in ("nu", "nu2", "mu"):
        info[f"total_{kind}"] = float(np.sum(fan.weights(kind).ravel()))
    if args.symbol:
        m = parse_symbol_spec(args.symbol, fan)
        p = args.p if args.p is not None else 2.0
        q = args.q if args.q is not None else 4.0
        info["symbol"] = m.descriptor
        info["hormander"] = hormander_functional(m, p, q, fan)
    info.update(_stamp(cfg))
    write_json(_outdir(cfg) / "fan.json", info)
    for key in ("n", "Kmax", "dlambda", "points", "total_nu", "total_nu2", "total_mu"):
        print(f"{key}: {info[key]}")
    if "hormander" in info:
        print(f"hormander({info['symbol']}): {info['hormander']:.9g}")
    return EXIT_OK


def cmd_kernel(args) -> int:
    cfg = _session(args, _config_doc(args))
    grid, fan = cfg.grid(), cfg.fan()
    m = parse_symbol_spec(args.symbol or "power:beta=1,gamma=2", fan)
    K = kernel_coefficients(m, grid, fan)
    out = _outdir(cfg) / (args.name or "kernel.hsfk")
    write_kernel(out, K, _stamp(cfg))
    print(f"wrote {out}")
    if args.at:
        x, y, t = args.at
        val = kernel_eval(K, np.array([complex(x, y)] * grid.n), t)
        print(f"K({x}, {y}, {t}) = {val.real:.12g} {val.imag:+.12g}i")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON session configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--n", type=int)
    p.add_argument("--Lz", type=float)
    p.add_argument("--Nz", type=int)
    p.add_argument("--Lt", type=float)
    p.add_argument("--Nt", type=int)
    p.add_argument("--Kmax", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hsfm", description="Strichartz Fourier transform tools on the Heisenberg group")
    ap.add_argument("--version", action="version", version=f"hsfm {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="forward (HSF-G input) or inverse (HSF-F input) transform")
    _common(p)
    p.add_argument("input", nargs="?")
    p.add_argument("--sample", action="store_true", help="use the packaged sample Gaussian")
    p.add_argument("--roundtrip", action="store_true", help="report the relative L2 roundtrip error")
    p.add_argument("--tol", type=float, help="roundtrip threshold")
    p.add_argument("--name", help="output file name")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verify", help="inequality suites and symbol reports")
    _common(p)
    p.add_argument("--suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--symbol", help="power:beta=B,gamma=G | const:c=C | HSF-S file")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="Picard solve of a Cauchy problem (HSF-P file)")
    _common(p)
    p.add_argument("problem", nargs="?")
    p.add_argument("--example", help="packaged problem: zero, heat2-small, diverge")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("fan-info", help="fan nodes, measure totals and symbol functionals")
    _common(p)
    p.add_argument("--symbol")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.set_defaults(func=cmd_fan_info)

    p = sub.add_parser("kernel", help="write the convolution kernel of a symbol (HSF-K)")
    _common(p)
    p.add_argument("--symbol")
    p.add_argument("--at", type=float, nargs=3, metavar=("X", "Y", "T"), help="evaluate K at (x + iy, t)")
    p.add_argument("--name", help="output file name")
    p.set_defaults(func=cmd_kernel)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FloatingPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
