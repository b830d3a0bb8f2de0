"""``dualrail`` command line.

Exit codes: 0 success, 1 runtime or I/O error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .fock import DensityOp, FockError, FockVector, OutcomeDist, ket_label, required_cutoff
from .machine import (
    STAGES,
    MachineConfig,
    chi_sweep,
    read_answer,
    run_classical,
    run_machine,
    run_trajectory,
    truth_of,
)
from .netlist import NetlistError, corpus_files, execute, parse
from .netlist.parser import Parser
from .postselect import RejectedOutcome, accepted_mass, classify, format_csv, format_float, sweep_gamma, CURVE_COLUMNS

FORMATS = ("table", "csv", "json")


class UsageError(Exception):
    pass


def number(text: str) -> float:
    """Parse a float or an expression such as ``pi/2``."""
    try:
        p = Parser(text)
        value = p.sum()
        if p.tok.kind != "EOF":
            raise NetlistError("trailing input")
    except NetlistError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    return value


# state formatting ---------------------------------------------------------------


def format_state(state, ascii_only: bool = False) -> str:
    minus, ket_r, root = ("-", ">", "sqrt") if ascii_only else ("−", "⟩", "√")
    if isinstance(state, DensityOp):
        pops = [(occ, p) for occ, p in OutcomeDist(state.basis, np.real(np.diagonal(state.mat))).items(1e-12)]
        body = ", ".join(f"|{ket_label(o)}{ket_r}: {p:.6g}" for o, p in pops)
        return f"mixed, populations {{{body}}}"
    terms = state.terms(1e-10)
    mags = np.array([abs(a) for _, a in terms])
    count = len(terms)
    signs = [a / mags[0] for _, a in terms]
    if np.allclose(mags, 1 / math.sqrt(count), atol=1e-10) and all(abs(s.imag) < 1e-10 for s in signs):
        parts = []
        for i, ((occ, _), s) in enumerate(zip(terms, signs)):
            sign = minus if s.real < 0 else ("" if i == 0 else "+")
            parts.append(f"{sign}|{ket_label(occ)}{ket_r}")
        joined = "".join(parts)
        if count == 1:
            return joined
        return f"({joined})/{root}{count}"
    return " + ".join(f"({a.real:.6g}{a.imag:+.6g}j)|{ket_label(o)}{ket_r}" for o, a in terms)


# subcommands --------------------------------------------------------------------


def _config(args, **extra) -> MachineConfig:
    if args.gamma is not None and not args.gamma >= 0:
        raise UsageError("gamma must be nonnegative")
    try:
        return MachineConfig(k=args.k, with_S=args.with_s, gamma=args.gamma or 0.0, chi=args.chi, **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dist_rows(dist: OutcomeDist):
    for occ, p in dist.items(1e-12):
        try:
            verdict = str(classify(occ))
        except ValueError:
            verdict = "-"
        yield occ, p, verdict


def _emit_dist(dist: OutcomeDist, fmt: str, out, header: dict | None = None, extra: dict | None = None):
    rows = list(_dist_rows(dist))
    if fmt == "json":
        doc = dict(header or {})
        doc["outcomes"] = [{"outcome": list(o), "probability": p, "verdict": v} for o, p, v in rows]
        doc.update(extra or {})
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        out.write("outcome,probability,verdict\n")
        for o, p, v in rows:
            out.write(f"{ket_label(o)},{format_float(p)},{v}\n")
    else:
        for key, value in (header or {}).items():
            out.write(f"{key}: {value}\n")
        out.write(f"{'outcome':<10}{'probability':<22}verdict\n")
        for o, p, v in rows:
            out.write(f"{ket_label(o):<10}{p:<22.15f}{v}\n")
        for key, value in (extra or {}).items():
            out.write(f"{key}: {value}\n")


def cmd_run(args, out) -> int:
    config = _config(args)
    start = time.perf_counter()
    dist = run_machine(config)
    elapsed = time.perf_counter() - start
    try:
        answer = read_answer(dist)
    except RejectedOutcome:
        answer = None
    header = {"k": config.k, "with_S": config.with_S, "gamma": config.gamma, "chi": config.chi}
    extra = {"answer": answer, "truth": truth_of(config.k), "accept_prob": accepted_mass(dist)}
    if args.sample:
        rng = np.random.default_rng(args.seed)
        extra["samples"] = {ket_label(o): n for o, n in dist.sample(args.sample, rng).items()}
    if args.timing:
        extra["elapsed_s"] = elapsed
    _emit_dist(dist, args.format, out, header, extra)
    return 0


def cmd_trajectory(args, out) -> int:
    config = _config(args)
    traj = run_trajectory(config)
    psi = "psi" if args.ascii else "ψ"
    if args.format == "json":
        doc = {"k": config.k, "with_S": config.with_S, "gamma": config.gamma, "states": {}}
        for name in STAGES:
            s = traj[name]
            if isinstance(s, FockVector):
                doc["states"][name] = [{"ket": ket_label(o), "re": a.real, "im": a.imag} for o, a in s.terms()]
            else:
                doc["states"][name] = {"populations": {ket_label(o): p for o, p in _populations(s)}}
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return 0
    if args.format == "csv":
        out.write("state,ket,re,im\n")
    for name in STAGES:
        s = traj[name]
        if args.format == "csv":
            items = s.terms() if isinstance(s, FockVector) else [(o, complex(p)) for o, p in _populations(s)]
            for o, a in items:
                out.write(f"{name},{ket_label(o)},{format_float(a.real)},{format_float(a.imag)}\n")
        else:
            out.write(f"{psi}{name[-1]} = {format_state(s, args.ascii)}\n")
    return 0


def _populations(rho: DensityOp):
    return OutcomeDist(rho.basis, np.real(np.diagonal(rho.mat))).items(1e-12)


def _write_csv(text: str, path: str | None, out):
    if path is None:
        out.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _summary(columns, rows, fmt, out):
    if fmt == "json":
        out.write(json.dumps([dict(zip(columns, r)) for r in rows], indent=2) + "\n")
    elif fmt == "csv":
        out.write(format_csv(columns, rows))
    else:
        out.write("".join(f"{c:>16}" for c in columns) + "\n")
        for r in rows:
            out.write("".join(f"{v:>16.8g}" for v in r) + "\n")


def cmd_sweep(args, out) -> int:
    if args.steps < 1:
        raise UsageError("steps must be positive")
    if args.gamma_min < 0 or args.gamma_max < args.gamma_min:
        raise UsageError("gamma must be nonnegative and gamma-min <= gamma-max")
    if args.log:
        if args.gamma_min <= 0:
            raise UsageError("--log needs gamma-min > 0")
        grid = np.geomspace(args.gamma_min, args.gamma_max, args.steps)
    else:
        grid = np.linspace(args.gamma_min, args.gamma_max, args.steps)
    try:
        curve = sweep_gamma(args.k, [float(g) for g in grid], chi=args.chi, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [[getattr(r, c) for c in CURVE_COLUMNS] for r in curve.rows]
    if args.out:
        _write_csv(curve.to_csv(), args.out, out)
        _summary(CURVE_COLUMNS, rows, args.format, out)
    else:
        _summary(CURVE_COLUMNS, rows, args.format if args.format != "table" else "csv", out)
    return 0


def cmd_chi_sweep(args, out) -> int:
    if args.steps < 2:
        raise UsageError("steps must be at least 2")
    try:
        rows = chi_sweep(args.k, np.linspace(0.0, math.pi, args.steps), with_S=args.with_s)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    columns = ("chi", "p_correct_raw", "p_correct_postselected")
    if args.out:
        _write_csv(format_csv(columns, rows), args.out, out)
        _summary(columns, rows, args.format, out)
    else:
        _summary(columns, rows, args.format if args.format != "table" else "csv", out)
    return 0


def cmd_classical(args, out) -> int:
    try:
        result = run_classical(args.alpha, args.cutoff, k=args.k, chi=args.chi, model=args.model)
    except FockError as exc:
        need = required_cutoff(args.alpha)
        raise UsageError(f"{exc}. Minimal cutoff for alpha={args.alpha}: {need}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with_s, without_s = result.mode_d()
    tv = result.tv_distance()
    if args.format == "json":
        doc = {
            "alpha": args.alpha, "cutoff": args.cutoff, "k": args.k, "model": args.model,
            "mode_d_with_S": {str(o[0]): p for o, p in with_s.items(1e-15)},
            "mode_d_without_S": {str(o[0]): p for o, p in without_s.items(1e-15)},
            "tv_distance": tv,
        }
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif args.format == "csv":
        out.write("n_d,p_with_S,p_without_S\n")
        for n in range(args.cutoff):
            out.write(f"{n},{format_float(with_s.probs[n])},{format_float(without_s.probs[n])}\n")
    else:
        out.write(f"alpha: {args.alpha}  cutoff: {args.cutoff}  k: {args.k}  model: {args.model}\n")
        out.write(f"{'n_d':<6}{'with S':<24}without S\n")
        for n in range(args.cutoff):
            if with_s.probs[n] > 1e-15 or without_s.probs[n] > 1e-15:
                out.write(f"{n:<6}{with_s.probs[n]:<24.15f}{without_s.probs[n]:.15f}\n")
        out.write(f"tv_distance: {tv:.6e}\n")
    return 0


def resolve_netlist(name: str) -> Path | str:
    """File path, then QNL_PATH directories, then the bundled corpus."""
    path = Path(name)
    if path.is_file():
        return path
    for prefix in filter(None, os.environ.get("QNL_PATH", "").split(os.pathsep)):
        candidate = Path(prefix) / name
        if candidate.is_file():
            return candidate
    bundled = corpus_files()
    if path.name in bundled:
        return bundled[path.name]
    raise FileNotFoundError(name)


def cmd_netlist(args, out, err) -> int:
    try:
        found = resolve_netlist(args.file)
    except FileNotFoundError:
        err.write(f"error: netlist not found: {args.file}\n")
        return 1
    source = found.read_text(encoding="utf-8") if isinstance(found, Path) else found
    try:
        program = parse(source)
        result = execute(program)
    except NetlistError as exc:
        err.write(f"{args.file}: {exc}\n")
        return 1
    except Exception as exc:  # execution failures (e.g. cutoff too small)
        err.write(f"{args.file}: {exc}\n")
        return 1
    dist = result.dist if result.dist is not None else result.result.dist
    _emit_dist(dist, args.format, out, {"netlist": args.file})
    if args.state and args.format != "json":
        out.write(f"state: {format_state(result.state, args.ascii)}\n")
    return 0


# parser -------------------------------------------------------------------------


def _machine_flags(p, sweep=False):
    p.add_argument("--k", required=True, help="oracle selector bits, e.g. 10")
    s = p.add_mutually_exclusive_group()
    s.add_argument("--with-s", dest="with_s", action="store_true", default=True, help="phase shift in place (default)")
    s.add_argument("--no-s", dest="with_s", action="store_false", help="remove the phase shift")
    p.add_argument("--chi", type=number, default=math.pi, help="Kerr strength (default pi)")
    if not sweep:
        p.add_argument("--gamma", type=number, default=0.0, help="photon-loss coupling (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualrail", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=FORMATS, default="table")
        p.add_argument("--ascii", action="store_true", help="plain ASCII ket notation")
        return p

    p = add("run", "run the one-bit machine and print the outcome distribution")
    _machine_flags(p)
    p.add_argument("--sample", type=int, default=0, metavar="N", help="also draw N shots")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="report evaluation time")

    p = add("trajectory", "print the states psi0..psi5")
    _machine_flags(p)

    p = add("sweep", "error probability versus gamma (CSV)")
    p.add_argument("--k", default="10")
    p.add_argument("--chi", type=number, default=math.pi)
    p.add_argument("--gamma-min", type=number, default=0.0)
    p.add_argument("--gamma-max", type=number, default=5.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--log", action="store_true", help="logarithmic gamma grid")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)

    p = add("chi-sweep", "probability of a correct answer versus Kerr strength (CSV)")
    p.add_argument("--k", default="10")
    s = p.add_mutually_exclusive_group()
    s.add_argument("--with-s", dest="with_s", action="store_true", default=True)
    s.add_argument("--no-s", dest="with_s", action="store_false")
    p.add_argument("--steps", type=int, default=33)
    p.add_argument("--out", default=None)

    p = add("classical", "coherent-state run with and without the phase shift")
    p.add_argument("--alpha", type=number, default=1.0)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--k", default="10")
    p.add_argument("--chi", type=number, default=math.pi)
    p.add_argument("--model", choices=("fock", "mean_field"), default="fock")

    p = add("netlist", "parse and execute a .qnl file")
    p.add_argument("file")
    p.add_argument("--state", action="store_true", help="also print the final state")
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "netlist":
            return cmd_netlist(args, out, err)
        handler = {
            "run": cmd_run,
            "trajectory": cmd_trajectory,
            "sweep": cmd_sweep,
            "chi-sweep": cmd_chi_sweep,
            "classical": cmd_classical,
        }[args.command]
        return handler(args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
