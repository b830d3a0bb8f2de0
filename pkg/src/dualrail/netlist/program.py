"""Netlist program values, pretty-printing and execution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..circuit import Circuit, InitialState, RunResult, run
from ..fock import FockError, OutcomeDist
from ..optics import GateSpec


@dataclass(frozen=True)
class Expr:
    """A numeric parameter; ``text`` keeps the source spelling for printing."""

    value: float
    text: str = field(compare=False)


@dataclass(frozen=True)
class Gate:
    kind: str
    modes: tuple[int, ...]
    args: tuple[Expr, ...] = ()
    line: int = field(default=0, compare=False)

    def spec(self) -> GateSpec:
        vals = tuple(a.value for a in self.args)
        if self.kind == "bs":
            vals = (vals + (math.pi / 4, 0.0)[len(vals):])
        elif self.kind == "fredkin" and not vals:
            vals = (math.pi,)
        return GateSpec(self.kind, self.modes, vals)


@dataclass(frozen=True)
class Adjoint:
    body: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    modes: int
    cutoff: int
    fock: tuple[int, ...] | None
    coherent: tuple[tuple[int, Expr, Expr], ...]
    body: tuple
    measure: bool

    def elements(self) -> list[GateSpec]:
        return _flatten(self.body)

    def initial(self) -> InitialState:
        occ = self.fock if self.fock is not None else (0,) * self.modes
        coh = tuple((m, complex(re.value, im.value)) for m, re, im in self.coherent)
        return InitialState(tuple(occ), coh)

    def circuit(self) -> Circuit:
        return Circuit(self.modes, self.cutoff, self.initial(), tuple(self.elements()))


def _flatten(body) -> list[GateSpec]:
    out = []
    for stmt in body:
        if isinstance(stmt, Adjoint):
            out.extend(spec.adjoint() for spec in reversed(_flatten(stmt.body)))
        else:
            out.append(stmt.spec())
    return out


def _mode(i: int) -> str:
    return chr(ord("a") + i)


def _stmt_lines(stmt, indent: str) -> list[str]:
    if isinstance(stmt, Adjoint):
        lines = [f"{indent}adjoint {{"]
        for s in stmt.body:
            lines += _stmt_lines(s, indent + "  ")
        return lines + [f"{indent}}}"]
    parts = [stmt.kind, *(_mode(m) for m in stmt.modes), *(a.text for a in stmt.args)]
    return [indent + " ".join(parts)]


def pretty(program: Program) -> str:
    """Canonical source text; ``parse(pretty(p)) == p``."""
    lines = [f"modes {program.modes}", f"cutoff {program.cutoff}"]
    if program.fock is not None:
        lines.append("state fock " + " ".join(str(n) for n in program.fock))
    for mode, re, im in program.coherent:
        tail = f" {im.text}" if im.value != 0 else ""
        lines.append(f"state coherent {_mode(mode)} {re.text}{tail}")
    for stmt in program.body:
        lines += _stmt_lines(stmt, "")
    if program.measure:
        lines.append("measure")
    return "\n".join(lines) + "\n"


class ExecutionError(RuntimeError):
    """A well-formed program that cannot be evaluated (e.g. cutoff too small)."""


@dataclass(frozen=True, eq=False)
class Execution:
    result: RunResult
    measured: bool

    @property
    def state(self):
        return self.result.state

    @property
    def dist(self) -> OutcomeDist | None:
        return self.result.dist if self.measured else None


def execute(program: Program) -> Execution:
    try:
        result = run(program.circuit())
    except FockError as exc:
        raise ExecutionError(str(exc)) from None
    return Execution(result, program.measure)
