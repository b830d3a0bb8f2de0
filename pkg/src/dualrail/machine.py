"""The dual-rail Deutsch-Jozsa machine.

One-bit layout, modes ``a, b, c, d`` = 0..3: ``(a, b)`` is the scratch qubit
and ``(c, d)`` the input qubit, each a dual-rail pair whose first mode is the
logical-one rail.  Alice sends photons into ``b`` and ``d``, splits ``(c, d)``
on a beamsplitter, Bob applies his switch network, Alice phase-shifts mode
``a`` by pi, Bob undoes his network, and Alice recombines ``(c, d)``.  The
photon count ``z`` in mode ``d`` is the answer: 1 for type1, 0 for type2.

Bob's one-bit network is selected by ``k1 k0``: ``k1`` routes the scratch
pair through a Fredkin gate controlled by mode ``c``, ``k0`` adds a
crossover of ``a`` and ``b`` after it.  Two-bit machines use compiled
truth-table oracles instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Checkpoint, Circuit, InitialState, mean_field_dist, run
from .fock import DensityOp, FockVector, OutcomeDist
from .optics import (
    ONE_BIT,
    TWO_BIT,
    GateSpec,
    TruthTable,
    lossy_fredkin_decomposition,
)
from .postselect import (
    TYPE1,
    TYPE2,
    RejectedOutcome,
    answer_probabilities,
    classify,
    expected_z,
)

A, B, C, D = range(4)
STAGES = ("psi0", "psi1", "psi2", "psi3", "psi4", "psi5")


@dataclass(frozen=True)
class Coherent:
    """Coherent-state input: ``|alpha>`` stands for logical one."""

    alpha: complex
    cutoff: int = 16


@dataclass(frozen=True)
class MachineConfig:
    k: str = "10"
    with_S: bool = True
    gamma: float = 0.0
    chi: float = math.pi
    input: Coherent | None = None
    cutoff: int = 2
    oracle: str = "switch"

    def __post_init__(self):
        k = str(self.k)
        object.__setattr__(self, "k", k)
        if len(k) == 2:
            if k not in ONE_BIT:
                raise ValueError(f"invalid one-bit selector {k!r}")
        elif len(k) == 3:
            if k not in TWO_BIT:
                raise ValueError(f"invalid two-bit selector {k!r}")
        else:
            raise ValueError(f"unsupported selector {k!r}: use two bits (k1k0) or three (k2k1k0)")
        if not float(self.gamma) >= 0:
            raise ValueError("gamma must be nonnegative")
        if not math.isfinite(self.chi):
            raise ValueError("chi must be finite")
        if self.oracle not in ("switch", "compiled"):
            raise ValueError(f"unknown oracle realization {self.oracle!r}")

    @property
    def n_inputs(self) -> int:
        return len(self.k) - 1

    @property
    def table(self) -> TruthTable:
        return ONE_BIT[self.k] if self.n_inputs == 1 else TWO_BIT[self.k]


def truth_of(k: str) -> str:
    table = ONE_BIT.get(k) or TWO_BIT.get(k)
    if table is None:
        raise ValueError(f"invalid selector {k!r}")
    return table.classify()


def bob_forward(config: MachineConfig) -> list[GateSpec]:
    """Bob's first-pass elements, in application order."""
    if config.n_inputs == 2 or config.oracle == "compiled":
        modes = tuple(range(2 * (config.n_inputs + 1)))
        return [GateSpec("oracle", modes, (config.table,))]
    k1, k0 = config.k
    seq = []
    if k1 == "1":
        seq.append(GateSpec("fredkin", (A, B, C), (config.chi,)))
    if k0 == "1":
        seq.append(GateSpec("swap", (A, B)))
    return seq


def bob_inverse(config: MachineConfig) -> list[GateSpec]:
    """Bob's second pass: the adjoint of the first, with photon loss on b and c
    inside the Kerr interferometer when ``gamma > 0``."""
    forward = bob_forward(config)
    inverse = [spec.adjoint() for spec in reversed(forward)]
    if config.gamma == 0:
        return inverse
    if forward and forward[0].kind == "oracle":
        raise ValueError("loss is only modelled for the one-bit switch network")
    out, placed = [], False
    for spec in inverse:
        if spec.kind == "fredkin":
            local = lossy_fredkin_decomposition(spec.params[0], config.gamma)
            out.extend(s.remap(spec.modes) for s in local)
            placed = True
        else:
            out.append(spec)
    if not placed:
        out += [GateSpec("damp", (B,), (config.gamma,)), GateSpec("damp", (C,), (config.gamma,))]
    return out


def _x_pairs(n_inputs: int) -> list[tuple[int, int]]:
    return [(2 * p, 2 * p + 1) for p in range(1, n_inputs + 1)]


def build_machine(config: MachineConfig) -> Circuit:
    n = config.n_inputs
    num_modes = 2 * (n + 1)
    occupations = tuple(i % 2 for i in range(num_modes))
    cutoff = config.cutoff
    initial = InitialState(occupations)
    if config.input is not None:
        cutoff = config.input.cutoff
        ones = tuple((m, config.input.alpha) for m in range(1, num_modes, 2))
        initial = InitialState((0,) * num_modes, ones)
    split = [GateSpec("bs", pair, (math.pi / 4, 0.0)) for pair in _x_pairs(n)]
    merge = [s.adjoint() for s in split]
    elements = [Checkpoint("psi0"), *split, Checkpoint("psi1"), *bob_forward(config), Checkpoint("psi2")]
    if config.with_S:
        elements.append(GateSpec("phase", (A,), (math.pi,)))
    elements += [Checkpoint("psi3"), *bob_inverse(config), Checkpoint("psi4"), *merge, Checkpoint("psi5")]
    return Circuit(num_modes, cutoff, initial, tuple(elements))


@dataclass(frozen=True, eq=False)
class Trajectory:
    config: MachineConfig
    states: dict[str, FockVector | DensityOp] = field(repr=False)

    def __getitem__(self, name: str) -> FockVector | DensityOp:
        return self.states[name]

    @property
    def final(self) -> FockVector | DensityOp:
        return self.states["psi5"]


def run_trajectory(config: MachineConfig) -> Trajectory:
    if config.input is not None:
        raise ValueError("trajectories are defined for single-photon input")
    result = run(build_machine(config))
    return Trajectory(config, dict(result.checkpoints))


def run_machine(config: MachineConfig) -> OutcomeDist:
    return run(build_machine(config)).dist


def read_answer(outcome: Sequence[int] | OutcomeDist) -> str:
    """Function type reported by an accepted outcome (or the likelier accepted
    answer of a distribution)."""
    if isinstance(outcome, OutcomeDist):
        mass = answer_probabilities(outcome)
        if mass[TYPE1] + mass[TYPE2] <= 0:
            raise RejectedOutcome("distribution has no accepted outcomes")
        return TYPE1 if mass[TYPE1] >= mass[TYPE2] else TYPE2
    verdict = classify(outcome)
    if not verdict.accepted:
        raise RejectedOutcome(f"outcome {tuple(outcome)} is rejected: {verdict.reason.value}")
    return verdict.answer


# classical operation -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassicalRun:
    with_S: OutcomeDist
    without_S: OutcomeDist

    def mode_d(self) -> tuple[OutcomeDist, OutcomeDist]:
        last = self.with_S.basis.num_modes - 1
        return self.with_S.marginal([last]), self.without_S.marginal([last])

    def tv_distance(self) -> float:
        """Total-variation distance between the two mode-d count distributions."""
        with_s, without_s = self.mode_d()
        return with_s.tv_distance(without_s)


def run_classical(alpha: complex, cutoff: int = 16, k: str = "10", chi: float = math.pi, model: str = "fock") -> ClassicalRun:
    """Run the machine on coherent-state inputs with and without the phase shift.

    ``model="fock"`` evolves the truncated multimode state exactly;
    ``model="mean_field"`` propagates classical field amplitudes (Kerr phase
    proportional to intensity) and reports Poissonian counts.
    """
    dists = []
    for with_s in (True, False):
        cfg = MachineConfig(k=k, with_S=with_s, chi=chi, input=Coherent(alpha, cutoff))
        circuit = build_machine(cfg)
        if model == "fock":
            dists.append(run(circuit).dist)
        elif model == "mean_field":
            dists.append(mean_field_dist(circuit))
        else:
            raise ValueError(f"unknown model {model!r}")
    return ClassicalRun(*dists)


# signature experiments ---------------------------------------------------------


def p_correct(dist: OutcomeDist, truth: str) -> tuple[float, float]:
    """(raw, post-selected) probability of reading the true type from a one-bit run."""
    raw = float(dist.marginal([dist.basis.num_modes - 1]).probs[expected_z(truth)])
    mass = answer_probabilities(dist)
    total = mass[TYPE1] + mass[TYPE2]
    post = mass[truth] / total if total > 0 else math.nan
    return raw, post


def chi_sweep(k: str, chis: Sequence[float], with_S: bool = True) -> list[tuple[float, float, float]]:
    """Rows ``(chi, p_correct_raw, p_correct_postselected)`` for a lossless machine."""
    truth = truth_of(k)
    rows = []
    for chi in chis:
        dist = run_machine(MachineConfig(k=k, with_S=with_S, chi=float(chi)))
        rows.append((float(chi), *p_correct(dist, truth)))
    return rows


def run_deutsch_jozsa(k: str, **kwargs) -> OutcomeDist:
    """Lossless run with a compiled oracle (one or two input bits)."""
    return run_machine(MachineConfig(k=k, oracle="compiled", **kwargs))


def total_photons(state: FockVector | DensityOp) -> float:
    n = state.basis.total_number()
    if isinstance(state, FockVector):
        return float(np.sum(n * np.abs(state.amps) ** 2))
    return float(np.sum(n * np.real(np.diagonal(state.mat))))
