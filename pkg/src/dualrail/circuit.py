"""Circuits: an initial product state followed by an ordered element list.

Evaluation keeps a pure :class:`FockVector` until the first channel and a
:class:`DensityOp` from then on.  Fredkin elements are always applied
through their Kerr-interferometer decomposition so that every element is at
most two-mode (this keeps cutoff-16 coherent runs cheap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .fock import (
    DensityOp,
    FockBasis,
    FockError,
    FockVector,
    OutcomeDist,
    apply_local,
    apply_local_channel,
    embed_operator,
    measure_counts,
    product_state,
)
from .optics import GateSpec, beamsplitter, fredkin_decomposition


@dataclass(frozen=True)
class Checkpoint:
    """Records the running state under ``name`` when evaluation reaches it."""

    name: str


Element = Union[GateSpec, Checkpoint]


@dataclass(frozen=True)
class InitialState:
    """Per-mode Fock occupations, with optional coherent amplitudes overriding modes."""

    occupations: tuple[int, ...]
    coherent: tuple[tuple[int, complex], ...] = ()

    @classmethod
    def fock(cls, *occupations: int) -> "InitialState":
        return cls(tuple(int(n) for n in occupations))

    def build(self, basis: FockBasis) -> FockVector:
        values: list = list(self.occupations)
        flags = [False] * len(values)
        for mode, alpha in self.coherent:
            if not 0 <= mode < len(values):
                raise FockError(f"coherent mode {mode} out of range")
            values[mode] = alpha
            flags[mode] = True
        return product_state(basis, values, flags)


@dataclass(frozen=True)
class Circuit:
    num_modes: int
    cutoff: int
    initial: InitialState
    elements: tuple[Element, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(self.initial.occupations) != self.num_modes:
            raise FockError(
                f"initial state lists {len(self.initial.occupations)} modes, circuit has {self.num_modes}"
            )
        for el in self.elements:
            if isinstance(el, GateSpec):
                for m in el.modes:
                    if not 0 <= m < self.num_modes:
                        raise FockError(f"{el.kind} references mode {m}; circuit has {self.num_modes}")

    @property
    def basis(self) -> FockBasis:
        return FockBasis(self.num_modes, self.cutoff)

    def gates(self) -> list[GateSpec]:
        return [el for el in self.elements if isinstance(el, GateSpec)]

    def channels(self) -> list[GateSpec]:
        return [el for el in self.gates() if el.is_channel]

    def unitary(self) -> np.ndarray:
        """Full-space matrix of a channel-free circuit."""
        basis = self.basis
        total = np.eye(basis.dim, dtype=np.complex128)
        for spec in expand(self.gates()):
            if spec.is_channel:
                raise FockError("circuit contains a channel; it has no unitary")
            total = embed_operator(spec.matrix(self.cutoff), spec.modes, basis) @ total
        return total


def expand(specs: Sequence[GateSpec]) -> list[GateSpec]:
    """Replace Fredkin elements with their two-mode decomposition."""
    out = []
    for spec in specs:
        if spec.kind == "fredkin":
            chi = spec.params[0] if spec.params else math.pi
            out.extend(s.remap(spec.modes) for s in fredkin_decomposition(chi))
        else:
            out.append(spec)
    return out


def apply_element(state: FockVector | DensityOp, spec: GateSpec) -> FockVector | DensityOp:
    cutoff = state.basis.cutoff
    if spec.is_channel:
        return apply_local_channel(state, spec.kraus(cutoff), spec.modes)
    return apply_local(state, spec.matrix(cutoff), spec.modes, strict=False)


@dataclass(frozen=True, eq=False)
class RunResult:
    state: FockVector | DensityOp
    checkpoints: dict[str, FockVector | DensityOp]

    @property
    def dist(self) -> OutcomeDist:
        return measure_counts(self.state)


def run(circuit: Circuit) -> RunResult:
    state: FockVector | DensityOp = circuit.initial.build(circuit.basis)
    marks = {}
    for el in circuit.elements:
        if isinstance(el, Checkpoint):
            marks[el.name] = state
            continue
        for spec in expand([el]):
            state = apply_element(state, spec)
    return RunResult(state, marks)


# mean-field (classical field) evaluation --------------------------------------


def _mode_matrix(spec: GateSpec) -> np.ndarray:
    """Single-excitation block of a two-mode linear element, rows/cols (a, b)."""
    if spec.kind == "swap":
        return np.array([[0, 1], [1, 0]], dtype=np.complex128)
    theta, phi = spec.params[0], spec.params[1] if len(spec.params) > 1 else 0.0
    u = beamsplitter(theta, phi, 2)
    # |10> (photon in a) is index 2, |01> is index 1
    return np.array([[u[2, 2], u[2, 1]], [u[1, 2], u[1, 1]]])


def mean_field_amplitudes(circuit: Circuit) -> np.ndarray:
    """Propagate classical field amplitudes through the circuit.

    Linear elements act on the amplitude vector, a Kerr cell shifts each
    mode's phase by ``chi`` times the other mode's intensity, damping scales
    amplitudes by ``e^{-gamma/2}``.  Fock occupations in the initial state
    are treated as intensities with zero phase.
    """
    beta = np.array([math.sqrt(n) for n in circuit.initial.occupations], dtype=np.complex128)
    for mode, alpha in circuit.initial.coherent:
        beta[mode] = alpha
    for spec in expand(circuit.gates()):
        m = list(spec.modes)
        if spec.kind in ("bs", "swap"):
            beta[m] = _mode_matrix(spec) @ beta[m]
        elif spec.kind == "phase":
            beta[m[0]] *= np.exp(1j * spec.params[0])
        elif spec.kind == "kerr":
            i, j = m
            ii, jj = abs(beta[i]) ** 2, abs(beta[j]) ** 2
            beta[i] *= np.exp(1j * spec.params[0] * jj)
            beta[j] *= np.exp(1j * spec.params[0] * ii)
        elif spec.kind == "damp":
            beta[m] *= math.exp(-spec.params[0] / 2)
        else:
            raise FockError(f"{spec.kind} has no mean-field action")
    return beta


def mean_field_dist(circuit: Circuit) -> OutcomeDist:
    """Product-Poisson photon counts of the mean-field output, truncated at the cutoff."""
    beta = mean_field_amplitudes(circuit)
    n = np.arange(circuit.cutoff)
    probs = np.ones(1)
    for b in beta:
        p = stats.poisson.pmf(n, abs(b) ** 2)
        probs = np.kron(probs, p / p.sum())
    return OutcomeDist(circuit.basis, probs)
