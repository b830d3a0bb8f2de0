"""Optical components as local matrices on a truncated Fock space.

Every constructor takes the per-mode ``cutoff`` and returns a dense matrix on
the listed modes, ordered big-endian like :mod:`dualrail.fock`.  Unitaries
are cached and returned read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .fock import FockBasis, FockError, kraus_deviation

ATOL = 1e-12
HALF_PI = math.pi / 2
QUARTER_PI = math.pi / 4


class ConstructionError(RuntimeError):
    """A constructed component failed its own contract self-test."""


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


def _lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(np.complex128)


def _number(cutoff: int) -> np.ndarray:
    return np.arange(cutoff, dtype=float)


@lru_cache(maxsize=None)
def _beamsplitter(theta: float, phi: float, cutoff: int) -> np.ndarray:
    a = _lowering(cutoff)
    eye = np.eye(cutoff)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    gen = np.exp(1j * phi) * a1.conj().T @ a2 - np.exp(-1j * phi) * a1 @ a2.conj().T
    return _readonly(expm(theta * gen))


def beamsplitter(theta: float = QUARTER_PI, phi: float = 0.0, cutoff: int = 2) -> np.ndarray:
    """``exp[theta (e^{i phi} a^dag b - e^{-i phi} a b^dag)]`` on modes (a, b).

    At the default 50/50 angle ``B|01> = (|01> + |10>)/sqrt2``.
    """
    return _beamsplitter(float(theta), float(phi), int(cutoff))


@lru_cache(maxsize=None)
def _phase_diag(phi: float, cutoff: int) -> np.ndarray:
    return _readonly(np.exp(1j * phi * _number(cutoff)))


def phase_shift(phi: float, cutoff: int = 2) -> np.ndarray:
    return np.diag(_phase_diag(float(phi), int(cutoff)))


@lru_cache(maxsize=None)
def _kerr_diag(chi: float, cutoff: int) -> np.ndarray:
    n = _number(cutoff)
    return _readonly(np.exp(1j * chi * np.outer(n, n)).reshape(-1))


def kerr(chi: float, cutoff: int = 2) -> np.ndarray:
    """Cross-Kerr cell ``exp(i chi n_b n_c)`` on modes (b, c)."""
    return np.diag(_kerr_diag(float(chi), int(cutoff)))


@lru_cache(maxsize=None)
def crossover(cutoff: int = 2) -> np.ndarray:
    """Classical crossover switch: exchanges the contents of two modes."""
    d = int(cutoff)
    u = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            u[j * d + i, i * d + j] = 1.0
    return _readonly(u)


# Fredkin ------------------------------------------------------------------

# The controlled beamsplitter factors as V K_bc(chi) V^dag C(-chi/2), with V a
# 50/50 splitter of phase -pi/2 and C(phi) = K_ac(phi) K_bc(phi) a cross-phase
# between mode c and the total a+b photon number.
SPLITTER_PHASE = -HALF_PI


def fredkin_decomposition(chi: float = math.pi) -> list["GateSpec"]:
    """Element list (application order) realizing ``fredkin(chi)`` on local modes 0, 1, 2."""
    return [
        GateSpec("kerr", (0, 2), (-chi / 2,)),
        GateSpec("kerr", (1, 2), (-chi / 2,)),
        GateSpec("bs", (0, 1), (-QUARTER_PI, SPLITTER_PHASE)),
        GateSpec("kerr", (1, 2), (chi,)),
        GateSpec("bs", (0, 1), (QUARTER_PI, SPLITTER_PHASE)),
    ]


def lossy_fredkin_decomposition(chi: float, gamma: float) -> list["GateSpec"]:
    """As :func:`fredkin_decomposition` with amplitude damping on modes 1 and 2
    placed inside the interferometer, just before the Kerr cell."""
    seq = fredkin_decomposition(chi)
    damp = [GateSpec("damp", (1,), (gamma,)), GateSpec("damp", (2,), (gamma,))]
    return seq[:3] + damp + seq[3:]


def _three_mode(spec: "GateSpec", cutoff: int) -> np.ndarray:
    from .fock import embed_operator

    return embed_operator(spec.matrix(cutoff), spec.modes, FockBasis(3, cutoff))


@lru_cache(maxsize=None)
def _fredkin(chi: float, cutoff: int) -> np.ndarray:
    d = cutoff
    a = _lowering(d)
    eye = np.eye(d)
    a0 = np.kron(np.kron(a, eye), eye)
    a1 = np.kron(np.kron(eye, a), eye)
    nc = np.kron(np.eye(d * d), np.diag(_number(d)))
    gen = a0.conj().T @ a1 - a0 @ a1.conj().T
    u = expm(chi / 2 * nc @ gen)
    _fredkin_self_test(u, chi, d)
    return _readonly(u)


def _fredkin_self_test(u, chi, d):
    basis = FockBasis(3, d)
    composed = np.eye(d**3, dtype=np.complex128)
    for spec in fredkin_decomposition(chi):
        composed = _three_mode(spec, d) @ composed
    # the truncated generators agree only where a+b holds fewer than d photons
    occ = basis.occupations
    keep = np.flatnonzero(occ[:, 0] + occ[:, 1] < d)
    if np.max(np.abs(composed[np.ix_(keep, keep)] - u[np.ix_(keep, keep)])) > 1e-10:
        raise ConstructionError("Kerr-interferometer decomposition disagrees with controlled beamsplitter")
    if not math.isclose(chi, math.pi) or d < 2:
        return
    col = lambda occs: u[:, basis.index(occs)]  # noqa: E731
    want = {
        (1, 0, 1): (-1.0, (0, 1, 1)),
        (0, 1, 1): (1.0, (1, 0, 1)),
    }
    for src, (sign, dst) in want.items():
        target = np.zeros(d**3, dtype=np.complex128)
        target[basis.index(dst)] = sign
        if np.max(np.abs(col(src) - target)) > 1e-12:
            raise ConstructionError(f"Fredkin orientation check failed on |{src}>")
    for a_ in range(d):
        for b_ in range(d):
            target = np.zeros(d**3, dtype=np.complex128)
            target[basis.index((a_, b_, 0))] = 1.0
            if np.max(np.abs(col((a_, b_, 0)) - target)) > 1e-12:
                raise ConstructionError("Fredkin is not the identity when the control is empty")


def fredkin(chi: float = math.pi, cutoff: int = 2) -> np.ndarray:
    """Kerr-controlled beamsplitter ``exp[(chi/2) n_c (a^dag b - a b^dag)]`` on (a, b, c).

    At ``chi = pi`` on ``|abc>``: ``F|101> = -|011>``, ``F|011> = |101>`` and
    ``F`` is the identity whenever mode c is empty.
    """
    return _fredkin(float(chi), int(cutoff))


# damping ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _damping(gamma: float, cutoff: int) -> tuple:
    if gamma < 0:
        raise FockError("gamma must be nonnegative")
    if gamma == 0:
        return (_readonly(np.eye(cutoff)),)
    keep = math.exp(-gamma)
    ops = []
    for lost in range(cutoff):
        k = np.zeros((cutoff, cutoff), dtype=np.complex128)
        for n in range(lost, cutoff):
            k[n - lost, n] = math.sqrt(math.comb(n, lost) * keep ** (n - lost) * (1 - keep) ** lost)
        if np.any(k):
            ops.append(_readonly(k))
    return tuple(ops)


def damping_kraus(gamma: float, cutoff: int = 2) -> list[np.ndarray]:
    """Single-mode amplitude-damping (photon loss) channel with coupling ``gamma``.

    ``K_l`` removes ``l`` photons; with cutoff 2 this is the pair
    ``{diag(1, e^{-gamma/2}), sqrt(1 - e^{-gamma}) |0><1|}``.
    """
    return list(_damping(float(gamma), int(cutoff)))


# truth tables and oracles ---------------------------------------------------


@dataclass(frozen=True)
class TruthTable:
    """``values[x]`` is f(x) for x in 0..2^N-1."""

    n_inputs: int
    values: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if self.n_inputs < 1:
            raise ValueError("a truth table needs at least one input bit")
        if len(values) != 2**self.n_inputs:
            raise ValueError(f"truth table for {self.n_inputs} inputs needs {2**self.n_inputs} values, got {len(values)}")
        if any(v not in (0, 1) for v in values):
            raise ValueError("truth table values must be bits")
        object.__setattr__(self, "values", values)

    def __call__(self, x: int) -> int:
        return self.values[x]

    def classify(self) -> str:
        ones = sum(self.values)
        if ones in (0, len(self.values)):
            return "type1"
        if 2 * ones == len(self.values):
            return "type2"
        return "neither"


# f_{k1k0}(x), x = 0, 1
ONE_BIT = {
    "00": TruthTable(1, (0, 0)),
    "01": TruthTable(1, (1, 1)),
    "10": TruthTable(1, (0, 1)),
    "11": TruthTable(1, (1, 0)),
}

# f_{k2k1k0}(x), x = x1x0 = 0..3
TWO_BIT = {
    "000": TruthTable(2, (0, 0, 0, 0)),
    "001": TruthTable(2, (1, 1, 1, 1)),
    "010": TruthTable(2, (0, 1, 0, 1)),
    "011": TruthTable(2, (1, 0, 1, 0)),
    "100": TruthTable(2, (0, 0, 1, 1)),
    "101": TruthTable(2, (1, 1, 0, 0)),
    "110": TruthTable(2, (0, 1, 1, 0)),
    "111": TruthTable(2, (1, 0, 0, 1)),
}

MAX_ORACLE_INPUTS = 3


def dual_rail_bit(pair: Sequence[int]) -> int | None:
    """Logical value of a rail pair: ``(1, 0) -> 1``, ``(0, 1) -> 0``, else None."""
    pair = tuple(pair)
    if pair == (1, 0):
        return 1
    if pair == (0, 1):
        return 0
    return None


@lru_cache(maxsize=None)
def _oracle(table: TruthTable, cutoff: int) -> np.ndarray:
    n = table.n_inputs
    if n > MAX_ORACLE_INPUTS:
        raise FockError(f"oracles with more than {MAX_ORACLE_INPUTS} input bits are not supported")
    basis = FockBasis(2 * (n + 1), cutoff)
    u = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    for i, occ in enumerate(basis.states()):
        bits = [dual_rail_bit(occ[2 * p : 2 * p + 2]) for p in range(n + 1)]
        out = occ
        if None not in bits:
            x = 0
            for b in bits[1:]:
                x = 2 * x + b
            if table(x):
                out = (occ[1], occ[0]) + occ[2:]
        u[basis.index(out), i] = 1.0
    return _readonly(u)


def compile_oracle(table: TruthTable, cutoff: int = 2) -> np.ndarray:
    """Permutation realizing ``|x, y> -> |x, y xor f(x)>`` on dual-rail modes.

    Mode order is ``(y1, y0, x_{N-1}1, x_{N-1}0, ..., x_0 1, x_0 0)`` where a
    photon in the ``1`` rail of a pair is logical one.  Basis states that are
    not legal dual-rail encodings are left unchanged.
    """
    return _oracle(table, int(cutoff))


# gate specifications --------------------------------------------------------

ARITY = {"bs": (2,), "phase": (1,), "kerr": (2,), "fredkin": (3,), "damp": (1, 2), "swap": (2,)}


@dataclass(frozen=True)
class GateSpec:
    """One optical element bound to mode indices.

    ``params`` by kind: bs (theta, phi), phase (phi,), kerr (chi,),
    fredkin (chi,), damp (gamma,), swap (), oracle (TruthTable,).
    """

    kind: str
    modes: tuple[int, ...]
    params: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        if self.kind == "oracle":
            table = self.params[0]
            if len(self.modes) != 2 * (table.n_inputs + 1):
                raise ValueError(f"oracle on {table.n_inputs} inputs needs {2 * (table.n_inputs + 1)} modes")
        elif self.kind in ARITY:
            if len(self.modes) not in ARITY[self.kind]:
                raise ValueError(f"{self.kind} takes {' or '.join(map(str, ARITY[self.kind]))} modes, got {len(self.modes)}")
            for p in self.params:
                if not math.isfinite(p):
                    raise ValueError(f"{self.kind} parameter {p} is not finite")
            if self.kind == "damp" and self.params[0] < 0:
                raise ValueError("gamma must be nonnegative")
        else:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"repeated mode in {self.modes}")

    @property
    def is_channel(self) -> bool:
        return self.kind == "damp"

    @property
    def is_diagonal(self) -> bool:
        return self.kind in ("phase", "kerr")

    def matrix(self, cutoff: int) -> np.ndarray:
        k, p = self.kind, self.params
        if k == "bs":
            return beamsplitter(p[0], p[1] if len(p) > 1 else 0.0, cutoff)
        if k == "phase":
            return phase_shift(p[0], cutoff)
        if k == "kerr":
            return kerr(p[0], cutoff)
        if k == "fredkin":
            return fredkin(p[0] if p else math.pi, cutoff)
        if k == "swap":
            return crossover(cutoff)
        if k == "oracle":
            return compile_oracle(p[0], cutoff)
        raise FockError(f"{k} is a channel, not a unitary")

    def kraus(self, cutoff: int) -> list[np.ndarray]:
        if self.kind != "damp":
            return [self.matrix(cutoff)]
        single = damping_kraus(self.params[0], cutoff)
        if len(self.modes) == 1:
            return single
        return [np.kron(k1, k2) for k1 in single for k2 in single]

    def adjoint(self) -> "GateSpec":
        k, p = self.kind, self.params
        if k == "bs":
            return GateSpec(k, self.modes, (-p[0], p[1] if len(p) > 1 else 0.0))
        if k in ("phase", "kerr"):
            return GateSpec(k, self.modes, (-p[0],))
        if k == "fredkin":
            return GateSpec(k, self.modes, (-(p[0] if p else math.pi),))
        if k in ("swap", "oracle"):
            return self
        raise FockError("channels have no adjoint")

    def remap(self, modes: Sequence[int]) -> "GateSpec":
        """Rebind local mode indices through ``modes``."""
        return GateSpec(self.kind, tuple(modes[m] for m in self.modes), self.params)


def unitarity_error(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def number_commutator(u: np.ndarray, num_modes: int, cutoff: int) -> float:
    """``|[U, N_total]|_max`` for a local operator on ``num_modes`` modes."""
    n_tot = np.diag(FockBasis(num_modes, cutoff).total_number().astype(float))
    return float(np.max(np.abs(u @ n_tot - n_tot @ u)))


__all__ = [
    "ConstructionError",
    "GateSpec",
    "ONE_BIT",
    "TWO_BIT",
    "TruthTable",
    "beamsplitter",
    "compile_oracle",
    "crossover",
    "damping_kraus",
    "dual_rail_bit",
    "fredkin",
    "fredkin_decomposition",
    "kerr",
    "kraus_deviation",
    "lossy_fredkin_decomposition",
    "number_commutator",
    "phase_shift",
    "unitarity_error",
]
