"""Truncated multimode Fock space: basis, pure and mixed states, measurement.

Basis states are ordered big-endian over modes in declaration order, so the
ket string ``|0101>`` over modes ``a, b, c, d`` is index ``0b0101 = 5`` when
the cutoff is 2.  All state objects are immutable; operations return new
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import _backend

UNITARY_ATOL = 1e-10
KRAUS_ATOL = 1e-10
NORM_ATOL = 1e-10
COHERENT_TAIL = 1e-10


class FockError(ValueError):
    """Raised when a state, operator or index violates a Fock-space contract."""


@dataclass(frozen=True)
class FockBasis:
    """``num_modes`` modes, each holding 0..cutoff-1 photons."""

    num_modes: int
    cutoff: int

    def __post_init__(self):
        if int(self.num_modes) < 1 or int(self.cutoff) < 1:
            raise FockError("num_modes and cutoff must be positive")

    @property
    def dim(self) -> int:
        return self.cutoff**self.num_modes

    def index(self, occupations: Sequence[int]) -> int:
        return basis_index(occupations, self)

    def state(self, index: int) -> tuple[int, ...]:
        return basis_state(index, self)

    def states(self) -> Iterable[tuple[int, ...]]:
        for i in range(self.dim):
            yield basis_state(i, self)

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, num_modes)`` integer table of occupation numbers."""
        return np.indices((self.cutoff,) * self.num_modes).reshape(self.num_modes, -1).T

    def total_number(self) -> np.ndarray:
        """Diagonal of the total photon-number operator."""
        return self.occupations.sum(axis=1)


def basis_index(occupations: Sequence[int], basis: FockBasis) -> int:
    if len(occupations) != basis.num_modes:
        raise FockError(
            f"expected {basis.num_modes} occupation numbers, got {len(occupations)}"
        )
    idx = 0
    for mode, n in enumerate(occupations):
        if not 0 <= n < basis.cutoff:
            raise FockError(
                f"occupation {n} of mode {mode} outside [0, {basis.cutoff})"
            )
        idx = idx * basis.cutoff + int(n)
    return idx


def basis_state(index: int, basis: FockBasis) -> tuple[int, ...]:
    if not 0 <= index < basis.dim:
        raise FockError(f"basis index {index} outside [0, {basis.dim})")
    digits = []
    for _ in range(basis.num_modes):
        index, n = divmod(index, basis.cutoff)
        digits.append(n)
    return tuple(reversed(digits))


def ket_label(occupations: Sequence[int]) -> str:
    """``(0, 1, 0, 1) -> '0101'``; occupations above 9 are comma-separated."""
    if all(n < 10 for n in occupations):
        return "".join(str(n) for n in occupations)
    return ",".join(str(n) for n in occupations)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FockVector:
    basis: FockBasis
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps).reshape(-1)
        if amps.shape[0] != self.basis.dim:
            raise FockError(f"amplitude vector has length {amps.shape[0]}, basis dim is {self.basis.dim}")
        object.__setattr__(self, "amps", _frozen(amps))

    @classmethod
    def basis_vector(cls, basis: FockBasis, occupations: Sequence[int]) -> "FockVector":
        amps = np.zeros(basis.dim, dtype=np.complex128)
        amps[basis_index(occupations, basis)] = 1.0
        return cls(basis, amps)

    @classmethod
    def from_kets(cls, basis: FockBasis, terms: dict) -> "FockVector":
        """Build from ``{occupation tuple or label string: amplitude}``."""
        amps = np.zeros(basis.dim, dtype=np.complex128)
        for key, amp in terms.items():
            occ = tuple(int(c) for c in key) if isinstance(key, str) else tuple(key)
            amps[basis_index(occ, basis)] += amp
        return cls(basis, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def amplitude(self, occupations: Sequence[int]) -> complex:
        return complex(self.amps[basis_index(occupations, self.basis)])

    def to_density(self) -> "DensityOp":
        return DensityOp(self.basis, np.outer(self.amps, self.amps.conj()))

    def terms(self, atol: float = 1e-12) -> list[tuple[tuple[int, ...], complex]]:
        """Nonzero ``(occupations, amplitude)`` pairs in basis order."""
        idx = np.flatnonzero(np.abs(self.amps) > atol)
        return [(basis_state(int(i), self.basis), complex(self.amps[i])) for i in idx]

    def allclose(self, other: "FockVector", atol: float = 1e-10) -> bool:
        return self.basis == other.basis and bool(np.max(np.abs(self.amps - other.amps)) <= atol)

    def equal_up_to_phase(self, other: "FockVector", atol: float = 1e-10) -> bool:
        overlap = np.vdot(other.amps, self.amps)
        if abs(overlap) < 1e-15:
            return False
        phase = overlap / abs(overlap)
        return bool(np.max(np.abs(self.amps - phase * other.amps)) < atol)


@dataclass(frozen=True, eq=False)
class DensityOp:
    basis: FockBasis
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise FockError(f"density matrix has shape {mat.shape}, expected side {self.basis.dim}")
        object.__setattr__(self, "mat", _frozen(mat))

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) < atol)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.mat + self.mat.conj().T) / 2).min())

    def allclose(self, other: "DensityOp", atol: float = 1e-10) -> bool:
        return self.basis == other.basis and bool(np.max(np.abs(self.mat - other.mat)) < atol)


State = FockVector | DensityOp


# operator application ------------------------------------------------------


def _check_targets(targets: Sequence[int], basis: FockBasis) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if not targets:
        raise FockError("at least one target mode is required")
    if len(set(targets)) != len(targets):
        raise FockError(f"repeated mode index in {targets}")
    for t in targets:
        if not 0 <= t < basis.num_modes:
            raise FockError(f"mode {t} out of range for {basis.num_modes} modes")
    return targets


def _check_local(local: np.ndarray, targets: tuple[int, ...], basis: FockBasis) -> np.ndarray:
    local = np.asarray(local, dtype=np.complex128)
    side = basis.cutoff ** len(targets)
    if local.shape != (side, side):
        raise FockError(
            f"local operator has shape {local.shape}, expected {(side, side)} for {len(targets)} modes at cutoff {basis.cutoff}"
        )
    return local


def _is_diagonal(op: np.ndarray) -> bool:
    return not np.any(op - np.diag(np.diagonal(op)))


def _apply_vec(amps, basis, local, targets):
    d, m = basis.cutoff, basis.num_modes
    if _is_diagonal(local):
        return _backend.apply_diag(amps, d, m, np.diagonal(local), targets)
    return _backend.apply_dense(amps, d, m, local, targets)


def _apply_rho(mat, basis, left, right, targets):
    """Return ``left . rho . right^dagger`` with both acting on ``targets``."""
    d, m = basis.cutoff, basis.num_modes
    flat = mat.reshape(-1)
    cols = tuple(t + m for t in targets)
    if _is_diagonal(left):
        flat = _backend.apply_diag(flat, d, 2 * m, np.diagonal(left), targets)
    else:
        flat = _backend.apply_dense(flat, d, 2 * m, left, targets)
    if _is_diagonal(right):
        flat = _backend.apply_diag(flat, d, 2 * m, np.diagonal(right).conj(), cols)
    else:
        flat = _backend.apply_dense(flat, d, 2 * m, right.conj(), cols)
    return flat.reshape(basis.dim, basis.dim)


def embed_operator(local: np.ndarray, target_modes: Sequence[int], basis: FockBasis) -> np.ndarray:
    """Full-space matrix acting as ``local`` on ``target_modes`` and identity elsewhere."""
    targets = _check_targets(target_modes, basis)
    local = _check_local(local, targets, basis)
    eye = np.eye(basis.dim, dtype=np.complex128).reshape(-1)
    d, m = basis.cutoff, basis.num_modes
    return _backend.apply_dense(eye, d, 2 * m, local, targets).reshape(basis.dim, basis.dim)


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < atol)


def apply_unitary(state: State, u: np.ndarray, strict: bool = True) -> State:
    """Evolve by a full-space matrix: ``U v`` for vectors, ``U rho U^dagger`` for densities."""
    u = np.asarray(u, dtype=np.complex128)
    dim = state.basis.dim
    if u.shape != (dim, dim):
        raise FockError(f"operator shape {u.shape} does not match basis dim {dim}")
    if strict and not is_unitary(u):
        raise FockError("operator is not unitary; use apply_channel for non-unitary maps")
    if isinstance(state, FockVector):
        return FockVector(state.basis, u @ state.amps)
    return DensityOp(state.basis, u @ state.mat @ u.conj().T)


def apply_local(state: State, local: np.ndarray, target_modes: Sequence[int], strict: bool = True) -> State:
    """Evolve by a unitary acting only on ``target_modes`` without building the full matrix."""
    targets = _check_targets(target_modes, state.basis)
    local = _check_local(local, targets, state.basis)
    if strict and not is_unitary(local):
        raise FockError("local operator is not unitary")
    if isinstance(state, FockVector):
        return FockVector(state.basis, _apply_vec(state.amps, state.basis, local, targets))
    return DensityOp(state.basis, _apply_rho(state.mat, state.basis, local, local, targets))


def kraus_deviation(kraus: Sequence[np.ndarray]) -> float:
    """Max-norm of ``sum K^dagger K - I``."""
    side = np.asarray(kraus[0]).shape[0]
    total = sum(np.asarray(k).conj().T @ np.asarray(k) for k in kraus)
    return float(np.max(np.abs(total - np.eye(side))))


def _check_kraus(kraus):
    if not kraus:
        raise FockError("empty Kraus set")
    dev = kraus_deviation(kraus)
    if dev > KRAUS_ATOL:
        raise FockError(f"Kraus set is not trace preserving: completeness deviation |sum K^dag K - I|_max = {dev:.3e}")


def apply_channel(rho: State, kraus: Sequence[np.ndarray]) -> DensityOp:
    """``rho -> sum_i K_i rho K_i^dagger`` with full-space Kraus operators."""
    if isinstance(rho, FockVector):
        rho = rho.to_density()
    _check_kraus(kraus)
    for k in kraus:
        if np.asarray(k).shape != rho.mat.shape:
            raise FockError("Kraus operator does not match basis dimension")
    out = sum(k @ rho.mat @ np.asarray(k).conj().T for k in kraus)
    return DensityOp(rho.basis, out)


def apply_local_channel(rho: State, kraus: Sequence[np.ndarray], target_modes: Sequence[int]) -> DensityOp:
    if isinstance(rho, FockVector):
        rho = rho.to_density()
    targets = _check_targets(target_modes, rho.basis)
    kraus = [_check_local(k, targets, rho.basis) for k in kraus]
    _check_kraus(kraus)
    out = sum(_apply_rho(rho.mat, rho.basis, k, k, targets) for k in kraus)
    return DensityOp(rho.basis, out)


def partial_trace(rho: State, keep_modes: Sequence[int]) -> DensityOp:
    """Reduced density matrix on ``keep_modes`` (result keeps their listed order)."""
    if isinstance(rho, FockVector):
        rho = rho.to_density()
    basis = rho.basis
    keep = _check_targets(keep_modes, basis)
    m, d = basis.num_modes, basis.cutoff
    t = rho.mat.reshape((d,) * (2 * m))
    row = list(range(m))
    col = [i + m if i in keep else i for i in range(m)]
    out = [i for i in keep] + [i + m for i in keep]
    reduced = np.einsum(t, row + col, out)
    side = d ** len(keep)
    return DensityOp(FockBasis(len(keep), d), reduced.reshape(side, side))


# measurement ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OutcomeDist:
    """Photon-count distribution over every basis tuple of ``basis``."""

    basis: FockBasis
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.shape[0] != self.basis.dim:
            raise FockError("probability vector does not match basis dimension")
        p = np.where(np.abs(p) < 1e-15, 0.0, p)
        if p.min() < -1e-10 or p.max() > 1 + 1e-10:
            raise FockError("probabilities outside [0, 1]")
        p = np.clip(p, 0.0, 1.0)
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def entries(self) -> dict[tuple[int, ...], float]:
        return {basis_state(int(i), self.basis): float(self.probs[i]) for i in np.flatnonzero(self.probs)}

    def items(self, atol: float = 0.0):
        for i in np.flatnonzero(self.probs > atol):
            yield basis_state(int(i), self.basis), float(self.probs[i])

    def prob(self, outcome: Sequence[int]) -> float:
        return float(self.probs[basis_index(tuple(outcome), self.basis)])

    def total(self) -> float:
        return float(self.probs.sum())

    def marginal(self, modes: Sequence[int]) -> "OutcomeDist":
        modes = _check_targets(modes, self.basis)
        m, d = self.basis.num_modes, self.basis.cutoff
        t = self.probs.reshape((d,) * m)
        out = np.einsum(t, list(range(m)), list(modes))
        return OutcomeDist(FockBasis(len(modes), d), out.reshape(-1))

    def tv_distance(self, other: "OutcomeDist") -> float:
        if self.basis != other.basis:
            raise FockError("distributions live on different bases")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    def sample(self, n: int, rng: np.random.Generator) -> dict[tuple[int, ...], int]:
        p = self.probs / self.probs.sum()
        counts = rng.multinomial(n, p)
        return {basis_state(int(i), self.basis): int(counts[i]) for i in np.flatnonzero(counts)}


def measure_counts(state: State) -> OutcomeDist:
    """Born-rule photon-count distribution of a normalized state."""
    if isinstance(state, FockVector):
        p = np.abs(state.amps) ** 2
    else:
        p = np.real(np.diagonal(state.mat))
    total = p.sum()
    if abs(total - 1.0) > NORM_ATOL:
        raise FockError(f"state is not normalized (total probability {total:.12g})")
    return OutcomeDist(state.basis, p)


# coherent states -----------------------------------------------------------


def coherent_tail(alpha: complex, cutoff: int) -> float:
    """Poisson mass at n >= cutoff for mean photon number |alpha|^2."""
    return float(stats.poisson.sf(cutoff - 1, abs(alpha) ** 2))


def required_cutoff(alpha: complex, tol: float = COHERENT_TAIL) -> int:
    d = 1
    while coherent_tail(alpha, d) >= tol:
        d += 1
    return d


def coherent_amplitudes(alpha: complex, cutoff: int, tol: float = COHERENT_TAIL) -> np.ndarray:
    tail = coherent_tail(alpha, cutoff)
    if tail >= tol:
        raise FockError(
            f"cutoff {cutoff} truncates {tail:.3e} of |alpha={alpha}> (limit {tol:.0e}); "
            f"use cutoff >= {required_cutoff(alpha, tol)}"
        )
    alpha = complex(alpha)
    n = np.arange(cutoff)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        amps = (n == 0).astype(np.complex128)
    else:
        mag = np.exp(-abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * log_fact)
        amps = mag * np.exp(1j * n * np.angle(alpha))
    return amps / np.linalg.norm(amps)


def coherent_vector(alpha: complex, basis: FockBasis, tol: float = COHERENT_TAIL) -> FockVector:
    if basis.num_modes != 1:
        raise FockError("coherent_vector builds a single-mode state")
    return FockVector(basis, coherent_amplitudes(alpha, basis.cutoff, tol))


def product_state(basis: FockBasis, modes: Sequence[int | complex], coherent: Sequence[bool] | None = None) -> FockVector:
    """Tensor product of per-mode Fock numbers or coherent amplitudes.

    ``modes[i]`` is an occupation number unless ``coherent[i]`` is true, in
    which case it is the coherent amplitude for that mode.
    """
    if len(modes) != basis.num_modes:
        raise FockError(f"expected {basis.num_modes} per-mode entries, got {len(modes)}")
    coherent = coherent or [False] * len(modes)
    amps = np.ones(1, dtype=np.complex128)
    for mode, (value, is_coh) in enumerate(zip(modes, coherent)):
        if is_coh:
            local = coherent_amplitudes(value, basis.cutoff)
        else:
            n = int(value)
            if not 0 <= n < basis.cutoff:
                raise FockError(f"occupation {n} of mode {mode} outside [0, {basis.cutoff})")
            local = np.zeros(basis.cutoff, dtype=np.complex128)
            local[n] = 1.0
        amps = np.kron(amps, local)
    return FockVector(basis, amps)


def mean_photon_number(state: State, mode: int) -> float:
    occ = state.basis.occupations[:, mode]
    if isinstance(state, FockVector):
        return float(np.sum(occ * np.abs(state.amps) ** 2))
    return float(np.sum(occ * np.real(np.diagonal(state.mat))))
