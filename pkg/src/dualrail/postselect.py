"""Dual-rail post-selection: outcome legality, conditional error rates and
the closed-form loss curves for the ``k = 10`` machine."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .fock import OutcomeDist
from .optics import dual_rail_bit

TYPE1 = "type1"
TYPE2 = "type2"


class RejectReason(Enum):
    PHOTON_LOSS = "PhotonLoss"
    TOO_MANY_PHOTONS = "TooManyPhotons"
    SCRATCH_CORRUPTED = "ScratchCorrupted"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    answer: str | None = None
    reason: RejectReason | None = None

    @classmethod
    def accept(cls, answer: str) -> "Verdict":
        return cls(True, answer=answer)

    @classmethod
    def reject(cls, reason: RejectReason) -> "Verdict":
        return cls(False, reason=reason)

    def __str__(self):
        return f"Accept({self.answer})" if self.accepted else f"Reject({self.reason.value})"


class RejectedOutcome(ValueError):
    """An answer was requested from an outcome the dual-rail rule rejects."""


def classify(outcome: Sequence[int]) -> Verdict:
    """Apply the dual-rail legality rule to a photon-count tuple.

    The tuple is read as rail pairs ``(scratch, x_{N-1}, ..., x_0)``, each pair
    ordered (one-rail, zero-rail).  With N input bits the legal photon total
    is N + 1.  A legal outcome must leave the scratch pair at logical zero;
    it reports type1 when every input pair reads logical zero.
    """
    outcome = tuple(int(n) for n in outcome)
    if len(outcome) < 4 or len(outcome) % 2 or any(n < 0 for n in outcome):
        raise ValueError(f"malformed outcome {outcome}: need an even number (>= 4) of nonnegative counts")
    pairs = len(outcome) // 2
    total = sum(outcome)
    if total < pairs:
        return Verdict.reject(RejectReason.PHOTON_LOSS)
    if total > pairs:
        return Verdict.reject(RejectReason.TOO_MANY_PHOTONS)
    bits = [dual_rail_bit(outcome[2 * p : 2 * p + 2]) for p in range(pairs)]
    if None in bits or bits[0] != 0:
        return Verdict.reject(RejectReason.SCRATCH_CORRUPTED)
    return Verdict.accept(TYPE1 if not any(bits[1:]) else TYPE2)


def accepted_mass(dist: OutcomeDist) -> float:
    return sum(p for occ, p in dist.items() if classify(occ).accepted)


def answer_probabilities(dist: OutcomeDist) -> dict[str, float]:
    """Probability mass of each accepted answer (unnormalized)."""
    mass = {TYPE1: 0.0, TYPE2: 0.0}
    for occ, p in dist.items():
        v = classify(occ)
        if v.accepted:
            mass[v.answer] += p
    return mass


def expected_z(truth: str) -> int:
    """Photon count in the last mode that signals ``truth`` for a one-bit machine."""
    return 1 if truth == TYPE1 else 0


def conditional_error(dist: OutcomeDist, truth: str, mode: str = "postselected") -> float:
    """Probability of reading the wrong function type.

    ``raw``: the last mode's count differs from the value that signals
    ``truth``, over the full distribution including illegal outcomes.
    ``postselected``: wrong / (wrong + right) over accepted outcomes.
    """
    if truth not in (TYPE1, TYPE2):
        raise ValueError(f"truth must be {TYPE1!r} or {TYPE2!r}")
    if mode == "raw":
        z = dist.marginal([dist.basis.num_modes - 1])
        return 1.0 - z.probs[expected_z(truth)]
    if mode != "postselected":
        raise ValueError(f"unknown mode {mode!r}")
    mass = answer_probabilities(dist)
    total = mass[TYPE1] + mass[TYPE2]
    if total <= 0:
        raise ValueError("no accepted outcomes; postselected error is undefined")
    wrong = mass[TYPE2] if truth == TYPE1 else mass[TYPE1]
    return wrong / total


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma >= 0:
        raise ValueError("gamma must be nonnegative")
    return gamma


def p_noec_analytic(gamma: float) -> float:
    """Error without post-selection: ``(1 + e^-g - 2 e^{-3g/2}) / 4``."""
    g = _check_gamma(gamma)
    # expm1 form avoids cancellation for small gamma
    return 0.25 * (math.expm1(-g) - 2.0 * math.expm1(-1.5 * g))


def p_ec_analytic(gamma: float) -> float:
    """Error after post-selection: ``(1 - sech(g/2)) / 2``."""
    x = _check_gamma(gamma) / 2
    if x < 20:
        return math.sinh(x / 2) ** 2 / math.cosh(x)
    return 0.5 * (1.0 - 2.0 * math.exp(-x) / (1.0 + math.exp(-2 * x)))


@dataclass(frozen=True)
class CurveRow:
    gamma: float
    p_raw_sim: float
    p_raw_analytic: float
    p_ec_sim: float
    p_ec_analytic: float
    accept_prob: float


CURVE_COLUMNS = ("gamma", "p_raw_sim", "p_raw_analytic", "p_ec_sim", "p_ec_analytic", "accept_prob")


@dataclass(frozen=True)
class ErrorCurve:
    k: str
    rows: tuple[CurveRow, ...]

    def max_deviation(self) -> tuple[float, float]:
        """Largest |sim - analytic| for the raw and post-selected columns."""
        raw = max((abs(r.p_raw_sim - r.p_raw_analytic) for r in self.rows), default=0.0)
        ec = max((abs(r.p_ec_sim - r.p_ec_analytic) for r in self.rows), default=0.0)
        return raw, ec

    def to_csv(self) -> str:
        return format_csv(CURVE_COLUMNS, ([getattr(r, c) for c in CURVE_COLUMNS] for r in self.rows))


def format_float(x: float) -> str:
    return f"{x:.17e}"


def format_csv(columns: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()


def sweep_gamma(k: str, grid: Sequence[float], chi: float = math.pi, workers: int | None = None) -> ErrorCurve:
    """Run the lossy one-bit machine on every ``gamma`` of ``grid``.

    Analytic columns are the closed forms derived for ``k = 10``; for other
    selectors they are NaN.
    """
    from .machine import MachineConfig, run_machine, truth_of

    grid = [_check_gamma(g) for g in grid]
    truth = truth_of(k)
    analytic = k == "10" and math.isclose(chi, math.pi)

    def row(g: float) -> CurveRow:
        dist = run_machine(MachineConfig(k=k, gamma=g, chi=chi))
        accept = accepted_mass(dist)
        return CurveRow(
            gamma=g,
            p_raw_sim=conditional_error(dist, truth, "raw"),
            p_raw_analytic=p_noec_analytic(g) if analytic else math.nan,
            p_ec_sim=conditional_error(dist, truth, "postselected") if accept > 0 else math.nan,
            p_ec_analytic=p_ec_analytic(g) if analytic else math.nan,
            accept_prob=accept,
        )

    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(row, grid))
    else:
        rows = [row(g) for g in grid]
    return ErrorCurve(k, tuple(rows))
