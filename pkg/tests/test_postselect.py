import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualrail.fock import FockBasis, OutcomeDist
from dualrail.postselect import (
    CURVE_COLUMNS,
    RejectReason,
    accepted_mass,
    classify,
    conditional_error,
    p_ec_analytic,
    p_noec_analytic,
    sweep_gamma,
)

from golden import GAMMAS, p_ec_reference, p_noec_reference

BASIS = FockBasis(4, 2)


def dist_of(entries, d=2):
    basis = FockBasis(4, d)
    probs = np.zeros(basis.dim)
    for occ, p in entries.items():
        probs[basis.index(tuple(map(int, occ)))] = p
    return OutcomeDist(basis, probs)


# classify


@pytest.mark.parametrize(
    "outcome,text",
    [
        ((0, 1, 0, 1), "Accept(type1)"),
        ((0, 1, 1, 0), "Accept(type2)"),
        ((1, 0, 1, 0), "Reject(ScratchCorrupted)"),
        ((1, 0, 0, 1), "Reject(ScratchCorrupted)"),
        ((1, 1, 0, 0), "Reject(ScratchCorrupted)"),
        ((0, 0, 1, 1), "Reject(ScratchCorrupted)"),
        ((0, 2, 0, 0), "Reject(ScratchCorrupted)"),
        ((0, 0, 0, 0), "Reject(PhotonLoss)"),
        ((0, 0, 0, 1), "Reject(PhotonLoss)"),
        ((0, 0, 1, 0), "Reject(PhotonLoss)"),
        ((0, 1, 0, 0), "Reject(PhotonLoss)"),
        ((1, 0, 0, 0), "Reject(PhotonLoss)"),
        ((1, 1, 1, 0), "Reject(TooManyPhotons)"),
        ((0, 2, 1, 1), "Reject(TooManyPhotons)"),
    ],
)
def test_classify_examples(outcome, text):
    assert str(classify(outcome)) == text


@pytest.mark.parametrize("d", [2, 3])
def test_classify_exhaustive(d):
    accepted = set()
    for occ in itertools.product(range(d), repeat=4):
        v = classify(occ)
        total = sum(occ)
        if total <= 1:
            assert v.reason is RejectReason.PHOTON_LOSS
        elif total >= 3:
            assert v.reason is RejectReason.TOO_MANY_PHOTONS
        if v.accepted:
            accepted.add(occ)
    assert accepted == {(0, 1, 0, 1), (0, 1, 1, 0)}


@pytest.mark.parametrize("bad", [(0, 1, 0), (0, 1, 0, -1), (0, 1, 0, 1, 0)])
def test_classify_malformed(bad):
    with pytest.raises(ValueError):
        classify(bad)


def test_classify_two_bit_layout():
    assert str(classify((0, 1, 0, 1, 0, 1))) == "Accept(type1)"
    assert str(classify((0, 1, 1, 0, 0, 1))) == "Accept(type2)"
    assert str(classify((1, 0, 0, 1, 0, 1))) == "Reject(ScratchCorrupted)"


# closed forms


@pytest.mark.parametrize("g", GAMMAS + (0.001, 50.0))
def test_closed_forms_match_reference(g):
    assert p_noec_analytic(g) == pytest.approx(p_noec_reference(g), abs=1e-14)
    assert p_ec_analytic(g) == pytest.approx(p_ec_reference(g), abs=1e-14)


def test_closed_form_limits():
    assert p_noec_analytic(0) == 0 and p_ec_analytic(0) == 0
    assert p_noec_analytic(1e3) == pytest.approx(0.25, abs=1e-15)
    assert p_ec_analytic(1e3) == pytest.approx(0.5, abs=1e-15)


def test_closed_form_small_gamma_slopes():
    g = 1e-3
    assert p_noec_analytic(g) / (g / 2) == pytest.approx(1, rel=0.01)
    assert p_ec_analytic(g) / (g * g / 16) == pytest.approx(1, rel=0.01)
    # no cancellation deep in the small-gamma regime
    assert p_ec_analytic(1e-9) / (1e-18 / 16) == pytest.approx(1, rel=1e-6)


def test_closed_form_negative_gamma():
    for f in (p_noec_analytic, p_ec_analytic):
        with pytest.raises(ValueError):
            f(-0.5)


# the two closed forms cross once; beyond it rejecting illegal outcomes
# leaves a worse conditional error than reading mode d blindly
CROSSING = 2.7091583150243395


@given(st.floats(0, CROSSING - 1e-9))
def test_error_correction_helps_below_crossing(g):
    assert p_ec_analytic(g) <= p_noec_analytic(g) + 1e-15


@given(st.floats(CROSSING + 1e-9, 200))
def test_error_correction_hurts_above_crossing(g):
    assert p_ec_analytic(g) > p_noec_analytic(g)


def test_raw_error_peaks_at_two_ln3():
    g = 2 * math.log(3)
    assert p_noec_analytic(g) == pytest.approx(7 / 27, abs=1e-15)
    assert p_noec_analytic(g) > max(p_noec_analytic(g - 1e-3), p_noec_analytic(g + 1e-3))


@given(st.floats(0, 200))
def test_closed_forms_are_probabilities(g):
    assert 0 <= p_ec_analytic(g) <= 0.5
    assert 0 <= p_noec_analytic(g) <= 7 / 27 + 1e-15


# conditional error


def test_conditional_error_deterministic():
    dist = dist_of({"0110": 1.0})
    assert conditional_error(dist, "type2", "raw") == 0
    assert conditional_error(dist, "type2", "postselected") == 0


def test_conditional_error_relative_probability():
    p, q, r = 0.1, 0.6, 0.3
    dist = dist_of({"0101": p, "0110": q, "0000": r})
    assert conditional_error(dist, "type2") == pytest.approx(p / (p + q), abs=1e-15)
    # raw: z=1 is wrong for type2; the vacuum reads z=0 and counts as right
    assert conditional_error(dist, "type2", "raw") == pytest.approx(p, abs=1e-15)


def test_conditional_error_no_accepted_mass():
    with pytest.raises(ValueError):
        conditional_error(dist_of({"0000": 1.0}), "type1")


def test_conditional_error_bad_arguments():
    dist = dist_of({"0110": 1.0})
    with pytest.raises(ValueError):
        conditional_error(dist, "type3")
    with pytest.raises(ValueError):
        conditional_error(dist, "type1", "sideways")


def test_pipeline_at_gamma_0_2():
    from dualrail.machine import MachineConfig, run_machine

    dist = run_machine(MachineConfig(k="10", gamma=0.2))
    assert conditional_error(dist, "type2") == pytest.approx(p_ec_analytic(0.2), abs=1e-8)


# sweep


def test_sweep_gamma_zero():
    (row,) = sweep_gamma("10", [0.0]).rows
    assert row.p_raw_sim == 0 and row.p_ec_sim == 0 and row.accept_prob == pytest.approx(1)


def test_sweep_matches_closed_forms():
    curve = sweep_gamma("10", GAMMAS)
    raw, ec = curve.max_deviation()
    assert raw < 1e-8 and ec < 1e-8
    for row in curve.rows:
        assert (row.p_ec_sim <= row.p_raw_sim + 1e-15) == (row.gamma < CROSSING)


def test_sweep_monotone_and_parallel_identical():
    grid = list(np.linspace(0, 5, 21))
    serial = sweep_gamma("10", grid)
    parallel = sweep_gamma("10", grid, workers=4)
    assert serial.to_csv() == parallel.to_csv()
    ec = [r.p_ec_sim for r in serial.rows]
    assert all(b >= a - 1e-15 for a, b in zip(ec, ec[1:]))
    accept = [r.accept_prob for r in serial.rows]
    assert all(b <= a + 1e-15 for a, b in zip(accept, accept[1:]))


def test_sweep_other_selector_has_no_analytic_columns():
    curve = sweep_gamma("11", [0.5])
    assert math.isnan(curve.rows[0].p_raw_analytic)
    assert 0 < curve.rows[0].p_ec_sim < curve.rows[0].p_raw_sim


def test_sweep_csv_format():
    text = sweep_gamma("10", [0.0, 0.5]).to_csv()
    lines = text.split("\n")
    assert lines[0] == ",".join(CURVE_COLUMNS)
    assert len(lines) == 4 and lines[-1] == ""
    assert "\r" not in text
    assert lines[1].split(",")[0] == "0.00000000000000000e+00"


def test_sweep_rejects_negative_gamma():
    with pytest.raises(ValueError):
        sweep_gamma("10", [0.1, -0.1])


def test_accepted_mass_lossy():
    from dualrail.machine import MachineConfig, run_machine

    assert accepted_mass(run_machine(MachineConfig(k="10"))) == pytest.approx(1)
    assert 0 < accepted_mass(run_machine(MachineConfig(k="10", gamma=1.0))) < 1
