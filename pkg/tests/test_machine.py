import math

import numpy as np
import pytest

from dualrail.fock import DensityOp, FockBasis, FockVector, embed_operator
from dualrail.machine import (
    STAGES,
    Coherent,
    MachineConfig,
    bob_forward,
    build_machine,
    chi_sweep,
    read_answer,
    run_classical,
    run_deutsch_jozsa,
    run_machine,
    run_trajectory,
    total_photons,
    truth_of,
)
from dualrail.optics import TWO_BIT, phase_shift
from dualrail.postselect import RejectedOutcome, classify

from golden import CHI_HALF_PI_K10, TRAJECTORIES

KEYS = ("00", "01", "10", "11")
BASIS = FockBasis(4, 2)


@pytest.mark.parametrize("k", KEYS)
def test_trajectory_matches_golden_with_sign(k):
    traj = run_trajectory(MachineConfig(k=k))
    for name, want in zip(STAGES, TRAJECTORIES[k]):
        assert traj[name].allclose(FockVector.from_kets(BASIS, want), atol=1e-10), (k, name)


@pytest.mark.parametrize("k", KEYS)
def test_mirror_symmetry_without_phase_shift(k):
    traj = run_trajectory(MachineConfig(k=k, with_S=False))
    assert traj.final.equal_up_to_phase(traj["psi0"], atol=1e-12)


@pytest.mark.parametrize("k", KEYS)
@pytest.mark.parametrize("with_s", [True, False])
def test_lossless_photon_number_conserved(k, with_s):
    traj = run_trajectory(MachineConfig(k=k, with_S=with_s))
    for name in STAGES:
        assert total_photons(traj[name]) == pytest.approx(2, abs=1e-12)


@pytest.mark.parametrize("k", KEYS)
def test_deterministic_single_outcome_with_scratch_intact(k):
    dist = run_machine(MachineConfig(k=k))
    (outcome, p), = dist.items(1e-12)
    assert p == pytest.approx(1, abs=1e-12)
    assert outcome[:2] == (0, 1)
    assert classify(outcome).answer == truth_of(k)


@pytest.mark.parametrize("k", KEYS)
def test_phase_shift_toggles_answer_only_when_fredkin_is_in(k):
    with_s = read_answer(run_machine(MachineConfig(k=k, with_S=True)))
    without_s = read_answer(run_machine(MachineConfig(k=k, with_S=False)))
    assert (with_s != without_s) == (k[0] == "1")


def test_k00_circuit_is_phase_shift_on_scratch():
    circuit = build_machine(MachineConfig(k="00"))
    want = embed_operator(phase_shift(math.pi), (0,), BASIS)
    assert np.max(np.abs(circuit.unitary() - want)) < 1e-12
    bare = build_machine(MachineConfig(k="00", with_S=False))
    assert np.max(np.abs(bare.unitary() - np.eye(16))) < 1e-12


def test_lossy_circuit_has_two_damping_channels():
    circuit = build_machine(MachineConfig(k="10", gamma=0.1))
    damps = circuit.channels()
    assert sorted(e.modes for e in damps) == [(1,), (2,)]
    assert not build_machine(MachineConfig(k="10")).channels()


def test_lossy_trajectory_switches_to_density():
    traj = run_trajectory(MachineConfig(k="10", gamma=0.4))
    assert isinstance(traj["psi3"], FockVector)
    assert isinstance(traj["psi5"], DensityOp)
    assert abs(traj.final.trace() - 1) < 1e-12
    assert traj.final.min_eigenvalue() > -1e-10


def test_loss_only_reduces_photon_number():
    traj = run_trajectory(MachineConfig(k="11", gamma=1.0))
    assert total_photons(traj.final) < 2


def test_defensive_cutoff_three_agrees():
    for k in KEYS:
        d2 = run_machine(MachineConfig(k=k, gamma=0.3))
        d3 = run_machine(MachineConfig(k=k, gamma=0.3, cutoff=3))
        for occ, p in d2.items():
            assert d3.prob(occ) == pytest.approx(p, abs=1e-12)


def test_read_answer_examples():
    assert read_answer((0, 1, 0, 1)) == "type1"
    assert read_answer((0, 1, 1, 0)) == "type2"
    with pytest.raises(RejectedOutcome):
        read_answer((0, 0, 0, 0))


def test_read_answer_needs_accepted_mass():
    from dualrail.fock import OutcomeDist

    probs = np.zeros(16)
    probs[0] = 1
    with pytest.raises(RejectedOutcome):
        read_answer(OutcomeDist(BASIS, probs))


def test_invalid_configs():
    with pytest.raises(ValueError):
        MachineConfig(k="2")
    with pytest.raises(ValueError):
        MachineConfig(k="1100")
    with pytest.raises(ValueError, match="gamma must be nonnegative"):
        MachineConfig(gamma=-1)
    with pytest.raises(ValueError):
        MachineConfig(chi=math.nan)


def test_trajectory_needs_single_photon_input():
    with pytest.raises(ValueError):
        run_trajectory(MachineConfig(input=Coherent(1.0)))


def test_switch_network_composition():
    kinds = {k: [s.kind for s in bob_forward(MachineConfig(k=k))] for k in KEYS}
    assert kinds == {"00": [], "01": ["swap"], "10": ["fredkin"], "11": ["fredkin", "swap"]}


# chi sweep


def test_chi_sweep_endpoints_and_midpoint():
    rows = chi_sweep("10", [0.0, math.pi / 2, math.pi])
    assert rows[0][1:] == pytest.approx((0, 0), abs=1e-12)
    assert rows[1][1:] == pytest.approx(CHI_HALF_PI_K10, abs=1e-12)
    assert rows[2][1:] == pytest.approx((1, 1), abs=1e-12)


def test_chi_sweep_k1_zero_is_chi_independent():
    rows = chi_sweep("01", np.linspace(0, math.pi, 5))
    assert all(r[1] == pytest.approx(1, abs=1e-12) for r in rows)


# two-bit machine


@pytest.mark.parametrize("k", sorted(TWO_BIT))
def test_two_bit_deutsch_jozsa(k):
    dist = run_deutsch_jozsa(k)
    answers = {}
    for occ, p in dist.items(1e-12):
        verdict = classify(occ)
        assert verdict.accepted
        answers[verdict.answer] = answers.get(verdict.answer, 0) + p
    assert answers == {TWO_BIT[k].classify(): pytest.approx(1, abs=1e-10)}


@pytest.mark.parametrize("k", KEYS)
def test_compiled_one_bit_oracle_same_outcome(k):
    switch = run_machine(MachineConfig(k=k))
    compiled = run_deutsch_jozsa(k)
    assert np.allclose(switch.probs, compiled.probs, atol=1e-12)


def test_compiled_oracle_rejects_loss():
    with pytest.raises(ValueError):
        run_machine(MachineConfig(k="10", oracle="compiled", gamma=0.1))


# classical operation


def test_classical_vacuum():
    run = run_classical(0.0, cutoff=4)
    for dist in (run.with_S, run.without_S):
        assert dist.entries == {(0, 0, 0, 0): 1.0}
    assert run.tv_distance() == 0


def test_classical_cutoff_too_small():
    from dualrail.fock import FockError

    with pytest.raises(FockError, match="cutoff"):
        run_classical(2.0, cutoff=8)


def test_classical_mean_field_is_phase_shift_blind():
    assert run_classical(1.0, cutoff=16, model="mean_field").tv_distance() < 1e-12


def test_classical_fock_run_normalized():
    run = run_classical(1.0, cutoff=16)
    for dist in run.mode_d():
        assert dist.total() == pytest.approx(1, abs=1e-10)


def test_classical_unknown_model():
    with pytest.raises(ValueError):
        run_classical(1.0, cutoff=16, model="wigner")
