import math

import numpy as np
import pytest

from dualrail.circuit import Checkpoint, Circuit, InitialState, expand, mean_field_amplitudes, run
from dualrail.fock import DensityOp, FockError, FockVector
from dualrail.optics import GateSpec, fredkin


def test_run_records_checkpoints_in_order():
    c = Circuit(2, 2, InitialState.fock(1, 0), (Checkpoint("start"), GateSpec("swap", (0, 1)), Checkpoint("end")))
    result = run(c)
    assert result.checkpoints["start"].amplitude((1, 0)) == 1
    assert result.checkpoints["end"].amplitude((0, 1)) == 1
    assert result.dist.entries == {(0, 1): 1.0}


def test_state_becomes_density_at_first_channel():
    c = Circuit(
        2, 2, InitialState.fock(1, 0),
        (Checkpoint("pure"), GateSpec("damp", (0,), (0.5,)), Checkpoint("mixed"), GateSpec("bs", (0, 1), (math.pi / 4, 0))),
    )
    result = run(c)
    assert isinstance(result.checkpoints["pure"], FockVector)
    assert isinstance(result.checkpoints["mixed"], DensityOp)
    assert result.dist.prob((0, 0)) == pytest.approx(1 - math.exp(-0.5))


def test_expand_replaces_fredkin():
    specs = expand([GateSpec("fredkin", (3, 1, 2), (math.pi,)), GateSpec("swap", (0, 1))])
    assert "fredkin" not in [s.kind for s in specs]
    assert specs[-1].kind == "swap"
    assert all(set(s.modes) <= {1, 2, 3} for s in specs[:-1])


def test_unitary_of_fredkin_circuit():
    c = Circuit(3, 2, InitialState.fock(0, 0, 0), (GateSpec("fredkin", (0, 1, 2), (math.pi,)),))
    assert np.max(np.abs(c.unitary() - fredkin())) < 1e-12


def test_unitary_refuses_channels():
    c = Circuit(1, 2, InitialState.fock(1), (GateSpec("damp", (0,), (0.1,)),))
    with pytest.raises(FockError):
        c.unitary()


def test_circuit_validation():
    with pytest.raises(FockError):
        Circuit(2, 2, InitialState.fock(0, 1, 0))
    with pytest.raises(FockError):
        Circuit(2, 2, InitialState.fock(0, 1), (GateSpec("swap", (1, 2)),))
    with pytest.raises(FockError):
        InitialState((0, 0), ((5, 1.0),)).build(Circuit(2, 4, InitialState.fock(0, 0)).basis)


def test_coherent_initial_state():
    c = Circuit(2, 16, InitialState((0, 0), ((1, 1.0),)))
    marginal = run(c).dist.marginal([1])
    assert marginal.probs[1] == pytest.approx(math.exp(-1), abs=1e-12)


def test_mean_field_beamsplitter_and_loss():
    c = Circuit(
        2, 16, InitialState((0, 0), ((0, 2.0),)),
        (GateSpec("bs", (0, 1), (math.pi / 4, 0.0)), GateSpec("damp", (1,), (math.log(4),))),
    )
    beta = mean_field_amplitudes(c)
    assert abs(beta[0]) == pytest.approx(math.sqrt(2))
    assert abs(beta[1]) == pytest.approx(math.sqrt(2) / 2)


def test_mean_field_kerr_is_intensity_dependent():
    c = Circuit(2, 8, InitialState((0, 0), ((0, 1.0), (1, 2.0))), (GateSpec("kerr", (0, 1), (0.5,)),))
    beta = mean_field_amplitudes(c)
    assert np.angle(beta[0]) == pytest.approx(0.5 * 4)
    assert np.angle(beta[1]) == pytest.approx(0.5 * 1)
