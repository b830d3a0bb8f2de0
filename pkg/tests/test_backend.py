import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualrail import BACKEND
from dualrail._backend import backends

BACKENDS = backends()


def reference_dense(psi, d, m, op, targets):
    from dualrail.fock import FockBasis, embed_operator

    return embed_operator(op, targets, FockBasis(m, d)) @ psi


def random_case(seed, diag=False):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    m = int(rng.integers(1, 5))
    k = int(rng.integers(1, m + 1))
    targets = tuple(int(t) for t in rng.permutation(m)[:k])
    psi = rng.normal(size=d**m) + 1j * rng.normal(size=d**m)
    if diag:
        op = np.exp(1j * rng.normal(size=d**k))
    else:
        op = rng.normal(size=(d**k, d**k)) + 1j * rng.normal(size=(d**k, d**k))
    return psi, d, m, op, targets


def test_backend_is_known():
    assert BACKEND in BACKENDS
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_dense_kernel_matches_embedding(name, seed):
    psi, d, m, op, targets = random_case(seed)
    got = BACKENDS[name][0](psi, d, m, op, targets)
    assert np.max(np.abs(got - reference_dense(psi, d, m, op, targets))) < 1e-10


@pytest.mark.parametrize("name", sorted(BACKENDS))
@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_diag_kernel_matches_dense(name, seed):
    psi, d, m, diag, targets = random_case(seed, diag=True)
    got = BACKENDS[name][1](psi, d, m, diag, targets)
    want = reference_dense(psi, d, m, np.diag(diag), targets)
    assert np.max(np.abs(got - want)) < 1e-12


def test_kernels_leave_input_untouched():
    for dense, diag in BACKENDS.values():
        psi, d, m, op, targets = random_case(5)
        before = psi.copy()
        dense(psi, d, m, op, targets)
        diag(psi, d, m, np.ones(d ** len(targets)), targets)
        assert np.array_equal(psi, before)


@pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled extension not built")
def test_compiled_and_python_agree_on_machine():
    code = (
        "from dualrail.machine import MachineConfig, run_machine;"
        "import dualrail, sys;"
        "d = run_machine(MachineConfig(k='10', gamma=0.7));"
        "print(dualrail.BACKEND, *map(repr, d.probs.tolist()))"
    )
    outs = {}
    for choice in ("python", "compiled"):
        env = dict(os.environ, DUALRAIL_BACKEND=choice)
        proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        name, *probs = proc.stdout.split()
        assert name == choice
        outs[choice] = np.array([float(p) for p in probs])
    assert np.max(np.abs(outs["python"] - outs["compiled"])) < 1e-14
