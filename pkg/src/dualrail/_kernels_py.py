"""Pure-numpy implementations of the local-operator kernels.

Both kernels act on a flat complex state of ``d**m`` amplitudes laid out
big-endian over ``m`` modes of uniform cutoff ``d``.  A density matrix is
passed as its row-major flattening, i.e. as a state over ``2m`` modes.
"""

import numpy as np


def apply_dense(psi, d, m, op, targets):
    """Apply the ``d**k x d**k`` matrix ``op`` to modes ``targets`` of ``psi``."""
    k = len(targets)
    t = np.asarray(psi, dtype=np.complex128).reshape((d,) * m)
    t = np.moveaxis(t, targets, range(k))
    shape = t.shape
    out = np.asarray(op, dtype=np.complex128) @ t.reshape(d**k, -1)
    out = np.moveaxis(out.reshape(shape), range(k), targets)
    return np.ascontiguousarray(out).reshape(-1)


def apply_diag(psi, d, m, diag, targets):
    """Multiply ``psi`` by a diagonal local operator given as its diagonal."""
    k = len(targets)
    shape = [1] * m
    for t in targets:
        shape[t] = d
    # diag is indexed big-endian in the listed target order
    factor = np.asarray(diag, dtype=np.complex128).reshape((d,) * k)
    order = np.argsort(targets)
    factor = np.transpose(factor, order).reshape(shape)
    out = np.asarray(psi, dtype=np.complex128).reshape((d,) * m) * factor
    return out.reshape(-1)
