"""Random problem generators shared by the test modules."""
import numpy as np

from tsvf_lab.qcore import HermitianOperator, StateVector, random_hermitian, random_state
from tsvf_lab.tsvf import TwoStateVector


def random_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def degenerate_observable(dim, n_values, rng):
    """Observable with ``n_values`` well separated eigenvalues of random multiplicity."""
    cuts = np.sort(rng.choice(np.arange(1, dim), size=n_values - 1, replace=False))
    sizes = np.diff(np.concatenate([[0], cuts, [dim]]))
    values = np.cumsum(rng.uniform(0.5, 2.0, size=n_values)) - rng.uniform(0, 3)
    diag = np.repeat(values, sizes)
    u = random_unitary(dim, rng)
    return HermitianOperator(u @ np.diag(diag) @ u.conj().T), values


def certain_instance(rng):
    """Pre/post-selection for which some outcome of the observable is certain.

    The post-selected state is drawn orthogonal to every branch P_k|pre> other
    than the chosen one. Returns (tsv, observable, certain_value).
    """
    dim = int(rng.integers(3, 7))
    n_values = int(rng.integers(2, min(3, dim - 1) + 1))
    op, values = degenerate_observable(dim, n_values, rng)
    pre = random_state(dim, rng)
    target = int(rng.integers(n_values))
    u_vals, u_vecs = np.linalg.eigh(op.matrix)
    branches = []
    for k, v in enumerate(values):
        if k == target:
            continue
        cols = u_vecs[:, np.abs(u_vals - v) < 1e-6]
        branches.append(cols @ (cols.conj().T @ pre.amps))
    q, _ = np.linalg.qr(np.array(branches).T)
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    post = StateVector(z - q @ (q.conj().T @ z))
    return TwoStateVector(pre, post), op, float(values[target])


def random_instance(dim, rng):
    return TwoStateVector(random_state(dim, rng), random_state(dim, rng)), random_hermitian(dim, rng)
