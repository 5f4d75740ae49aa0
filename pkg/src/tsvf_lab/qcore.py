"""Small dense complex linear algebra: states, Hermitian operators, spectra.

Everything here works at desk scale (dimension <= 64). Values are immutable
once built: the underlying numpy arrays are flagged read-only, so states and
operators can be shared freely between threads.

Basis ordering for tensor products is lexicographic with the leftmost factor
most significant, which is what :func:`numpy.kron` produces.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotHermitianError,
    SpectralConvergenceError,
)

MAX_DIM = 64
HERMITIAN_TOL = 1e-12
PROJECTOR_TOL = 1e-10
NORM_TOL = 1e-12
DEFAULT_MERGE_TOL = 1e-8


def _frozen(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


class StateVector:
    """Normalized pure state over a finite basis.

    Parameters
    ----------
    amps : array_like
        Complex amplitudes. They are rescaled to unit norm unless
        ``normalize=False``, in which case the norm is checked instead.
    """

    __slots__ = ("_amps",)

    def __init__(self, amps, normalize=True):
        arr = np.asarray(amps, dtype=complex).reshape(-1)
        if arr.size == 0:
            raise ValueError("state must have at least one amplitude")
        if not np.all(np.isfinite(arr)):
            raise ValueError("state amplitudes must be finite")
        norm = np.linalg.norm(arr)
        if normalize:
            if norm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            arr = arr / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        self._amps = _frozen(arr)

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    @property
    def dim(self) -> int:
        return self._amps.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._amps, dtype=dtype)

    def __repr__(self):
        return f"StateVector({np.array2string(self._amps, precision=6)})"

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self._amps, other._amps)

    def __hash__(self):
        return hash(self._amps.tobytes())

    def projector(self) -> "Projector":
        """Rank-one projector ``|self><self|``."""
        return Projector(np.outer(self._amps, self._amps.conj()))

    def allclose(self, other, atol=1e-12, up_to_phase=False) -> bool:
        a, b = self._amps, as_state(other).amps
        if a.shape != b.shape:
            return False
        if up_to_phase:
            overlap = np.vdot(b, a)
            if abs(overlap) > 0:
                b = b * (overlap / abs(overlap))
        return bool(np.allclose(a, b, rtol=0.0, atol=atol))


class HermitianOperator:
    """Observable represented by a dense Hermitian matrix.

    The matrix is symmetrized after the Hermiticity check so that later
    spectral work sees an exactly Hermitian input.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix, atol=HERMITIAN_TOL):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"operator must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > atol:
            raise NotHermitianError(f"operator is not Hermitian (max deviation {dev:.3g})")
        self._matrix = _frozen(0.5 * (m + m.conj().T))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._matrix, dtype=dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"

    def __eq__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self._matrix, other._matrix)

    def __hash__(self):
        return hash(self._matrix.tobytes())

    def __add__(self, other):
        other = as_operator(other)
        _check_dims(self.dim, other.dim)
        return HermitianOperator(self._matrix + other.matrix)

    def __sub__(self, other):
        other = as_operator(other)
        _check_dims(self.dim, other.dim)
        return HermitianOperator(self._matrix - other.matrix)

    def __neg__(self):
        return HermitianOperator(-self._matrix)

    def __mul__(self, scalar):
        if not np.isrealobj(scalar) or np.ndim(scalar) != 0:
            return NotImplemented
        return HermitianOperator(float(scalar) * self._matrix)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def apply(self, state) -> np.ndarray:
        """Unnormalized vector ``A|state>``."""
        state = as_state(state)
        _check_dims(self.dim, state.dim)
        return self._matrix @ state.amps

    def expectation(self, state) -> float:
        state = as_state(state)
        return float(np.real(np.vdot(state.amps, self.apply(state))))

    def spectral(self, tol=DEFAULT_MERGE_TOL) -> "SpectralDecomposition":
        return spectral(self, tol)


class Projector(HermitianOperator):
    """Hermitian idempotent operator."""

    __slots__ = ()

    def __init__(self, matrix, atol=PROJECTOR_TOL):
        super().__init__(matrix, atol=max(atol, HERMITIAN_TOL))
        m = self.matrix
        dev = np.max(np.abs(m @ m - m))
        if dev > atol:
            raise ValueError(f"operator is not idempotent (max deviation {dev:.3g})")

    @property
    def rank(self) -> int:
        return int(round(float(np.real(np.trace(self.matrix)))))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (strictly increasing) paired with their eigenspace projectors."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((float(v), p) for v, p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ValueError("spectral decomposition needs at least one eigenvalue")
        vals = [v for v, _ in pairs]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("eigenvalues must be strictly increasing")
        total = sum(p.matrix for _, p in pairs)
        dev = np.max(np.abs(total - np.eye(self.dim)))
        if dev > PROJECTOR_TOL:
            raise ValueError(f"projectors do not resolve the identity (deviation {dev:.3g})")

    @property
    def dim(self) -> int:
        return self.pairs[0][1].dim

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([v for v, _ in self.pairs])

    @property
    def projectors(self) -> list:
        return [p for _, p in self.pairs]

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def reconstruct(self) -> np.ndarray:
        return sum(v * p.matrix for v, p in self.pairs)

    def index_of(self, value, tol=DEFAULT_MERGE_TOL):
        """Index of the eigenvalue within ``tol`` of ``value``, or None."""
        for i, (v, _) in enumerate(self.pairs):
            if abs(v - value) <= tol:
                return i
        return None

    def projector_for(self, value, tol=DEFAULT_MERGE_TOL) -> Projector:
        i = self.index_of(value, tol)
        if i is None:
            raise KeyError(f"{value!r} is not an eigenvalue (eigenvalues: {self.eigenvalues.tolist()})")
        return self.pairs[i][1]


def _check_dims(a, b):
    if a != b:
        raise DimensionMismatchError(f"dimension mismatch: {a} vs {b}")


def as_state(x) -> StateVector:
    """Coerce an array-like to :class:`StateVector` (normalizing it)."""
    if isinstance(x, StateVector):
        return x
    return StateVector(x)


def as_operator(x) -> HermitianOperator:
    if isinstance(x, HermitianOperator):
        return x
    return HermitianOperator(x)


def basis_state(dim, index) -> StateVector:
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, normalize=False)


def identity(dim) -> Projector:
    return Projector(np.eye(dim))


def tensor(a, b):
    """Kronecker product of two states or two operators.

    Projector inputs give a :class:`Projector`; mixing a state with an
    operator is an error.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amps, b.amps))
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        m = np.kron(a.matrix, b.matrix)
        if isinstance(a, Projector) and isinstance(b, Projector):
            return Projector(m)
        return HermitianOperator(m)
    raise TypeError(
        f"tensor needs two states or two operators, got {type(a).__name__} and {type(b).__name__}"
    )


def tensor_all(*factors):
    if not factors:
        raise ValueError("tensor_all needs at least one factor")
    return reduce(tensor, factors)


def embed(op, factor_index: int, factor_dims: Sequence[int]) -> HermitianOperator:
    """Lift ``op`` acting on one tensor factor to the full composite space."""
    op = as_operator(op)
    factor_dims = [int(d) for d in factor_dims]
    if not 0 <= factor_index < len(factor_dims):
        raise IndexError(f"factor_index {factor_index} out of range for {len(factor_dims)} factors")
    _check_dims(op.dim, factor_dims[factor_index])
    parts = [op if i == factor_index else identity(d) for i, d in enumerate(factor_dims)]
    return tensor_all(*parts)


def inner(a, b) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    a, b = as_state(a), as_state(b)
    _check_dims(a.dim, b.dim)
    return complex(np.vdot(a.amps, b.amps))


def spectral(op, tol=DEFAULT_MERGE_TOL) -> SpectralDecomposition:
    """Eigen-decomposition with degenerate eigenvalues merged.

    Sorted eigenvalues closer than ``tol`` to their neighbour are grouped into
    one eigenspace; the group's eigenvalue is the mean of its members.

    Raises
    ------
    NotHermitianError
        If ``op`` is not Hermitian.
    SpectralConvergenceError
        If the eigensolver fails or the reconstruction residual exceeds 1e-10.
    """
    op = as_operator(op)
    if op.dim > MAX_DIM:
        raise ValueError(f"dimension {op.dim} exceeds the supported maximum {MAX_DIM}")
    m = op.matrix
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise SpectralConvergenceError(f"eigensolver did not converge: {exc}") from exc

    groups = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])

    pairs = []
    for g in groups:
        v = vecs[:, g]
        pairs.append((float(np.mean(vals[g])), Projector(v @ v.conj().T)))

    recon = sum(val * p.matrix for val, p in pairs)
    residual = float(np.max(np.abs(recon - m)))
    # merging within tol perturbs the reconstruction by up to tol
    if residual > max(PROJECTOR_TOL, tol):
        raise SpectralConvergenceError(
            f"spectral reconstruction residual {residual:.3g} too large", residual=residual
        )
    return SpectralDecomposition(tuple(pairs))


def eigenstate(op, value, tol=DEFAULT_MERGE_TOL) -> StateVector:
    """Normalized eigenvector for a non-degenerate eigenvalue ``value``.

    The phase is fixed so that the largest-magnitude amplitude is real and
    positive, which makes the result reproducible.
    """
    proj = spectral(op, tol).projector_for(value, tol)
    if proj.rank != 1:
        raise ValueError(f"eigenvalue {value!r} is {proj.rank}-fold degenerate")
    m = proj.matrix
    col = m[:, int(np.argmax(np.real(np.diag(m))))]
    k = int(np.argmax(np.abs(col)))
    col = col * (abs(col[k]) / col[k])
    return StateVector(col)


# Spin-1/2 components in units of hbar (eigenvalues +-1/2).
SX = HermitianOperator([[0, 0.5], [0.5, 0]])
SY = HermitianOperator([[0, -0.5j], [0.5j, 0]])
SZ = HermitianOperator([[0.5, 0], [0, -0.5]])
S_XI = (SX + SY + SZ) / np.sqrt(3.0)


def random_state(dim, rng) -> StateVector:
    """Haar-random pure state drawn from the numpy Generator ``rng``."""
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(z)


def random_hermitian(dim, rng, scale=1.0) -> HermitianOperator:
    """GUE-style random Hermitian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator(scale * 0.5 * (z + z.conj().T))
