"""Pre- and post-selected ensembles: ABL probabilities and weak values.

A :class:`TwoStateVector` holds the state fixed by a complete measurement at
``t1`` (``pre``) and the one fixed at ``t2`` (``post``). Between the two there
is no evolution.

For an intermediate measurement of ``C`` with eigenspace projectors ``P_j``
the ABL probabilities are::

    p_j = |<post|P_j|pre>|**2 / sum_k |<post|P_k|pre>|**2

and the weak value of an operator ``A`` is ``<post|A|pre> / <post|pre>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    NoPostSelectedShots,
    OrthogonalSelections,
    VanishingPostSelection,
)
from .qcore import (
    DEFAULT_MERGE_TOL,
    Projector,
    StateVector,
    as_operator,
    as_state,
    embed,
    spectral,
)

VANISHING_TOL = 1e-20
CERTAINTY_TOL = 1e-10


@dataclass(frozen=True)
class TwoStateVector:
    pre: StateVector
    post: StateVector

    def __post_init__(self):
        pre, post = as_state(self.pre), as_state(self.post)
        if pre.dim != post.dim:
            raise DimensionMismatchError(f"pre has dim {pre.dim}, post has dim {post.dim}")
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "post", post)

    @property
    def dim(self) -> int:
        return self.pre.dim

    def overlap(self) -> complex:
        """``<post|pre>``."""
        return complex(np.vdot(self.post.amps, self.pre.amps))

    def reversed(self) -> "TwoStateVector":
        """The time-reversed pair (pre and post exchanged)."""
        return TwoStateVector(self.post, self.pre)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities over distinct eigenvalues, in increasing eigenvalue order.

    ``samples`` is the number of post-selected shots behind an empirical
    distribution, and None for exact ones.
    """

    pairs: tuple
    samples: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        pairs = tuple((float(v), float(p)) for v, p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        vals = [v for v, _ in pairs]
        if len(set(vals)) != len(vals):
            raise ValueError("eigenvalues in a distribution must be distinct")
        if any(p < 0.0 or p > 1.0 + 1e-12 for _, p in pairs):
            raise ValueError("probabilities must lie in [0, 1]")
        total = sum(p for _, p in pairs)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([v for v, _ in self.pairs])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.pairs])

    def prob(self, value, tol=DEFAULT_MERGE_TOL) -> float:
        """Probability of the eigenvalue within ``tol`` of ``value``."""
        for v, p in self.pairs:
            if abs(v - value) <= tol:
                return p
        raise KeyError(f"{value!r} is not an outcome of this distribution")

    def as_dict(self) -> dict:
        return dict(self.pairs)


def _amplitudes(tsv, decomposition):
    pre, post = tsv.pre.amps, tsv.post.amps
    return np.array([np.vdot(post, p.matrix @ pre) for p in decomposition.projectors])


def abl(tsv: TwoStateVector, observable, tol=DEFAULT_MERGE_TOL) -> OutcomeDistribution:
    """ABL distribution for a measurement of ``observable`` between the selections.

    Parameters
    ----------
    tsv : TwoStateVector
        Pre-selection and post-selection.
    observable : HermitianOperator
        Measured at the intermediate time. Degenerate eigenvalues are merged
        into a single outcome (Lüders projector).
    tol : float
        Degeneracy merge tolerance passed to :func:`~tsvf_lab.qcore.spectral`.

    Raises
    ------
    VanishingPostSelection
        If the post-selection has zero probability given that the
        measurement is performed.
    """
    observable = as_operator(observable)
    if observable.dim != tsv.dim:
        raise DimensionMismatchError(f"observable dim {observable.dim} != state dim {tsv.dim}")
    dec = spectral(observable, tol)
    weights = np.abs(_amplitudes(tsv, dec)) ** 2
    total = float(np.sum(weights))
    if total < VANISHING_TOL:
        raise VanishingPostSelection(
            f"post-selection probability {total:.3g} vanishes for this measurement"
        )
    return OutcomeDistribution(tuple(zip(dec.eigenvalues, weights / total)))


def element_of_reality(tsv: TwoStateVector, observable, tol=CERTAINTY_TOL) -> Optional[float]:
    """Eigenvalue that a measurement of ``observable`` would yield with certainty.

    Returns None when no outcome has ABL probability of at least ``1 - tol``.
    """
    dist = abl(tsv, observable)
    for value, p in dist.pairs:
        if p >= 1.0 - tol:
            return value
    return None


def weak_value(tsv: TwoStateVector, op) -> complex:
    """Complex weak value ``<post|op|pre> / <post|pre>``."""
    op = as_operator(op)
    if op.dim != tsv.dim:
        raise DimensionMismatchError(f"operator dim {op.dim} != state dim {tsv.dim}")
    overlap = tsv.overlap()
    if abs(overlap) < VANISHING_TOL:
        raise OrthogonalSelections("pre- and post-selected states are orthogonal")
    return complex(np.vdot(tsv.post.amps, op.matrix @ tsv.pre.amps) / overlap)


def weak_value_local(tsv: TwoStateVector, op, factor_index: int, factor_dims: Sequence[int]) -> complex:
    """Weak value of ``op`` acting on one factor of a composite system."""
    if int(np.prod(factor_dims)) != tsv.dim:
        raise DimensionMismatchError(
            f"factor dims {list(factor_dims)} do not multiply to state dim {tsv.dim}"
        )
    return weak_value(tsv, embed(op, factor_index, factor_dims))


def sequential_oracle(pre, observable, post_projector, shots: int, seed: int = 0,
                      tol=DEFAULT_MERGE_TOL) -> OutcomeDistribution:
    """Monte Carlo estimate of the intermediate-outcome statistics.

    Each shot measures ``observable`` on ``pre`` by the Born rule, collapses
    onto the normalized projection of the outcome's eigenspace, then performs
    the final measurement and keeps the shot only if it lands in
    ``post_projector``. Returned frequencies are over the kept shots.

    This never evaluates the ABL formula, so it serves as an independent
    check of :func:`abl`.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    pre = as_state(pre)
    observable = as_operator(observable)
    if not isinstance(post_projector, Projector):
        post_projector = Projector(post_projector)
    if not (pre.dim == observable.dim == post_projector.dim):
        raise DimensionMismatchError("pre, observable and post_projector dims differ")
    rng = np.random.default_rng(seed)
    dec = spectral(observable, tol)

    branch_probs = []
    keep_probs = []
    for proj in dec.projectors:
        branch = proj.matrix @ pre.amps
        weight = float(np.real(np.vdot(branch, branch)))
        branch_probs.append(weight)
        if weight > 0.0:
            collapsed = branch / np.sqrt(weight)
            keep = float(np.real(np.vdot(collapsed, post_projector.matrix @ collapsed)))
        else:
            keep = 0.0
        keep_probs.append(min(max(keep, 0.0), 1.0))
    branch_probs = np.array(branch_probs)
    branch_probs /= branch_probs.sum()
    keep_probs = np.array(keep_probs)

    outcomes = rng.choice(len(branch_probs), size=shots, p=branch_probs)
    kept = rng.random(shots) < keep_probs[outcomes]
    counts = np.bincount(outcomes[kept], minlength=len(branch_probs))
    n_kept = int(counts.sum())
    if n_kept == 0:
        raise NoPostSelectedShots(f"none of {shots} shots passed the post-selection")
    return OutcomeDistribution(tuple(zip(dec.eigenvalues, counts / n_kept)), samples=n_kept)


def oracle_for(tsv: TwoStateVector, observable, shots: int, seed: int = 0) -> OutcomeDistribution:
    """:func:`sequential_oracle` with the post-selection ``|post><post|`` of ``tsv``."""
    return sequential_oracle(tsv.pre, observable, tsv.post.projector(), shots, seed)
