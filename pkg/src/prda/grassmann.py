"""Chordal subspace metric, greedy matching, and closed-form alignment."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix
from .exceptions import ShapeError
from .linalg import Basis


def _check_compatible(first, second):
    if first.ambient_dim != second.ambient_dim:
        raise ShapeError(
            f"ambient dimensions differ: {first.ambient_dim} vs "
            f"{second.ambient_dim}"
        )
    if first.k != second.k:
        raise ShapeError(f"subspace dimensions differ: {first.k} vs {second.k}")


def chordal_distance(bs, bu):
    """Chordal distance between the spans of two orthonormal bases.

    Computed as ``sqrt(k - ||Bs^T Bu||_F^2)``. The radicand is floored
    at zero, and a radicand within k * 1e-12 of zero collapses to an
    exact zero: near-coincident spans accumulate roundoff that the
    square root would otherwise amplify asymmetrically. The value lies
    in [0, sqrt(k)] and depends only on the spans, not on the
    particular bases.
    """
    _check_compatible(bs, bu)
    overlap = float(np.sum((bs.vectors.T @ bu.vectors) ** 2))
    radicand = float(bs.k) - overlap
    if radicand <= bs.k * 1e-12:
        return 0.0
    return float(np.sqrt(radicand))


def compute_alignment(bs, bu, reorthonormalize=False):
    """Closed-form transform taking `bs` as close as possible to `bu`.

    Returns
    -------
    transform : ndarray of shape (k, k)
        ``Bs^T Bu``, the least-squares minimizer of ``||Bs A - Bu||_F``
        over all k-by-k matrices A.
    target_aligned : Basis
        ``Bs @ transform``, inheriting the centering vector of `bs`.
        Its columns are not orthonormal in general since the transform
        need not be orthogonal; pass ``reorthonormalize=True`` to
        replace them with their QR orthonormalization.
    """
    _check_compatible(bs, bu)
    transform = bs.vectors.T @ bu.vectors
    vectors = bs.vectors @ transform
    if reorthonormalize:
        q, r = np.linalg.qr(vectors)
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        vectors = q * signs
    return transform, Basis(vectors=vectors, mean=bs.mean.copy())


@dataclass(eq=False)
class AlignedPair:
    """A matched (source, target) subspace pair with its alignment."""

    source_idx: int
    target_idx: int
    transform: np.ndarray
    target_aligned: Basis
    distance: float


@dataclass(eq=False)
class Matching:
    pairs: list
    unmatched_source: tuple
    unmatched_target: tuple


def match_subspaces(source_collection, target_collection, reorthonormalize=False):
    """Greedy minimum-distance pairing of two subspace collections.

    Repeatedly selects the globally closest (source, target) pair among
    the still-unmatched subspaces and removes both, until one side is
    exhausted; ties break on the lowest source index, then the lowest
    target index. Each pair carries its alignment transform and
    target-aligned basis, so selected distances are non-decreasing.
    """
    if len(source_collection) == 0 or len(target_collection) == 0:
        raise ShapeError("both collections must be non-empty")
    if source_collection.k != target_collection.k:
        raise ShapeError(
            f"subspace dimensions differ: {source_collection.k} vs "
            f"{target_collection.k}"
        )

    n_src = len(source_collection)
    n_tgt = len(target_collection)
    dist = np.empty((n_src, n_tgt))
    for i, bs in enumerate(source_collection.subspaces):
        for j, bu in enumerate(target_collection.subspaces):
            dist[i, j] = chordal_distance(bs, bu)

    remaining = dist.copy()
    pairs = []
    for _ in range(min(n_src, n_tgt)):
        # row-major argmin: ties resolve to the lowest source index,
        # then the lowest target index
        i, j = np.unravel_index(np.argmin(remaining), remaining.shape)
        transform, aligned = compute_alignment(
            source_collection.subspaces[i],
            target_collection.subspaces[j],
            reorthonormalize=reorthonormalize,
        )
        pairs.append(
            AlignedPair(
                source_idx=int(i),
                target_idx=int(j),
                transform=transform,
                target_aligned=aligned,
                distance=float(dist[i, j]),
            )
        )
        remaining[i, :] = np.inf
        remaining[:, j] = np.inf

    matched_src = {p.source_idx for p in pairs}
    matched_tgt = {p.target_idx for p in pairs}
    return Matching(
        pairs=pairs,
        unmatched_source=tuple(i for i in range(n_src) if i not in matched_src),
        unmatched_target=tuple(j for j in range(n_tgt) if j not in matched_tgt),
    )


def project(X, basis):
    """Project rows of X onto a basis after subtracting its mean."""
    X = check_matrix(X, "X")
    if X.shape[1] != basis.ambient_dim:
        raise ShapeError(
            f"X has {X.shape[1]} columns, basis lives in R^{basis.ambient_dim}"
        )
    return (X - basis.mean) @ basis.vectors
