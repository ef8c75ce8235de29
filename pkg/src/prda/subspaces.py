"""Residual-driven generation of multiple PCA subspaces for one domain."""

import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix
from .exceptions import ConfigError, DegenerateInput
from .linalg import pca_top_k, reconstruction_errors


@dataclass(eq=False)
class SubspaceCollection:
    """Ordered subspaces for one domain plus the sample-to-subspace map.

    Attributes
    ----------
    subspaces : list of Basis
    assignment : ndarray of shape (n,)
        Index of the subspace owning each input sample; every sample is
        owned by exactly one subspace.
    residuals : ndarray of shape (n,)
        Relative reconstruction error of each sample under its own
        subspace.
    tau : float
        Relative-error threshold the collection was built with.
    k : int
        Dimension shared by all subspaces.
    refit_skipped : tuple of int
        Subspaces whose post-threshold refit was skipped because fewer
        than k samples were retained.
    """

    subspaces: list
    assignment: np.ndarray
    residuals: np.ndarray
    tau: float
    k: int
    refit_skipped: tuple = ()

    def __len__(self):
        return len(self.subspaces)

    def members(self, idx):
        """Indices of the samples owned by subspace `idx`."""
        return np.flatnonzero(self.assignment == idx)


@dataclass(frozen=True)
class CollectionStats:
    count: int
    sizes: tuple
    mean_residuals: tuple


def generate_subspaces(X, k, tau):
    """Split X into k-dimensional subspaces by iterating on residuals.

    Fits a top-k basis on the working set, marks every sample whose
    relative reconstruction error exceeds ``tau``, refits the basis on
    the samples it keeps, then repeats on the marked samples until fewer
    than k of them remain. The leftover tail is attached to whichever
    existing subspace reconstructs each sample best.

    Parameters
    ----------
    X : array-like of shape (n, d)
        Sample matrix with n >= k.
    k : int
        Subspace dimension.
    tau : float in (0, 1]
        Relative-error threshold; at 1.0 no sample can exceed it and the
        result is a single subspace.

    Returns
    -------
    SubspaceCollection
    """
    X = check_matrix(X, "X")
    n = X.shape[0]
    if not 0.0 < tau <= 1.0:
        raise ConfigError(f"tau must be in (0, 1], got {tau}")
    if n < k:
        raise DegenerateInput(f"need at least k={k} samples, got {n}")

    subspaces = []
    refit_skipped = []
    assignment = np.full(n, -1, dtype=np.int64)
    residuals = np.zeros(n)
    working = np.arange(n)
    passes = 0
    while working.size >= k:
        passes += 1
        if passes > n:  # each pass retains at least one sample
            raise AssertionError("subspace generation failed to terminate")
        basis = pca_top_k(X[working], k)
        errors = reconstruction_errors(X[working], basis, relative=True)
        exceed = errors > tau
        if exceed.all():
            # guarantee progress: keep the best-explained sample even
            # though it breaches tau
            exceed[np.argmin(errors)] = False
            warnings.warn(
                f"all {working.size} samples exceeded tau={tau:g}; "
                "retaining the best-explained one to make progress",
                RuntimeWarning,
            )
        retained = working[~exceed]
        if retained.size >= k:
            basis = pca_top_k(X[retained], k)  # refit without the outliers
        else:
            refit_skipped.append(len(subspaces))
        assignment[retained] = len(subspaces)
        residuals[retained] = reconstruction_errors(
            X[retained], basis, relative=True
        )
        subspaces.append(basis)
        working = working[exceed]

    if working.size:
        # tail smaller than k: attach to the subspace that explains it best
        tail = np.column_stack(
            [reconstruction_errors(X[working], b, relative=True) for b in subspaces]
        )
        best = np.argmin(tail, axis=1)
        assignment[working] = best
        residuals[working] = tail[np.arange(working.size), best]

    return SubspaceCollection(
        subspaces=subspaces,
        assignment=assignment,
        residuals=residuals,
        tau=float(tau),
        k=int(k),
        refit_skipped=tuple(refit_skipped),
    )


def collection_stats(collection):
    """Subspace count, member counts, and mean relative residuals."""
    sizes = []
    means = []
    for idx in range(len(collection)):
        members = collection.members(idx)
        sizes.append(int(members.size))
        means.append(
            float(collection.residuals[members].mean()) if members.size else 0.0
        )
    return CollectionStats(
        count=len(collection), sizes=tuple(sizes), mean_residuals=tuple(means)
    )
