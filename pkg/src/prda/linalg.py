"""Dense linear-algebra kernel: top-k PCA, reconstruction errors, norms."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, check_vector
from .exceptions import DegenerateInput, ShapeError

ORTHONORMALITY_TOL = 1e-8


@dataclass(eq=False)
class Basis:
    """A (optionally centered) k-dimensional basis of R^d.

    Attributes
    ----------
    vectors : ndarray of shape (d, k)
        Basis vectors stored as columns. Orthonormal when produced by
        :func:`pca_top_k`; bases derived through an alignment transform
        need not be.
    mean : ndarray of shape (d,)
        Centering vector subtracted before projecting onto the basis.
    explained_variance : ndarray of shape (k,), optional
        Per-column sample variance captured, in decreasing order.
    rank_deficient : bool
        True when the data had fewer than k nonzero singular values, in
        which case the trailing columns are an arbitrary orthonormal
        completion.
    """

    vectors: np.ndarray
    mean: np.ndarray
    explained_variance: np.ndarray | None = None
    rank_deficient: bool = False

    @property
    def ambient_dim(self):
        return self.vectors.shape[0]

    @property
    def k(self):
        return self.vectors.shape[1]

    def orthonormality_defect(self):
        """Max absolute deviation of vectors.T @ vectors from the identity."""
        gram = self.vectors.T @ self.vectors
        return float(np.max(np.abs(gram - np.eye(self.k))))


def pca_top_k(X, k, center=True):
    """Top-k principal directions of the rows of X, via SVD.

    Parameters
    ----------
    X : array-like of shape (n, d)
        Sample matrix, one row per sample, n >= k.
    k : int
        Number of components, 1 <= k <= d.
    center : bool, default=True
        Subtract the column mean before decomposing. The mean is stored
        on the returned basis and re-used by the projection routines;
        with ``center=False`` a zero mean is stored.

    Returns
    -------
    Basis
        Orthonormal columns ordered by decreasing explained variance,
        each column's largest-magnitude entry flipped non-negative so
        the output is reproducible bit for bit. When the data has rank
        below k the trailing columns are an arbitrary orthonormal
        completion and ``rank_deficient`` is set.
    """
    X = check_matrix(X, "X")
    n, d = X.shape
    if k < 1:
        raise DegenerateInput(f"k must be >= 1, got {k}")
    if k > d:
        raise DegenerateInput(f"k={k} exceeds ambient dimension {d}")
    if n < k:
        raise DegenerateInput(f"need at least k={k} rows, got {n}")

    mean = X.mean(axis=0) if center else np.zeros(d)
    centered = X - mean
    _, spectrum, vt = np.linalg.svd(centered, full_matrices=False)
    vectors = vt[:k].T.copy()

    # sign convention: largest-magnitude entry of every column non-negative
    peak = np.argmax(np.abs(vectors), axis=0)
    flip = vectors[peak, np.arange(k)] < 0
    vectors[:, flip] *= -1.0

    if spectrum[0] > 0:
        cutoff = spectrum[0] * max(n, d) * np.finfo(np.float64).eps
        rank = int(np.sum(spectrum > cutoff))
    else:
        rank = 0

    return Basis(
        vectors=vectors,
        mean=np.asarray(mean, dtype=np.float64),
        explained_variance=(spectrum[:k] ** 2) / max(n - 1, 1),
        rank_deficient=rank < k,
    )


def reconstruction_errors(X, basis, relative=False):
    """Squared reconstruction residual of every row of X against a basis.

    Absolute mode returns ``||xc - xc W W^T||^2`` with ``xc = x - mean``;
    relative mode divides by ``||xc||^2`` and clips into [0, 1], mapping
    zero-norm centered rows to 0 (the mean itself is perfectly explained).
    """
    X = check_matrix(X, "X")
    if X.shape[1] != basis.ambient_dim:
        raise ShapeError(
            f"X has {X.shape[1]} columns, basis lives in R^{basis.ambient_dim}"
        )
    centered = X - basis.mean
    coords = centered @ basis.vectors
    residual = centered - coords @ basis.vectors.T
    err = np.einsum("ij,ij->i", residual, residual)
    if not relative:
        return err
    denom = np.einsum("ij,ij->i", centered, centered)
    out = np.zeros_like(err)
    nz = denom > 0
    out[nz] = err[nz] / denom[nz]
    return np.clip(out, 0.0, 1.0)


def reconstruction_error(x, basis, relative=False):
    """Scalar form of :func:`reconstruction_errors` for one sample."""
    x = check_vector(x, "x")
    return float(reconstruction_errors(x[None, :], basis, relative=relative)[0])


def frobenius_distance(P, Q):
    """Frobenius norm of P - Q; zero iff the matrices are equal."""
    P = check_matrix(P, "P")
    Q = check_matrix(Q, "Q")
    if P.shape != Q.shape:
        raise ShapeError(f"shape mismatch: {P.shape} vs {Q.shape}")
    return float(np.linalg.norm(P - Q))
