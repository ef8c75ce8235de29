import numpy as np
import pytest

from prda.subspaces import SubspaceCollection


def random_orthonormal(rng, d, k):
    """Random d-by-k matrix with orthonormal columns."""
    q, r = np.linalg.qr(rng.normal(size=(d, k)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def random_basis(rng, d, k):
    """Random orthonormal Basis with zero mean."""
    from prda import Basis

    return Basis(vectors=random_orthonormal(rng, d, k), mean=np.zeros(d))


def collection_from_bases(bases):
    """Minimal SubspaceCollection wrapper for matching tests."""
    n = len(bases)
    return SubspaceCollection(
        subspaces=list(bases),
        assignment=np.arange(n, dtype=np.int64),
        residuals=np.zeros(n),
        tau=1.0,
        k=bases[0].k,
    )


def two_ring_planes(seed, n=100, d=10, scale_b=0.8):
    """Two orthogonal 2-D planes sampled on rings away from the origin."""
    rng = np.random.default_rng(seed)

    def ring(count):
        radius = rng.uniform(0.6, 2.0, size=count)
        angle = rng.uniform(0, 2 * np.pi, size=count)
        return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])

    first = np.zeros((n, d))
    first[:, :2] = ring(n)
    second = np.zeros((n, d))
    second[:, 2:4] = scale_b * ring(n)
    labels = np.array([0] * n + [1] * n)
    return np.vstack([first, second]), labels


def gaussian_blobs(seed, n_per=100, d=2, gap=4.0):
    """Two well-separated Gaussian blobs with labels 0/1."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_per, d)) - gap / 2
    b = rng.normal(size=(n_per, d)) + gap / 2
    return np.vstack([a, b]), np.array([0] * n_per + [1] * n_per)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
