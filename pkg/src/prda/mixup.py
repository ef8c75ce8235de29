"""Convex sample interpolation and virtual intermediate domains."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, check_vector
from .exceptions import ConfigError, DegenerateInput, ShapeError

DEFAULT_LAMBDA_SCHEDULE = (0.8, 0.6, 0.4, 0.2)


def check_lambda_schedule(values):
    """Validate a strictly decreasing interpolation schedule in (0, 1)."""
    schedule = tuple(float(v) for v in values)
    if not schedule:
        raise ConfigError("lambda schedule must be non-empty")
    for v in schedule:
        if not 0.0 < v < 1.0:
            raise ConfigError(f"schedule values must lie in (0, 1), got {v}")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigError(f"schedule must be strictly decreasing, got {schedule}")
    return schedule


@dataclass(eq=False)
class VirtualDomain:
    """Interpolated samples plus the provenance of every row.

    Row ``i`` equals ``lam * source[source_indices[i]] +
    (1 - lam) * target[target_indices[i]]`` exactly.
    """

    samples: np.ndarray
    lam: float
    source_indices: np.ndarray
    target_indices: np.ndarray

    def __len__(self):
        return self.samples.shape[0]


def mixup_pair(x1, x2, lam, y1=None, y2=None):
    """Interpolate two samples and, optionally, their label distributions.

    Returns ``lam * x1 + (1 - lam) * x2`` together with the same convex
    combination of the labels when both are given, otherwise None.
    """
    x1 = check_vector(x1, "x1")
    x2 = check_vector(x2, "x2")
    if x1.shape != x2.shape:
        raise ShapeError(f"sample lengths differ: {x1.shape[0]} vs {x2.shape[0]}")
    if not 0.0 <= lam <= 1.0:
        raise ConfigError(f"lam must be in [0, 1], got {lam}")
    mixed = lam * x1 + (1.0 - lam) * x2
    if y1 is None or y2 is None:
        return mixed, None
    y1 = check_vector(y1, "y1")
    y2 = check_vector(y2, "y2")
    if y1.shape != y2.shape:
        raise ShapeError(f"label lengths differ: {y1.shape[0]} vs {y2.shape[0]}")
    return mixed, lam * y1 + (1.0 - lam) * y2


def generate_virtual_domain(source, target, lam, batch, seed, pairing="zip"):
    """Build an unlabeled virtual domain between two sample sets.

    Draws ``batch`` rows from each domain, uniformly without replacement
    (with replacement when the domain holds fewer than ``batch`` rows),
    pairs the two draws positionally, and interpolates each pair with
    weight ``lam`` on the source row. With ``pairing="cross"`` every
    drawn source row is instead combined with every drawn target row.

    Parameters
    ----------
    source, target : array-like of shape (n, d)
        Non-empty sample sets sharing the feature dimension.
    lam : float in (0, 1)
        Interpolation weight on the source rows.
    batch : int >= 1
        Number of rows drawn per domain.
    seed : int or numpy Generator
        Randomness for the draws; a fixed seed reproduces the domain
        bit for bit.
    pairing : {"zip", "cross"}

    Returns
    -------
    VirtualDomain
    """
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if source.ndim != 2 or target.ndim != 2:
        raise ShapeError("source and target must be 2-dimensional")
    if source.shape[0] == 0 or target.shape[0] == 0:
        raise DegenerateInput("source and target must both be non-empty")
    source = check_matrix(source, "source")
    target = check_matrix(target, "target")
    if source.shape[1] != target.shape[1]:
        raise ShapeError(
            f"feature dimensions differ: {source.shape[1]} vs {target.shape[1]}"
        )
    if not 0.0 < lam < 1.0:
        raise ConfigError(f"lam must be in (0, 1), got {lam}")
    if batch < 1:
        raise ConfigError(f"batch must be >= 1, got {batch}")
    if pairing not in ("zip", "cross"):
        raise ConfigError(f"pairing must be 'zip' or 'cross', got {pairing!r}")

    rng = np.random.default_rng(seed)
    src_idx = rng.choice(source.shape[0], size=batch, replace=batch > source.shape[0])
    tgt_idx = rng.choice(target.shape[0], size=batch, replace=batch > target.shape[0])
    if pairing == "cross":
        src_idx = np.repeat(src_idx, batch)
        tgt_idx = np.tile(tgt_idx, batch)
    samples = lam * source[src_idx] + (1.0 - lam) * target[tgt_idx]
    return VirtualDomain(
        samples=samples,
        lam=float(lam),
        source_indices=src_idx,
        target_indices=tgt_idx,
    )
