"""Dataset I/O, synthetic domain-shift generators, and the divergence probe."""

import struct
from dataclasses import dataclass

import numpy as np

from ._validation import check_labels, check_matrix
from .classifier import SoftmaxClassifier
from .exceptions import ConfigError, DataError, ParseError, ShapeError

BINARY_MAGIC = b"PRDA"
BINARY_VERSION = 1

SHIFT_FAMILIES = ("rotation", "translation", "covariance-scale", "mixed")

_PROBE_LEARNING_RATE = 0.5
_PROBE_EPOCHS = 150
_PROBE_L2 = 1e-3


@dataclass(eq=False)
class Dataset:
    """A feature matrix with optional integer labels."""

    features: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


def _validate_dataset_labels(labels, n_rows):
    labels = check_labels(labels, n_rows, "labels")
    classes = np.unique(labels)
    if not np.array_equal(classes, np.arange(classes.size)):
        raise DataError(
            "labels must cover a contiguous range starting at 0, "
            f"got classes {classes.tolist()}"
        )
    return labels


def _detect_format(path, fmt):
    if fmt is not None:
        if fmt in ("binary", "binary-matrix"):
            return "binary"
        if fmt == "csv":
            return "csv"
        raise ConfigError(f"format must be 'csv' or 'binary', got {fmt!r}")
    return "csv" if str(path).lower().endswith(".csv") else "binary"


def load_dataset(path, format=None, name=None):
    """Load a dataset from a CSV or binary matrix file.

    CSV files carry a header naming the feature columns ``f0..f{d-1}``
    with an optional trailing integer ``label`` column. Binary files use
    the package's little-endian float64 container. The format is chosen
    by the ``format`` argument or, when omitted, by the file extension
    (``.csv`` means CSV, anything else binary).
    """
    fmt = _detect_format(path, format)
    if fmt == "csv":
        dataset = _load_csv(path)
    else:
        dataset = _load_binary(path)
    dataset.name = name if name is not None else str(path)
    return dataset


def save_dataset(dataset, path, format=None):
    """Write a dataset to a CSV or binary matrix file (see load_dataset)."""
    fmt = _detect_format(path, format)
    features = check_matrix(dataset.features, "features")
    labels = dataset.labels
    if labels is not None:
        labels = check_labels(labels, features.shape[0], "labels")
    if fmt == "csv":
        _save_csv(features, labels, path)
    else:
        _save_binary(features, labels, path)


def _save_csv(features, labels, path):
    d = features.shape[1]
    header = ",".join(f"f{j}" for j in range(d))
    if labels is not None:
        header += ",label"
    lines = [header]
    for i in range(features.shape[0]):
        row = ",".join(repr(float(v)) for v in features[i])
        if labels is not None:
            row += f",{int(labels[i])}"
        lines.append(row)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_csv(path):
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise ParseError("empty file", line=1)
    header = raw[0].split(",")
    has_labels = header[-1] == "label"
    n_features = len(header) - 1 if has_labels else len(header)
    expected = [f"f{j}" for j in range(n_features)]
    if header[:n_features] != expected or n_features == 0:
        raise ParseError(
            f"header must name columns f0..f{n_features - 1}"
            + (",label" if has_labels else ""),
            line=1,
        )
    rows = []
    labels = [] if has_labels else None
    for lineno, line in enumerate(raw[1:], start=2):
        if not line:
            continue
        tokens = line.split(",")
        if len(tokens) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(tokens)}", line=lineno
            )
        try:
            rows.append([float(tok) for tok in tokens[:n_features]])
        except ValueError:
            raise ParseError("malformed feature value", line=lineno) from None
        if has_labels:
            try:
                labels.append(int(tokens[-1]))
            except ValueError:
                raise ParseError("malformed label value", line=lineno) from None
    if not rows:
        raise ParseError("no data rows", line=2)
    features = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(features)):
        raise DataError("features contain non-finite values")
    label_arr = None
    if has_labels:
        label_arr = _validate_dataset_labels(
            np.asarray(labels, dtype=np.int64), features.shape[0]
        )
    return Dataset(features=features, labels=label_arr)


def _save_binary(features, labels, path):
    n, d = features.shape
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<HQQB", BINARY_VERSION, n, d, int(labels is not None)))
        fh.write(np.ascontiguousarray(features, dtype="<f8").tobytes())
        if labels is not None:
            if labels.max(initial=0) > np.iinfo(np.int32).max:
                raise DataError("labels exceed the 32-bit storage range")
            fh.write(np.ascontiguousarray(labels, dtype="<i4").tobytes())


def _load_binary(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    header_len = len(BINARY_MAGIC) + struct.calcsize("<HQQB")
    if len(blob) < header_len:
        raise ParseError("file too short for a binary matrix header")
    if blob[: len(BINARY_MAGIC)] != BINARY_MAGIC:
        raise ParseError("bad magic; not a binary matrix file")
    version, n, d, has_labels = struct.unpack_from("<HQQB", blob, len(BINARY_MAGIC))
    if version != BINARY_VERSION:
        raise ParseError(f"unsupported binary format version {version}")
    expected = header_len + 8 * n * d + (4 * n if has_labels else 0)
    if len(blob) != expected:
        raise ParseError(f"file length {len(blob)} does not match header ({expected})")
    features = (
        np.frombuffer(blob, dtype="<f8", count=n * d, offset=header_len)
        .reshape(n, d)
        .astype(np.float64)
    )
    if not np.all(np.isfinite(features)):
        raise DataError("features contain non-finite values")
    labels = None
    if has_labels:
        labels = np.frombuffer(
            blob, dtype="<i4", count=n, offset=header_len + 8 * n * d
        ).astype(np.int64)
        labels = _validate_dataset_labels(labels, n)
    return Dataset(features=features, labels=labels)


@dataclass(frozen=True)
class ShiftSpec:
    """Recipe for a deterministic synthetic source/target domain pair.

    ``family`` picks the transform applied to the target draw and
    ``magnitude`` its strength; at magnitude 0 every family reduces to
    the identity, so the two domains are i.i.d. draws of the same
    distribution.

    The blob geometry is built on a seeded orthonormal frame. Class
    means are spread by ``separation`` along a primary axis (plus a
    ``separation2`` component along a secondary axis when the dimension
    allows one) and the whole configuration is displaced from the origin
    by ``offset`` along the primary axis. Within-class noise has a small
    isotropic ``ambient_noise`` floor, ``signal_noise`` along the two
    mean axes, an ``elongation`` component along a dedicated axis inside
    the rotation plane, and, when the dimension allows, ``plane_dim``
    class-specific directions scaled by ``plane_scale`` so each class
    concentrates its variance on its own low-dimensional plane.
    Rotations act inside the (primary, elongated) plane, so they move
    the class means exactly and leak the elongated noise into the
    primary axis.
    """

    family: str
    magnitude: float
    classes: int = 2
    per_class: int = 250
    dim: int = 20
    seed: int = 0
    separation: float = 0.85
    separation2: float = 0.0
    offset: float = 6.0
    elongation: float = 1.6
    signal_noise: float = 0.3
    ambient_noise: float = 0.2
    plane_dim: int = 1
    plane_scale: float = 2.0


def _spec_frame(spec):
    """Seeded orthonormal axes and per-class plane directions.

    Returns (primary, partner, secondary, planes) where ``secondary``
    is None when the dimension only fits two axes and ``planes`` is a
    list of (dim, plane_dim_eff) arrays, one per class (possibly with
    zero columns).
    """
    base_axes = 3 if spec.dim >= 3 else 2
    plane_dim_eff = max(0, min(spec.plane_dim, (spec.dim - base_axes) // spec.classes))
    n_axes = base_axes + spec.classes * plane_dim_eff
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, 0xF0A)))
    frame, _ = np.linalg.qr(rng.normal(size=(spec.dim, n_axes)))
    primary = frame[:, 0]
    partner = frame[:, 1]
    secondary = frame[:, 2] if base_axes == 3 else None
    planes = [
        frame[:, base_axes + c * plane_dim_eff: base_axes + (c + 1) * plane_dim_eff]
        for c in range(spec.classes)
    ]
    return primary, partner, secondary, planes


def class_means(spec):
    """Population class means of the source domain, one row per class."""
    primary, _, secondary, _ = _spec_frame(spec)
    steps = np.linspace(-1.0, 1.0, spec.classes)
    means = (spec.offset + spec.separation * steps)[:, None] * primary[None, :]
    if secondary is not None and spec.separation2 != 0.0:
        means = means + (spec.separation2 * steps)[:, None] * secondary[None, :]
    return means


def _plane_rotation(X, axis_a, axis_b, theta):
    """Rotate rows of X by theta inside the (axis_a, axis_b) plane."""
    coord_a = X @ axis_a
    coord_b = X @ axis_b
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    return (
        X
        + np.outer((cos_t - 1.0) * coord_a - sin_t * coord_b, axis_a)
        + np.outer(sin_t * coord_a + (cos_t - 1.0) * coord_b, axis_b)
    )


def _apply_shift(X, spec, primary, partner):
    m = float(spec.magnitude)
    if m == 0.0:
        return X
    if spec.family == "rotation":
        return _plane_rotation(X, primary, partner, m)
    if spec.family == "translation":
        return X + m * primary
    if spec.family == "covariance-scale":
        return (1.0 + m) * X
    if spec.family == "mixed":
        return _plane_rotation(X, primary, partner, m) + 0.5 * m * primary
    raise ConfigError(f"unknown shift family {spec.family!r}")


def synth_domain_pair(spec):
    """Deterministic source/target pair with a controlled shift.

    The source domain is a mixture of ``spec.classes`` Gaussian blobs
    (see :class:`ShiftSpec` for the geometry); the target domain is an
    independent draw from the same generator pushed through the family's
    transform. Rotations act inside the plane spanned by the primary
    mean axis and the elongated-noise axis, so the class means of the
    target equal the source means rotated by exactly ``magnitude``
    radians.
    """
    if spec.family not in SHIFT_FAMILIES:
        raise ConfigError(
            f"unknown shift family {spec.family!r}; expected one of {SHIFT_FAMILIES}"
        )
    if spec.magnitude < 0:
        raise ConfigError(f"magnitude must be >= 0, got {spec.magnitude}")
    if spec.classes < 2:
        raise ConfigError(f"need at least 2 classes, got {spec.classes}")
    if spec.per_class < 1:
        raise ConfigError(f"per_class must be >= 1, got {spec.per_class}")
    if spec.dim < 2:
        raise ConfigError(f"dim must be >= 2, got {spec.dim}")

    primary, partner, secondary, planes = _spec_frame(spec)
    means = class_means(spec)
    seq = np.random.SeedSequence((spec.seed, 0xDA7A))
    source_seed, target_seed = seq.spawn(2)

    def draw(child_seed):
        rng = np.random.default_rng(child_seed)
        blocks = []
        for c in range(spec.classes):
            n = spec.per_class
            noise = spec.ambient_noise * rng.normal(size=(n, spec.dim))
            noise += np.outer(spec.signal_noise * rng.normal(size=n), primary)
            noise += np.outer(spec.elongation * rng.normal(size=n), partner)
            if secondary is not None:
                noise += np.outer(spec.signal_noise * rng.normal(size=n), secondary)
            plane = planes[c]
            for axis in range(plane.shape[1]):
                scale = spec.plane_scale * 0.75**axis
                noise += np.outer(scale * rng.normal(size=n), plane[:, axis])
            blocks.append(means[c] + noise)
        features = np.vstack(blocks)
        labels = np.repeat(np.arange(spec.classes), spec.per_class)
        return features, labels

    src_X, src_y = draw(source_seed)
    tgt_X, tgt_y = draw(target_seed)
    tgt_X = _apply_shift(tgt_X, spec, primary, partner)

    tag = f"{spec.family}@{spec.magnitude:g}/seed{spec.seed}"
    return (
        Dataset(features=src_X, labels=src_y, name=f"source[{tag}]"),
        Dataset(features=tgt_X, labels=tgt_y, name=f"target[{tag}]"),
    )


def stratified_folds(y, folds, seed):
    """Fold index per sample; class counts per fold are within one sample.

    Shuffles each class's indices and deals them round-robin, so every
    fold receives floor or ceil of the class's share. All classes share
    one master permutation: when the two domains contain the same rows
    in the same order, every duplicated pair lands in the same fold and
    the probe reports exact chance instead of a leave-one-out artifact.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(y.shape[0], dtype=np.int64)
    counts = np.bincount(np.unique(y, return_inverse=True)[1])
    master = rng.permutation(int(counts.max()))
    for value in np.unique(y):
        idx = np.flatnonzero(y == value)
        order = master[master < idx.size]
        fold_of[idx[order]] = np.arange(idx.size) % folds
    return fold_of


def domain_probe_scores(source, target, folds=5, seed=0):
    """Per-fold accuracies of a two-class domain classifier.

    Labels source rows 0 and target rows 1, shuffles them together, and
    runs stratified k-fold cross-validation with the package's softmax
    classifier (features standardized on each training split). Folds are
    dealt round-robin within each domain, so every fold's domain ratio
    is within one sample of the global ratio.
    """
    source = check_matrix(source, "source")
    target = check_matrix(target, "target")
    if source.shape[1] != target.shape[1]:
        raise ShapeError(
            f"feature dimensions differ: {source.shape[1]} vs {target.shape[1]}"
        )
    if folds < 2:
        raise ConfigError(f"folds must be >= 2, got {folds}")
    smaller = min(source.shape[0], target.shape[0])
    if folds > smaller:
        raise ConfigError(
            f"folds={folds} exceeds the smaller domain size ({smaller})"
        )

    X = np.vstack([source, target])
    y = np.concatenate(
        [np.zeros(source.shape[0], dtype=np.int64), np.ones(target.shape[0], dtype=np.int64)]
    )
    fold_of = stratified_folds(y, folds, seed)

    scores = []
    for f in range(folds):
        train = fold_of != f
        test = ~train
        clf = SoftmaxClassifier(
            learning_rate=_PROBE_LEARNING_RATE, epochs=_PROBE_EPOCHS, l2=_PROBE_L2
        ).fit(X[train], y[train])
        pred = clf.predict(X[test])
        scores.append(float(np.mean(pred == y[test])))
    return np.asarray(scores)


def divergence_probe(source, target, folds=5, seed=0):
    """Mean cross-validated accuracy of the two-class domain classifier.

    Higher values mean the domains are easier to tell apart, i.e. more
    divergent; chance level (about 0.5) means near-identical domains.
    """
    return float(domain_probe_scores(source, target, folds=folds, seed=seed).mean())
