"""Progressive adaptation loop, one-shot alignment baseline, evaluation."""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_labels, check_matrix
from .classifier import SoftmaxClassifier
from .exceptions import ConfigError, DegenerateInput, ShapeError, SingleClassError
from .grassmann import chordal_distance, match_subspaces, project
from .mixup import (
    DEFAULT_LAMBDA_SCHEDULE,
    check_lambda_schedule,
    generate_virtual_domain,
)
from .subspaces import collection_stats, generate_subspaces


@dataclass(eq=False)
class RoundReport:
    """Book-keeping for one interpolation round."""

    lam: float
    virtual_count: int = 0
    accepted_count: int = 0
    pair_distances: list = field(default_factory=list)
    accepted_confidences: list = field(default_factory=list)
    source_size_after: int = 0
    skipped: bool = False
    notes: list = field(default_factory=list)
    target_accuracy: float | None = None

    def to_dict(self):
        return {
            "lambda": self.lam,
            "virtual_count": self.virtual_count,
            "accepted_count": self.accepted_count,
            "pair_distances": self.pair_distances,
            "min_accepted_confidence": (
                min(self.accepted_confidences) if self.accepted_confidences else None
            ),
            "source_size_after": self.source_size_after,
            "skipped": self.skipped,
            "notes": self.notes,
            "target_accuracy": self.target_accuracy,
        }


@dataclass(eq=False)
class AdaptationResult:
    """Final classifier plus the per-round reports and a config echo."""

    final_model: SoftmaxClassifier
    round_reports: list
    source_stats: object
    config: dict

    def rounds_jsonl(self):
        """Round reports rendered as one JSON object per line."""
        return "".join(
            json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in self.round_reports
        )


def evaluate(model, X, y):
    """Fraction of the model's predictions that match the labels."""
    X = check_matrix(X, "X")
    y = check_labels(y, X.shape[0], "y")
    return float(np.mean(model.predict(X) == y))


def _clamped_dimension(requested, *limits):
    k_eff = min(int(requested), *(int(v) for v in limits))
    if k_eff < 1:
        raise DegenerateInput("not enough samples for any subspace dimension")
    if k_eff < requested:
        warnings.warn(
            f"subspace dimension clamped from {requested} to {k_eff}",
            RuntimeWarning,
        )
    return k_eff


class ProgressiveDomainAugmentation(ClassifierMixin, BaseEstimator):
    """Adapt a source classifier to an unlabeled target domain.

    For each interpolation weight in the schedule: interpolate a virtual
    domain between the (growing) source set and the target set, split
    both sides into subspace collections, greedily match and align the
    subspaces, train one projected classifier per matched pair on the
    aligned source samples, pseudo-label the virtual rows, absorb the
    confidently labeled rows into the source set, and retrain the final
    full-dimensional classifier on the augmented source. New samples are
    predicted with that final classifier; target labels are never read
    (``fit`` does not accept them).

    Parameters
    ----------
    k : int, default=44
        Requested subspace dimension; clamped to what the data supports,
        with a warning.
    tau : float in (0, 1], default=0.2
        Relative reconstruction-error threshold splitting off the next
        subspace.
    rho : float in (0, 1), default=0.8
        Pseudo-label confidence threshold; a virtual sample joins the
        source set only when its top predicted probability exceeds it.
    lambda_schedule : sequence of float, default=(0.8, 0.6, 0.4, 0.2)
        Strictly decreasing source weights, one adaptation round each.
    batch : int or None, default=None
        Rows drawn per domain when interpolating; None means
        ``min(n_source, n_target, 256)`` recomputed each round.
    learning_rate, epochs, l2 : float, int, float
        Configuration shared by every classifier trained inside the loop.
    seed : int, default=0
        Seeds the interpolation sampling; fixed seed, fixed result.
    shared_h : bool, default=False
        Train a single projected classifier across all matched pairs
        instead of one per pair.
    reorthonormalize_ta : bool, default=False
        Re-orthonormalize the target-aligned bases before projecting.
    pairing : {"zip", "cross"}, default="zip"
        How drawn source and target rows are combined into virtual rows.

    Attributes
    ----------
    final_model_ : SoftmaxClassifier
        Classifier trained on the fully augmented source set; used by
        ``predict``/``predict_proba``.
    source_model_ : SoftmaxClassifier
        The pretrained source-only classifier, kept for comparison.
    round_reports_ : list of RoundReport
    round_models_ : list of SoftmaxClassifier
        Classifier state after each round (skipped rounds repeat the
        previous state).
    result_ : AdaptationResult
    k_effective_ : int
    """

    def __init__(self, k=44, tau=0.2, rho=0.8,
                 lambda_schedule=DEFAULT_LAMBDA_SCHEDULE, batch=None,
                 learning_rate=0.5, epochs=300, l2=1e-3, seed=0,
                 shared_h=False, reorthonormalize_ta=False, pairing="zip"):
        self.k = k
        self.tau = tau
        self.rho = rho
        self.lambda_schedule = lambda_schedule
        self.batch = batch
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed
        self.shared_h = shared_h
        self.reorthonormalize_ta = reorthonormalize_ta
        self.pairing = pairing

    def _make_classifier(self):
        return SoftmaxClassifier(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            l2=self.l2,
            seed=self.seed,
        )

    def _check_config(self):
        if int(self.k) < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must be in (0, 1), got {self.rho}")
        if self.batch is not None and int(self.batch) < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")

    def fit(self, X, y, X_target):
        """Run the adaptation loop on labeled source and unlabeled target."""
        self._check_config()
        schedule = check_lambda_schedule(self.lambda_schedule)
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0], "y")
        X_target = check_matrix(X_target, "X_target")
        if X.shape[1] != X_target.shape[1]:
            raise ShapeError(
                f"feature dimensions differ: {X.shape[1]} vs {X_target.shape[1]}"
            )
        if X_target.shape[0] == 0:
            raise DegenerateInput("target domain is empty")
        if np.unique(y).size < 2:
            raise SingleClassError("source labels must contain at least 2 classes")

        n_source, dim = X.shape
        n_target = X_target.shape[0]
        batch0 = self.batch if self.batch is not None else min(n_source, n_target, 256)
        k_eff = _clamped_dimension(self.k, dim, n_source - 1, batch0 - 1)

        round_seeds = np.random.SeedSequence(self.seed).spawn(len(schedule))

        model = self._make_classifier().fit(X, y)
        self.source_model_ = model

        cur_X, cur_y = X, y
        source_collection = generate_subspaces(cur_X, k_eff, self.tau)

        reports = []
        round_models = []
        for lam, child_seed in zip(schedule, round_seeds):
            report = RoundReport(lam=lam)
            rng = np.random.default_rng(child_seed)
            batch = (
                self.batch
                if self.batch is not None
                else min(cur_X.shape[0], n_target, 256)
            )
            virtual = generate_virtual_domain(
                cur_X, X_target, lam, batch, rng, pairing=self.pairing
            )
            report.virtual_count = len(virtual)
            try:
                virtual_collection = generate_subspaces(
                    virtual.samples, k_eff, self.tau
                )
            except DegenerateInput:
                report.skipped = True
                report.notes.append(
                    "virtual batch smaller than the subspace dimension; round skipped"
                )
                warnings.warn(report.notes[-1], RuntimeWarning)
                report.source_size_after = cur_X.shape[0]
                reports.append(report)
                round_models.append(model)
                continue

            matching = match_subspaces(
                source_collection,
                virtual_collection,
                reorthonormalize=self.reorthonormalize_ta,
            )
            report.pair_distances = [p.distance for p in matching.pairs]

            pseudo, confidence = self._pseudo_label(
                cur_X, cur_y, virtual.samples,
                source_collection, virtual_collection, matching, report.notes,
            )
            accept = confidence > self.rho
            report.accepted_count = int(accept.sum())
            report.accepted_confidences = [float(c) for c in confidence[accept]]
            if report.accepted_count:
                cur_X = np.vstack([cur_X, virtual.samples[accept]])
                cur_y = np.concatenate([cur_y, pseudo[accept]])
            else:
                report.notes.append("no pseudo-labels above rho; source unchanged")
            report.source_size_after = cur_X.shape[0]

            source_collection = generate_subspaces(cur_X, k_eff, self.tau)
            model = self._make_classifier().fit(cur_X, cur_y)
            reports.append(report)
            round_models.append(model)

        self.final_model_ = model
        self.classes_ = model.classes_
        self.n_features_in_ = dim
        self.k_effective_ = k_eff
        self.round_reports_ = reports
        self.round_models_ = round_models
        self.source_collection_ = source_collection
        self.augmented_size_ = cur_X.shape[0]
        self.result_ = AdaptationResult(
            final_model=model,
            round_reports=reports,
            source_stats=collection_stats(source_collection),
            config=self.get_params(),
        )
        return self

    def _pseudo_label(self, cur_X, cur_y, virtual_samples,
                      source_collection, virtual_collection, matching, notes):
        """Label virtual rows through the per-pair projected classifiers.

        Rows whose pair could not train a classifier keep confidence
        -inf and are never accepted.
        """
        pairs = matching.pairs

        # route every subspace to a matched pair; unmatched ones go to the
        # pair whose same-side subspace is chordally nearest
        route_src = np.empty(len(source_collection), dtype=np.int64)
        for pos, pair in enumerate(pairs):
            route_src[pair.source_idx] = pos
        for idx in matching.unmatched_source:
            dists = [
                chordal_distance(
                    source_collection.subspaces[idx],
                    source_collection.subspaces[p.source_idx],
                )
                for p in pairs
            ]
            route_src[idx] = int(np.argmin(dists))

        route_tgt = np.empty(len(virtual_collection), dtype=np.int64)
        for pos, pair in enumerate(pairs):
            route_tgt[pair.target_idx] = pos
        for idx in matching.unmatched_target:
            dists = [
                chordal_distance(
                    virtual_collection.subspaces[idx],
                    virtual_collection.subspaces[p.target_idx],
                )
                for p in pairs
            ]
            route_tgt[idx] = int(np.argmin(dists))

        pair_of_source_row = route_src[source_collection.assignment]
        pair_of_virtual_row = route_tgt[virtual_collection.assignment]

        projected = []
        for pos, pair in enumerate(pairs):
            rows = np.flatnonzero(pair_of_source_row == pos)
            projected.append(
                (rows, project(cur_X[rows], pair.target_aligned))
            )

        shared_model = None
        if self.shared_h:
            shared_model = self._make_classifier().fit(
                np.vstack([z for _, z in projected]),
                np.concatenate([cur_y[rows] for rows, _ in projected]),
            )

        pseudo = np.zeros(virtual_samples.shape[0], dtype=np.int64)
        confidence = np.full(virtual_samples.shape[0], -np.inf)
        for pos, pair in enumerate(pairs):
            v_rows = np.flatnonzero(pair_of_virtual_row == pos)
            if v_rows.size == 0:
                continue
            if shared_model is not None:
                head = shared_model
            else:
                rows, z_train = projected[pos]
                try:
                    head = self._make_classifier().fit(z_train, cur_y[rows])
                except SingleClassError:
                    notes.append(
                        f"pair ({pair.source_idx},{pair.target_idx}) trains on a "
                        "single class; its virtual rows stay unlabeled"
                    )
                    continue
            z_virtual = project(
                virtual_samples[v_rows],
                virtual_collection.subspaces[pair.target_idx],
            )
            proba = head.predict_proba(z_virtual)
            confidence[v_rows] = proba.max(axis=1)
            pseudo[v_rows] = head.classes_[np.argmax(proba, axis=1)]
        return pseudo, confidence

    def predict(self, X):
        return self.final_model_.predict(X)

    def predict_proba(self, X):
        return self.final_model_.predict_proba(X)

    def score_rounds(self, X, y):
        """Fill per-round target accuracies (evaluation only) and return them.

        Called after ``fit`` with held-out labels; the adaptation itself
        never sees them.
        """
        accuracies = []
        for model, report in zip(self.round_models_, self.round_reports_):
            report.target_accuracy = evaluate(model, X, y)
            accuracies.append(report.target_accuracy)
        return accuracies


class SubspaceAlignmentBaseline(ClassifierMixin, BaseEstimator):
    """One-shot subspace alignment between source and target.

    Fits a single basis per domain (threshold 1.0 keeps every sample in
    one subspace), aligns the source basis onto the target basis, trains
    the projected classifier on the aligned source, and predicts new
    samples through the target basis. Serves as the single-step
    comparison point for the progressive loop.
    """

    def __init__(self, k=44, learning_rate=0.5, epochs=300, l2=1e-3, seed=0):
        self.k = k
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed

    def _make_classifier(self):
        return SoftmaxClassifier(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            l2=self.l2,
            seed=self.seed,
        )

    def fit(self, X, y, X_target):
        if int(self.k) < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0], "y")
        X_target = check_matrix(X_target, "X_target")
        if X.shape[1] != X_target.shape[1]:
            raise ShapeError(
                f"feature dimensions differ: {X.shape[1]} vs {X_target.shape[1]}"
            )
        if X_target.shape[0] == 0:
            raise DegenerateInput("target domain is empty")

        n_source, dim = X.shape
        k_eff = _clamped_dimension(self.k, dim, n_source - 1, X_target.shape[0] - 1)

        source_collection = generate_subspaces(X, k_eff, 1.0)
        target_collection = generate_subspaces(X_target, k_eff, 1.0)
        matching = match_subspaces(source_collection, target_collection)
        pair = matching.pairs[0]

        z_source = project(X, pair.target_aligned)
        model = self._make_classifier().fit(z_source, y)

        self.model_ = model
        self.target_basis_ = target_collection.subspaces[pair.target_idx]
        self.transform_ = pair.transform
        self.pair_distance_ = pair.distance
        self.classes_ = model.classes_
        self.n_features_in_ = dim
        self.k_effective_ = k_eff
        self.result_ = AdaptationResult(
            final_model=model,
            round_reports=[],
            source_stats=collection_stats(source_collection),
            config=self.get_params(),
        )
        return self

    def predict(self, X):
        return self.model_.predict(project(check_matrix(X, "X"), self.target_basis_))

    def predict_proba(self, X):
        return self.model_.predict_proba(
            project(check_matrix(X, "X"), self.target_basis_)
        )
