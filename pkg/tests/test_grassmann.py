import numpy as np
import pytest

from prda import (
    Basis,
    ShapeError,
    chordal_distance,
    compute_alignment,
    frobenius_distance,
    match_subspaces,
    project,
)
from conftest import collection_from_bases, random_basis, random_orthonormal


class TestChordalDistance:
    def test_identical_spans(self, rng):
        b = random_basis(rng, 6, 3)
        assert chordal_distance(b, b) <= 1e-8

    def test_orthogonal_lines(self):
        e1 = Basis(vectors=np.array([[1.0], [0.0]]), mean=np.zeros(2))
        e2 = Basis(vectors=np.array([[0.0], [1.0]]), mean=np.zeros(2))
        assert chordal_distance(e1, e2) == pytest.approx(1.0)

    @pytest.mark.parametrize("theta_deg", [15.0, 45.0, 80.0])
    def test_rotated_line_gives_sine(self, theta_deg):
        theta = np.radians(theta_deg)
        a = Basis(vectors=np.array([[1.0], [0.0]]), mean=np.zeros(2))
        b = Basis(
            vectors=np.array([[np.cos(theta)], [np.sin(theta)]]), mean=np.zeros(2)
        )
        assert chordal_distance(a, b) == pytest.approx(abs(np.sin(theta)), abs=1e-12)

    def test_symmetry(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 10))
            k = int(rng.integers(1, min(4, d) + 1))
            a, b = random_basis(rng, d, k), random_basis(rng, d, k)
            assert abs(chordal_distance(a, b) - chordal_distance(b, a)) < 1e-10

    def test_range(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 12))
            k = int(rng.integers(1, min(4, d) + 1))
            dist = chordal_distance(random_basis(rng, d, k), random_basis(rng, d, k))
            assert 0.0 <= dist <= np.sqrt(k) + 1e-12

    def test_basis_rotation_invariance(self, rng):
        for _ in range(50):
            d, k = 8, 3
            a, b = random_basis(rng, d, k), random_basis(rng, d, k)
            r1 = random_orthonormal(rng, k, k)
            r2 = random_orthonormal(rng, k, k)
            a2 = Basis(vectors=a.vectors @ r1, mean=a.mean)
            b2 = Basis(vectors=b.vectors @ r2, mean=b.mean)
            assert chordal_distance(a2, b2) == pytest.approx(
                chordal_distance(a, b), abs=1e-8
            )

    def test_shape_errors(self, rng):
        with pytest.raises(ShapeError):
            chordal_distance(random_basis(rng, 5, 2), random_basis(rng, 5, 3))
        with pytest.raises(ShapeError):
            chordal_distance(random_basis(rng, 5, 2), random_basis(rng, 6, 2))


class TestComputeAlignment:
    def test_self_alignment_is_identity(self, rng):
        b = random_basis(rng, 7, 3)
        transform, aligned = compute_alignment(b, b)
        assert np.allclose(transform, np.eye(3), atol=1e-10)
        assert np.allclose(aligned.vectors, b.vectors, atol=1e-10)
        assert np.array_equal(aligned.mean, b.mean)

    def test_in_span_rotation_recovered_exactly(self, rng):
        bs = random_basis(rng, 8, 3)
        rot = random_orthonormal(rng, 3, 3)
        bu = Basis(vectors=bs.vectors @ rot, mean=np.zeros(8))
        transform, aligned = compute_alignment(bs, bu)
        assert np.allclose(transform, rot, atol=1e-10)
        assert frobenius_distance(aligned.vectors, bu.vectors) < 1e-10

    def test_random_probe_optimality(self, rng):
        # oracle: the closed form beats 1000 random alternatives
        bs, bu = random_basis(rng, 8, 3), random_basis(rng, 8, 3)
        transform, aligned = compute_alignment(bs, bu)
        best = frobenius_distance(aligned.vectors, bu.vectors)
        for _ in range(1000):
            candidate = rng.normal(size=(3, 3))
            residual = frobenius_distance(bs.vectors @ candidate, bu.vectors)
            assert best <= residual + 1e-12

    def test_reorthonormalize_flag(self, rng):
        bs, bu = random_basis(rng, 6, 2), random_basis(rng, 6, 2)
        _, raw = compute_alignment(bs, bu)
        _, ortho = compute_alignment(bs, bu, reorthonormalize=True)
        assert ortho.orthonormality_defect() < 1e-8
        # the raw aligned basis is generally not orthonormal
        assert raw.orthonormality_defect() > 1e-6

    def test_shape_error(self, rng):
        with pytest.raises(ShapeError):
            compute_alignment(random_basis(rng, 5, 2), random_basis(rng, 5, 3))


class TestMatchSubspaces:
    def test_identical_collections_match_self(self, rng):
        bases = [random_basis(rng, 6, 2) for _ in range(2)]
        matching = match_subspaces(
            collection_from_bases(bases), collection_from_bases(bases)
        )
        assert len(matching.pairs) == 2
        for pair in matching.pairs:
            assert pair.source_idx == pair.target_idx
            assert pair.distance <= 1e-8

    def test_uneven_sizes(self, rng):
        src = collection_from_bases([random_basis(rng, 6, 2) for _ in range(3)])
        tgt = collection_from_bases([random_basis(rng, 6, 2) for _ in range(2)])
        matching = match_subspaces(src, tgt)
        assert len(matching.pairs) == 2
        assert len(matching.unmatched_source) == 1
        assert matching.unmatched_target == ()

    def test_matches_exhaustive_greedy_oracle(self, rng):
        for _ in range(10):
            src_bases = [random_basis(rng, 7, 2) for _ in range(4)]
            tgt_bases = [random_basis(rng, 7, 2) for _ in range(4)]
            matching = match_subspaces(
                collection_from_bases(src_bases), collection_from_bases(tgt_bases)
            )

            # oracle: scan every remaining entry each round
            dist = [
                [chordal_distance(a, b) for b in tgt_bases] for a in src_bases
            ]
            free_src = list(range(4))
            free_tgt = list(range(4))
            expected = []
            while free_src and free_tgt:
                best = None
                for i in free_src:
                    for j in free_tgt:
                        if best is None or dist[i][j] < dist[best[0]][best[1]]:
                            best = (i, j)
                expected.append(best)
                free_src.remove(best[0])
                free_tgt.remove(best[1])
            assert [(p.source_idx, p.target_idx) for p in matching.pairs] == expected

    def test_selected_distances_non_decreasing(self, rng):
        src = collection_from_bases([random_basis(rng, 8, 3) for _ in range(5)])
        tgt = collection_from_bases([random_basis(rng, 8, 3) for _ in range(5)])
        matching = match_subspaces(src, tgt)
        dists = [p.distance for p in matching.pairs]
        assert all(a <= b + 1e-12 for a, b in zip(dists, dists[1:]))

    def test_pairs_carry_alignment(self, rng):
        src = collection_from_bases([random_basis(rng, 6, 2) for _ in range(2)])
        tgt = collection_from_bases([random_basis(rng, 6, 2) for _ in range(2)])
        for pair in match_subspaces(src, tgt).pairs:
            bs = src.subspaces[pair.source_idx]
            bu = tgt.subspaces[pair.target_idx]
            assert np.allclose(pair.transform, bs.vectors.T @ bu.vectors)
            assert np.allclose(
                pair.target_aligned.vectors, bs.vectors @ pair.transform
            )

    def test_k_mismatch(self, rng):
        src = collection_from_bases([random_basis(rng, 6, 2)])
        tgt = collection_from_bases([random_basis(rng, 6, 3)])
        with pytest.raises(ShapeError):
            match_subspaces(src, tgt)


class TestProject:
    def test_span_rows_recoverable(self, rng):
        basis = random_basis(rng, 6, 3)
        coords = rng.normal(size=(20, 3))
        X = coords @ basis.vectors.T + basis.mean
        Z = project(X, basis)
        recovered = Z @ basis.vectors.T + basis.mean
        assert np.allclose(recovered, X, atol=1e-8)

    def test_identity_basis_slices_coordinates(self, rng):
        basis = Basis(vectors=np.eye(5)[:, :2], mean=np.zeros(5))
        X = rng.normal(size=(10, 5))
        assert np.array_equal(project(X, basis), X[:, :2])

    def test_matches_per_row_dot_oracle(self, rng):
        basis = random_basis(rng, 5, 2)
        X = rng.normal(size=(8, 5))
        Z = project(X, basis)
        for i in range(8):
            for j in range(2):
                expected = float((X[i] - basis.mean) @ basis.vectors[:, j])
                assert Z[i, j] == pytest.approx(expected, rel=1e-12)

    def test_shape_error(self, rng):
        with pytest.raises(ShapeError):
            project(rng.normal(size=(4, 7)), random_basis(rng, 5, 2))
