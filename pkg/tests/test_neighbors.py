from __future__ import annotations

import unittest

import numpy as np

from src.data.neighbors import build_mutual_knn, build_neighbor_index, sample_neighbor, sample_neighbors


def _brute_force_knn(points: np.ndarray, k: int) -> list[list[int]]:
    n = points.shape[0]
    result = []
    for i in range(n):
        dists = [(float(((points[i] - points[j]) ** 2).sum()), j) for j in range(n) if j != i]
        result.append([j for _, j in sorted(dists)[:k]])
    return result


class MutualKnnTests(unittest.TestCase):
    def test_collinear_points_with_fallback(self) -> None:
        points = np.array([[0.0], [1.0], [2.0]])
        view = build_mutual_knn(points, k=1)
        self.assertEqual(view.neighbors[0].tolist(), [1])
        self.assertEqual(view.neighbors[1].tolist(), [0])
        self.assertEqual(view.neighbors[2].tolist(), [1])
        self.assertEqual(view.fallback.tolist(), [False, False, True])

    def test_identical_points_are_mutual(self) -> None:
        view = build_mutual_knn(np.array([[1.0, 1.0], [1.0, 1.0]]), k=1)
        self.assertEqual(view.neighbors[0].tolist(), [1])
        self.assertEqual(view.neighbors[1].tolist(), [0])

    def test_symmetry_and_brute_force_agreement(self) -> None:
        rng = np.random.default_rng(0)
        points = rng.normal(size=(50, 5))
        view = build_mutual_knn(points, k=5)
        knn = _brute_force_knn(points, 5)
        for i in range(50):
            self.assertNotIn(i, view.neighbors[i].tolist())
            if view.fallback[i]:
                self.assertEqual(view.neighbors[i].tolist(), knn[i])
                continue
            expected = [j for j in knn[i] if i in knn[j]]
            self.assertEqual(view.neighbors[i].tolist(), expected)
            for j in view.neighbors[i]:
                self.assertIn(i, view.neighbors[int(j)].tolist())

    def test_rejects_bad_k(self) -> None:
        with self.assertRaises(ValueError):
            build_mutual_knn(np.zeros((3, 2)), k=3)
        with self.assertRaises(ValueError):
            build_mutual_knn(np.zeros((1, 2)), k=1)


class SamplingTests(unittest.TestCase):
    def setUp(self) -> None:
        rng = np.random.default_rng(1)
        self.x = rng.normal(size=(30, 3))
        self.index = build_neighbor_index(self.x, self.x + 0.01, k=4)

    def test_single_candidate_is_always_drawn(self) -> None:
        index = build_neighbor_index(np.array([[0.0], [1.0], [2.0]]), None, k=1)
        rng = np.random.default_rng(0)
        self.assertEqual({sample_neighbor(index, "x", 2, rng) for _ in range(20)}, {1})

    def test_seeded_draws_repeat(self) -> None:
        cells = np.arange(30)
        first = sample_neighbors(self.index, "v", cells, np.random.default_rng(5))
        second = sample_neighbors(self.index, "v", cells, np.random.default_rng(5))
        np.testing.assert_array_equal(first, second)

    def test_draws_are_uniform(self) -> None:
        points = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        index = build_neighbor_index(points, None, k=4)
        candidates = index.x.neighbors[0].tolist()
        self.assertEqual(sorted(candidates), [1, 2, 3, 4])
        rng = np.random.default_rng(2)
        draws = [sample_neighbor(index, "x", 0, rng) for _ in range(10_000)]
        sigma = np.sqrt(10_000 * 0.25 * 0.75)
        for j in candidates:
            self.assertLess(abs(draws.count(j) - 2500), 5 * sigma)

    def test_missing_external_view(self) -> None:
        index = build_neighbor_index(self.x, None, k=3)
        with self.assertRaises(ValueError):
            sample_neighbor(index, "v", 0, np.random.default_rng(0))


if __name__ == "__main__":
    unittest.main()
