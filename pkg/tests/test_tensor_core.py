from __future__ import annotations

import math
import unittest

import numpy as np
import torch

from src.core.errors import NumericalError
from src.numerics.tensor_core import (
    as_matrix,
    grad_check,
    log_softmax_rows,
    logsumexp_rows,
    matmul,
    pairwise_sq_dists,
    softmax_rows,
)


class MatmulTests(unittest.TestCase):
    def test_identity_and_hand_arithmetic(self) -> None:
        eye = as_matrix([[1, 0], [0, 1]])
        other = as_matrix([[3, 4], [5, 6]])
        torch.testing.assert_close(matmul(eye, other), other)
        self.assertEqual(float(matmul(as_matrix([[1, 2]]), as_matrix([[3], [4]]))[0, 0]), 11.0)

    def test_matches_triple_loop(self) -> None:
        rng = np.random.default_rng(0)
        a = rng.normal(size=(5, 7))
        b = rng.normal(size=(7, 3))
        expected = np.zeros((5, 3))
        for i in range(5):
            for j in range(3):
                for k in range(7):
                    expected[i, j] += a[i, k] * b[k, j]
        got = matmul(as_matrix(a), as_matrix(b)).numpy()
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_dimension_mismatch_raises(self) -> None:
        with self.assertRaises(ValueError):
            matmul(as_matrix(np.ones((2, 3))), as_matrix(np.ones((2, 3))))


class SoftmaxTests(unittest.TestCase):
    def test_symmetric_row(self) -> None:
        torch.testing.assert_close(softmax_rows(as_matrix([[0.0, 0.0]])), as_matrix([[0.5, 0.5]]))

    def test_large_logits_are_shift_invariant(self) -> None:
        out = softmax_rows(as_matrix([[1000.0, 1000.0, 1000.0]]))
        torch.testing.assert_close(out, torch.full((1, 3), 1.0 / 3.0, dtype=torch.float64))
        self.assertTrue(math.isfinite(float(logsumexp_rows(as_matrix([[1000.0, 999.0]]))[0, 0])))

    def test_matches_direct_formula(self) -> None:
        row = np.array([1.0, 2.0, 3.0])
        expected = np.exp(row) / np.exp(row).sum()
        np.testing.assert_allclose(softmax_rows(as_matrix(row)).numpy()[0], expected, atol=1e-12)
        np.testing.assert_allclose(log_softmax_rows(as_matrix(row)).numpy()[0], np.log(expected), atol=1e-12)

    def test_non_finite_input_is_rejected(self) -> None:
        with self.assertRaises(NumericalError):
            as_matrix([[float("nan"), 1.0]])


class PairwiseDistanceTests(unittest.TestCase):
    def test_matches_direct_distances(self) -> None:
        rng = np.random.default_rng(1)
        a = rng.normal(size=(6, 4))
        b = rng.normal(size=(3, 4))
        expected = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        np.testing.assert_allclose(pairwise_sq_dists(as_matrix(a), as_matrix(b)).numpy(), expected, atol=1e-10)

    def test_identical_rows_give_zero(self) -> None:
        a = as_matrix([[1.0, 2.0], [1.0, 2.0]])
        self.assertTrue(bool((pairwise_sq_dists(a, a) >= 0).all()))
        self.assertAlmostEqual(float(pairwise_sq_dists(a, a)[0, 1]), 0.0, places=12)


class GradCheckTests(unittest.TestCase):
    def test_sum_of_squares(self) -> None:
        params = [torch.as_tensor(np.arange(9.0).reshape(3, 3) / 10.0, dtype=torch.float64)]
        self.assertLess(grad_check(lambda m: (m * m).sum(), params), 1e-6)

    def test_flags_a_wrong_gradient(self) -> None:
        class _WrongGrad(torch.autograd.Function):
            @staticmethod
            def forward(ctx, x):  # noqa: ANN001, ANN205 - autograd signature
                return (x * x).sum()

            @staticmethod
            def backward(ctx, grad):  # noqa: ANN001, ANN205 - autograd signature
                return grad * torch.ones(3, dtype=torch.float64)

        params = [torch.tensor([1.0, 2.0, 3.0], dtype=torch.float64)]
        self.assertGreater(grad_check(lambda x: _WrongGrad.apply(x), params), 0.1)


if __name__ == "__main__":
    unittest.main()
