from __future__ import annotations

import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np
import torch

from src.core.errors import NumericalError
from src.data.preprocess import preprocess_dataset
from src.data.synthetic import SynthConfig, generate_synthetic
from src.model.topics import infer_topics
from src.model.train_config import TrainConfig
from src.model.trainer import StepBatch, build_model, compute_step_losses, train
from src.model.losses import loss_con, loss_nei, loss_re, loss_reg
from src.numerics.ot_ecr import ecr_loss
from src.numerics.tensor_core import DTYPE
from src.storage.checkpoint_store import load_checkpoint, load_topic_outputs, save_checkpoint, write_run


def _small_dataset(seed: int = 3):
    synthetic = generate_synthetic(SynthConfig(n_cells=60, n_genes=40, n_topics=3, view_dim=6, seed=seed))
    return preprocess_dataset(synthetic.dataset, 40)


def _small_config(**overrides: object) -> TrainConfig:
    values: dict[str, object] = dict(n_topics=3, embed_dim=8, epochs=3, batch_size=20, knn_k=5, top_genes=5, seed=11)
    values.update(overrides)
    return TrainConfig(**values)  # type: ignore[arg-type]


class TrainConfigTests(unittest.TestCase):
    def test_batch_size_defaults(self) -> None:
        config = TrainConfig()
        self.assertEqual(config.resolve_batch_size(300), 300)
        self.assertEqual(config.resolve_batch_size(5000), 512)
        self.assertEqual(config.resolve_batch_size(20000), 2048)

    def test_validation(self) -> None:
        with self.assertRaises(ValueError):
            TrainConfig(n_topics=0).validate()
        with self.assertRaises(ValueError):
            TrainConfig(tau=0.0).validate()
        with self.assertRaises(ValueError):
            TrainConfig(batch_size=100).validate(n_cells=50)
        with self.assertRaises(ValueError):
            TrainConfig(reg_reduction="max").validate()


class StepLossTests(unittest.TestCase):
    def test_total_is_the_weighted_sum_of_independent_terms(self) -> None:
        dataset = _small_dataset()
        config = _small_config()
        model = build_model(dataset, config).eval()
        assert dataset.external is not None
        model.set_background(torch.as_tensor(dataset.expression, dtype=DTYPE))
        x = torch.as_tensor(dataset.expression[:8], dtype=DTYPE)
        v = torch.as_tensor(dataset.external[:8], dtype=DTYPE)
        x_nei = torch.as_tensor(dataset.expression[8:16], dtype=DTYPE)
        v_nei = torch.as_tensor(dataset.external[8:16], dtype=DTYPE)
        losses, _, _ = compute_step_losses(model, StepBatch(x=x, v=v, x_nei=x_nei, v_nei=v_nei), config)

        with torch.no_grad():
            theta, mu, logvar = model.encode(x)
            phi = model.encode_external(v)
            theta_nei, _, _ = model.encode(x_nei)
            phi_nei = model.encode_external(v_nei)
            gene_topic = model.gene_topic()
            expected = (
                loss_re(theta, gene_topic, x, mu, logvar, background=model.gene_background)
                + loss_con(theta, phi)
                + loss_nei(theta, phi, theta_nei, phi_nei, temperature=config.temperature)
                - config.alpha * loss_reg(theta, phi, reduction="mean")
                + config.lam
                * ecr_loss(
                    model.gene_embeddings,
                    model.topic_embeddings,
                    epsilon=config.epsilon,
                    max_iter=config.sinkhorn_max_iter,
                    tol=config.sinkhorn_tol,
                ).loss
            )
        self.assertAlmostEqual(float(losses.total), float(expected), delta=1e-10)


class TrainTests(unittest.TestCase):
    def setUp(self) -> None:
        self.dataset = _small_dataset()

    def test_simplex_holds_at_every_step(self) -> None:
        seen: list[int] = []

        def watch(step: int, theta: torch.Tensor, gene_topic: torch.Tensor) -> None:
            seen.append(step)
            for rows in (theta, gene_topic):
                self.assertTrue(bool((rows >= 0).all()))
                self.assertLess(float((rows.sum(dim=1) - 1.0).abs().max()), 1e-6)

        result = train(self.dataset, _small_config(), on_step=watch)
        self.assertEqual(seen, list(range(1, 10)))
        self.assertEqual(len(result.loss_log), 3)
        self.assertEqual(result.outputs.theta.shape, (60, 3))
        self.assertEqual(len(result.outputs.top_genes), 3)

    def test_simplex_holds_over_fifty_steps(self) -> None:
        steps: list[int] = []

        def watch(step: int, theta: torch.Tensor, gene_topic: torch.Tensor) -> None:
            steps.append(step)
            for rows in (theta, gene_topic):
                self.assertTrue(bool(torch.isfinite(rows).all()))
                self.assertTrue(bool((rows >= 0).all()))
                self.assertLess(float((rows.sum(dim=1) - 1.0).abs().max()), 1e-6)

        result = train(self.dataset, _small_config(epochs=25, batch_size=30), on_step=watch)
        self.assertEqual(steps, list(range(1, 51)))
        result.outputs.check_simplex()

    def test_same_seed_gives_identical_theta(self) -> None:
        first = train(self.dataset, _small_config())
        second = train(self.dataset, _small_config())
        np.testing.assert_array_equal(first.outputs.theta, second.outputs.theta)

    def test_without_cross_view_terms(self) -> None:
        result = train(self.dataset, _small_config(use_cve=False))
        for record in result.loss_log:
            self.assertEqual((record.con, record.nei, record.reg), (0.0, 0.0, 0.0))

    def test_lambda_zero_skips_regularization(self) -> None:
        result = train(self.dataset, _small_config(lam=0.0))
        self.assertTrue(all(record.ecr == 0.0 and record.sinkhorn_iters == 0 for record in result.loss_log))

    def test_requires_external_view_for_cross_view_terms(self) -> None:
        dataset = _small_dataset()
        stripped = type(dataset)(
            expression=dataset.expression,
            gene_names=dataset.gene_names,
            cell_ids=dataset.cell_ids,
        )
        with self.assertRaises(ValueError):
            train(stripped, _small_config())

    def test_divergence_names_the_term(self) -> None:
        def _diverged(*_args: object, **_kwargs: object) -> torch.Tensor:
            return torch.tensor(float("nan"), dtype=DTYPE)

        with patch("src.model.trainer.loss_nei", _diverged):
            with self.assertRaises(NumericalError) as ctx:
                train(self.dataset, _small_config())
        self.assertEqual(ctx.exception.term, "L_NEI")


class CheckpointTests(unittest.TestCase):
    def test_round_trip_reproduces_outputs(self) -> None:
        dataset = _small_dataset()
        result = train(dataset, _small_config(epochs=2))
        with tempfile.TemporaryDirectory() as tmp:
            directory = save_checkpoint(Path(tmp) / "ckpt", result.model, result.config, dataset.gene_names)
            restored = load_checkpoint(directory)
            outputs = infer_topics(restored.model, dataset.expression, restored.gene_names, 5)
        np.testing.assert_array_equal(outputs.theta, result.outputs.theta)
        np.testing.assert_array_equal(outputs.gene_topic, result.outputs.gene_topic)
        torch.testing.assert_close(restored.model.gene_background, result.model.gene_background, rtol=0, atol=0)
        self.assertLess(float(restored.model.gene_background.max()), 0.0)
        self.assertEqual(restored.config, result.config)

    def test_run_directory_round_trip(self) -> None:
        dataset = _small_dataset()
        result = train(dataset, _small_config(epochs=1))
        with tempfile.TemporaryDirectory() as tmp:
            write_run(tmp, result, dataset.cell_ids)
            outputs, cell_ids = load_topic_outputs(tmp)
            header = (Path(tmp) / "loss_log.csv").read_text(encoding="utf-8").splitlines()[0]
        self.assertEqual(cell_ids, dataset.cell_ids)
        np.testing.assert_array_equal(outputs.theta, result.outputs.theta)
        np.testing.assert_array_equal(outputs.gene_topic, result.outputs.gene_topic)
        self.assertEqual(outputs.top_genes, result.outputs.top_genes)
        self.assertEqual(
            header,
            "epoch,L_RE,L_CON,L_NEI,L_REG,L_ECR,total,sinkhorn_iters,sinkhorn_violation",
        )


if __name__ == "__main__":
    unittest.main()
