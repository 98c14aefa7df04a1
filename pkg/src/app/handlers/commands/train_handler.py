from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import TYPE_CHECKING

from src.app.messages import msg
from src.core.errors import UsageError
from src.data.dataset import Dataset
from src.data.preprocess import DEFAULT_N_HVG, preprocess_dataset
from src.model.losses import REG_REDUCTIONS
from src.model.train_config import TrainConfig
from src.model.trainer import train
from src.storage.atomic import atomic_write_json
from src.storage.checkpoint_store import write_run
from src.storage.expression_io import load_embedding, load_expression

if TYPE_CHECKING:
    from src.app.cli_orchestrator import TopicModelApp

LOGGER = logging.getLogger(__name__)

RUN_CONFIG_FILE = "run_config.json"


class TrainHandler:
    def __init__(self, app: "TopicModelApp") -> None:
        self.app = app

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        defaults = TrainConfig()
        parser = subparsers.add_parser("train", help="preprocess, build neighbors and train the topic model")
        parser.add_argument("--expression", type=Path, required=True)
        parser.add_argument("--format", choices=("csv", "mtx"), default="csv")
        parser.add_argument("--embedding", type=Path, default=None)
        parser.add_argument("--no-cve", action="store_true", help="train without the external view")
        parser.add_argument("--n-hvg", type=int, default=DEFAULT_N_HVG)
        parser.add_argument("--topics", type=int, default=defaults.n_topics)
        parser.add_argument("--embed-dim", type=int, default=defaults.embed_dim)
        parser.add_argument("--epochs", type=int, default=defaults.epochs)
        parser.add_argument("--batch-size", type=int, default=None)
        parser.add_argument("--lr", type=float, default=defaults.lr)
        parser.add_argument("--alpha", type=float, default=defaults.alpha)
        parser.add_argument("--lambda", dest="lam", type=float, default=defaults.lam)
        parser.add_argument("--tau", type=float, default=defaults.tau)
        parser.add_argument("--epsilon", type=float, default=defaults.epsilon)
        parser.add_argument("--sinkhorn-tol", type=float, default=defaults.sinkhorn_tol)
        parser.add_argument("--sinkhorn-max-iter", type=int, default=defaults.sinkhorn_max_iter)
        parser.add_argument("--knn-k", type=int, default=defaults.knn_k)
        parser.add_argument("--temperature", type=float, default=defaults.temperature)
        parser.add_argument("--batch-entropy", action="store_true")
        parser.add_argument("--reg-reduction", choices=REG_REDUCTIONS, default=defaults.reg_reduction)
        parser.add_argument("--top-genes", type=int, default=defaults.top_genes)
        parser.add_argument("--seed", type=int, default=self.app.settings.default_seed)
        parser.add_argument("--out", type=Path, default=None)
        parser.set_defaults(handler=self.handle)

    def _config_from_args(self, args: argparse.Namespace) -> TrainConfig:
        return TrainConfig(
            n_topics=args.topics,
            embed_dim=args.embed_dim,
            epochs=args.epochs,
            batch_size=args.batch_size,
            lr=args.lr,
            alpha=args.alpha,
            lam=args.lam,
            tau=args.tau,
            epsilon=args.epsilon,
            sinkhorn_tol=args.sinkhorn_tol,
            sinkhorn_max_iter=args.sinkhorn_max_iter,
            knn_k=args.knn_k,
            temperature=args.temperature,
            use_cve=not args.no_cve,
            batch_entropy=args.batch_entropy,
            reg_reduction=args.reg_reduction,
            top_genes=args.top_genes,
            seed=args.seed,
        )

    def handle(self, args: argparse.Namespace) -> int:
        config = self._config_from_args(args)
        try:
            config.validate()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if args.n_hvg < 1:
            raise UsageError(f"--n-hvg must be >= 1, got {args.n_hvg}")
        if config.use_cve and args.embedding is None:
            raise UsageError(msg("error_external_required"))

        table = load_expression(args.expression, args.format)
        external = load_embedding(args.embedding, len(table.cell_ids)) if config.use_cve else None
        dataset = preprocess_dataset(
            Dataset(
                expression=table.matrix,
                gene_names=table.gene_names,
                cell_ids=table.cell_ids,
                external=external,
            ),
            args.n_hvg,
        )
        try:
            config.validate(dataset.n_cells)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

        out = args.out if args.out is not None else Path(self.app.settings.output_dir) / "train"
        print(
            msg(
                "status_train_start",
                n_cells=dataset.n_cells,
                n_genes=dataset.n_genes,
                n_topics=config.n_topics,
                epochs=config.epochs,
            )
        )
        result = train(dataset, config)
        write_run(out, result, dataset.cell_ids)
        atomic_write_json(
            out / RUN_CONFIG_FILE,
            {
                "expression": str(args.expression),
                "format": args.format,
                "embedding": None if args.embedding is None else str(args.embedding),
                "n_hvg": args.n_hvg,
                "train": config.to_dict(),
            },
        )
        total = result.loss_log[-1].total if result.loss_log else float("nan")
        LOGGER.info("Run written to %s", out)
        print(msg("status_train_done", total=total, out=out))
        return 0
