from __future__ import annotations

import argparse
import dataclasses
import logging
from pathlib import Path
from typing import TYPE_CHECKING

from src.app.messages import msg
from src.core.errors import DataError, UsageError
from src.data.dataset import PathwayDB
from src.evaluation.report import MetricConfig, clustering_report, full_report
from src.model.topics import extract_top_genes
from src.storage.atomic import atomic_write_json, atomic_write_text
from src.storage.checkpoint_store import CHECKPOINT_DIR, MANIFEST_NAME, load_checkpoint, load_topic_outputs
from src.storage.expression_io import load_labels
from src.storage.gmt_io import parse_gmt

if TYPE_CHECKING:
    from src.app.cli_orchestrator import TopicModelApp

LOGGER = logging.getLogger(__name__)

REPORT_FILE = "report.json"
CLUSTERING_FILE = "clustering.json"
ORA_FILE = "ora.csv"
GSEA_FILE = "gsea.csv"


class EvalHandler:
    def __init__(self, app: "TopicModelApp") -> None:
        self.app = app

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        defaults = MetricConfig()
        parser = subparsers.add_parser("eval", help="interpretability, enrichment and clustering metrics for a run")
        parser.add_argument("--run", type=Path, required=True, help="directory written by `train`")
        parser.add_argument("--labels", type=Path, required=True)
        parser.add_argument("--gmt", type=Path, required=True)
        parser.add_argument("--top-genes", type=int, default=defaults.top_genes)
        parser.add_argument("--n-perm", type=int, default=defaults.n_perm)
        parser.add_argument("--ora-q", type=float, default=defaults.ora_q)
        parser.add_argument("--gsea-q", type=float, default=defaults.gsea_q)
        parser.add_argument("--gsea-weight", type=float, default=defaults.gsea_weight)
        parser.add_argument("--kmeans-k", type=int, default=None)
        parser.add_argument("--seed", type=int, default=self.app.settings.default_seed)
        parser.add_argument("--out", type=Path, default=None)
        parser.set_defaults(handler=self.handle)

    def _restricted_pathways(self, path: Path, vocabulary: tuple[str, ...]) -> PathwayDB:
        db = parse_gmt(path)
        restricted = db.restrict_to(vocabulary)
        if not restricted.pathways:
            raise DataError(msg("error_gmt_vocabulary"), path=str(path))
        dropped_genes = sum(len(p.genes) for p in db.pathways) - sum(len(p.genes) for p in restricted.pathways)
        if dropped_genes:
            LOGGER.warning(
                "%s",
                msg("warn_gmt_vocabulary", path=path, kept=len(restricted.pathways), total=len(db.pathways)),
            )
        return restricted

    def handle(self, args: argparse.Namespace) -> int:
        config = MetricConfig(
            top_genes=args.top_genes,
            n_perm=args.n_perm,
            ora_q=args.ora_q,
            gsea_q=args.gsea_q,
            gsea_weight=args.gsea_weight,
            seed=args.seed,
        )
        try:
            config.validate()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if args.kmeans_k is not None and args.kmeans_k < 1:
            raise UsageError(f"--kmeans-k must be >= 1, got {args.kmeans_k}")

        outputs, cell_ids = load_topic_outputs(args.run)
        if config.top_genes > len(outputs.gene_names):
            raise UsageError(f"--top-genes {config.top_genes} exceeds the {len(outputs.gene_names)} genes")
        outputs = dataclasses.replace(
            outputs,
            top_genes=extract_top_genes(outputs.gene_topic, outputs.gene_names, config.top_genes),
        )
        labels, _ = load_labels(args.labels, cell_ids)
        db = self._restricted_pathways(args.gmt, outputs.gene_names)

        embeddings = None
        checkpoint_dir = args.run / CHECKPOINT_DIR
        if (checkpoint_dir / MANIFEST_NAME).exists():
            model = load_checkpoint(checkpoint_dir).model
            embeddings = (
                model.topic_embeddings.detach().numpy().copy(),
                model.gene_embeddings.detach().numpy().copy(),
            )

        report = full_report(outputs, labels, db, config, embeddings=embeddings)
        clustering = clustering_report(outputs.theta, labels, seed=config.seed, kmeans_k=args.kmeans_k)

        out = args.out if args.out is not None else args.run / "eval"
        out.mkdir(parents=True, exist_ok=True)
        atomic_write_json(out / REPORT_FILE, report.to_dict())
        atomic_write_json(out / CLUSTERING_FILE, clustering)
        for name, result in ((ORA_FILE, report.ora_result), (GSEA_FILE, report.gsea_result)):
            frame = result.to_frame()
            atomic_write_text(out / name, frame.to_csv(index=False, lineterminator="\n", float_format="%.17g"))
        LOGGER.info(
            "TC=%.4f TD=%.4f IP=%.4f ARI=%.4f",
            report.tc,
            report.td,
            report.ip,
            float(clustering["argmax"]["ARI"]),
        )
        print(msg("status_eval_done", n_topics=outputs.n_topics, out=out))
        return 0
