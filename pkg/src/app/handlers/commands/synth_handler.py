from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import TYPE_CHECKING

from src.app.messages import msg
from src.core.errors import UsageError
from src.data.synthetic import SynthConfig, generate_synthetic
from src.storage.atomic import atomic_write_json
from src.storage.expression_io import write_embedding_csv, write_expression_csv, write_labels_csv
from src.storage.gmt_io import write_gmt

if TYPE_CHECKING:
    from src.app.cli_orchestrator import TopicModelApp

LOGGER = logging.getLogger(__name__)

EXPRESSION_FILE = "expression.csv"
EMBEDDING_FILE = "embedding.csv"
LABELS_FILE = "labels.csv"
TRUTH_FILE = "truth.json"
PATHWAYS_FILE = "planted.gmt"


class SynthHandler:
    def __init__(self, app: "TopicModelApp") -> None:
        self.app = app

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        defaults = SynthConfig()
        parser = subparsers.add_parser("synth", help="write a planted-topic synthetic dataset")
        parser.add_argument("--cells", type=int, default=defaults.n_cells)
        parser.add_argument("--genes", type=int, default=defaults.n_genes)
        parser.add_argument("--topics", type=int, default=defaults.n_topics)
        parser.add_argument("--zipf", type=float, default=defaults.zipf_exponent)
        parser.add_argument("--noise", type=float, default=defaults.noise_level)
        parser.add_argument("--view-dim", type=int, default=defaults.view_dim)
        parser.add_argument("--boost", type=float, default=defaults.boost)
        parser.add_argument("--seed", type=int, default=self.app.settings.default_seed)
        parser.add_argument("--out", type=Path, default=None)
        parser.add_argument("--gmt", action="store_true", help="also write the signature blocks as a GMT file")
        parser.set_defaults(handler=self.handle)

    def handle(self, args: argparse.Namespace) -> int:
        cfg = SynthConfig(
            n_cells=args.cells,
            n_genes=args.genes,
            n_topics=args.topics,
            zipf_exponent=args.zipf,
            noise_level=args.noise,
            view_dim=args.view_dim,
            seed=args.seed,
            boost=args.boost,
        )
        try:
            cfg.validate()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

        out = args.out if args.out is not None else Path(self.app.settings.output_dir) / "synth"
        out.mkdir(parents=True, exist_ok=True)
        synthetic = generate_synthetic(cfg)
        data = synthetic.dataset
        write_expression_csv(out / EXPRESSION_FILE, data.expression, data.gene_names, data.cell_ids)
        assert data.external is not None
        write_embedding_csv(out / EMBEDDING_FILE, data.external)
        write_labels_csv(
            out / LABELS_FILE,
            data.cell_ids,
            [data.label_names[int(label)] for label in synthetic.planted_labels],
        )
        atomic_write_json(
            out / TRUTH_FILE,
            {
                "config": cfg.to_dict(),
                "signature_blocks": [list(block) for block in synthetic.signature_blocks],
                "topic_gene": synthetic.topic_gene.tolist(),
            },
        )
        if args.gmt:
            write_gmt(out / PATHWAYS_FILE, synthetic.signature_pathways())
        LOGGER.info("Synthetic dataset seed=%s written to %s", cfg.seed, out)
        print(msg("status_synth_done", n_cells=cfg.n_cells, n_genes=cfg.n_genes, n_topics=cfg.n_topics, out=out))
        return 0
