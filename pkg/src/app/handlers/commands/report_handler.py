from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

from src.app.messages import msg
from src.core.errors import DataError
from src.evaluation.report import METRIC_KEYS
from src.evaluation.report_schema import load_schema, schema_problems

if TYPE_CHECKING:
    from src.app.cli_orchestrator import TopicModelApp

REPORT_FILE = "report.json"
CLUSTERING_FILE = "clustering.json"


class ReportHandler:
    def __init__(self, app: "TopicModelApp") -> None:
        self.app = app

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        parser = subparsers.add_parser("report", help="validate and summarise an evaluation directory")
        parser.add_argument("--eval", dest="eval_dir", type=Path, required=True)
        parser.add_argument("--schema", type=Path, default=None)
        parser.set_defaults(handler=self.handle)

    def _read_json(self, path: Path) -> Any:
        if not path.exists():
            raise FileNotFoundError(f"report file not found: {path}")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid JSON ({exc})", path=str(path)) from exc

    def summary_lines(self, report: dict[str, Any], clustering: dict[str, Any] | None) -> list[str]:
        lines = [msg("report_metric_line", metric=key, value=float(report["metrics"][key])) for key in METRIC_KEYS]
        if report["flags"].get("negative_tc"):
            lines.append(msg("report_flag_negative_tc"))
        if clustering:
            for mode in ("argmax", "kmeans"):
                scores = clustering.get(mode)
                if scores:
                    lines.append(msg("report_cluster_line", mode=mode, ari=scores["ARI"], nmi=scores["NMI"]))
        return lines

    def handle(self, args: argparse.Namespace) -> int:
        report_path = args.eval_dir / REPORT_FILE
        report = self._read_json(report_path)
        schema = load_schema(args.schema) if args.schema is not None else load_schema()
        problems = schema_problems(report, schema)
        if problems:
            raise DataError(msg("error_report_invalid", problems="; ".join(problems)), path=str(report_path))
        clustering_path = args.eval_dir / CLUSTERING_FILE
        clustering = self._read_json(clustering_path) if clustering_path.exists() else None
        print(msg("status_report_ok", path=report_path))
        for line in self.summary_lines(report, clustering):
            print(line)
        return 0
