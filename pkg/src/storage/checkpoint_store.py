"""Checkpoints and per-run output files.

A checkpoint directory holds ``manifest.json`` (dimensions, training config,
gene names, tensor index) plus one raw little-endian float64 file per
parameter tensor, named after the tensor's role in the model.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd
import torch

from src.core.errors import DataError
from src.model.network import CrossViewTopicModel
from src.model.topics import TopicOutputs
from src.model.train_config import TrainConfig
from src.model.trainer import LOSS_LOG_COLUMNS, EpochLoss, TrainResult
from src.storage.atomic import atomic_write_bytes, atomic_write_json, atomic_write_text

LOGGER = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 1
MANIFEST_NAME = "manifest.json"
RAW_DTYPE = "<f8"

LOSS_LOG_FILE = "loss_log.csv"
THETA_FILE = "theta.csv"
GENE_TOPIC_FILE = "gene_topic.csv"
TOP_GENES_FILE = "top_genes.json"
CHECKPOINT_DIR = "checkpoint"


@dataclass(frozen=True)
class Checkpoint:
    model: CrossViewTopicModel
    config: TrainConfig
    gene_names: tuple[str, ...]


def _tensor_file(name: str) -> str:
    return f"{name.replace('.', '_')}.f64"


def save_checkpoint(
    directory: str | Path,
    model: CrossViewTopicModel,
    config: TrainConfig,
    gene_names: Sequence[str],
) -> Path:
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    tensors: list[dict[str, Any]] = []
    for name, tensor in model.state_dict().items():
        values = tensor.detach().cpu().numpy().astype(RAW_DTYPE, copy=False)
        file_name = _tensor_file(name)
        atomic_write_bytes(target / file_name, values.tobytes(order="C"))
        tensors.append({"name": name, "file": file_name, "shape": list(values.shape)})
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "dims": {
            "n_genes": model.n_genes,
            "view_dim": model.view_dim,
            "n_topics": model.n_topics,
            "embed_dim": model.embed_dim,
            "tau": model.tau,
        },
        "config": config.to_dict(),
        "seed": config.seed,
        "gene_names": list(gene_names),
        "tensors": tensors,
    }
    atomic_write_json(target / MANIFEST_NAME, manifest)
    LOGGER.info("Saved checkpoint with %s tensors to %s", len(tensors), target)
    return target


def load_checkpoint(directory: str | Path) -> Checkpoint:
    source = Path(directory)
    manifest_path = source / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"checkpoint manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        dims = manifest["dims"]
        config = TrainConfig(**manifest["config"])
        gene_names = tuple(str(g) for g in manifest["gene_names"])
        entries = manifest["tensors"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"invalid checkpoint manifest ({exc})", path=str(manifest_path)) from exc
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"unsupported checkpoint format {manifest.get('format')!r}", path=str(manifest_path))

    model = CrossViewTopicModel(
        n_genes=int(dims["n_genes"]),
        view_dim=int(dims["view_dim"]),
        n_topics=int(dims["n_topics"]),
        embed_dim=int(dims["embed_dim"]),
        tau=float(dims["tau"]),
    )
    state: dict[str, torch.Tensor] = {}
    for entry in entries:
        path = source / entry["file"]
        shape = tuple(int(s) for s in entry["shape"])
        raw = np.fromfile(path, dtype=RAW_DTYPE)
        if raw.size != int(np.prod(shape, dtype=np.int64)):
            raise DataError(f"expected {np.prod(shape)} values, found {raw.size}", path=str(path))
        state[entry["name"]] = torch.from_numpy(raw.astype(np.float64).reshape(shape))
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise DataError(f"checkpoint does not match model layout ({exc})", path=str(source)) from exc
    model.eval()
    return Checkpoint(model=model, config=config, gene_names=gene_names)


def topic_columns(n_topics: int) -> list[str]:
    return [f"topic_{k}" for k in range(n_topics)]


def _csv_text(frame: pd.DataFrame, **kwargs: Any) -> str:
    return frame.to_csv(lineterminator="\n", float_format="%.17g", **kwargs)


def write_loss_log(path: str | Path, loss_log: Sequence[EpochLoss]) -> None:
    frame = pd.DataFrame([row.as_row() for row in loss_log], columns=list(LOSS_LOG_COLUMNS))
    atomic_write_text(path, _csv_text(frame, index=False))


def write_topic_outputs(directory: str | Path, outputs: TopicOutputs, cell_ids: Sequence[str]) -> None:
    target = Path(directory)
    columns = topic_columns(outputs.n_topics)
    theta = pd.DataFrame(outputs.theta, index=pd.Index(list(cell_ids), name="cell_id"), columns=columns)
    gene_topic = pd.DataFrame(outputs.gene_topic, index=pd.Index(list(outputs.gene_names), name="gene"), columns=columns)
    atomic_write_text(target / THETA_FILE, _csv_text(theta))
    atomic_write_text(target / GENE_TOPIC_FILE, _csv_text(gene_topic))
    atomic_write_json(target / TOP_GENES_FILE, {"topics": outputs.top_genes})


def write_run(directory: str | Path, result: TrainResult, cell_ids: Sequence[str]) -> Path:
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    write_loss_log(target / LOSS_LOG_FILE, result.loss_log)
    write_topic_outputs(target, result.outputs, cell_ids)
    save_checkpoint(target / CHECKPOINT_DIR, result.model, result.config, result.outputs.gene_names)
    return target


def _read_matrix_csv(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise FileNotFoundError(f"run output not found: {path}")
    try:
        frame = pd.read_csv(path, index_col=0, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"malformed CSV ({exc})", path=str(path)) from exc
    if not all(pd.api.types.is_numeric_dtype(dtype) for dtype in frame.dtypes):
        raise DataError("non-numeric entries", path=str(path))
    return frame


def load_topic_outputs(directory: str | Path) -> tuple[TopicOutputs, tuple[str, ...]]:
    """Read theta, O and the top-gene lists written by ``write_topic_outputs``; also returns cell ids."""
    source = Path(directory)
    theta = _read_matrix_csv(source / THETA_FILE)
    gene_topic = _read_matrix_csv(source / GENE_TOPIC_FILE)
    if theta.shape[1] != gene_topic.shape[1]:
        raise DataError(
            f"theta has {theta.shape[1]} topics, gene_topic has {gene_topic.shape[1]}",
            path=str(source),
        )
    top_path = source / TOP_GENES_FILE
    if not top_path.exists():
        raise FileNotFoundError(f"run output not found: {top_path}")
    try:
        top_genes = [[str(g) for g in topic] for topic in json.loads(top_path.read_text(encoding="utf-8"))["topics"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"invalid top-gene file ({exc})", path=str(top_path)) from exc
    outputs = TopicOutputs(
        theta=theta.to_numpy(dtype=np.float64),
        gene_topic=gene_topic.to_numpy(dtype=np.float64),
        top_genes=top_genes,
        gene_names=tuple(str(g) for g in gene_topic.index),
    )
    return outputs, tuple(str(c) for c in theta.index)
