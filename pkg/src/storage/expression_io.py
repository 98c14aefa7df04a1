"""Expression, external-embedding and label tables.

Expression CSV layout: one row per cell, first column the cell id, header row
holding the gene names. MatrixMarket files use the same orientation (rows are
cells) with optional ``<stem>.genes.txt`` / ``<stem>.cells.txt`` name files.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import pandas as pd
import scipy.io
import scipy.sparse

from src.core.errors import DataError
from src.storage.atomic import atomic_write_text

LOGGER = logging.getLogger(__name__)

ExpressionFormat = Literal["csv", "mtx"]


@dataclass(frozen=True)
class ExpressionTable:
    matrix: np.ndarray
    gene_names: tuple[str, ...]
    cell_ids: tuple[str, ...]


def load_expression(path: str | Path, fmt: ExpressionFormat = "csv") -> ExpressionTable:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"expression file not found: {source}")
    if fmt == "csv":
        table = _load_expression_csv(source)
    elif fmt == "mtx":
        table = _load_expression_mtx(source)
    else:
        raise ValueError(f"unknown expression format {fmt!r}")
    LOGGER.info("Loaded expression %s cells x %s genes from %s", len(table.cell_ids), len(table.gene_names), source)
    return table


def _read_raw_csv(source: Path, header: int | None) -> pd.DataFrame:
    try:
        return pd.read_csv(source, header=header, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.ParserError as exc:
        raise DataError(f"malformed CSV ({exc})", path=str(source)) from exc
    except pd.errors.EmptyDataError as exc:
        raise DataError("file is empty", path=str(source)) from exc


def _to_float_block(raw: np.ndarray, source: Path, first_line: int) -> np.ndarray:
    """Parse a block of strings as float64, reporting the first bad 1-based line."""
    values = np.empty(raw.shape, dtype=np.float64)
    for row in range(raw.shape[0]):
        try:
            values[row] = np.asarray(raw[row], dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"non-numeric value ({exc})", path=str(source), line=first_line + row) from exc
        if not np.isfinite(values[row]).all():
            raise DataError("missing or non-finite value", path=str(source), line=first_line + row)
    return values


def _load_expression_csv(source: Path) -> ExpressionTable:
    raw = _read_raw_csv(source, header=None)
    if raw.shape[0] < 2 or raw.shape[1] < 2:
        raise DataError("expected a header row and at least one cell row with one gene column", path=str(source))
    header = [str(v).strip() for v in raw.iloc[0, 1:].tolist()]
    _check_unique_genes(header, source)
    cell_ids = tuple(str(v).strip() for v in raw.iloc[1:, 0].tolist())
    body = raw.iloc[1:, 1:].to_numpy(dtype=object)
    matrix = _to_float_block(body, source, first_line=2)
    negative_rows = np.flatnonzero((matrix < 0).any(axis=1))
    if negative_rows.size:
        raise DataError("negative expression value", path=str(source), line=int(negative_rows[0]) + 2)
    return ExpressionTable(matrix=matrix, gene_names=tuple(header), cell_ids=cell_ids)


def _load_expression_mtx(source: Path) -> ExpressionTable:
    try:
        loaded = scipy.io.mmread(str(source))
    except (ValueError, OSError, IndexError, RuntimeError, TypeError) as exc:
        raise DataError(f"unreadable MatrixMarket file ({exc})", path=str(source)) from exc
    if scipy.sparse.issparse(loaded):
        matrix = np.asarray(loaded.toarray(), dtype=np.float64)
    else:
        matrix = np.asarray(loaded, dtype=np.float64)
    if not np.isfinite(matrix).all():
        raise DataError("non-finite value", path=str(source))
    if (matrix < 0).any():
        raise DataError("negative expression value", path=str(source))
    n_cells, n_genes = matrix.shape
    gene_names = _read_names(_sidecar(source, "genes"), n_genes, "gene")
    cell_ids = _read_names(_sidecar(source, "cells"), n_cells, "cell")
    _check_unique_genes(list(gene_names), source)
    return ExpressionTable(matrix=matrix, gene_names=gene_names, cell_ids=cell_ids)


def _sidecar(source: Path, kind: str) -> Path:
    return source.with_name(f"{source.stem}.{kind}.txt")


def _read_names(path: Path, expected: int, prefix: str) -> tuple[str, ...]:
    if not path.exists():
        return tuple(f"{prefix}_{i}" for i in range(expected))
    names = tuple(line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip())
    if len(names) != expected:
        raise DataError(f"expected {expected} names, found {len(names)}", path=str(path))
    return names


def _check_unique_genes(names: Sequence[str], source: Path) -> None:
    duplicated = pd.Index(names)[pd.Index(names).duplicated()]
    if len(duplicated):
        raise DataError(f"duplicate gene name {duplicated[0]!r}", path=str(source), line=1)


def load_embedding(path: str | Path, n_cells: int | None = None) -> np.ndarray:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"embedding file not found: {source}")
    raw = _read_raw_csv(source, header=None)
    matrix = _to_float_block(raw.to_numpy(dtype=object), source, first_line=1)
    if n_cells is not None and matrix.shape[0] != n_cells:
        raise DataError(f"embedding has {matrix.shape[0]} rows, expression has {n_cells} cells", path=str(source))
    return matrix


def load_labels(path: str | Path, cell_ids: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Dense integer labels aligned to ``cell_ids``; ids follow first appearance in the file."""
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"labels file not found: {source}")
    raw = _read_raw_csv(source, header=0)
    if raw.shape[1] != 2:
        raise DataError(f"expected 2 columns (cell id, label), got {raw.shape[1]}", path=str(source))
    ids = raw.iloc[:, 0].str.strip()
    names = raw.iloc[:, 1].str.strip()
    if ids.duplicated().any():
        raise DataError(f"duplicate cell id {ids[ids.duplicated()].iloc[0]!r}", path=str(source))
    codes, uniques = pd.factorize(names, sort=False)
    by_cell = pd.Series(codes, index=ids.to_numpy())
    missing = [cell for cell in cell_ids if cell not in by_cell.index]
    if missing:
        raise DataError(f"no label for {len(missing)} cells (first: {missing[0]!r})", path=str(source))
    labels = by_cell.loc[list(cell_ids)].to_numpy(dtype=np.int64)
    return labels, tuple(str(u) for u in uniques)


def _frame_to_csv(frame: pd.DataFrame, **kwargs: object) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, lineterminator="\n", **kwargs)  # type: ignore[arg-type]
    return buffer.getvalue()


def write_expression_csv(path: str | Path, matrix: np.ndarray, gene_names: Sequence[str], cell_ids: Sequence[str]) -> None:
    frame = pd.DataFrame(matrix, index=pd.Index(list(cell_ids), name="cell_id"), columns=list(gene_names))
    atomic_write_text(path, _frame_to_csv(frame))


def write_embedding_csv(path: str | Path, matrix: np.ndarray) -> None:
    atomic_write_text(path, _frame_to_csv(pd.DataFrame(matrix), header=False, index=False))


def write_labels_csv(path: str | Path, cell_ids: Sequence[str], labels: Sequence[str]) -> None:
    frame = pd.DataFrame({"cell_id": list(cell_ids), "label": list(labels)})
    atomic_write_text(path, _frame_to_csv(frame, index=False))


def write_expression_mtx(path: str | Path, matrix: np.ndarray, gene_names: Sequence[str], cell_ids: Sequence[str]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    scipy.io.mmwrite(str(target), scipy.sparse.coo_matrix(matrix), field="real", precision=17)
    atomic_write_text(_sidecar(target, "genes"), "\n".join(gene_names) + "\n")
    atomic_write_text(_sidecar(target, "cells"), "\n".join(cell_ids) + "\n")
