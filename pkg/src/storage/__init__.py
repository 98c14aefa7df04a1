from src.storage.expression_io import (
    ExpressionTable,
    load_embedding,
    load_expression,
    load_labels,
    write_embedding_csv,
    write_expression_csv,
    write_expression_mtx,
    write_labels_csv,
)
from src.storage.gmt_io import parse_gmt, write_gmt

__all__ = [
    "ExpressionTable",
    "load_embedding",
    "load_expression",
    "load_labels",
    "parse_gmt",
    "write_embedding_csv",
    "write_expression_csv",
    "write_expression_mtx",
    "write_gmt",
    "write_labels_csv",
]
