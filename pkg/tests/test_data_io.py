from __future__ import annotations

import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.core.errors import DataError
from src.data.dataset import Dataset, Pathway, PathwayDB
from src.storage.expression_io import (
    load_embedding,
    load_expression,
    load_labels,
    write_embedding_csv,
    write_expression_csv,
    write_expression_mtx,
    write_labels_csv,
)
from src.storage.gmt_io import parse_gmt, write_gmt


class ExpressionCsvTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_reads_small_table(self) -> None:
        path = self.root / "x.csv"
        path.write_text("cell,A,B,C\nc1,1,0,2\nc2,0,3,0\n", encoding="utf-8")
        table = load_expression(path)
        np.testing.assert_array_equal(table.matrix, [[1, 0, 2], [0, 3, 0]])
        self.assertEqual(table.gene_names, ("A", "B", "C"))
        self.assertEqual(table.cell_ids, ("c1", "c2"))

    def test_round_trip_is_bit_identical(self) -> None:
        rng = np.random.default_rng(0)
        matrix = rng.gamma(2.0, size=(10, 20))
        genes = tuple(f"g{j}" for j in range(20))
        cells = tuple(f"c{i}" for i in range(10))
        path = self.root / "rt.csv"
        write_expression_csv(path, matrix, genes, cells)
        table = load_expression(path)
        np.testing.assert_array_equal(table.matrix, matrix)
        self.assertEqual(table.gene_names, genes)

    def test_non_numeric_value_reports_line(self) -> None:
        path = self.root / "bad.csv"
        path.write_text("cell,A,B\nc1,1,2\nc2,x,0\n", encoding="utf-8")
        with self.assertRaises(DataError) as ctx:
            load_expression(path)
        self.assertEqual(ctx.exception.line, 3)

    def test_negative_and_duplicate_genes_are_rejected(self) -> None:
        negative = self.root / "neg.csv"
        negative.write_text("cell,A,B\nc1,1,-2\n", encoding="utf-8")
        with self.assertRaises(DataError):
            load_expression(negative)
        duplicate = self.root / "dup.csv"
        duplicate.write_text("cell,A,A\nc1,1,2\n", encoding="utf-8")
        with self.assertRaises(DataError):
            load_expression(duplicate)

    def test_missing_file(self) -> None:
        with self.assertRaises(FileNotFoundError):
            load_expression(self.root / "absent.csv")


class ExpressionMtxTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_sparse_file_is_densified(self) -> None:
        matrix = np.zeros((3, 3))
        matrix[0, 0], matrix[1, 2], matrix[2, 1], matrix[2, 2] = 1.0, 2.0, 3.0, 4.0
        path = self.root / "x.mtx"
        write_expression_mtx(path, matrix, ("A", "B", "C"), ("c1", "c2", "c3"))
        table = load_expression(path, fmt="mtx")
        np.testing.assert_array_equal(table.matrix, matrix)
        self.assertEqual(int((table.matrix == 0).sum()), 5)
        self.assertEqual(table.gene_names, ("A", "B", "C"))

    def test_names_default_without_sidecars(self) -> None:
        path = self.root / "plain.mtx"
        path.write_text(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 5.0\n",
            encoding="utf-8",
        )
        table = load_expression(path, fmt="mtx")
        self.assertEqual(table.gene_names, ("gene_0", "gene_1"))
        self.assertEqual(table.cell_ids, ("cell_0", "cell_1"))


class EmbeddingAndLabelTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_embedding_round_trip_and_row_check(self) -> None:
        values = np.arange(6.0).reshape(3, 2) / 7.0
        path = self.root / "v.csv"
        write_embedding_csv(path, values)
        np.testing.assert_array_equal(load_embedding(path, 3), values)
        with self.assertRaises(DataError):
            load_embedding(path, 4)

    def test_labels_align_to_cell_order(self) -> None:
        path = self.root / "labels.csv"
        write_labels_csv(path, ["c1", "c2", "c3"], ["T", "B", "T"])
        labels, names = load_labels(path, ["c3", "c2", "c1"])
        self.assertEqual(names, ("T", "B"))
        np.testing.assert_array_equal(labels, [0, 1, 0])

    def test_missing_label_is_an_error(self) -> None:
        path = self.root / "labels.csv"
        write_labels_csv(path, ["c1"], ["T"])
        with self.assertRaises(DataError):
            load_labels(path, ["c1", "c2"])


class GmtTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.path = Path(self._tmp.name) / "db.gmt"

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_duplicate_genes_are_collapsed(self) -> None:
        self.path.write_text("P1\tdesc\tA\tA\tB\n", encoding="utf-8")
        db = parse_gmt(self.path)
        self.assertEqual(db.pathways[0].gene_set, frozenset({"A", "B"}))

    def test_order_is_preserved(self) -> None:
        self.path.write_text("P3\tx\tA\nP1\tx\tB\tC\n\nP2\tx\tD\n", encoding="utf-8")
        self.assertEqual(parse_gmt(self.path).names, ["P3", "P1", "P2"])

    def test_malformed_lines_raise_with_line_number(self) -> None:
        self.path.write_text("P1\tdesc\tA\nP2\tdesc\n", encoding="utf-8")
        with self.assertRaises(DataError) as ctx:
            parse_gmt(self.path)
        self.assertEqual(ctx.exception.line, 2)
        self.path.write_text("P1\tdesc\tA\nP1\tdesc\tB\n", encoding="utf-8")
        with self.assertRaises(DataError):
            parse_gmt(self.path)

    def test_write_then_parse(self) -> None:
        db = PathwayDB(pathways=(Pathway("P1", ("A", "B")), Pathway("P2", ("C",))))
        write_gmt(self.path, db)
        self.assertEqual(parse_gmt(self.path), db)


class DatasetTests(unittest.TestCase):
    def test_validation(self) -> None:
        with self.assertRaises(DataError):
            Dataset(expression=np.ones((2, 2)), gene_names=("A",), cell_ids=("c1", "c2"))
        with self.assertRaises(DataError):
            Dataset(expression=-np.ones((1, 1)), gene_names=("A",), cell_ids=("c1",))
        with self.assertRaises(DataError):
            Dataset(
                expression=np.ones((2, 1)),
                gene_names=("A",),
                cell_ids=("c1", "c2"),
                external=np.ones((3, 4)),
            )

    def test_restrict_to_vocabulary(self) -> None:
        db = PathwayDB(pathways=(Pathway("P1", ("A", "Z")), Pathway("P2", ("Y",))))
        restricted = db.restrict_to(["A", "B"])
        self.assertEqual(restricted.names, ["P1"])
        self.assertEqual(restricted.pathways[0].genes, ("A",))


if __name__ == "__main__":
    unittest.main()
