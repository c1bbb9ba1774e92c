# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import unittest

import numpy as np

from segmob.matrix import AdjustmentMatrix, StratificationMatrix

from .utils import SegmobTestCase

# **************************************************************************************


class TestStratificationMatrix(SegmobTestCase):
    def test_from_counts_normalises_columns(self) -> None:
        m = StratificationMatrix.from_counts([[3, 1], [1, 1]], period="BL", filter="all")
        self.assertMatrixAlmostEqual([[0.75, 0.5], [0.25, 0.5]], m.values)
        self.assertColumnsSumToOne(m.values, m.active)
        self.assertEqual(m.period, "BL")
        self.assertEqual(m.filter, "all")
        self.assertEqual(m.total_visits, 6)
        self.assertEqual(m.n_classes, 2)

    def test_empty_column_is_inactive(self) -> None:
        m = StratificationMatrix.from_counts([[2, 0, 1], [2, 0, 0], [0, 0, 3]])
        self.assertEqual(m.active.tolist(), [True, False, True])
        self.assertEqual(m.active_columns, [1, 3])
        self.assertMatrixAlmostEqual([0.0, 0.0, 0.0], m.values[:, 1])
        self.assertColumnsSumToOne(m.values, m.active)

    def test_counts_are_kept(self) -> None:
        m = StratificationMatrix.from_counts([[2, 0], [2, 5]])
        self.assertMatrixAlmostEqual([[2, 0], [2, 5]], m.counts)

    def test_diagonal_share(self) -> None:
        m = StratificationMatrix.from_counts([[3, 1], [1, 1]])
        self.assertAlmostEqual(m.get_diagonal_share(), 0.625)
        self.assertEqual(StratificationMatrix.from_counts(np.zeros((2, 2))).get_diagonal_share(), 0.0)

    def test_immutable(self) -> None:
        m = StratificationMatrix.from_counts(np.eye(3))
        with self.assertRaises(ValueError):
            m.values[0, 0] = 0.5
        with self.assertRaises(ValueError):
            m.active[0] = False

    def test_negative_counts(self) -> None:
        with self.assertRaisesRegex(ValueError, "non-negative"):
            StratificationMatrix.from_counts([[1, -1], [0, 1]])

    def test_not_square(self) -> None:
        with self.assertRaises(ValueError):
            StratificationMatrix.from_counts([[1, 2, 3], [4, 5, 6]])
        with self.assertRaises(ValueError):
            StratificationMatrix(values=np.ones(3), active=[True] * 3, counts=np.ones(3))


# **************************************************************************************


class TestAdjustmentMatrix(SegmobTestCase):
    def test_trace(self) -> None:
        s = AdjustmentMatrix(values=[[0.1, 0.0], [-0.1, -0.3]], t1="BL", t2="L1")
        self.assertAlmostEqual(s.trace, -0.2)
        self.assertEqual(s.n_classes, 2)

    def test_default_active(self) -> None:
        s = AdjustmentMatrix(values=np.zeros((3, 3)))
        self.assertEqual(s.active.tolist(), [True, True, True])

    def test_not_square(self) -> None:
        with self.assertRaises(ValueError):
            AdjustmentMatrix(values=np.zeros((2, 3)))


# **************************************************************************************

if __name__ == "__main__":
    unittest.main()

# **************************************************************************************
