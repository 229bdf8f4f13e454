import random
import unittest

from exact_linalg import (
    IntMatrix,
    Lattice,
    cokernel,
    hnf,
    hnf_pivots,
    inverse_unimodular,
    kernel_basis,
    lattice_in,
    quotient_group,
    rank,
    relative_coordinates,
    saturate,
    saturation_index,
    snf,
    snf_diagonal,
    solve_integer,
    stable_rank,
)
from utils.errors import ComputationError, DimensionMismatch


def _random_matrix(rng: random.Random, rows: int, cols: int) -> IntMatrix:
    return IntMatrix.from_rows([[rng.randint(-6, 6) for _ in range(cols)] for _ in range(rows)], cols)


class TestIntMatrix(unittest.TestCase):
    def test_arithmetic(self):
        a = IntMatrix.from_rows([[1, 2], [3, 4]])
        self.assertEqual(a.det(), -2)
        self.assertEqual(a @ IntMatrix.identity(2), a)
        self.assertEqual((a - a).is_zero(), True)
        self.assertEqual(a.power(2), a @ a)
        self.assertEqual(a.apply((1, 1)), (3, 7))

    def test_from_columns_matches_transpose(self):
        a = IntMatrix.from_columns([[1, 2, 3], [4, 5, 6]], 3)
        self.assertEqual(a.rows, 3)
        self.assertEqual(a.cols, 2)
        self.assertEqual(a.transpose(), IntMatrix.from_rows([[1, 2, 3], [4, 5, 6]]))

    def test_json_uses_strings(self):
        a = IntMatrix.from_rows([[10 ** 30, -1]])
        self.assertEqual(a.to_json(), [[str(10 ** 30), "-1"]])
        self.assertEqual(IntMatrix.from_json(a.to_json()), a)

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            IntMatrix.identity(2) + IntMatrix.identity(3)


class TestNormalForms(unittest.TestCase):
    def setUp(self):
        self.rng = random.Random(7)

    def test_hnf_is_unimodular_transform(self):
        for _ in range(30):
            m = _random_matrix(self.rng, 3, 4)
            h, u = hnf(m)
            self.assertEqual(m @ u, h)
            self.assertIn(u.det(), (1, -1))
            pivots = hnf_pivots(m)
            for p, col in pivots:
                piv = h[p, col]
                self.assertGreater(piv, 0)
                self.assertTrue(all(h[p, j] == 0 for j in range(col + 1, h.cols)))
                self.assertTrue(all(0 <= h[p, j] < piv for j in range(col)))
            for j in range(len(pivots), h.cols):
                self.assertEqual(h.column(j), (0,) * h.rows)

    def test_snf_known_example(self):
        m = IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
        self.assertEqual(snf_diagonal(m), [2, 6, 12])

    def test_snf_divisibility_and_transform(self):
        for _ in range(30):
            m = _random_matrix(self.rng, 3, 3)
            d, u, v = snf(m)
            self.assertEqual(u @ m @ v, d)
            diag = [d[i, i] for i in range(3)]
            for a, b in zip(diag, diag[1:]):
                if a:
                    self.assertEqual(b % a, 0)
                else:
                    self.assertEqual(b, 0)

    def test_rank_and_stable_rank(self):
        nilpotent = IntMatrix.from_rows([[0, 1], [0, 0]])
        self.assertEqual(rank(nilpotent), 1)
        self.assertEqual(stable_rank(nilpotent), 0)
        self.assertEqual(stable_rank(IntMatrix.from_rows([[3, 1], [0, 0]])), 1)

    def test_inverse_unimodular(self):
        u = IntMatrix.from_rows([[2, 1], [1, 1]])
        self.assertTrue((u @ inverse_unimodular(u)).is_identity())
        with self.assertRaises(ComputationError):
            inverse_unimodular(IntMatrix.from_rows([[2, 0], [0, 1]]))


class TestSolving(unittest.TestCase):
    def test_solve_integer(self):
        m = IntMatrix.from_rows([[2, 0], [0, 3]])
        self.assertEqual(solve_integer(m, (4, 9)), (2, 3))
        self.assertIsNone(solve_integer(m, (1, 0)))

    def test_solve_dependent_columns(self):
        m = IntMatrix.from_rows([[2, 4, 6]])
        y = solve_integer(m, (10,))
        self.assertIsNotNone(y)
        self.assertEqual(m.apply(y), (10,))

    def test_kernel_basis(self):
        m = IntMatrix.from_rows([[1, 1, 0], [0, 2, 2]])
        k = kernel_basis(m)
        self.assertEqual(k.cols, 1)
        self.assertTrue((m @ k).is_zero())


class TestLattices(unittest.TestCase):
    def test_saturate(self):
        l = Lattice.span(IntMatrix.from_columns([[2, 4]], 2))
        self.assertFalse(l.contains((1, 2)))
        self.assertTrue(saturate(l).contains((1, 2)))

    def test_saturation_laws(self):
        rng = random.Random(17)
        box = [-2, -1, 0, 1, 2]
        checked = 0
        while checked < 25:
            cols = [[rng.randint(-4, 4) * rng.choice([1, 2, 3]) for _ in range(3)] for _ in range(rng.randint(1, 3))]
            l = Lattice.span(IntMatrix.from_columns(cols, 3))
            if l.rank == 0:
                continue
            checked += 1
            sat = saturate(l)
            self.assertEqual(saturate(sat), sat)
            self.assertEqual(sat.rank, l.rank)
            self.assertTrue(lattice_in(l, sat))
            index = saturation_index(l)
            self.assertEqual(abs(relative_coordinates(l, sat).det()), index)
            self.assertEqual(saturation_index(sat), 1)
            self.assertEqual(quotient_group(Lattice.full(3), sat).torsion, ())
            # sat/l 的指数整除 index
            for x in box:
                for y in box:
                    for z in box:
                        v = (x, y, z)
                        self.assertEqual(sat.contains(v), l.contains(tuple(index * t for t in v)))

    def test_cokernel(self):
        g = cokernel(IntMatrix.diagonal([2, 3, 0]))
        self.assertEqual(g.free_rank, 1)
        self.assertEqual(g.torsion, (6,))
        self.assertEqual(g.describe(), "ℤ ⊕ ℤ/6")
        self.assertFalse(g.is_annihilated_by(6))

    def test_quotient_group(self):
        sup = Lattice.full(2)
        sub = Lattice.span(IntMatrix.from_columns([[2, 0], [0, 4]], 2))
        g = quotient_group(sup, sub)
        self.assertEqual((g.free_rank, g.torsion), (0, (2, 4)))
        self.assertTrue(g.is_annihilated_by(4))
        self.assertFalse(g.is_annihilated_by(2))


if __name__ == "__main__":
    unittest.main()
