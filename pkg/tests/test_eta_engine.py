import unittest
from fractions import Fraction

from eta_engine import (
    affine_permutation,
    all_invariant_ranks,
    check_multiplicativity,
    cycle_classes,
    delta,
    eta_matrix,
    fin_cycle_census_check,
    finite_basis,
    inf_ranks,
    molien_alternating_check,
    rank_k_inf,
    verify_eta_shape,
)
from k0_classes import K0Label
from number_field import open_field
from selftest import gaussian_brute_force_column
from utils.errors import NotAdmissible


class TestInfiniteRanks(unittest.TestCase):
    def test_known_ranks(self):
        expected = {
            "rationals": ((1, 0), [1], 0),
            "sqrt2": ((1, 0, 1), [1, 1], 1),
            "cbrt2": ((1, 0, 3, 0), [1, 3], 0),
            "gaussian": ((1, 0, 1), [1, 1], 1),
            "eisenstein": ((1, 0, 1), [1, 1], 1),
        }
        for name, (hat, d, dl) in expected.items():
            with self.subTest(field=name):
                o = open_field(name)
                self.assertEqual(all_invariant_ranks(o), hat)
                self.assertEqual(inf_ranks(o), d)
                self.assertEqual(delta(o), dl)
                self.assertEqual(rank_k_inf(o), sum(d))

    def test_molien_alternating_sum(self):
        for name in ("rationals", "sqrt2", "cbrt2", "gaussian", "eisenstein", "zeta5"):
            with self.subTest(field=name):
                ok, lhs, rhs = molien_alternating_check(open_field(name))
                self.assertTrue(ok)
                self.assertEqual(lhs, rhs)

    def test_gaussian_alternating_value(self):
        _, lhs, _ = molien_alternating_check(open_field("gaussian"))
        # (0 + 2 + 4 + 2) / 4
        self.assertEqual(lhs, Fraction(2))


class TestAffinePermutation(unittest.TestCase):
    def test_worked_census(self):
        o = open_field("gaussian")
        perm = affine_permutation(o, 4, o.zero(), 1)
        self.assertTrue(perm.is_bijection())
        self.assertEqual(perm.census(), {1: 2, 2: 1, 4: 3})
        self.assertEqual(sum(len(c) for c in perm.cycles()), 16)

    def test_cycles_start_at_minimum(self):
        o = open_field("eisenstein")
        perm = affine_permutation(o, 6, o.element((1, 2)), 1)
        for cycle in perm.cycles():
            self.assertEqual(cycle[0], min(cycle))

    def test_inadmissible_c(self):
        o = open_field("gaussian")
        with self.assertRaises(NotAdmissible):
            cycle_classes(o, 2, o.zero(), 1, 1)


class TestEtaMatrix(unittest.TestCase):
    def test_gaussian_worked_column(self):
        o = open_field("gaussian")
        for chi in range(4):
            with self.subTest(chi=chi):
                _, expected = gaussian_brute_force_column(o, chi)
                self.assertEqual(cycle_classes(o, 4, o.zero(), 1, chi), expected)

    def test_gaussian_shape(self):
        o = open_field("gaussian")
        eta = eta_matrix(o, 4)
        verify_eta_shape(eta)
        self.assertEqual(len(eta.basis), len(finite_basis(o)))
        self.assertEqual(len(eta.basis), 8)
        self.assertEqual(eta.column(K0Label.unit()).coefficient(K0Label.unit()), 16)
        self.assertEqual(eta.inf_diagonal(), ["c^2", "c^0"])
        self.assertEqual(eta.full_matrix().rows, 9)

    def test_diagonal_certificate(self):
        eta = eta_matrix(open_field("gaussian"), 4)
        exps = eta.diagonal_exponents()
        self.assertEqual(exps[0], 2)
        self.assertEqual(exps[1], 0)
        self.assertEqual(exps.count(None), 4)
        self.assertEqual(exps[-3:], [0, 0, 0])

    def test_fin_columns_are_unit_multiples(self):
        moduli = {"rationals": 2, "sqrt2": 2, "cbrt2": 2, "gaussian": 4, "eisenstein": 6}
        for name, c in moduli.items():
            with self.subTest(field=name):
                self.assertTrue(fin_cycle_census_check(open_field(name), c))

    def test_multiplicativity(self):
        self.assertTrue(check_multiplicativity(open_field("rationals"), 2, 4))
        self.assertTrue(check_multiplicativity(open_field("sqrt2"), 2, 2))
        self.assertTrue(check_multiplicativity(open_field("gaussian"), 4, 4))

    def test_odd_degree_has_no_fixed_inf_direction(self):
        eta = eta_matrix(open_field("cbrt2"), 2)
        self.assertNotIn("c^0", eta.inf_diagonal())

    def test_json_is_deterministic(self):
        eta = eta_matrix(open_field("rationals"), 2)
        data = eta.to_json()
        self.assertEqual(data["c"], 2)
        self.assertEqual(data["basis"][0], "[1]")
        self.assertEqual(data, eta_matrix(open_field("rationals"), 2).to_json())


if __name__ == "__main__":
    unittest.main()
