import os
import random
import tempfile
import unittest

from sympy import Matrix

from exact_linalg import IntMatrix
from number_field import (
    FieldSpec,
    IdealQuotient,
    MuVerdict,
    Order,
    admissibility_modulus,
    admissible_moduli,
    bundled_spec_names,
    check_structure_constants,
    exact_quotient,
    field_summary,
    ideal_membership,
    is_admissible,
    load_field,
    load_field_spec,
    open_field,
    quotient,
    real_places,
    smallest_admissible,
    verify_mu_maximality,
)
from utils.errors import (
    BasisNotClosed,
    ComputationError,
    NotMonic,
    NotSquarefree,
    SpecFormatError,
    SpecValidationError,
    ZetaNotIntegral,
    ZetaOrderWrong,
)


def _gaussian_mapping(**overrides):
    data = {
        "name": "gaussian-test",
        "degree": 2,
        "poly": [1, 0, 1],
        "integral_basis": [["1", "0"], ["0", "1"]],
        "zeta": ["0", "1"],
        "m": 4,
    }
    data.update(overrides)
    return data


class TestSpecLoading(unittest.TestCase):
    def test_bundled_fields(self):
        names = bundled_spec_names()
        for name in ("rationals", "gaussian", "eisenstein", "sqrt2", "cbrt2", "zeta5"):
            self.assertIn(name, names)
        for name in names:
            o = open_field(name)
            self.assertEqual(len(o.zeta_coords), o.n)

    def test_toml_file_round_trip(self):
        spec = FieldSpec.from_mapping(_gaussian_mapping())
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "g.toml")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write('name = "g"\ndegree = 2\npoly = [1, 0, 1]\n')
                fh.write('integral_basis = [["1", "0"], ["0", "1"]]\nzeta = ["0", "1"]\nm = 4\n')
            loaded = load_field_spec(path)
        self.assertEqual(loaded.poly, spec.poly)
        self.assertEqual(loaded.zeta, spec.zeta)

    def test_missing_key(self):
        data = _gaussian_mapping()
        del data["zeta"]
        with self.assertRaises(SpecFormatError):
            FieldSpec.from_mapping(data)

    def test_bad_rational(self):
        with self.assertRaises(SpecFormatError):
            FieldSpec.from_mapping(_gaussian_mapping(zeta=["0", "one"]))

    def test_unknown_spec_name(self):
        with self.assertRaises(SpecValidationError):
            open_field("no-such-field")

    def test_validation_errors(self):
        cases = [
            (NotMonic, _gaussian_mapping(poly=[1, 0, 2])),
            (NotSquarefree, _gaussian_mapping(poly=[1, 2, 1])),
            (ZetaOrderWrong, _gaussian_mapping(m=2)),
            (ZetaNotIntegral, _gaussian_mapping(integral_basis=[["1", "0"], ["0", "2"]])),
        ]
        for error, data in cases:
            with self.subTest(error=error.__name__):
                with self.assertRaises(error):
                    load_field(FieldSpec.from_mapping(data))

    def test_basis_not_closed(self):
        data = {
            "name": "half-sqrt2",
            "degree": 2,
            "poly": [-2, 0, 1],
            "integral_basis": [["1", "0"], ["0", "1/2"]],
            "zeta": ["-1", "0"],
            "m": 2,
        }
        with self.assertRaises(BasisNotClosed):
            load_field(FieldSpec.from_mapping(data))

    def test_structure_constants_checked(self):
        def order(structure):
            return Order("bad", 2, 2, (1, 0, 1), structure, (1, 0), IntMatrix.identity(2), ())

        non_commutative = (((1, 0), (0, 1)), ((1, 0), (1, 0)))
        with self.assertRaises(SpecFormatError):
            check_structure_constants(order(non_commutative))
        # ω_0² = ω_1，ω_1² = ω_0，交叉项为零
        non_associative = (((0, 1), (0, 0)), ((0, 0), (1, 0)))
        with self.assertRaises(SpecFormatError):
            check_structure_constants(order(non_associative))
        check_structure_constants(open_field("sqrt2"))


class TestArithmetic(unittest.TestCase):
    def setUp(self):
        self.o = open_field("gaussian")

    def test_zeta_has_order_m(self):
        z = self.o.zeta
        self.assertEqual(self.o.power(z, 4), self.o.one())
        self.assertNotEqual(self.o.power(z, 2), self.o.one())

    def test_norm(self):
        x = self.o.element((1, -1))
        self.assertEqual(self.o.norm(x), 2)
        self.assertEqual(self.o.norm(self.o.element((3, 4))), 25)

    def test_ideal_membership(self):
        one_minus_i = self.o.element((1, -1))
        self.assertTrue(ideal_membership(self.o, self.o.integer(2), one_minus_i))
        self.assertFalse(ideal_membership(self.o, self.o.one(), one_minus_i))
        q = exact_quotient(self.o, self.o.integer(2), one_minus_i)
        self.assertEqual(self.o.mul(q, one_minus_i), self.o.integer(2))

    def test_ideal_quotient(self):
        quot = IdealQuotient(self.o, self.o.element((1, -1)))
        self.assertEqual(quot.size, 2)
        self.assertEqual(len(list(quot.elements())), 2)
        self.assertTrue(quot.contains(self.o.element((1, 1))))

    def test_quotient_ring_indexing(self):
        quot = quotient(self.o, 3)
        self.assertEqual(quot.size, 9)
        for idx in range(quot.size):
            self.assertEqual(quot.index(quot.element(idx)), idx)
        with self.assertRaises(ComputationError):
            quotient(self.o, 1)


class TestIdealMembershipRandom(unittest.TestCase):
    FIELDS = ("gaussian", "sqrt2")

    @staticmethod
    def _element(o, rng, bound):
        return o.element(tuple(rng.randint(-bound, bound) for _ in range(o.n)))

    def _nonzero(self, o, rng, bound):
        a = o.zero()
        while a.is_zero():
            a = self._element(o, rng, bound)
        return a

    def test_membership_matches_rational_solve(self):
        rng = random.Random(11)
        for name in self.FIELDS:
            o = open_field(name)
            with self.subTest(field=name):
                for _ in range(40):
                    a = self._nonzero(o, rng, 3)
                    x = self._element(o, rng, 6)
                    # a·y = x 在 ℚ 上有唯一解，x ∈ aR 当且仅当解是整数
                    solution = Matrix(o.mult_matrix(a).to_lists()).LUsolve(Matrix(list(x.coords)))
                    expected = all(v.is_integer for v in solution)
                    self.assertEqual(ideal_membership(o, x, a), expected)
                    self.assertEqual(exact_quotient(o, x, a) is not None, expected)

                    y = self._element(o, rng, 3)
                    self.assertTrue(ideal_membership(o, o.mul(a, y), a))
                    self.assertEqual(exact_quotient(o, o.mul(a, y), a), y)

    def test_quotient_classes_partition_ring(self):
        rng = random.Random(12)
        for name in self.FIELDS:
            o = open_field(name)
            with self.subTest(field=name):
                for _ in range(10):
                    a = self._nonzero(o, rng, 2)
                    quot = IdealQuotient(o, a)
                    reps = list(quot.elements())
                    self.assertEqual(len(reps), abs(o.norm(a)))
                    for _ in range(5):
                        x = self._element(o, rng, 5)
                        hits = [e for e in reps if ideal_membership(o, x - e, a)]
                        self.assertEqual(len(hits), 1)
                        self.assertEqual(quot.contains(x), ideal_membership(o, x, a))


class TestInvariants(unittest.TestCase):
    def test_real_places(self):
        self.assertEqual(real_places([1, 0, 1]), 0)
        self.assertEqual(real_places([-2, 0, 1]), 2)
        self.assertEqual(real_places([-2, 0, 0, 1]), 1)
        self.assertEqual(real_places([1, 1, 1, 1, 1]), 0)

    def test_admissibility(self):
        expected = {"rationals": 2, "sqrt2": 2, "cbrt2": 2, "gaussian": 4, "eisenstein": 6}
        for name, c in expected.items():
            with self.subTest(field=name):
                self.assertEqual(smallest_admissible(open_field(name)), c)

    def test_gaussian_moduli(self):
        o = open_field("gaussian")
        self.assertFalse(is_admissible(o, 2))
        self.assertTrue(is_admissible(o, 4))
        self.assertEqual(admissible_moduli(o, 100), [4, 8])
        self.assertEqual(abs(o.norm(admissibility_modulus(o))), 8)

    def test_eisenstein_modulus_norm(self):
        o = open_field("eisenstein")
        self.assertEqual(abs(o.norm(admissibility_modulus(o))), 12)

    def test_mu_maximality(self):
        for name in ("rationals", "gaussian", "sqrt2"):
            with self.subTest(field=name):
                self.assertNotEqual(verify_mu_maximality(open_field(name)), MuVerdict.FAILED)

    def test_mu_not_maximal(self):
        # ℤ[i] 只声明 ±1
        o = load_field(FieldSpec.from_mapping(_gaussian_mapping(name="gaussian-pm1", zeta=["-1", "0"], m=2)))
        self.assertEqual(verify_mu_maximality(o), MuVerdict.FAILED)

    def test_field_summary(self):
        summary = field_summary(open_field("sqrt2"))
        self.assertEqual(summary["real_places"], 2)
        self.assertEqual(summary["discriminant"], "8")
        self.assertEqual(summary["smallest_admissible_c"], 2)


if __name__ == "__main__":
    unittest.main()
