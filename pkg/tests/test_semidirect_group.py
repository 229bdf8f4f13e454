import random
import unittest

from k0_classes import K0Label, K0Vector
from number_field import OrderElement, open_field
from semidirect_group import (
    SemidirectElement,
    brute_force_maximal_classes,
    conjugacy_label,
    conjugate,
    embed_in_maximal,
    enumerate_maximal_classes,
    expand_character,
    identity,
    inverse,
    multiply,
    mu_label,
    order,
    power,
    spectral_class,
)
from utils.errors import InfiniteOrderGenerator


class TestGroupLaw(unittest.TestCase):
    def setUp(self):
        self.o = open_field("gaussian")
        self.rng = random.Random(11)

    def _random_element(self) -> SemidirectElement:
        return SemidirectElement(self.o.element((self.rng.randint(-4, 4), self.rng.randint(-4, 4))), self.rng.randrange(4))

    def test_inverse_and_associativity(self):
        for _ in range(50):
            g, h, k = (self._random_element() for _ in range(3))
            self.assertEqual(multiply(self.o, g, inverse(self.o, g)), identity(self.o))
            self.assertEqual(
                multiply(self.o, multiply(self.o, g, h), k),
                multiply(self.o, g, multiply(self.o, h, k)),
            )

    def test_power_matches_repeated_product(self):
        g = SemidirectElement(self.o.element((2, -1)), 1)
        acc = identity(self.o)
        for k in range(6):
            self.assertEqual(power(self.o, g, k), acc)
            acc = multiply(self.o, acc, g)
        self.assertEqual(power(self.o, g, -1), inverse(self.o, g))

    def test_orders(self):
        self.assertEqual(order(self.o, SemidirectElement(self.o.element((3, 1)), 1)), 4)
        self.assertEqual(order(self.o, SemidirectElement(self.o.element((3, 1)), 2)), 2)
        self.assertEqual(order(self.o, identity(self.o)), 1)
        self.assertIsNone(order(self.o, SemidirectElement(self.o.element((1, 0)), 0)))

    def test_label_is_conjugation_invariant(self):
        for _ in range(40):
            g = self._random_element()
            if g.i == 0:
                continue
            d = self._random_element()
            c = conjugate(self.o, d, g)
            self.assertEqual(conjugacy_label(self.o, g.b, g.i), conjugacy_label(self.o, c.b, c.i))

    def test_pure_translation_has_no_label(self):
        with self.assertRaises(InfiniteOrderGenerator):
            conjugacy_label(self.o, self.o.element((1, 0)), 0)


class TestMaximalClasses(unittest.TestCase):
    def test_known_counts(self):
        # ℤ: 无限二面体群；ℤ[i]、ℤ[ω]: 壁纸群 p4、p6
        expected = {
            "rationals": [2, 2],
            "sqrt2": [2, 2, 2, 2],
            "cbrt2": [2] * 8,
            "gaussian": [4, 4, 2],
            "eisenstein": [6, 3, 2],
        }
        for name, orders in expected.items():
            with self.subTest(field=name):
                o = open_field(name)
                classes = enumerate_maximal_classes(o)
                self.assertTrue(classes[0].is_mu())
                self.assertEqual(sorted((l.order(o.m) for l in classes), reverse=True), orders)

    def test_matches_brute_force(self):
        for name in ("rationals", "sqrt2", "gaussian", "eisenstein"):
            with self.subTest(field=name):
                o = open_field(name)
                self.assertEqual(enumerate_maximal_classes(o), brute_force_maximal_classes(o))

    def test_embed_rotation_about_origin(self):
        o = open_field("gaussian")
        label, k = embed_in_maximal(o, o.zero().coords, 2)
        self.assertEqual(label, mu_label(o))
        self.assertEqual(k, 2)


class TestSpectralClasses(unittest.TestCase):
    def test_generator_character(self):
        o = open_field("gaussian")
        self.assertEqual(spectral_class(o, o.zero(), 1, 1), K0Vector.of(K0Label.mu(1)))

    def test_trivial_character_rewrites_through_unit(self):
        o = open_field("gaussian")
        got = expand_character(o, mu_label(o), 1, 0)
        expected = K0Vector.from_dict({K0Label.unit(): 1, K0Label.mu(1): -1, K0Label.mu(2): -1, K0Label.mu(3): -1})
        self.assertEqual(got, expected)

    def test_subgroup_character_sums_over_extensions(self):
        o = open_field("gaussian")
        # ⟨ζ^2⟩ ⊂ μ 上的非平凡特征标延拓为 χ1 与 χ3
        got = spectral_class(o, o.zero(), 2, 1)
        self.assertEqual(got, K0Vector.from_dict({K0Label.mu(1): 1, K0Label.mu(3): 1}))

    def test_identity_projection_is_unit(self):
        o = open_field("gaussian")
        self.assertEqual(spectral_class(o, o.zero(), 0, 0), K0Vector.of(K0Label.unit()))
        with self.assertRaises(InfiniteOrderGenerator):
            spectral_class(o, OrderElement((1, 0)), 0, 0)


if __name__ == "__main__":
    unittest.main()
