import random
import unittest
from fractions import Fraction

from exact_linalg import IntMatrix
from limit_tower import (
    PRIOR_WORK_NOTE,
    BetaAction,
    DegreeAction,
    GradedGroup,
    GroupPart,
    TelescopeSystem,
    ad_action,
    eta_telescope,
    exterior_ranks,
    finite_adelic_k,
    full_k_theory,
    gamma_tower,
    group_algebra_k,
    normalize_torsion,
    pv_step,
    stable_rank_oracle,
    subalgebra_k,
    telescope_colimit,
)
from eta_engine import eta_matrix
from number_field import open_field, smallest_admissible
from utils.errors import CertificateMismatch, NotAdmissible, ShapeMismatch, UncertifiedIntegralRequest


class TestGroupParts(unittest.TestCase):
    def test_normalize_torsion(self):
        self.assertEqual(normalize_torsion([2, 3]), (6,))
        self.assertEqual(normalize_torsion([4, 2, 1, 0]), (2, 4))
        self.assertEqual(normalize_torsion([]), ())

    def test_describe(self):
        self.assertEqual(GroupPart(q_rank=1, z_rank=4).describe(), "ℚ ⊕ ℤ^4")
        self.assertEqual(GroupPart().describe(), "0")
        self.assertEqual(GradedGroup(GroupPart(torsion=(2,)), GroupPart(z_rank=1)).describe(), "(ℤ/2, ℤ)")

    def test_json(self):
        data = GradedGroup.free(2, 3).to_json()
        self.assertEqual(data["K0"], {"q_rank": 0, "z_rank": 2, "torsion": []})
        self.assertEqual(data["text"], "(ℤ^2, ℤ^3)")


class TestTelescope(unittest.TestCase):
    def test_certified_colimit(self):
        system = TelescopeSystem(IntMatrix.from_rows([[4, 1], [0, 1]]), 2, (2, 0))
        self.assertEqual(telescope_colimit(system), GradedGroup(GroupPart(q_rank=1, z_rank=1), GroupPart()))
        self.assertEqual(stable_rank_oracle(system), (1, 1))

    def test_nilpotent_directions_vanish(self):
        system = TelescopeSystem(IntMatrix.from_rows([[0, 1], [0, 0]]), 3, (None, None))
        self.assertEqual(telescope_colimit(system), GradedGroup())

    def test_certificate_mismatch(self):
        with self.assertRaises(CertificateMismatch):
            TelescopeSystem(IntMatrix.from_rows([[4, 0], [1, 1]]), 2, (2, 0))
        with self.assertRaises(CertificateMismatch):
            TelescopeSystem(IntMatrix.from_rows([[4, 0], [0, 1]]), 2, (1, 0))

    def test_uncertified_requests(self):
        system = TelescopeSystem.with_inferred_certificate(IntMatrix.from_rows([[3, 0], [0, 1]]), 2)
        self.assertIsNone(system.certificate)
        with self.assertRaises(UncertifiedIntegralRequest):
            telescope_colimit(system)
        rational = telescope_colimit(system, invert_all_primes=False)
        self.assertEqual(rational.even, GroupPart(q_rank=2))

    def test_inferred_certificate(self):
        system = TelescopeSystem.with_inferred_certificate(IntMatrix.from_rows([[9, 5, 1], [0, 1, 2], [0, 0, 0]]), 3)
        self.assertEqual(system.certificate, (2, 0, None))

    def test_non_square(self):
        with self.assertRaises(ShapeMismatch):
            TelescopeSystem(IntMatrix.from_rows([[1, 2]]), 2)

    def test_oracle_reads_matrix_only(self):
        jordan = TelescopeSystem(IntMatrix.from_rows([[1, 3, 0], [0, 1, 0], [0, 0, 4]]), 2, (0, 0, 2))
        self.assertEqual(stable_rank_oracle(jordan), (1, 2))
        self.assertEqual(telescope_colimit(jordan), GradedGroup(GroupPart(q_rank=1, z_rank=2), GroupPart()))
        # 下三角，无证书；广义 1-特征格由 (3, -5) 张成
        lower = TelescopeSystem(IntMatrix.from_rows([[1, 0], [5, 4]]), 2)
        self.assertIsNone(lower.certificate)
        self.assertEqual(stable_rank_oracle(lower), (1, 1))
        hyperbolic = TelescopeSystem(IntMatrix.from_rows([[2, 1], [1, 1]]), 2)
        self.assertEqual(stable_rank_oracle(hyperbolic), (2, 0))

    def test_random_upper_triangular_against_oracle(self):
        rng = random.Random(3)
        for _ in range(40):
            c = rng.randint(2, 7)
            exps = [rng.choice([None, 0, 1, 2]) for _ in range(4)]
            rows = [[0] * 4 for _ in range(4)]
            for i, e in enumerate(exps):
                rows[i][i] = 0 if e is None else c ** e
                for j in range(i + 1, 4):
                    rows[i][j] = rng.randint(-4, 4)
            system = TelescopeSystem(IntMatrix.from_rows(rows), c, tuple(exps))
            colimit = telescope_colimit(system)
            self.assertEqual((colimit.even.q_rank, colimit.even.z_rank), stable_rank_oracle(system))

    def test_eta_telescope_marks_unknown_entries(self):
        eta = eta_matrix(open_field("gaussian"), 4)
        system = eta_telescope(eta)
        self.assertEqual(system.matrix.rows, 9)
        self.assertTrue(all(row == 1 for row, _ in system.unknown_entries))
        self.assertEqual(len(system.unknown_entries), 8)


class TestPimsnerVoiculescu(unittest.TestCase):
    def test_rational_directions_cancel(self):
        k = GradedGroup(GroupPart(q_rank=3, z_rank=2), GroupPart())
        beta = BetaAction(DegreeAction((Fraction(1, 4),) * 3, IntMatrix.identity(2)), DegreeAction())
        self.assertEqual(pv_step(k, beta), GradedGroup.free(2, 2))

    def test_sign_action_gives_torsion(self):
        k = GradedGroup(GroupPart(z_rank=1), GroupPart())
        beta = BetaAction(DegreeAction((), IntMatrix.from_rows([[-1]])), DegreeAction())
        self.assertEqual(pv_step(k, beta), GradedGroup(GroupPart(torsion=(2,)), GroupPart()))

    def test_shape_checked(self):
        k = GradedGroup(GroupPart(q_rank=2), GroupPart())
        with self.assertRaises(ShapeMismatch):
            pv_step(k, BetaAction(DegreeAction((Fraction(1, 2),)), DegreeAction()))

    def test_gamma_tower_doubles(self):
        k = GradedGroup.free(3, 3)
        self.assertEqual(gamma_tower(k, 0), k)
        self.assertEqual(gamma_tower(k, 3), GradedGroup.free(24, 24))
        with self.assertRaises(ShapeMismatch):
            gamma_tower(k, -1)

    def test_ad_action(self):
        eta = eta_matrix(open_field("gaussian"), 4)
        beta = ad_action(eta)
        self.assertEqual(beta.even.q_diagonal, (Fraction(1, 16),))
        self.assertEqual(beta.even.z_matrix, IntMatrix.identity(4))

    def test_exterior_ranks(self):
        ranks = exterior_ranks(4, 2)
        self.assertEqual(ranks["even"], 8)
        self.assertEqual(ranks["odd"], 8)
        self.assertEqual([t["rank"] for t in ranks["terms"]], [4, 8, 4])


class TestKTheory(unittest.TestCase):
    def test_subalgebra(self):
        expected = {
            "gaussian": GroupPart(q_rank=1, z_rank=4),
            "sqrt2": GroupPart(q_rank=1, z_rank=2),
            "cbrt2": GroupPart(q_rank=4, z_rank=1),
            "rationals": GroupPart(q_rank=1, z_rank=1),
            "eisenstein": GroupPart(q_rank=1, z_rank=6),
        }
        for name, even in expected.items():
            with self.subTest(field=name):
                o = open_field(name)
                self.assertEqual(subalgebra_k(o, smallest_admissible(o)), GradedGroup(even, GroupPart()))

    def test_subalgebra_requires_admissible(self):
        with self.assertRaises(NotAdmissible):
            subalgebra_k(open_field("gaussian"), 2)

    def test_gaussian_pipeline(self):
        o = open_field("gaussian")
        for depth in range(3):
            result = full_k_theory(o, 4, depth)
            self.assertEqual(result.first_pv, GradedGroup.free(4, 4))
            self.assertEqual(result.tower, GradedGroup.free(4 * 2 ** depth, 4 * 2 ** depth))
            self.assertEqual(result.formula, "ℤ^4 ⊗ Λ(Γ)")
        self.assertEqual([b.name for b in result.branches], ["mu", "real-places-even"])

    def test_real_place_split(self):
        expected = {"sqrt2": "ℤ^2 ⊗ Λ(Γ)", "cbrt2": "Λ(Γ)", "rationals": "Λ(Γ)"}
        for name, formula in expected.items():
            with self.subTest(field=name):
                o = open_field(name)
                result = full_k_theory(o, smallest_admissible(o), 1)
                self.assertEqual(result.formula, formula)
                self.assertEqual(len(result.branches), 1)
                self.assertIn(PRIOR_WORK_NOTE, result.notes)

    def test_eisenstein_paths_agree(self):
        result = full_k_theory(open_field("eisenstein"), 6, 1)
        self.assertEqual(result.formula, "ℤ^6 ⊗ Λ(Γ)")
        self.assertEqual(len({b.truncated for b in result.branches}), 1)

    def test_result_json(self):
        data = full_k_theory(open_field("gaussian"), 4, 1).to_json()
        self.assertEqual(data["gamma_tower"]["text"], "(ℤ^8, ℤ^8)")
        self.assertEqual(data["subalgebra_k"]["text"], "(ℚ ⊕ ℤ^4, 0)")
        self.assertEqual(data["exterior"]["even"], 8)

    def test_finite_adelic_side(self):
        o = open_field("gaussian")
        sides = finite_adelic_k(o)
        self.assertEqual(len(sides), 2)
        for k in sides.values():
            self.assertEqual(k, subalgebra_k(o, 4))

    def test_group_algebra(self):
        data = group_algebra_k(open_field("sqrt2"), 2)
        self.assertEqual(data["formula"], "ℤ^2 ⊗ Λ(Γ)")
        self.assertEqual(data["truncated"]["text"], "(ℤ^8, ℤ^8)")


if __name__ == "__main__":
    unittest.main()
