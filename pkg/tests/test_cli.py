import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout

from cli import build_parser, load_limit_system, run
from number_field import open_field
from report import Report, build_analyze_report, build_ktheory_report, dumps, render_text
from selftest import acceptance_checks, run_selftest
from utils.errors import SpecFormatError


def _run(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = run(argv)
    return code, buf.getvalue()


class TestReports(unittest.TestCase):
    def test_report_defaults(self):
        report = Report(command="analyze", title="t")
        self.assertEqual(report.field_info, {})
        self.assertTrue(report.passed)
        data = report.to_json()
        self.assertEqual(data["field"], {})
        self.assertEqual(data["sections"], {})

        filled = Report(command="eta", title="t", field_info={"name": "q"}, checks={"ok": False})
        self.assertEqual(filled.to_json()["field"], {"name": "q"})
        self.assertFalse(filled.passed)

    def test_analyze_report(self):
        report = build_analyze_report(open_field("rationals"))
        self.assertTrue(report.passed)
        self.assertEqual(report.sections["inf_ranks"], [1])
        self.assertEqual(report.sections["maximal_class_count"], 2)

    def test_json_is_deterministic(self):
        o = open_field("gaussian")
        first = dumps(build_ktheory_report(o, 4, 1))
        second = dumps(build_ktheory_report(o, 4, 1))
        self.assertEqual(first, second)

    def test_text_rendering(self):
        text = render_text(build_ktheory_report(open_field("gaussian"), 4, 0))
        self.assertIn("ℤ^4 ⊗ Λ(Γ)", text)
        self.assertIn("✅ 全部通过", text)

    def test_unknown_target(self):
        with self.assertRaises(SpecFormatError):
            build_ktheory_report(open_field("gaussian"), 4, 0, "nope")

    def test_targets(self):
        o = open_field("gaussian")
        group = build_ktheory_report(o, None, 1, "group-cstar")
        self.assertEqual(group.sections["formula"], "ℤ^4 ⊗ Λ(Γ)")
        adelic = build_ktheory_report(o, None, 0, "finite-adelic")
        for value in adelic.sections.values():
            self.assertEqual(value["text"], "(ℚ ⊕ ℤ^4, 0)")


class TestCommandLine(unittest.TestCase):
    def test_parser_requires_command(self):
        with self.assertRaises(SystemExit):
            build_parser().parse_args([])

    def test_analyze(self):
        code, out = _run(["--json", "analyze", "rationals"])
        self.assertEqual(code, 0)
        data = json.loads(out)
        self.assertEqual(data["field"]["smallest_admissible_c"], 2)
        self.assertTrue(data["passed"])

    def test_ktheory_gaussian(self):
        code, out = _run(["--json", "ktheory", "gaussian", "--c", "4", "--truncate", "2"])
        self.assertEqual(code, 0)
        data = json.loads(out)
        self.assertEqual(data["sections"]["formula"], "ℤ^4 ⊗ Λ(Γ)")
        self.assertEqual(data["sections"]["gamma_tower"]["K0"]["z_rank"], 16)
        self.assertEqual(data["sections"]["pv_step"]["text"], "(ℤ^4, ℤ^4)")

    def test_eta_text(self):
        code, out = _run(["eta", "sqrt2"])
        self.assertEqual(code, 0)
        self.assertIn("η_2", out)

    def test_inadmissible_c_exits_one(self):
        code, _ = _run(["eta", "gaussian", "--c", "2"])
        self.assertEqual(code, 1)

    def test_spec_errors_exit_two(self):
        code, _ = _run(["analyze", "no-such-field"])
        self.assertEqual(code, 2)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.toml")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write('name = "bad"\ndegree = 2\npoly = [1, 0, 2]\n')
                fh.write('integral_basis = [["1", "0"], ["0", "1"]]\nzeta = ["0", "1"]\nm = 4\n')
            code, _ = _run(["analyze", path])
        self.assertEqual(code, 2)

    def test_limit(self):
        with tempfile.TemporaryDirectory() as tmp:
            certified = os.path.join(tmp, "a.json")
            with open(certified, "w", encoding="utf-8") as fh:
                json.dump({"c": 2, "matrix": [["4", "1"], ["0", "1"]]}, fh)
            code, out = _run(["--json", "limit", certified])
            self.assertEqual(code, 0)
            self.assertEqual(json.loads(out)["sections"]["colimit"]["text"], "(ℚ ⊕ ℤ, 0)")

            plain = os.path.join(tmp, "b.json")
            with open(plain, "w", encoding="utf-8") as fh:
                json.dump({"c": 2, "matrix": [[3, 0], [0, 1]]}, fh)
            code, _ = _run(["limit", plain])
            self.assertEqual(code, 1)
            code, out = _run(["--json", "limit", plain, "--rational"])
            self.assertEqual(code, 0)
            self.assertEqual(json.loads(out)["sections"]["colimit"]["K0"]["q_rank"], 2)

    def test_limit_bad_input(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "c.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump({"matrix": [[1]]}, fh)
            with self.assertRaises(SpecFormatError):
                load_limit_system(path)
            code, _ = _run(["limit", path])
        self.assertEqual(code, 2)

    def test_explicit_certificate(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "d.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump({"c": 3, "matrix": [[9, 1], [0, 0]], "diagonal_exponents": [2, None]}, fh)
            system = load_limit_system(path)
        self.assertEqual(system.certificate, (2, None))

    def test_check_doublecoset(self):
        code, out = _run(["check-doublecoset", "--group", "S3"])
        self.assertEqual(code, 0)
        self.assertEqual(out.count("✅ H#"), 36)
        self.assertIn("36 对子群，0 对未通过", out)
        self.assertNotIn("double_cosets", out)
        code, _ = _run(["check-doublecoset", "--group", "Nope"])
        self.assertEqual(code, 1)


class TestSelftest(unittest.TestCase):
    def test_check_names(self):
        names = [name for name, _ in acceptance_checks()]
        self.assertEqual(len(names), 11)
        self.assertIn("worked_column", names)

    def test_selected_checks_pass(self):
        results = run_selftest(max_points=64, only=["worked_column", "molien", "pv_identity", "cycle_census"])
        self.assertEqual([r.name for r in results], ["cycle_census", "worked_column", "pv_identity", "molien"])
        for r in results:
            self.assertTrue(r.passed, r.line())

    def test_selftest_command(self):
        code, out = _run(["--json", "selftest", "--max-points", "64", "--only", "real_places_split", "colimit_oracle"])
        self.assertEqual(code, 0)
        data = json.loads(out)
        self.assertEqual({r["name"] for r in data}, {"real_places_split", "colimit_oracle"})


if __name__ == "__main__":
    unittest.main()
