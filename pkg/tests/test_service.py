import unittest

from fastapi.testclient import TestClient

from main import app


class TestService(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.client = TestClient(app)

    def test_health(self):
        response = self.client.get("/health")
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json(), {"status": "ok"})

    def test_fields(self):
        data = self.client.get("/fields").json()
        self.assertIn("gaussian", data["fields"])
        self.assertIn("S3", data["groups"])

    def test_analyze(self):
        response = self.client.get("/fields/eisenstein/analyze")
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(data["field"]["m"], 6)
        self.assertEqual(data["sections"]["maximal_class_count"], 3)

    def test_unknown_field(self):
        self.assertEqual(self.client.get("/fields/nowhere/analyze").status_code, 404)

    def test_inadmissible_c(self):
        response = self.client.get("/fields/gaussian/eta", params={"c": 2})
        self.assertEqual(response.status_code, 400)

    def test_ktheory_json(self):
        response = self.client.get("/fields/gaussian/ktheory", params={"truncate": 1})
        self.assertEqual(response.status_code, 200)
        sections = response.json()["sections"]
        self.assertEqual(sections["formula"], "ℤ^4 ⊗ Λ(Γ)")
        self.assertEqual(sections["gamma_tower"]["text"], "(ℤ^8, ℤ^8)")

    def test_ktheory_text(self):
        response = self.client.get("/fields/cbrt2/ktheory", params={"format": "text"})
        self.assertEqual(response.status_code, 200)
        self.assertIn("Λ(Γ)", response.text)

    def test_unknown_target(self):
        response = self.client.get("/fields/gaussian/ktheory", params={"target": "bogus"})
        self.assertEqual(response.status_code, 422)

    def test_double_coset(self):
        response = self.client.get("/groups/S3/double-coset")
        self.assertEqual(response.status_code, 200)
        self.assertTrue(response.json()["passed"])
        self.assertEqual(self.client.get("/groups/S99/double-coset").status_code, 404)

    def test_metrics(self):
        self.client.get("/health")
        self.client.get("/fields/rationals/analyze")
        response = self.client.get("/metrics")
        self.assertEqual(response.status_code, 200)
        self.assertIn("ktheory_requests_total", response.text)


if __name__ == "__main__":
    unittest.main()
