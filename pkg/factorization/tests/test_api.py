from django.test import TestCase
from ninja.testing import TestClient

from factorization.models import ClassificationRun
from factorization.urls import api

from . import corpus


def payload(name, **options):
    data = corpus.spec(name).model_dump(mode="json")
    data["options"].update(options)
    return data


class ClassifyEndpointTests(TestCase):

    def setUp(self):
        self.client = TestClient(api)

    def test_classify_stores_run(self):
        response = self.client.post("/classify/", json=payload("daniele", max_degree=4))
        self.assertEqual(response.status_code, 201)
        report = response.json()
        self.assertEqual(report["verdict"], "branch-commutative")
        self.assertEqual(len(report["atlas"]["affixes"][0]["value"]), 2)
        run = ClassificationRun.objects.get()
        self.assertEqual(run.content_hash, report["content_hash"])
        self.assertEqual(run.sheet_count, 2)

    def test_timing_query_parameter(self):
        response = self.client.post("/classify/?timing=true", json=payload("unbalanced"))
        self.assertEqual(response.status_code, 201)
        self.assertIn("atlas", response.json()["timing"])

    def test_bad_expression(self):
        data = payload("unbalanced")
        data["matrix"]["rows"] = [["1 + * k"]]
        response = self.client.post("/classify/", json=data)
        self.assertEqual(response.status_code, 400)
        self.assertIn("offset", response.json()["detail"])
        self.assertFalse(ClassificationRun.objects.exists())


class RunLogTests(TestCase):

    def setUp(self):
        self.client = TestClient(api)
        self.client.post("/classify/", json=payload("unbalanced"))

    def test_list_and_filter(self):
        runs = self.client.get("/runs/").json()
        self.assertEqual(len(runs), 1)
        self.assertEqual(runs[0]["verdict"], "unbalanced")
        self.assertEqual(runs[0]["sheet_count"], 4)
        self.assertEqual(self.client.get("/runs/?verdict=branch-commutative").json(), [])

    def test_run_detail(self):
        run = ClassificationRun.objects.get()
        response = self.client.get(f"/runs/{run.id}/")
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()["content_hash"], run.content_hash)

    def test_missing_run(self):
        self.assertEqual(self.client.get("/runs/999/").status_code, 404)


class DiagramAndSchemaTests(TestCase):

    def setUp(self):
        self.client = TestClient(api)

    def test_diagram(self):
        response = self.client.post("/diagram/", json=payload("nested_pair"))
        self.assertEqual(response.status_code, 200)
        self.assertTrue(response.json()["text"].startswith("sheets: 4"))
        self.assertTrue(response.json()["dot"].startswith("graph riemann_surface {"))

    def test_diagram_rejects_zero_tilt_with_real_affixes(self):
        response = self.client.post("/diagram/", json=payload("nested_pair", axis_tilt=0.0))
        self.assertEqual(response.status_code, 400)

    def test_schema(self):
        schema = self.client.get("/schema/").json()
        self.assertIn("symmetrizer", schema["properties"])
