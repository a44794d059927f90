import json
from unittest.mock import patch

from django.core.cache import cache
from django.test import Client, SimpleTestCase
from django.urls import reverse

from genop.commands import run


class RunApiTests(SimpleTestCase):

    # --- Tests for /api/run/ ---

    def setUp(self):
        cache.clear()
        self.client = Client()
        self.url = reverse("genop:run")

    def test_get_runs_a_command(self):
        response = self.client.get(self.url, {"command": "group info --named cyclic-3"})
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(data["results"]["order"], 3)
        self.assertEqual(data["command"], "group info --named cyclic-3")

    def test_post_command_text(self):
        response = self.client.post(self.url, data=json.dumps({"command": "tree parse --tree (|,|)"}),
                                    content_type="application/json")
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()["results"]["text"], "(|,|)")

    def test_post_command_object(self):
        body = {"verb": "indexing", "subcommand": "check",
                "flags": {"group": "cyclic-2", "family": "complete", "arity": 2}}
        response = self.client.post(self.url, data=json.dumps(body), content_type="application/json")
        self.assertEqual(response.status_code, 200)
        self.assertTrue(response.json()["results"]["weak_indexing"])

    def test_malformed_json_is_a_bad_request(self):
        response = self.client.post(self.url, data='{"command": ', content_type="application/json")
        self.assertEqual(response.status_code, 400)
        error = response.json()["error"]
        self.assertEqual(error["type"], "ParseError")
        self.assertIsNotNone(error["position"])

    def test_missing_command(self):
        response = self.client.get(self.url)
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.json()["error"]["field"], "command")

    def test_domain_error_is_unprocessable(self):
        response = self.client.get(self.url, {"command": "ninfty build --group cyclic-2 --family free --arity 2"})
        self.assertEqual(response.status_code, 422)
        self.assertEqual(response.json()["error"]["invariant"], "weak indexing")

    def test_other_methods(self):
        response = self.client.put(self.url)
        self.assertEqual(response.status_code, 405)

    @patch("genop.views.run", wraps=run)
    def test_reports_are_cached_by_canonical_text(self, mock_run):
        first = self.client.get(self.url, {"command": "gtree corollas --group cyclic-2 --arity 2"})
        second = self.client.get(self.url, {"command": "gtree corollas --arity 2 --group cyclic-2"})
        self.assertEqual(first.status_code, 200)
        self.assertEqual(first.content, second.content)
        mock_run.assert_called_once()

    @patch("genop.views.run", wraps=run)
    def test_failures_are_not_cached(self, mock_run):
        for _ in range(2):
            self.client.get(self.url, {"command": "ninfty build --group cyclic-2 --family free --arity 2"})
        self.assertEqual(mock_run.call_count, 2)

    @patch("genop.views.run")
    def test_unexpected_errors(self, mock_run):
        mock_run.side_effect = RuntimeError("boom")
        response = self.client.get(self.url, {"command": "group info --group trivial"})
        self.assertEqual(response.status_code, 500)
        self.assertEqual(response.json(), {"error": "boom"})
