import io
import json
import os
import tempfile
from unittest.mock import patch

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from genop.commands import (
    EXIT_DOMAIN,
    EXIT_OK,
    EXIT_PARSE,
    Command,
    Report,
    exit_code,
    parse_batch,
    parse_command,
    run,
    run_batch,
    summary,
)
from genop.exceptions import BoundExceeded, ParseError
from genop.groups import cyclic, whole
from genop.gtrees import make_gtree
from genop.serialization import dumps, gtree_to_json
from genop.trees import from_nested


class ParseCommandTests(SimpleTestCase):

    # --- Tests for parse_command ---

    def test_canonical_text_sorts_flags(self):
        command = parse_command("indexing check --group cyclic-2 --family complete --arity 3")
        self.assertEqual(command.text, "indexing check --arity 3 --family complete --group cyclic-2")
        self.assertEqual(command.options["arity"], 3)

    def test_spellings_agree(self):
        text = parse_command("indexing check --group cyclic-2 --arity=3")
        words = parse_command(["indexing", "check", "--arity", "3", "--group", "cyclic-2"])
        obj = parse_command({"verb": "indexing", "subcommand": "check",
                             "flags": {"group": "cyclic-2", "arity": "3"}})
        self.assertEqual(text, words)
        self.assertEqual(text, obj)

    def test_switches(self):
        command = parse_command("ninfty build --group trivial --arity 2 --verify")
        self.assertIs(command.options["verify"], True)
        self.assertTrue(command.text.endswith("--verify"))

    def test_inputs_are_recorded(self):
        command = parse_command("gtree show --input tree.json")
        self.assertEqual(command.inputs, ("tree.json",))

    def test_schema_errors_name_the_field(self):
        cases = {
            "lattice show --group trivial": "verb",
            "group draw --group trivial": "subcommand",
            "tree parse --tree | --group trivial": "group",
            "gtree corollas --group trivial --arity two": "arity",
            "gtree show --input x --format radial": "format",
            "tree parse --tree": "tree",
            "group": "subcommand",
        }
        for text, field in cases.items():
            with self.assertRaises(ParseError, msg=text) as ctx:
                parse_command(text)
            self.assertEqual(ctx.exception.field, field, text)


class RunTests(SimpleTestCase):

    # --- Tests for run ---

    def test_group_info(self):
        report = run("group info --named quaternion-8")
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertEqual(report.results["order"], 8)
        self.assertEqual(report.results["subgroups"], 6)
        self.assertEqual(len(report.results["table"]), 6)

    def test_indexing_check(self):
        report = run("indexing check --family complete --group cyclic-2 --arity 3")
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertTrue(report.results["weak_indexing"])
        self.assertIsNone(report.results["witness"])

    def test_ninfty_build(self):
        report = run("ninfty build --group trivial --family complete --arity 2 --depth 1 --verify")
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertTrue(report.results["ok"])
        self.assertEqual(report.results["levels"], [2, 4])
        self.assertIn("operators", report.results)
        self.assertTrue(report.exact)

    def test_tree_parse(self):
        report = run("tree parse --tree '((),())' --dot")
        self.assertEqual(report.results["text"], "((),())")
        self.assertEqual(report.results["edges"], 3)
        self.assertEqual(report.results["leaves"], [])
        self.assertEqual(report.results["leaf_root_arity"], 0)
        self.assertEqual(report.results["automorphisms"], 2)
        self.assertIn("digraph", report.results["dot"])

    def test_family_show(self):
        report = run("family show --group cyclic-2 --family complete --bound 2")
        self.assertEqual(report.results["bound"], 2)
        self.assertEqual([row["arity"] for row in report.results["classes"]], [0, 1, 2])

    def test_extension_filtrate(self):
        report = run("extension filtrate --group trivial --arity 3 --max-gv 2 --max-degree 2")
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertEqual([row["size"] for row in report.results["steps"]], [3, 9, 12])
        self.assertTrue(report.results["consistent"])

    def test_gtree_show_reads_json(self):
        C2 = cyclic(2)
        T = make_gtree(whole(C2), from_nested([[], []]), {1: (1, 0, 2)})
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "tree.json")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(dumps(gtree_to_json(T)))
            report = run(["gtree", "show", "--input", path, "--dot", "--format", "orbital"])
        self.assertEqual(report.exit_code, EXIT_OK)
        self.assertEqual(report.results["components"], 1)
        self.assertIn("(G/G)", report.results["dot"])

    def test_parse_error_exits_two(self):
        report = run("tree parse --tree '(|,)'")
        self.assertEqual(report.exit_code, EXIT_PARSE)
        self.assertEqual(report.error["position"], 3)
        self.assertEqual(report.error["invariant"], "syntax")

    def test_domain_error_exits_one(self):
        report = run("ninfty build --group cyclic-2 --family free --arity 2 --depth 1")
        self.assertEqual(report.exit_code, EXIT_DOMAIN)
        self.assertEqual(report.error["invariant"], "weak indexing")
        self.assertIsNone(report.results)

    @patch("genop.commands.ninfty_build")
    def test_bound_exceeded_exits_one(self, mock_build):
        mock_build.side_effect = BoundExceeded("too many simplices", bound="ENUMERATION_BOUND")
        report = run("ninfty build --group trivial --arity 2")
        self.assertEqual(report.exit_code, EXIT_DOMAIN)
        self.assertEqual(report.error["invariant"], "ENUMERATION_BOUND")
        mock_build.assert_called_once()

    def test_report_timings_are_opt_in(self):
        report = run("group info --group cyclic-3")
        self.assertNotIn("timings", report.as_dict())
        self.assertIn("total", report.as_dict(timings=True)["timings"])
        self.assertEqual(summary(report), "group info --group cyclic-3: ok (exact)")

    def test_reports_are_deterministic(self):
        first = dumps(run("gtree corollas --group klein-4 --arity 2").as_dict())
        second = dumps(run("gtree corollas --arity 2 --group klein-4").as_dict())
        self.assertEqual(first, second)


class BatchTests(SimpleTestCase):

    # --- Tests for batches ---

    COMMANDS = [
        "group info --group cyclic-4",
        {"verb": "tree", "subcommand": "parse", "flags": {"tree": "(|,|)"}},
        "tree parse --tree '(('",
        "gtree corollas --group cyclic-2 --arity 2",
    ]

    def test_parallel_matches_serial(self):
        serial = [r.as_dict() for r in run_batch(self.COMMANDS, threads=1)]
        parallel = [r.as_dict() for r in run_batch(self.COMMANDS, threads=3)]
        self.assertEqual(serial, parallel)
        self.assertEqual([r["exit_code"] for r in serial], [0, 0, 2, 0])

    def test_exit_code_is_the_worst(self):
        self.assertEqual(exit_code([Report("a"), Report("b", exit_code=EXIT_DOMAIN)]), EXIT_DOMAIN)
        self.assertEqual(exit_code([]), EXIT_OK)

    def test_parse_batch(self):
        self.assertEqual(parse_batch('["group info --group trivial"]'), ["group info --group trivial"])
        with self.assertRaises(ParseError):
            parse_batch('{"verb": "group"}')
        with self.assertRaises(ParseError) as ctx:
            parse_batch('["group info",')
        self.assertIsNotNone(ctx.exception.position)

    def test_command_objects_are_accepted(self):
        command = Command("group", "info", (("group", "trivial"),))
        self.assertEqual(run(command).results["order"], 1)


class ManagementCommandTests(SimpleTestCase):

    # --- Tests for the genop management command ---

    def test_single_command_writes_json(self):
        out, err = io.StringIO(), io.StringIO()
        call_command("genop", "group", "info", named="cyclic-2", stdout=out, stderr=err)
        data = json.loads(out.getvalue())
        self.assertEqual(data["results"]["order"], 2)
        self.assertEqual(data["exit_code"], 0)
        self.assertIn("group info --named cyclic-2: ok", err.getvalue())

    def test_parse_error_sets_the_return_code(self):
        out, err = io.StringIO(), io.StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command("genop", "tree", "parse", tree="(|,)", stdout=out, stderr=err)
        self.assertEqual(ctx.exception.returncode, EXIT_PARSE)
        self.assertEqual(json.loads(out.getvalue())["error"]["position"], 3)

    def test_missing_verb(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("genop", stdout=io.StringIO(), stderr=io.StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_PARSE)

    def test_batch_file(self):
        out, err = io.StringIO(), io.StringIO()
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "batch.json")
            with open(path, "w", encoding="utf-8") as handle:
                json.dump(["group info --group cyclic-2", "group info --group klein-4"], handle)
            call_command("genop", batch=path, threads=2, stdout=out, stderr=err)
        data = json.loads(out.getvalue())
        self.assertEqual([item["results"]["order"] for item in data], [2, 4])

    def test_malformed_batch_file(self):
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "batch.json")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write("[oops")
            with self.assertRaises(CommandError) as ctx:
                call_command("genop", batch=path, stdout=io.StringIO(), stderr=io.StringIO())
        self.assertEqual(ctx.exception.returncode, EXIT_PARSE)
