import os
import tempfile

from django.test import SimpleTestCase

from genop.exceptions import ParseError
from genop.groups import cyclic, generated, quaternion8, whole
from genop.gtrees import canonical_gtree, make_gtree
from genop.serialization import (
    ParsedTree,
    dumps,
    export_dot,
    gtree_dot,
    gtree_from_json,
    gtree_to_json,
    loads,
    map_dot,
    parse_tree,
    read_gtree,
    tree_dot,
    tree_from_json,
    tree_to_json,
)
from genop.trees import STICK, corolla, from_nested, identity_map

QUATERNION_TREE = from_nested([[None, None, None], [None, None, None]])
J_ACTION = (4, 5, 6, 7, 2, 1, 0, 3, 8)


def quaternion_gtree():
    return make_gtree(generated(quaternion8(), [4]), QUATERNION_TREE, {4: J_ACTION})


def swapped_stumps():
    """C2 swapping two stumps under a fixed root."""
    C2 = cyclic(2)
    return make_gtree(whole(C2), from_nested([[], []]), {1: (1, 0, 2)})


class TreeTextTests(SimpleTestCase):

    # --- Tests for parse_tree ---

    def test_two_stumps(self):
        parsed = parse_tree("((),())")
        self.assertEqual(parsed.tree.children, ((), (), (0, 1)))
        self.assertEqual(parsed.tree.text(), "((),())")

    def test_labels_name_edges(self):
        parsed = parse_tree("d(c(a,b),|)")
        self.assertEqual(parsed.labels, {0: "a", 1: "b", 2: "c", 4: "d"})
        self.assertEqual(parsed.tree.text(parsed.labels), "d(c(a,b),|)")

    def test_whitespace_is_canonicalized(self):
        self.assertEqual(parse_tree(" ( | ,\n| ) ").tree.text(), "(|,|)")

    def test_stick(self):
        self.assertEqual(parse_tree("|").tree, STICK)

    def test_errors_carry_positions(self):
        cases = {
            "(|,)": 3,
            "(|": 2,
            "(|)x": 3,
            "": 0,
            "(#)": 1,
        }
        for text, position in cases.items():
            with self.assertRaises(ParseError, msg=text) as ctx:
                parse_tree(text)
            self.assertEqual(ctx.exception.position, position, text)
            self.assertEqual(ctx.exception.invariant, "syntax")


class JsonTests(SimpleTestCase):

    # --- Tests for tree and G-tree JSON ---

    def test_tree_json(self):
        parsed = parse_tree("d(c(a,b),|)")
        data = tree_to_json(parsed.tree, parsed.labels)
        self.assertEqual(data["children"], [None, None, [0, 1], None, [2, 3]])
        self.assertEqual(tree_from_json(data), parsed)
        self.assertEqual(tree_from_json("(|,|)"), ParsedTree(corolla(2), {}))

    def test_tree_json_needs_children(self):
        with self.assertRaises(ParseError) as ctx:
            tree_from_json({"edges": []})
        self.assertEqual(ctx.exception.field, "children")

    def test_gtree_json_is_canonical(self):
        T = quaternion_gtree()
        data = gtree_to_json(T)
        self.assertEqual(data["orbit_stabilizer"], list(T.stabilizer(0).elements))
        rebuilt = gtree_from_json(loads(dumps(data)))
        self.assertEqual(rebuilt, canonical_gtree(T)[0])
        self.assertEqual(dumps(gtree_to_json(rebuilt)), dumps(data))

    def test_gtree_json_missing_field(self):
        data = gtree_to_json(swapped_stumps())
        del data["action"]
        with self.assertRaises(ParseError) as ctx:
            gtree_from_json(data)
        self.assertEqual(ctx.exception.field, "action")

    def test_malformed_json_has_a_position(self):
        with self.assertRaises(ParseError) as ctx:
            loads('{"group": ')
        self.assertIsNotNone(ctx.exception.position)

    def test_read_gtree(self):
        T = swapped_stumps()
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "tree.json")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(dumps(gtree_to_json(T)))
            self.assertEqual(read_gtree(path), canonical_gtree(T)[0])
            with self.assertRaises(ParseError) as ctx:
                read_gtree(os.path.join(folder, "missing.json"))
            self.assertEqual(ctx.exception.field, "input")


class DotTests(SimpleTestCase):

    # --- Tests for DOT export ---

    def test_stick_is_a_single_edge(self):
        dot = tree_dot(STICK)
        self.assertTrue(dot.startswith("digraph tree {"))
        self.assertEqual(dot.count(" -> "), 1)
        self.assertNotIn("shape=circle", dot)

    def test_corolla_has_one_vertex(self):
        dot = export_dot(corolla(3))
        self.assertEqual(dot.count("shape=circle"), 1)
        self.assertEqual(dot.count(" -> "), 4)

    def test_labels_name_edges(self):
        parsed = parse_tree("d(c(a,b),|)")
        dot = tree_dot(parsed.tree, parsed.labels)
        for name in ("a", "b", "c", "d"):
            self.assertIn(f'label="{name}"', dot)
        self.assertIn('label="3"', dot)

    def test_expanded_mode_draws_every_component(self):
        dot = gtree_dot(quaternion_gtree(), "expanded")
        self.assertEqual(dot.count("subgraph cluster_"), 2)
        self.assertEqual(dot.count(" -> "), 18)

    def test_orbital_mode_labels_orbits(self):
        dot = export_dot(swapped_stumps(), "orbital")
        self.assertIn("(G/G)·2", dot)
        self.assertIn("(G/H)·0", dot)
        self.assertEqual(dot.count(" -> "), 2)
        self.assertIn("// H = {0}", dot)

    def test_output_is_deterministic(self):
        self.assertEqual(gtree_dot(quaternion_gtree(), "orbital"), gtree_dot(quaternion_gtree(), "orbital"))

    def test_unknown_mode(self):
        with self.assertRaises(ParseError):
            gtree_dot(swapped_stumps(), "radial")

    def test_map_arrows(self):
        dot = map_dot(identity_map(corolla(2)))
        self.assertEqual(dot.count("style=dashed"), 3)
        self.assertIn("subgraph cluster_s", dot)
        self.assertIn("subgraph cluster_t", dot)
