import random

from django.test import SimpleTestCase

from genop.exceptions import DomainError
from genop.trees import (
    STICK,
    MapKind,
    Piece,
    SubstitutionDatum,
    Tree,
    automorphism_group,
    corolla,
    corolla_datum,
    desubstitute,
    extract_orderings,
    from_children,
    from_nested,
    graft,
    insert_unary,
    is_planar_order,
    isomorphisms,
    labelled,
    leaf_fixing_automorphisms,
    leaf_root,
    outer_face,
    outer_union,
    planarize,
    random_orderings,
    random_tree,
    standardize,
    substitute,
    tall_map_from_cover,
    tall_outer_factor,
    vertex_face,
)
from genop.utils import invert

# One leaf in, one leaf out: used to grow pieces without changing their leaf count
LEAF_PRESERVING = [corolla(1), from_nested([None, []]), from_nested([[], None])]


def random_piece(rng: random.Random, k: int, steps: int = 3) -> Piece:
    """A random tree with exactly k leaves and a random identification of its leaves."""
    if k == 1 and rng.random() < 0.2:
        return Piece(STICK, (0,))
    tree = corolla(k)
    for _ in range(rng.randint(0, steps)):
        if tree.leaves and rng.random() < 0.7:
            tree = graft(tree, rng.choice(LEAF_PRESERVING), rng.choice(tree.leaves))[0]
        else:
            tree = insert_unary(tree, rng.choice(list(tree.edges))).source
    leaf_map = list(range(k))
    rng.shuffle(leaf_map)
    return Piece(tree, tuple(leaf_map))


class TreeTests(SimpleTestCase):

    # --- Tests for standard models ---

    def test_corolla_structure(self):
        C = corolla(3)
        self.assertEqual(C.leaves, (0, 1, 2))
        self.assertEqual(C.root, 3)
        self.assertTrue(C.is_corolla)
        self.assertEqual(C.arity(3), 3)

    def test_nested_form(self):
        T = from_nested([[None, None], None])
        self.assertEqual(T.children, (None, None, (0, 1), None, (2, 3)))
        self.assertEqual(T.text(), "((|,|),|)")

    def test_stumps(self):
        T = from_nested([[], []])
        self.assertEqual(T.children, ((), (), (0, 1)))
        self.assertEqual(T.leaves, ())

    def test_labelled_tree(self):
        T, labels = labelled(("d", [("c", ["a", "b"]), "e"]))
        self.assertEqual(labels["d"], T.root)
        self.assertEqual(T.children[labels["c"]], (labels["a"], labels["b"]))

    def test_non_standard_children_rejected(self):
        with self.assertRaises(DomainError):
            Tree(((1,), None))

    def test_from_children_rejects_two_roots(self):
        with self.assertRaises(DomainError):
            from_children({"a": ("b",), "c": ("d",)})

    def test_order_queries(self):
        T = from_nested([[None, None], None])
        self.assertTrue(T.leq(0, 2))
        self.assertFalse(T.leq(3, 2))
        self.assertEqual(T.join(0, 3), 4)
        self.assertEqual(T.join(0, 1), 2)
        self.assertEqual(T.predecessor(4, 0), 2)
        self.assertEqual(T.input_path(0), (0, 2, 4))

    def test_subtree(self):
        T = from_nested([[None, None], None])
        sub, start = T.subtree(2)
        self.assertEqual(sub, corolla(2))
        self.assertEqual(start, 0)

    # --- Tests for planar structures ---

    def test_planarization_round_trips(self):
        """Per-vertex orderings and planar orders determine each other."""
        rng = random.Random(1)
        for _ in range(1000):
            tree = random_tree(rng, vertices=rng.randint(0, 5))
            orderings = random_orderings(rng, tree)
            planar = planarize(tree, orderings)
            self.assertTrue(is_planar_order(tree, planar))
            self.assertEqual(extract_orderings(tree, planar), orderings)

    def test_standardize_is_an_isomorphism(self):
        rng = random.Random(2)
        for _ in range(100):
            tree = random_tree(rng, vertices=4)
            standard, iso = standardize(tree, random_orderings(rng, tree))
            self.assertIn(iso.edges, isomorphisms(tree, standard))

    def test_bad_ordering_rejected(self):
        with self.assertRaises(DomainError):
            planarize(corolla(2), {2: (0,)})

    # --- Tests for faces and grafting ---

    def test_outer_face(self):
        T = from_nested([[None, None], None])
        face = outer_face(T, [2, 3], 4)
        self.assertEqual(face.source, corolla(2))
        self.assertEqual(face.edges, (2, 3, 4))

    def test_outer_face_rejects_comparable_edges(self):
        T = from_nested([[None, None], None])
        with self.assertRaises(DomainError):
            outer_face(T, [0, 2], 4)

    def test_vertex_face(self):
        T = from_nested([[None, None], None])
        self.assertEqual(vertex_face(T, [2]).source, corolla(2))

    def test_outer_union(self):
        T = from_nested([[None, None], [None, None]])
        union = outer_union(T, vertex_face(T, [2]), vertex_face(T, [6]))
        self.assertEqual({union(v) for v in union.source.vertices}, {2, 6})
        self.assertEqual(len(union.source.leaves), 3)
        with self.assertRaises(DomainError):
            outer_union(T, vertex_face(T, [2]), vertex_face(T, [5]))

    def test_graft(self):
        U, s_map, r_map = graft(corolla(2), corolla(2), 0)
        self.assertEqual(len(U.leaves), 3)
        self.assertEqual(s_map(2), U.root)
        self.assertEqual(r_map(2), s_map(0))

    def test_tall_outer_factorization(self):
        """Every map through a tall map and a face inclusion factors back."""
        rng = random.Random(3)
        for _ in range(200):
            base = random_tree(rng, vertices=3, stumps=False)
            datum = SubstitutionDatum(base, tuple(random_piece(rng, base.arity(v)) for v in base.vertices))
            result = substitute(datum)
            host = random_tree(rng, vertices=2, stumps=False)
            W, _, inclusion = graft(host, result.tree, rng.choice(host.leaves))
            phi = inclusion.compose(result.map)
            tall, face = tall_outer_factor(phi)
            self.assertTrue(tall.is_tall())
            self.assertEqual(face.compose(tall).edges, phi.edges)

    # --- Tests for substitution ---

    def test_corolla_datum_is_identity(self):
        T = from_nested([[None, []], None])
        result = substitute(corolla_datum(T))
        self.assertEqual(result.tree, T)
        self.assertEqual(result.map.edges, tuple(T.edges))

    def test_leaf_root_of_stick(self):
        self.assertTrue(leaf_root(STICK).stick)
        lr = leaf_root(from_nested([[None, None], None]))
        self.assertEqual(lr.corolla, corolla(3))
        self.assertTrue(lr.map.is_tall())

    def test_substitution_round_trips(self):
        """Substituting then decomposing returns the datum."""
        rng = random.Random(4)
        for _ in range(300):
            base = random_tree(rng, vertices=rng.randint(1, 4))
            datum = SubstitutionDatum(base, tuple(random_piece(rng, base.arity(v)) for v in base.vertices))
            result = substitute(datum)
            self.assertTrue(result.map.is_tall())
            self.assertEqual(desubstitute(result.map), datum)
            for v, piece_map in zip(base.vertices, result.piece_maps):
                self.assertEqual(piece_map(piece_map.source.root), result.map(v))

    def test_planar_datum_gives_planar_map(self):
        base = corolla(2)
        datum = SubstitutionDatum(base, (Piece(from_nested([[None, None]]), (0, 1)),))
        result = substitute(datum)
        self.assertEqual(result.map.kind, MapKind.PLANAR_TALL)
        self.assertTrue(result.map.is_planar())

    def test_wrong_leaf_count_rejected(self):
        with self.assertRaises(DomainError):
            SubstitutionDatum(corolla(2), (Piece(corolla(3), (0, 1, 2)),))

    def test_tall_map_from_vertex_cover(self):
        U = from_nested([[None, None], None])
        faces = [vertex_face(U, [v]) for v in U.vertices]
        phi = tall_map_from_cover(U, faces)
        self.assertTrue(phi.is_tall())
        self.assertEqual(phi.source, U)

    # --- Tests for automorphisms ---

    def test_automorphism_group_orders(self):
        self.assertEqual(automorphism_group(corolla(3)).order, 6)
        self.assertEqual(automorphism_group(from_nested([[None, None], [None, None]])).order, 8)
        self.assertEqual(automorphism_group(from_nested([[None, None], None])).order, 2)

    def test_leaf_fixing_automorphisms(self):
        """Only leafless subtrees move."""
        self.assertEqual(len(leaf_fixing_automorphisms(from_nested([None, [], []]))), 2)
        self.assertEqual(len(leaf_fixing_automorphisms(from_nested([None, []]))), 1)
        self.assertEqual(len(leaf_fixing_automorphisms(from_nested([[[]], [[]], None]))), 2)
        self.assertEqual(len(leaf_fixing_automorphisms(corolla(3))), 1)

    def test_isomorphisms_ignore_planar_order(self):
        S = from_nested([[None, None], None])
        T = from_nested([None, [None, None]])
        isos = isomorphisms(S, T)
        self.assertEqual(len(isos), 2)
        self.assertEqual(isomorphisms(T, S), tuple(sorted(invert(m) for m in isos)))
        self.assertEqual(len(isomorphisms(S, from_nested([[None, None], None, None]))), 0)

    def test_leaf_fixing_automorphisms_ignore_planar_order(self):
        """Leafless subtrees planarized differently still swap."""
        self.assertEqual(len(leaf_fixing_automorphisms(from_nested([[[], [[]]], [[[]], []], None]))), 2)
