import random
from collections import Counter

from django.test import SimpleTestCase
import pandas as pd

from genop.exceptions import DomainError
from genop.extensions import (
    PLABEL,
    XLABEL,
    YLABEL,
    Extension,
    LabeledGTree,
    alternating_classify,
    degrees,
    filtration_table,
    in_hat,
    inert_degree,
    is_label_map,
    labelled_gtree,
    lr_P,
    lr_P_map,
    to_P,
)
from genop.families import corolla_family_from_seeds
from genop.groups import Subgroup, cyclic, subgroups_of
from genop.gtrees import GTree, automorphisms, corolla_classes, induce, orbit_map_from, random_gtree, trivial_corolla
from genop.operads import FreeOperad, free_eval, unit
from genop.sequences import DeltaSeq, EmptySeq, SumSeq
from genop.trees import STICK, from_children, from_nested
from genop.utils import identity

C1 = cyclic(1)
C2 = cyclic(2)

# Black root over an X vertex and a Y vertex; every leaf at even depth.
EXAMPLE_CHILDREN = {
    "r": ["w1", "d"],
    "w1": ["p_ih", "b2"],
    "p_ih": ["i", "h"],
    "b2": ["w2", "e"],
    "w2": ["p_gf"],
    "p_gf": ["g", "f"],
    "e": ["p_e"],
    "p_e": ["l_e"],
    "d": ["c"],
    "c": ["w3"],
    "w3": ["p_b", "p_a"],
    "p_b": ["b"],
    "p_a": ["a"],
}
EXAMPLE_KINDS = {"w1": XLABEL, "w2": XLABEL, "w3": XLABEL, "e": YLABEL, "d": YLABEL}


def plain(tree) -> GTree:
    return GTree(C1, (tree,), (identity(len(tree)),))


def example_tree() -> LabeledGTree:
    tree, index = from_children(EXAMPLE_CHILDREN)
    kinds = {index[name]: EXAMPLE_KINDS.get(name, PLABEL) for name in EXAMPLE_CHILDREN}
    return labelled_gtree(plain(tree), kinds)


def binary_generator() -> DeltaSeq:
    return DeltaSeq(corolla_family_from_seeds(C1, {2: [(0,)]}, bound=4))


class AlternatingTests(SimpleTestCase):

    # --- Tests for alternating_classify ---

    def test_corolla_is_alternating(self):
        result = alternating_classify(trivial_corolla(C2, 2))
        self.assertTrue(result.alternating)
        self.assertEqual(result.active, (False, False, True))

    def test_stick_is_not(self):
        result = alternating_classify(plain(STICK))
        self.assertFalse(result.alternating)
        self.assertEqual(result.offending, 0)

    def test_two_coloured_example(self):
        T = plain(from_nested([[[None, None], []], [], [[None], [None, None]]]))
        result = alternating_classify(T)
        self.assertTrue(result.alternating)
        self.assertEqual(inert_degree(T), 3)
        root = T.roots[0]
        self.assertTrue(result.active[root])
        for c in T.children[root]:
            self.assertFalse(result.active[c])
            for cc in T.children[c]:
                self.assertTrue(result.active[cc])

    def test_unary_chain_offends(self):
        self.assertTrue(alternating_classify(plain(from_nested([None]))).alternating)
        self.assertFalse(alternating_classify(plain(from_nested([[None]]))).alternating)
        self.assertTrue(alternating_classify(plain(from_nested([[[None]]]))).alternating)


class LabeledGTreeTests(SimpleTestCase):

    # --- Tests for labelled G-trees ---

    def test_labels_must_be_invariant(self):
        tree = from_nested([[None], [None]])
        T = induce(Subgroup(C2, (0,)), tree, {0: identity(len(tree))})
        labels = [None] * T.size
        for v in T.components[0].vertices:
            labels[v] = PLABEL
            labels[T.offsets[1] + v] = YLABEL
        with self.assertRaises(DomainError):
            LabeledGTree(T, tuple(labels))

    def test_leaves_carry_no_label(self):
        with self.assertRaises(DomainError):
            LabeledGTree(plain(STICK), (PLABEL,))

    def test_degrees_of_example(self):
        U = example_tree()
        self.assertEqual(degrees(U), (3, 2))
        self.assertEqual(degrees(U).total, 5)
        self.assertTrue(in_hat(U))

    def test_filtration_classes(self):
        d = degrees(labelled_gtree(plain(from_nested([None, None])), {2: PLABEL}))
        self.assertEqual(d.total, 0)
        self.assertTrue(d.at_most(0))
        only_y = degrees(example_tree().relabel({XLABEL: YLABEL}))
        self.assertEqual(only_y.y, 5)
        self.assertTrue(only_y.exactly(5))
        self.assertFalse(only_y.without_y(5))
        self.assertTrue(degrees(example_tree()).without_y(5))

    def test_degrees_invariant_under_root_pullback(self):
        rng = random.Random(7)
        for _ in range(40):
            T, _, _ = random_gtree(rng, C2, max_gv=2, max_arity=2)
            kinds = {}
            for v in T.vertex_orbits:
                kinds[v.outputs[0]] = rng.choice((PLABEL, XLABEL, YLABEL))
            U = labelled_gtree(T, kinds)
            K = rng.choice(list(subgroups_of(T.stabilizer(0))))
            Y, psi = orbit_map_from(K, T, 0)
            pulled, _ = U.pullback(Y, psi)
            self.assertEqual(degrees(pulled), degrees(U))


class LeafRootPTests(SimpleTestCase):

    # --- Tests for lr_P ---

    def test_identity_on_hat_trees(self):
        U = example_tree()
        lr = lr_P(U)
        self.assertEqual(lr.tree, U)
        self.assertEqual(lr.map.edges, tuple(range(U.tree.size)))

    def test_example_after_turning_x_into_p(self):
        U = to_P(example_tree())
        lr = lr_P(U)
        expected = from_nested([None, None, None, None, [[None]], [[None, None]]])
        self.assertEqual(lr.tree.tree.components[0], expected)
        self.assertEqual(len(lr.tree.tree.leaves), 7)
        self.assertEqual(degrees(lr.tree), (0, 2))
        self.assertTrue(in_hat(lr.tree))
        self.assertTrue(is_label_map(lr.map, lr.tree, U))

    def test_all_p_gives_the_leaf_root(self):
        tree = from_nested([[None, None], None, []])
        U = labelled_gtree(plain(tree), {v: PLABEL for v in tree.vertices})
        lr = lr_P(U)
        self.assertTrue(lr.tree.tree.is_corolla)
        self.assertEqual(lr.tree.tree.arity, 3)
        self.assertEqual(lr.tree.labels[-1], PLABEL)

    def test_stick_gets_a_unary_vertex(self):
        lr = lr_P(LabeledGTree(plain(STICK), (None,)))
        self.assertEqual(lr.tree.tree.components[0], from_nested([None]))
        self.assertTrue(in_hat(lr.tree))

    def test_adjacent_inert_vertices_are_separated(self):
        tree, index = from_children({"y1": ["y2"], "y2": ["l"]})
        U = labelled_gtree(plain(tree), {index["y1"]: YLABEL, index["y2"]: XLABEL})
        lr = lr_P(U)
        self.assertTrue(in_hat(lr.tree))
        self.assertEqual(degrees(lr.tree), (1, 1))
        self.assertEqual(lr.tree.tree.size, 6)
        self.assertTrue(is_label_map(lr.map, lr.tree, U))

    def test_idempotent(self):
        U = to_P(example_tree())
        once = lr_P(U).tree
        self.assertEqual(lr_P(once).tree, once)

    def test_rejects_other_labels(self):
        U = labelled_gtree(plain(from_nested([None])), {1: "Z"})
        with self.assertRaises(DomainError):
            lr_P(U)

    def test_equivariant_and_natural_on_isomorphisms(self):
        tree, index = from_children({"x": ["p", "y"], "p": ["l1", "l2"], "y": ["q"], "q": ["l3"]})
        T = induce(Subgroup(C2, (0,)), tree, {0: identity(len(tree))})
        kinds = {index["x"]: XLABEL, index["p"]: PLABEL, index["y"]: YLABEL, index["q"]: PLABEL}
        U = labelled_gtree(T, kinds)
        lr = lr_P(U)
        self.assertTrue(lr.map.is_equivariant())
        self.assertTrue(is_label_map(lr.map, lr.tree, U))
        checked = 0
        for phi in automorphisms(T):
            if any(U.labels[phi(e)] != U.labels[e] for e in range(T.size)):
                continue
            iso = lr_P_map(phi, U, U)
            self.assertTrue(iso.is_quotient())
            self.assertEqual(lr.map.compose(iso).edges, phi.compose(lr.map).edges)
            checked += 1
        self.assertGreater(checked, 1)


class ExtensionTests(SimpleTestCase):

    # --- Tests for free extensions and their filtration ---

    def test_empty_source_is_the_free_operad_on_the_sum(self):
        """Extending F Z by new binary cells matches free evaluation on both generators."""
        Z, Y = binary_generator(), binary_generator()
        ext = Extension(FreeOperad(Z, max_gv=2), EmptySeq(C1), Y, lambda D, x: x, lambda D, x: x)
        for n in (2, 3):
            C = corolla_classes(C1, n)[0]
            ours = Counter(inert_degree(t.tree) for t in ext.free_extension(C, 2))
            direct = free_eval(SumSeq([Z, Y]), C, 2)
            self.assertTrue(direct.exact)
            theirs = Counter(sum(1 for tag, _ in t.labels if tag == 1) for t in direct.elements)
            self.assertEqual(ours, theirs)
        self.assertEqual(len(ext.free_extension(corolla_classes(C1, 3)[0], 2)), 12)

    def test_degree_zero_is_P(self):
        Z = binary_generator()
        ext = Extension(FreeOperad(Z, max_gv=2), EmptySeq(C1), binary_generator(),
                        lambda D, x: x, lambda D, x: x)
        C = corolla_classes(C1, 3)[0]
        step = ext.filtration_step(C, 0)
        self.assertTrue(step.consistent)
        self.assertEqual(len(step.current), 3)

    def test_new_cells_only(self):
        Z = binary_generator()
        ext = Extension(FreeOperad(Z, max_gv=2), EmptySeq(C1), binary_generator(),
                        lambda D, x: x, lambda D, x: x)
        C = corolla_classes(C1, 3)[0]
        sizes = [len(step.current) for step in ext.filtration(C, 2)]
        self.assertEqual(sizes, [3, 9, 12])
        self.assertTrue(all(step.latching == 0 for step in ext.filtration(C, 2)))

    def test_isomorphism_gives_isomorphic_steps(self):
        """Gluing along an isomorphism adds nothing: every step is an isomorphism."""
        Z, X = binary_generator(), binary_generator()
        ext = Extension(FreeOperad(Z, max_gv=2), X, X, lambda D, x: x, lambda D, x: unit(Z, D, ()))
        C = corolla_classes(C1, 3)[0]
        for k in (1, 2):
            step = ext.filtration_step(C, k)
            self.assertTrue(step.consistent)
            self.assertTrue(step.is_iso)
            self.assertGreater(step.latching, 0)
            self.assertEqual(len(step.current), 3)

    def test_collapse_lands_in_P(self):
        Z, X = binary_generator(), binary_generator()
        ext = Extension(FreeOperad(Z, max_gv=2), X, X, lambda D, x: x, lambda D, x: unit(Z, D, ()))
        C = corolla_classes(C1, 3)[0]
        P0 = set(ext.free_extension(C, 0))
        for t in ext.terms(C, 2):
            self.assertIn(ext.normal_form(C, t), P0)

    def test_non_injective_u(self):
        X = SumSeq([binary_generator(), binary_generator()])
        ext = Extension(FreeOperad(binary_generator(), max_gv=1), X, binary_generator(),
                        lambda D, x: (), lambda D, x: unit(binary_generator(), D, ()))
        with self.assertRaises(DomainError):
            ext.preimages(corolla_classes(C1, 2)[0])

    def test_table(self):
        Z = binary_generator()
        ext = Extension(FreeOperad(Z, max_gv=2), EmptySeq(C1), binary_generator(),
                        lambda D, x: x, lambda D, x: x)
        df = filtration_table(ext, [corolla_classes(C1, n)[0] for n in (2, 3)], 2)
        self.assertIsInstance(df, pd.DataFrame)
        self.assertEqual(len(df), 6)
        self.assertTrue(df["consistent"].all())
        self.assertEqual(list(df[df["arity"] == 3]["size"]), [3, 9, 12])
