import random

from django.test import SimpleTestCase, override_settings

from genop.exceptions import BoundExceeded, DomainError
from genop.families import complete_family, free_family, trivial_graph_family
from genop.groups import cyclic, generated, quaternion8, trivial_subgroup, whole
from genop.gtrees import (
    GTree,
    MapKind,
    automorphisms,
    canonical_gtree,
    coset_space,
    corolla_classes,
    corolla_datum,
    enumerate_gtrees,
    free_corolla,
    g_desubstitute,
    g_leaf_root,
    g_substitute,
    g_vertices,
    induce,
    is_F_tree,
    is_isomorphic,
    isomorphism_class,
    make_gtree,
    orbit_map_from,
    quotients,
    random_gtree,
    relabel,
    root_pullback,
    rooted_shapes,
    trivial_corolla,
)
from genop.trees import STICK, from_nested

# Two copies of a binary vertex over ternary vertices; the middle leaves are b and jb
QUATERNION_TREE = from_nested([[None, None, None], [None, None, None]])
J_ACTION = (4, 5, 6, 7, 2, 1, 0, 3, 8)


def quaternion_gtree() -> GTree:
    """The Q8-tree induced from <j>, with j carrying c onto jc and jc onto -c."""
    Q = quaternion8()
    return make_gtree(generated(Q, [4]), QUATERNION_TREE, {4: J_ACTION})


def stumps_under_root(G, fixed: bool) -> GTree:
    """A root over two stumps, swapped by the generator or left alone."""
    tree = from_nested([[], []])
    swap = (1, 0, 2) if not fixed else (0, 1, 2)
    return make_gtree(whole(G), tree, {1: swap})


class GTreeTests(SimpleTestCase):

    # --- Tests for construction ---

    def test_quaternion_tree_layout(self):
        T = quaternion_gtree()
        self.assertEqual(len(T.components), 2)
        self.assertEqual(T.arity, 6)
        self.assertEqual(T.stabilizer(0).elements, (0, 1, 4, 5))
        self.assertEqual(T.text(), "((|,|,|),(|,|,|)) | ((|,|,|),(|,|,|))")

    def test_quaternion_tree_g_vertices(self):
        """One G-vertex for the d orbit and one for the c orbit."""
        vertices = g_vertices(quaternion_gtree())
        self.assertEqual(len(vertices), 2)
        sizes = sorted((v.corolla.arity, len(v.outputs)) for v in vertices)
        self.assertEqual(sizes, [(2, 2), (3, 4)])

    def test_quaternion_isomorphism_class(self):
        """72 planar structures per component, two component orders and eight automorphisms."""
        T = quaternion_gtree()
        models = isomorphism_class(T)
        self.assertEqual(len(models), 1296)
        self.assertEqual(len(automorphisms(T)), 8)
        canonical = canonical_gtree(T)[0]
        self.assertTrue(all(canonical_gtree(N)[0] == canonical for N in list(models)[:20]))

    def test_isomorphism_class_bound(self):
        with override_settings(GENOP={"ENUMERATION_BOUND": 100}):
            with self.assertRaises(BoundExceeded):
                isomorphism_class(quaternion_gtree())

    def test_make_gtree_rejects_inconsistent_generators(self):
        H = generated(quaternion8(), [4])
        with self.assertRaises(DomainError) as ctx:
            make_gtree(H, QUATERNION_TREE, {4: J_ACTION, 1: tuple(range(9))})
        self.assertEqual(ctx.exception.invariant, "cocycle")

    def test_make_gtree_rejects_non_automorphism(self):
        H = generated(quaternion8(), [4])
        with self.assertRaises(DomainError):
            make_gtree(H, QUATERNION_TREE, {4: (3, 1, 2, 0, 4, 5, 6, 7, 8)})

    def test_action_must_respect_components(self):
        G = cyclic(2)
        with self.assertRaises(DomainError):
            GTree(G, (STICK, STICK), ((0, 1), (0, 1)))

    def test_free_and_trivial_corollas(self):
        G = cyclic(2)
        self.assertEqual(len(free_corolla(G, 2).components), 2)
        self.assertEqual(len(trivial_corolla(G, 2).components), 1)
        self.assertEqual(len(corolla_classes(G, 2)), 3)

    # --- Tests for quotients and automorphisms ---

    def test_quotients_of_sticks(self):
        G = cyclic(2)
        free_stick = induce(trivial_subgroup(G), STICK, {0: (0,)})
        fixed_stick = induce(whole(G), STICK, {0: (0,), 1: (0,)})
        self.assertEqual(len(quotients(free_stick, fixed_stick)), 1)
        self.assertEqual(len(quotients(fixed_stick, free_stick)), 0)
        self.assertEqual(len(automorphisms(free_stick)), 2)

    def test_automorphisms_of_corollas(self):
        G = cyclic(2)
        self.assertEqual(len(automorphisms(trivial_corolla(G, 3))), 6)
        self.assertEqual(len(automorphisms(free_corolla(G, 2))), 4)

    def test_quotients_are_equivariant(self):
        for f in quotients(quaternion_gtree(), quaternion_gtree()):
            self.assertTrue(f.is_quotient())

    def test_relabelled_components_keep_their_automorphisms(self):
        """Reversing the root inputs of one component changes no count."""
        G = cyclic(2)
        tree = from_nested([[None, None], None])
        T = induce(trivial_subgroup(G), tree, {0: tuple(tree.edges)})
        reversed_root = {tree.root: tuple(reversed(tree.children[tree.root]))}
        N, _ = relabel(T, (0, 1), ({}, reversed_root))
        self.assertNotEqual(N.components[0], N.components[1])
        self.assertTrue(is_isomorphic(T, N))
        self.assertEqual(len(automorphisms(T)), 4)
        self.assertEqual(len(automorphisms(N)), 4)
        self.assertEqual(len(quotients(T, N)), 4)
        self.assertEqual(canonical_gtree(N)[0], canonical_gtree(T)[0])

    # --- Tests for root pullbacks ---

    def test_root_pullback_along_identity(self):
        T = quaternion_gtree()
        Y, psi = orbit_map_from(T.stabilizer(0), T, 0)
        P, f = root_pullback(T, Y, psi)
        self.assertTrue(is_isomorphic(P, T))
        self.assertEqual(f.kind, MapKind.ROOT_PULLBACK)
        self.assertTrue(f.is_quotient())

    def test_root_pullbacks_compose(self):
        """Pulling back along G/L -> G/K -> r(T) agrees with pulling back along the composite."""
        T = quaternion_gtree()
        G = T.group
        K, L = generated(G, [1]), trivial_subgroup(G)
        P, f = root_pullback(T, *orbit_map_from(K, T, 0))
        PP, g = root_pullback(P, *orbit_map_from(L, P, 0))
        Q, h = root_pullback(T, *orbit_map_from(L, T, 0))
        self.assertEqual(len(P.components), 4)
        self.assertEqual(len(Q.components), 8)
        self.assertTrue(is_isomorphic(PP, Q))
        self.assertTrue(f.compose(g).is_quotient())
        self.assertTrue(h.is_quotient())

    def test_root_pullback_rejects_non_equivariant_map(self):
        T = quaternion_gtree()
        Y = coset_space(trivial_subgroup(T.group))
        with self.assertRaises(DomainError):
            root_pullback(T, Y, (0,) * 8)

    def test_orbit_map_needs_subgroup_of_stabilizer(self):
        T = quaternion_gtree()
        with self.assertRaises(DomainError):
            orbit_map_from(whole(T.group), T, 0)

    # --- Tests for leaf-root ---

    def test_leaf_root_of_quaternion_tree(self):
        T = quaternion_gtree()
        C, f = g_leaf_root(T)
        self.assertEqual(C.arity, 6)
        self.assertEqual(len(C.components), 2)
        self.assertEqual(f.kind, MapKind.PLANAR_TALL)
        self.assertTrue(f.is_equivariant())

    def test_leaf_root_of_stick(self):
        G = cyclic(2)
        C, f = g_leaf_root(induce(whole(G), STICK, {0: (0,), 1: (0,)}))
        self.assertTrue(C.is_corolla)
        self.assertEqual(C.arity, 1)
        self.assertEqual(f.kind, MapKind.DEGENERACY)

    # --- Tests for substitution ---

    def test_corolla_datum_is_identity(self):
        T = quaternion_gtree()
        result = g_substitute(T, corolla_datum(T))
        self.assertEqual(result.tree, T)
        self.assertEqual(result.map.edges, tuple(range(T.size)))

    def test_substitution_round_trips(self):
        """A rooted G-tree substituted into its corolla decomposes back into itself."""
        rng = random.Random(5)
        for G in (cyclic(2), cyclic(3)):
            for _ in range(25):
                T, C, pins = random_gtree(rng, G, max_gv=2, max_arity=2)
                result = g_substitute(C, [(T, pins)])
                self.assertTrue(is_isomorphic(result.tree, T))
                self.assertTrue(result.map.is_equivariant())
                again = g_substitute(C, g_desubstitute(result.map))
                self.assertTrue(is_isomorphic(again.tree, T))

    def test_substitution_rejects_missing_pieces(self):
        with self.assertRaises(DomainError):
            g_substitute(quaternion_gtree(), [])

    # --- Tests for families of G-trees ---

    def test_is_F_tree(self):
        G = cyclic(2)
        swapped, fixed = stumps_under_root(G, False), stumps_under_root(G, True)
        self.assertTrue(is_F_tree(swapped, complete_family(G, 2)))
        self.assertFalse(is_F_tree(swapped, trivial_graph_family(G, 2)))
        self.assertTrue(is_F_tree(fixed, trivial_graph_family(G, 2)))
        self.assertFalse(is_F_tree(fixed, free_family(G, 2)))
        self.assertFalse(is_F_tree(fixed, complete_family(G, 1)))

    # --- Tests for rooted shapes ---

    def test_single_vertex_shapes(self):
        C = trivial_corolla(cyclic(2), 2)
        shapes = rooted_shapes(C, 1)
        self.assertEqual(len(shapes), 1)
        self.assertTrue(is_isomorphic(shapes[0][0], C))

    def test_stump_shapes_over_nullary_corolla(self):
        """Swapped stumps and fixed stumps are different shapes with 2 and 3 G-vertices."""
        G = cyclic(2)
        C = trivial_corolla(G, 0)
        self.assertEqual(len(rooted_shapes(C, 2)), 3)
        two_stumps = [T for T, _ in rooted_shapes(C, 3) if T.components[0] == from_nested([[], []])]
        self.assertEqual(len(two_stumps), 2)
        counts = sorted(len(g_vertices(T)) for T in two_stumps)
        self.assertEqual(counts, [2, 3])
        self.assertTrue(any(is_isomorphic(T, stumps_under_root(G, False)) for T in two_stumps))
        self.assertTrue(any(is_isomorphic(T, stumps_under_root(G, True)) for T in two_stumps))

    def test_shapes_are_pairwise_distinct(self):
        C = free_corolla(cyclic(2), 1)
        shapes = rooted_shapes(C, 2)
        self.assertEqual(len(set(shapes)), len(shapes))

    def test_arity_restriction(self):
        C = trivial_corolla(cyclic(2), 0)
        shapes = rooted_shapes(C, 3, arities=[0])
        self.assertEqual(len(shapes), 1)

    def test_enumeration_bound(self):
        with override_settings(GENOP={"ENUMERATION_BOUND": 2}):
            with self.assertRaises(BoundExceeded):
                enumerate_gtrees(trivial_corolla(cyclic(3), 0), 4)

    def test_rooted_shapes_reject_non_corolla(self):
        with self.assertRaises(DomainError):
            rooted_shapes(quaternion_gtree(), 2)
