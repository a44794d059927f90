from django.test import SimpleTestCase, override_settings
import pandas as pd

from genop.exceptions import DomainError
from genop.families import complete_family, free_family, trivial_graph_family, unary_family
from genop.groups import Subgroup, cyclic, direct_product, symmetric
from genop.gtrees import free_corolla, trivial_corolla
from genop.ninfty import (
    bar_construction,
    check_operators,
    extract_indexing,
    family_pattern,
    fixed_point_pattern,
    fixed_point_table,
    fixed_points,
    ftilde,
    ftilde_laws,
    ftilde_multiply,
    ftilde_unit,
    is_point_algebra,
    latching_check,
    ninfty_build,
    point_family,
)
from genop.operads import is_weak_indexing
from genop.sequences import class_key

C1 = cyclic(1)
C2 = cyclic(2)


def without_involution_class():
    """All C2-corollas up to arity 4 except those acting by a fixed-point-free involution."""
    ambient = direct_product(C2, symmetric(4))
    involution = ambient.pair(1, symmetric(4).point_index[(2, 3, 0, 1)])
    return complete_family(C2, 4).without(4, Subgroup(ambient, (0, involution)))


def binary_points():
    return point_family(complete_family(C1, 2), [2])


class FtildeTests(SimpleTestCase):

    # --- Tests for the composite monad ---

    def test_empty_family_leaves_only_sticks(self):
        unary = ftilde(C2, {}, trivial_corolla(C2, 1), max_gv=2).elements
        self.assertEqual(len(unary), 1)
        self.assertTrue(unary[0].tree.is_stick)
        self.assertEqual(ftilde(C2, {}, free_corolla(C2, 2), max_gv=2).elements, ())

    def test_binary_points_give_the_corolla_relabellings(self):
        result = ftilde(C1, binary_points(), free_corolla(C1, 2), max_gv=1)
        self.assertEqual(len(result.elements), 2)
        self.assertTrue(result.exact)

    def test_point_family_follows_the_family(self):
        points = point_family(free_family(C2, 2), [2])
        self.assertEqual(list(points), [class_key(free_corolla(C2, 2))])
        self.assertEqual(len(point_family(complete_family(C2, 2), [2])), 3)

    def test_unit_then_multiply(self):
        A = binary_points()
        C = free_corolla(C1, 2)
        once = {class_key(C): ftilde(C1, A, C, max_gv=1).elements}
        for t in once[class_key(C)]:
            self.assertEqual(ftilde_multiply(C1, A, C, ftilde_unit(C1, once, C, t), max_gv=1), t)

    def test_monad_laws(self):
        report = ftilde_laws(C1, binary_points(), free_corolla(C1, 2), max_gv=1)
        self.assertTrue(report.ok, report.failures)
        self.assertGreater(report.checked, 0)

    def test_point_algebra_matches_weak_indexing(self):
        for make in (complete_family, trivial_graph_family, free_family, unary_family):
            F = make(C2, 2)
            self.assertEqual(is_point_algebra(F, max_gv=2).weak_indexing,
                             is_weak_indexing(F).weak_indexing, F.name)


class BarConstructionTests(SimpleTestCase):

    # --- Tests for the bar construction ---

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.trivial = bar_construction(complete_family(C1, 2), 2, depth=2)

    def test_level_sizes(self):
        self.assertEqual([len(self.trivial.simplices(k)) for k in range(3)], [2, 4, 8])

    def test_sigma_action_is_free(self):
        self.assertTrue(check_operators(self.trivial).sigma_free)
        B0 = self.trivial.simplices(0)
        self.assertEqual(len({frozenset({x, self.trivial.act(1, 0, x)}) for x in B0}), len(B0) // 2)

    def test_simplicial_identities(self):
        self.assertEqual(self.trivial.simplicial_failures(), [])

    def test_operators_are_equivariant(self):
        self.assertEqual(self.trivial.equivariance_failures(), [])

    def test_extra_degeneracy_contracts(self):
        C = free_corolla(C1, 2)
        self.assertEqual(self.trivial.contraction_failures(C), [])

    def test_operator_indices(self):
        bar = bar_construction(complete_family(C2, 2), 2, depth=0)
        C = free_corolla(C2, 2)
        x = bar.simplices(0)[0]
        self.assertEqual(bar.face(0, 0, C, x), ())
        with self.assertRaises(DomainError):
            bar.face(1, 0, C, x)
        with self.assertRaises(DomainError):
            bar.degeneracy(0, 0, C, x)

    def test_rejects_families_that_are_not_weak_indexing(self):
        with self.assertRaises(DomainError) as ctx:
            bar_construction(free_family(C2, 2), 2, depth=1)
        self.assertEqual(ctx.exception.invariant, "weak indexing")

    def test_rejects_small_arities(self):
        with self.assertRaises(DomainError):
            bar_construction(complete_family(C1, 2), 1, depth=1)

    @override_settings(GENOP={"DEPTH": 1})
    def test_depth_defaults_to_the_setting(self):
        self.assertEqual(bar_construction(complete_family(C1, 2), 2).depth, 1)


class FixedPointTests(SimpleTestCase):

    # --- Tests for the fixed-point report ---

    def test_trivial_group(self):
        report = ninfty_build(complete_family(C1, 2), 2, depth=2, verify=True)
        self.assertTrue(report.ok)
        graph = [row for row in report.fixed_points if row.graph]
        other = [row for row in report.fixed_points if not row.graph]
        self.assertEqual(len(graph), 1)
        self.assertEqual(graph[0].sizes, (2, 4, 8))
        self.assertEqual(graph[0].pi0, 1)
        self.assertTrue(graph[0].contraction)
        self.assertEqual(len(other), 1)
        self.assertEqual(other[0].sizes, (0, 0, 0))

    def test_cyclic_group_diagonal(self):
        bar = bar_construction(complete_family(C2, 2), 2, depth=1)
        report = fixed_points(bar)
        self.assertTrue(report.ok)
        self.assertEqual(report.levels[0], 8)
        graph = [row for row in report.fixed_points if row.graph]
        self.assertEqual(len(graph), 3)
        for row in graph:
            self.assertTrue(row.identified)
            self.assertEqual(row.pi0, 1)
            self.assertTrue(row.contraction)
        self.assertEqual(sorted(row.sizes[0] for row in graph), [2, 2, 8])
        for row in report.fixed_points:
            if not row.graph:
                self.assertEqual(row.sizes, (0, 0))

    def test_depth_zero_leaves_pi0_open(self):
        bar = bar_construction(complete_family(C1, 2), 2, depth=0)
        with self.assertLogs("genop.ninfty", level="WARNING"):
            report = fixed_points(bar)
        self.assertFalse(report.pi0_checked)
        self.assertTrue(all(row.pi0 is None for row in report.fixed_points))
        self.assertTrue(report.ok)

    def test_report_as_dict_and_table(self):
        report = ninfty_build(complete_family(C1, 2), 2, depth=1, verify=True)
        data = report.as_dict()
        self.assertEqual(data["levels"], [2, 4])
        self.assertTrue(data["ok"])
        self.assertIn("operators", data)
        self.assertEqual(len(data["fixed_points"]), 2)
        table = fixed_point_table(report)
        self.assertIsInstance(table, pd.DataFrame)
        self.assertEqual(len(table), 2)
        self.assertTrue(table["ok"].all())

    @override_settings(GENOP={"THREADS": 2})
    def test_threads_give_the_same_report(self):
        threaded = fixed_points(bar_construction(complete_family(C2, 2), 2, depth=1))
        with self.settings(GENOP={"THREADS": 1}):
            serial = fixed_points(bar_construction(complete_family(C2, 2), 2, depth=1))
        self.assertEqual(threaded.as_dict(), serial.as_dict())


class ExtractIndexingTests(SimpleTestCase):

    # --- Tests for reading indexing systems off fixed points ---

    def test_round_trip_of_a_complete_run(self):
        report = ninfty_build(complete_family(C1, 2), 2, depth=1)
        extracted = extract_indexing(C1, fixed_point_pattern([report], C1))
        complete = complete_family(C1, 2)
        for n in (1, 2):
            self.assertTrue(extracted.family[n].issubset(complete[n]))
            self.assertTrue(complete[n].issubset(extracted.family[n]))
        self.assertEqual(len(extracted.family[0]), 0)
        self.assertTrue(extracted.verdict.weak_indexing)

    def test_unary_pattern_is_the_minimal_system(self):
        extracted = extract_indexing(C2, family_pattern(unary_family(C2, 1), [1]))
        self.assertEqual(extracted.family.bound, 1)
        self.assertEqual(len(extracted.family[1]), 2)
        self.assertTrue(extracted.verdict.weak_indexing)

    def test_missing_self_induction_is_rejected_with_a_witness(self):
        F = without_involution_class()
        extracted = extract_indexing(C2, family_pattern(F))
        self.assertTrue(extracted.family[4].issubset(F[4]))
        self.assertFalse(extracted.verdict.weak_indexing)
        self.assertIsNotNone(extracted.verdict.witness)

    def test_conjugates_must_agree(self):
        ambient = direct_product(C1, symmetric(3))
        index = symmetric(3).point_index
        a = ambient.pair(0, index[(1, 0, 2)])
        b = ambient.pair(0, index[(0, 2, 1)])
        with self.assertRaises(DomainError) as ctx:
            extract_indexing(C1, {3: {(0, a): True, (0, b): False}})
        self.assertEqual(ctx.exception.invariant, "conjugation")

    def test_subgroups_of_members_must_have_fixed_points(self):
        with self.assertRaises(DomainError) as ctx:
            extract_indexing(C2, {1: {(0, 1): True, (0,): False}})
        self.assertEqual(ctx.exception.invariant, "family")


class LatchingTests(SimpleTestCase):

    # --- Tests for the unit cubes ---

    def test_unit_is_injective(self):
        report = latching_check(complete_family(C1, 2), 1)
        self.assertTrue(report.ok)
        self.assertEqual(report.checked, 1)

    def test_square_for_the_cyclic_group(self):
        report = latching_check(complete_family(C2, 2), 2)
        self.assertTrue(report.ok, report.failures)
        self.assertEqual(report.checked, 3 * 3)

    def test_empty_cube(self):
        report = latching_check(complete_family(C1, 2), 0)
        self.assertTrue(report.ok)
        self.assertEqual(report.checked, 0)

    def test_dimension_bound(self):
        with self.assertRaises(DomainError):
            latching_check(complete_family(C1, 2), 4)
