# genop/ninfty.py
"""
Models for N-infinity operads built by the bar construction.

``ftilde`` is the composite monad on families of finite sets indexed by
corolla classes: free presheaf, then free genuine operad, then forget. For a
weak indexing system F the point family delta_F is an algebra over it, and
B_k = ftilde^(k+1)(delta_F) is a simplicial genuine operad. Evaluated at the
free corolla G . C_n it is a simplicial G x Sigma_n-set whose fixed points at
a graph subgroup are its values at the matching corolla. There the extra
degeneracy contracts every level onto a point, which is how the fixed-point
pattern is certified at a finite depth.

The model is reduced: delta_F is only taken in arities >= 2, so that every
tree over a corolla of arity n has at most n - 1 G-vertices and each level
is computed exactly.
"""
import concurrent.futures
import logging
from itertools import combinations
from typing import Any, Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import pandas as pd

from .conf import get_setting
from .exceptions import BoundExceeded, DomainError
from .families import CorollaFamily, corolla_family_from_seeds
from .groups import (
    FiniteGroup,
    Subgroup,
    conjugacy_class,
    conjugacy_classes,
    direct_product,
    is_graph,
    subgroups_of,
    symmetric,
)
from .gtrees import GTree, GTreeMap, MapKind, class_corolla, corolla_classes, corolla_hom, free_corolla, g_vertices
from .operads import (
    FreeEvaluation,
    FreeSeq,
    IndexingVerdict,
    TreeTerm,
    free_eval,
    is_weak_indexing,
    map_labels,
    multiply,
    unit,
)
from .sequences import ClassKey, Element, FreePresheaf, class_key, free_automorphism, orbit_quotient
from .utils import UnionFind, identity

logger = logging.getLogger(__name__)

# --- Type aliases ---
Generators = Mapping[ClassKey, Sequence[Element]]
Pattern = Dict[int, Dict[Tuple[int, ...], bool]]

MAX_CUBE = 3


# --- The composite monad ---
def point_family(F: CorollaFamily, arities: Optional[Iterable[int]] = None) -> Dict[ClassKey, Tuple[Element, ...]]:
    """delta_F as a family of sets: one point at each corolla class of F."""
    wanted = range(F.bound + 1) if arities is None else arities
    return {
        class_key(C): ((),)
        for n in wanted if n <= F.bound
        for C in corolla_classes(F.group, n)
        if F.contains_hom(corolla_hom(C))
    }


def free_labels(G: FiniteGroup, A: Generators, bound: int, name: str = "") -> FreePresheaf:
    top = max((key[0] for key, values in A.items() if values), default=0)
    return FreePresheaf(G, {key: values for key, values in A.items() if values}, max(bound, top), name)


def ftilde(G: FiniteGroup, A: Generators, C: GTree, max_gv: Optional[int] = None) -> FreeEvaluation:
    """
    The composite monad on a family of sets, evaluated at C.

    Args:
        G: The group.
        A: Elements per corolla class key.
        C: Any G-corolla.
        max_gv: G-vertex bound, MAX_GV by default.

    Returns:
        Trees over C whose G-vertices carry a quotient onto a corolla class
        and an element of A there.
    """
    return free_eval(free_labels(G, A, C.arity), C, max_gv)


def ftilde_unit(G: FiniteGroup, A: Generators, C: GTree, x: Element) -> TreeTerm:
    """eta at the canonical corolla C."""
    if class_corolla(G, class_key(C)) != C:
        raise DomainError("the unit is only defined at canonical corollas", invariant="canonical corolla")
    return unit(free_labels(G, A, C.arity), C, (class_key(C), identity(C.size), x))


def ftilde_multiply(G: FiniteGroup, A: Generators, C: GTree, t: TreeTerm, max_gv: Optional[int] = None) -> TreeTerm:
    """
    mu: a tree labelled by elements of ftilde A at corolla classes becomes a
    tree labelled by A, restricting each label to its vertex and grafting.
    """
    bound = max([C.arity] + [key[0] for key in A])
    inner = FreeSeq(free_labels(G, A, bound), max_gv, bound=bound)
    return _graft(inner, C, t)


def _graft(inner: FreeSeq, C: GTree, t: TreeTerm) -> TreeTerm:
    G = C.group
    pieces = []
    for v, (key, edges, s) in zip(g_vertices(t.tree), t.labels):
        q = GTreeMap(v.corolla, class_corolla(G, key), edges, MapKind.QUOTIENT)
        pieces.append(inner.restrict(s, q))
    return multiply(inner.X, C, TreeTerm(t.tree, t.pins, tuple(pieces)))


class FtildeReport(NamedTuple):
    left_unit: bool
    right_unit: bool
    associative: bool
    checked: int
    failures: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.left_unit and self.right_unit and self.associative


def ftilde_laws(G: FiniteGroup, A: Generators, C: GTree, max_gv: int = 1) -> FtildeReport:
    """Unit and associativity laws of the composite monad at a canonical corolla C."""
    bound = max([C.arity] + [key[0] for key in A])
    domain = [D for n in range(bound + 1) for D in corolla_classes(G, n)]
    once = {class_key(D): ftilde(G, A, D, max_gv).elements for D in domain}
    twice = {class_key(D): ftilde(G, once, D, max_gv).elements for D in domain}
    inner = FreeSeq(free_labels(G, A, bound), max_gv, bound=bound)
    middle = FreeSeq(free_labels(G, once, bound), max_gv, bound=bound)

    def lift(t: TreeTerm, fn: Callable[[GTree, Element], Element], target: Generators) -> TreeTerm:
        Z = free_labels(G, target, bound)
        return map_labels(t, lambda D, l: (l[0], l[1], fn(class_corolla(G, l[0]), l[2])), Z, C)

    failures: List[str] = []
    checked = 0
    for t in once[class_key(C)]:
        checked += 1
        if _graft(inner, C, ftilde_unit(G, once, C, t)) != t:
            failures.append(f"left unit fails on {t.tree!r}")
        if _graft(inner, C, lift(t, lambda D, a: ftilde_unit(G, A, D, a), once)) != t:
            failures.append(f"right unit fails on {t.tree!r}")
    for s in ftilde(G, twice, C, max_gv).elements:
        checked += 1
        outer = _graft(inner, C, _graft(middle, C, s))
        nested = _graft(inner, C, lift(s, lambda D, u: _graft(inner, D, u), once))
        if outer != nested:
            failures.append(f"associativity fails on {s.tree!r}")
    if failures:
        logger.warning("composite monad laws over %r: %d failures", C, len(failures))
    return FtildeReport(not any(f.startswith("left") for f in failures),
                        not any(f.startswith("right") for f in failures),
                        not any(f.startswith("assoc") for f in failures), checked, tuple(failures))


def is_point_algebra(F: CorollaFamily, max_gv: Optional[int] = None) -> IndexingVerdict:
    """Whether delta_F admits a structure map from ftilde delta_F: no tree over a corolla outside F."""
    G = F.group
    points = point_family(F)
    checked = 0
    partial = False
    for n in range(F.bound + 1):
        for C in corolla_classes(G, n):
            if F.contains_hom(corolla_hom(C)):
                continue
            checked += 1
            result = ftilde(G, points, C, max_gv)
            partial = partial or not result.exact
            if result.elements:
                return IndexingVerdict(False, result.elements[0].tree, partial, "ftilde", checked)
    return IndexingVerdict(True, None, partial, "ftilde", checked)


# --- The bar construction ---
class BarLevel(NamedTuple):
    degree: int
    labels: FreePresheaf
    sequence: FreeSeq


class TruncSimpGSet:
    """
    B_0, ..., B_depth with B_k = ftilde^(k+1)(delta_F), over the corollas of
    arity at most ``arity``. Level -1 is delta_F itself.

    Faces d_i and degeneracies s_i are defined at every corolla; the extra
    degeneracy s_-1 only at canonical corollas, since the unit of the free
    presheaf is not natural in automorphisms.
    """

    def __init__(self, family: CorollaFamily, arity: int, depth: int, max_gv: Optional[int] = None):
        self.family = family
        self.group = family.group
        self.arity = arity
        self.depth = depth
        self.max_gv = max(1, arity - 1) if max_gv is None else max_gv
        self.ambient = direct_product(self.group, symmetric(arity))
        self.corolla = free_corolla(self.group, arity)
        self.domain = tuple(D for n in range(2, arity + 1) for D in corolla_classes(self.group, n))
        self.levels: List[BarLevel] = []
        self._memo: Dict[Tuple, Element] = {}
        self._actions: Dict[int, GTreeMap] = {}

        generators: Dict[ClassKey, Tuple[Element, ...]] = point_family(family, range(2, arity + 1))
        budget = get_setting("ENUMERATION_BOUND")
        for k in range(depth + 1):
            labels = free_labels(self.group, generators, arity, f"L[B{k - 1}]")
            sequence = FreeSeq(labels, self.max_gv, bound=arity, name=f"B{k}")
            self.levels.append(BarLevel(k, labels, sequence))
            generators = {class_key(D): sequence.values(D) for D in self.domain}
            total = sum(len(v) for v in generators.values())
            if total > budget:
                raise BoundExceeded(f"bar level {k} has {total} elements, beyond ENUMERATION_BOUND",
                                    bound="ENUMERATION_BOUND")
            logger.debug("bar level %d over %s: %d elements across %d corolla classes",
                         k, family.name, total, len(self.domain))

    def __repr__(self):
        return f"B[{self.family.name}, n={self.arity}, depth={self.depth}]"

    # --- Simplices ---
    def simplices(self, k: int, C: Optional[GTree] = None) -> Tuple[Element, ...]:
        """B_k(C), the free corolla by default; level -1 is delta_F(C)."""
        C = self.corolla if C is None else C
        if k == -1:
            return ((),) if self.family.contains_hom(corolla_hom(C)) else ()
        return self.levels[k].sequence.values(C)

    def restrict(self, k: int, x: Element, q: GTreeMap) -> Element:
        if k == -1:
            return ()
        return self.levels[k].sequence.restrict(x, q)

    def action(self, a: int) -> GTreeMap:
        """The automorphism of G . C_n through which (g, sigma) acts."""
        if a not in self._actions:
            g, s = self.ambient.split(a)
            self._actions[a] = free_automorphism(self.group, self.arity, g, symmetric(self.arity).points[s])
        return self._actions[a]

    def act(self, a: int, k: int, x: Element) -> Element:
        return self.restrict(k, x, self.action(a))

    def stabilizer(self, k: int, x: Element) -> Tuple[int, ...]:
        return tuple(a for a in self.ambient.elements if self.act(a, k, x) == x)

    # --- Operators ---
    def _lift(self, k: int, C: GTree, x: TreeTerm, fn: Callable[[GTree, Element], Element], target: int) -> TreeTerm:
        """ftilde applied to a map of families, from level k into level ``target``."""
        G = self.group

        def relabel(D: GTree, l: Element) -> Element:
            return l[0], l[1], fn(class_corolla(G, l[0]), l[2])

        return map_labels(x, relabel, self.levels[target].labels, C)

    def _cached(self, key: Tuple, compute: Callable[[], Element]) -> Element:
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    def face(self, k: int, i: int, C: GTree, x: Element) -> Element:
        """d_i: B_k -> B_(k-1), 0 <= i <= k; d_0 on B_0 is the augmentation onto delta_F."""
        if not 0 <= i <= k <= self.depth:
            raise DomainError(f"no face d_{i} on level {k}", invariant="face index")
        return self._cached(("d", k, i, C, x), lambda: self._face(k, i, C, x))

    def _face(self, k, i, C, x):
        if i == 0 and k == 0:
            if not self.family.contains_hom(corolla_hom(C)):
                raise DomainError(f"{C!r} is outside {self.family.name}", invariant="algebra")
            return ()
        if i == 0:
            return _graft(self.levels[k - 1].sequence, C, x)
        return self._lift(k, C, x, lambda D, a: self.face(k - 1, i - 1, D, a), k - 1)

    def degeneracy(self, k: int, i: int, C: GTree, x: Element) -> Element:
        """s_i: B_k -> B_(k+1), -1 <= i <= k; s_-1 is the extra degeneracy."""
        if not -1 <= i <= k < self.depth:
            raise DomainError(f"no degeneracy s_{i} on level {k}", invariant="degeneracy index")
        return self._cached(("s", k, i, C, x), lambda: self._degeneracy(k, i, C, x))

    def _degeneracy(self, k, i, C, x):
        if i == -1:
            if class_corolla(self.group, class_key(C)) != C:
                raise DomainError("the extra degeneracy needs a canonical corolla", invariant="canonical corolla")
            return unit(self.levels[k + 1].labels, C, (class_key(C), identity(C.size), x))
        return self._lift(k, C, x, lambda D, a: self.degeneracy(k - 1, i - 1, D, a), k + 1)

    # --- Checks ---
    def simplicial_failures(self, C: Optional[GTree] = None) -> List[str]:
        """Every simplicial identity among the stored operators, on every simplex at C."""
        C = self.corolla if C is None else C
        d, s = (lambda k, i, x: self.face(k, i, C, x)), (lambda k, i, x: self.degeneracy(k, i, C, x))
        failures: List[str] = []
        for k in range(2, self.depth + 1):
            for x in self.simplices(k, C):
                for j in range(k + 1):
                    for i in range(j):
                        if d(k - 1, i, d(k, j, x)) != d(k - 1, j - 1, d(k, i, x)):
                            failures.append(f"d{i} d{j} on level {k}")
        for k in range(self.depth - 1):
            for x in self.simplices(k, C):
                for j in range(k + 1):
                    for i in range(j + 1):
                        if s(k + 1, i, s(k, j, x)) != s(k + 1, j + 1, s(k, i, x)):
                            failures.append(f"s{i} s{j} on level {k}")
        for k in range(self.depth):
            for x in self.simplices(k, C):
                for j in range(k + 1):
                    y = s(k, j, x)
                    for i in range(k + 2):
                        if i in (j, j + 1):
                            expected = x
                        elif i < j:
                            expected = s(k - 1, j - 1, d(k, i, x))
                        else:
                            expected = s(k - 1, j, d(k, i - 1, x))
                        if d(k + 1, i, y) != expected:
                            failures.append(f"d{i} s{j} on level {k}")
        return failures

    def equivariance_failures(self) -> List[str]:
        """Faces and degeneracies commute with the generators of G x Sigma_n at the free corolla."""
        C = self.corolla
        failures: List[str] = []
        for a in Subgroup(self.ambient, tuple(self.ambient.elements)).generators:
            for k in range(self.depth + 1):
                for x in self.simplices(k, C):
                    y = self.act(a, k, x)
                    for i in range(1 if k == 0 else 0, k + 1):
                        if self.face(k, i, C, y) != self.act(a, k - 1, self.face(k, i, C, x)):
                            failures.append(f"d{i} on level {k} under {a}")
                    if k < self.depth:
                        for i in range(k + 1):
                            if self.degeneracy(k, i, C, y) != self.act(a, k + 1, self.degeneracy(k, i, C, x)):
                                failures.append(f"s{i} on level {k} under {a}")
        return failures

    def contraction_failures(self, C: GTree) -> List[str]:
        """d_0 s_-1 = id and d_(i+1) s_-1 = s_-1 d_i at a canonical corolla."""
        failures: List[str] = []
        for k in range(-1, self.depth):
            for x in self.simplices(k, C):
                y = self.degeneracy(k, -1, C, x)
                if self.face(k + 1, 0, C, y) != x:
                    failures.append(f"d0 s-1 on level {k}")
                for i in range(k + 1):
                    if self.face(k + 1, i + 1, C, y) != self.degeneracy(k - 1, -1, C, self.face(k, i, C, x)):
                        failures.append(f"d{i + 1} s-1 on level {k}")
        return failures

    def components(self, C: GTree) -> Optional[int]:
        """|pi_0| of B(C), or None below depth 1."""
        if self.depth < 1:
            return None
        classes = UnionFind(self.simplices(0, C))
        for x in self.simplices(1, C):
            classes.union(self.face(1, 0, C, x), self.face(1, 1, C, x))
        return len(classes)


def bar_construction(F: CorollaFamily, arity: int, depth: Optional[int] = None,
                     max_gv: Optional[int] = None) -> TruncSimpGSet:
    """
    The bar construction of delta_F truncated at ``depth``.

    Args:
        F: A weak indexing system.
        arity: Largest corolla arity, at least 2.
        depth: Top simplicial degree, DEPTH by default.
        max_gv: G-vertex bound per level; n - 1 makes every level exact.

    Returns:
        The TruncSimpGSet; raises DomainError when F is not a weak indexing system.
    """
    depth = get_setting("DEPTH") if depth is None else depth
    if arity < 2 or arity > F.bound:
        raise DomainError(f"arity {arity} outside 2..{F.bound}", invariant="arity")
    if depth < 0:
        raise DomainError("depth must be non-negative", invariant="depth")
    verdict = is_weak_indexing(F)
    if not verdict.weak_indexing:
        raise DomainError(f"{F.name} is not a weak indexing system (witness {verdict.witness!r})",
                          invariant="weak indexing")
    return TruncSimpGSet(F, arity, depth, max_gv)


class OperatorReport(NamedTuple):
    simplicial: Tuple[str, ...]
    equivariance: Tuple[str, ...]
    sigma_free: bool

    @property
    def ok(self) -> bool:
        return not self.simplicial and not self.equivariance and self.sigma_free


def check_operators(bar: TruncSimpGSet) -> OperatorReport:
    """Simplicial identities and equivariance at the free corolla, and freeness of the Sigma_n action."""
    free = all(
        is_graph(Subgroup(bar.ambient, bar.stabilizer(k, x)))
        for k in range(bar.depth + 1) for x in bar.simplices(k)
    )
    return OperatorReport(tuple(bar.simplicial_failures()), tuple(bar.equivariance_failures()), free)


# --- Fixed points ---
class FixedPoints(NamedTuple):
    arity: int
    subgroup: Tuple[int, ...]
    graph: bool
    expected: bool
    sizes: Tuple[int, ...]
    pi0: Optional[int]
    contraction: Optional[bool]
    identified: Optional[bool]

    @property
    def ok(self) -> bool:
        if not self.expected:
            return not any(self.sizes)
        return (all(self.sizes) and self.pi0 in (None, 1)
                and bool(self.contraction) and bool(self.identified))


class NinftyReport(NamedTuple):
    family: str
    arity: int
    depth: int
    levels: Tuple[int, ...]
    operators: Optional[OperatorReport]
    fixed_points: Tuple[FixedPoints, ...]

    @property
    def ok(self) -> bool:
        operators_ok = self.operators is None or self.operators.ok
        return operators_ok and all(row.ok for row in self.fixed_points)

    @property
    def pi0_checked(self) -> bool:
        return self.depth >= 1

    def as_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "family": self.family,
            "arity": self.arity,
            "depth": self.depth,
            "levels": list(self.levels),
            "fixed_points": {
                str(list(row.subgroup)): {
                    "graph": row.graph,
                    "expected_nonempty": row.expected,
                    "sizes": list(row.sizes),
                    "pi0": row.pi0,
                    "contraction_ok": row.contraction,
                    "identified": row.identified,
                    "ok": row.ok,
                }
                for row in self.fixed_points
            },
            "verified_depth": self.depth,
            "ok": self.ok,
        }
        if self.operators is not None:
            result["operators"] = {
                "simplicial_failures": list(self.operators.simplicial),
                "equivariance_failures": list(self.operators.equivariance),
                "sigma_free": self.operators.sigma_free,
            }
        return result


def quotient_graph(bar: TruncSimpGSet, q: GTreeMap) -> Tuple[int, ...]:
    """The elements (g, sigma) whose automorphism of G . C_n the quotient q absorbs."""
    return tuple(a for a in bar.ambient.elements
                 if all(q.edges[bar.action(a).edges[e]] == q.edges[e] for e in range(q.source.size)))


def _corolla_row(bar: TruncSimpGSet, C: GTree, stabilizers: Sequence[Sequence[frozenset]]) -> FixedPoints:
    q = orbit_quotient(C, 0)
    gamma = quotient_graph(bar, q)
    members = frozenset(gamma)
    expected = bar.family.contains(bar.arity, gamma)
    sizes = tuple(sum(1 for stab in level if members <= stab) for level in stabilizers)
    identified = True
    for k in range(bar.depth + 1):
        images = {bar.restrict(k, x, q) for x in bar.simplices(k, C)}
        fixed = {x for x, stab in zip(bar.simplices(k), stabilizers[k]) if members <= stab}
        if len(images) != len(bar.simplices(k, C)) or images != fixed:
            identified = False
    if not expected:
        return FixedPoints(bar.arity, gamma, True, False, sizes, None, None, identified)
    contraction = not bar.contraction_failures(C)
    return FixedPoints(bar.arity, gamma, True, True, sizes, bar.components(C), contraction, identified)


def fixed_points(bar: TruncSimpGSet, operators: bool = False) -> NinftyReport:
    """
    Fixed points of every subgroup class of G x Sigma_n on every level.

    Graph subgroups are compared with the values at their corollas, where
    pi_0 and the extra degeneracy are checked; the rest must have no fixed
    points at all.
    """
    G, n = bar.group, bar.arity
    stabilizers = [[frozenset(bar.stabilizer(k, x)) for x in bar.simplices(k)] for k in range(bar.depth + 1)]
    rows: List[FixedPoints] = []
    classes = corolla_classes(G, n)
    threads = get_setting("THREADS")
    if threads > 1 and len(classes) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            future_to_class = {executor.submit(_corolla_row, bar, C, stabilizers): C for C in classes}
            for future in concurrent.futures.as_completed(future_to_class):
                rows.append(future.result())
    else:
        rows.extend(_corolla_row(bar, C, stabilizers) for C in classes)

    for members in conjugacy_classes(bar.ambient):
        H = members[0]
        if is_graph(H):
            continue
        keys = frozenset(H.elements)
        sizes = tuple(sum(1 for stab in level if keys <= stab) for level in stabilizers)
        rows.append(FixedPoints(n, H.elements, False, False, sizes, None, None, None))

    rows.sort(key=lambda row: (not row.graph, len(row.subgroup), row.subgroup))
    if bar.depth < 1:
        logger.warning("depth 0 leaves pi_0 of the fixed points unchecked")
    report = NinftyReport(bar.family.name, n, bar.depth,
                          tuple(len(bar.simplices(k)) for k in range(bar.depth + 1)),
                          check_operators(bar) if operators else None, tuple(rows))
    for row in report.fixed_points:
        if not row.ok:
            logger.warning("fixed points of %s at %s disagree with the family: sizes %s",
                           bar, list(row.subgroup), row.sizes)
    return report


def ninfty_build(F: CorollaFamily, arity: int, depth: Optional[int] = None, verify: bool = False) -> NinftyReport:
    return fixed_points(bar_construction(F, arity, depth), operators=verify)


def fixed_point_table(report: NinftyReport) -> pd.DataFrame:
    rows = [{
        "subgroup": list(row.subgroup),
        "order": len(row.subgroup),
        "graph": row.graph,
        "expected": row.expected,
        "sizes": list(row.sizes),
        "pi0": row.pi0,
        "contraction": row.contraction,
        "ok": row.ok,
    } for row in report.fixed_points]
    return pd.DataFrame(rows, columns=["subgroup", "order", "graph", "expected", "sizes", "pi0", "contraction", "ok"])


# --- Indexing systems from fixed-point patterns ---
def fixed_point_pattern(reports: Iterable[NinftyReport], group: FiniteGroup) -> Pattern:
    """
    Per arity, every subgroup of G x Sigma_n with whether it has fixed points.
    Arity 1 comes from the unit, fixed by everything.
    """
    pattern: Pattern = {1: {H.elements: True for H in _all_subgroups(direct_product(group, symmetric(1)))}}
    for report in reports:
        ambient = direct_product(group, symmetric(report.arity))
        level = pattern.setdefault(report.arity, {})
        for row in report.fixed_points:
            for H in conjugacy_class(Subgroup(ambient, row.subgroup)):
                level[H.elements] = all(row.sizes) and bool(row.sizes)
    return pattern


def family_pattern(F: CorollaFamily, arities: Optional[Iterable[int]] = None) -> Pattern:
    """The pattern an N_F-operad should show."""
    wanted = range(F.bound + 1) if arities is None else arities
    return {
        n: {H.elements: H in F[n] for H in _all_subgroups(direct_product(F.group, symmetric(n)))}
        for n in wanted
    }


def _all_subgroups(ambient: FiniteGroup) -> Tuple[Subgroup, ...]:
    return tuple(H for members in conjugacy_classes(ambient) for H in members)


class ExtractedIndexing(NamedTuple):
    family: CorollaFamily
    verdict: IndexingVerdict


def extract_indexing(group: FiniteGroup, pattern: Pattern, bound: Optional[int] = None) -> ExtractedIndexing:
    """
    The corolla family of subgroups with fixed points, and whether it is a
    weak indexing system.

    Args:
        group: The group G.
        pattern: Arity -> subgroup elements of G x Sigma_n -> non-empty.
        bound: Arity bound of the family, the largest arity present by default.

    Returns:
        An ExtractedIndexing; raises DomainError when conjugate subgroups
        disagree or the non-empty ones are not closed under subgroups.
    """
    bound = max(pattern, default=0) if bound is None else bound
    seeds: Dict[int, List[Subgroup]] = {}
    for n, level in sorted(pattern.items()):
        ambient = direct_product(group, symmetric(n))
        for elements, nonempty in sorted(level.items()):
            H = Subgroup(ambient, tuple(sorted(elements)))
            for K in conjugacy_class(H):
                if K.elements in level and level[K.elements] != nonempty:
                    raise DomainError(f"conjugate subgroups {list(H.elements)} and {list(K.elements)} "
                                      f"of arity {n} disagree", invariant="conjugation")
            if not nonempty:
                continue
            for K in subgroups_of(H):
                if level.get(K.elements) is False:
                    raise DomainError(f"{list(K.elements)} has no fixed points but lies in "
                                      f"{list(H.elements)}", invariant="family")
            seeds.setdefault(n, []).append(H)
    family = corolla_family_from_seeds(group, seeds, bound=bound, name="extracted")
    verdict = is_weak_indexing(family)
    logger.debug("extracted family %s: weak indexing %s", family.table().to_dict("records"), verdict.weak_indexing)
    return ExtractedIndexing(family, verdict)


# --- Latching maps of the unit cubes ---
class LatchingReport(NamedTuple):
    dimension: int
    arity: int
    checked: int
    failures: Tuple[Tuple[ClassKey, Tuple[int, ...]], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def _cube_map(bar: TruncSimpGSet, C: GTree, V: Tuple[int, ...], j: int, x: Element) -> Element:
    """X_V -> X_(V + j): the unit inserted at the position of j."""
    m = len(V)
    p = sorted(V + (j,)).index(j)
    return bar.degeneracy(m - 1, p - 1, C, x)


def _latching_injective(bar: TruncSimpGSet, C: GTree, U: Tuple[int, ...]) -> bool:
    proper = [V for r in range(len(U)) for V in combinations(U, r)]
    colimit = UnionFind((V, x) for V in proper for x in bar.simplices(len(V) - 1, C))
    image: Dict[Tuple[Tuple[int, ...], Element], Element] = {}
    for V in proper:
        for x in bar.simplices(len(V) - 1, C):
            for j in U:
                if j in V:
                    continue
                W = tuple(sorted(V + (j,)))
                y = _cube_map(bar, C, V, j, x)
                if W in proper:
                    colimit.union((V, x), (W, y))
                elif (V, x) not in image:
                    image[(V, x)] = y
    owner: Dict[Element, Any] = {}
    for node, y in image.items():
        root = colimit.find(node)
        if owner.setdefault(y, root) != root:
            return False
    return True


def latching_check(F: CorollaFamily, n: int, arity: int = 2) -> LatchingReport:
    """
    Injectivity of every latching map of the cube U -> ftilde^|U|(delta_F),
    U a subset of {1..n}, with maps induced by the unit, at every corolla
    class of arity 2..arity.
    """
    if not 0 <= n <= MAX_CUBE:
        raise DomainError(f"cube dimension {n} outside 0..{MAX_CUBE}", invariant="cube dimension")
    bar = TruncSimpGSet(F, arity, max(n, 1), None)
    checked = 0
    failures = []
    for C in bar.domain:
        for r in range(1, n + 1):
            for U in combinations(range(1, n + 1), r):
                checked += 1
                if not _latching_injective(bar, C, U):
                    failures.append((class_key(C), U))
    if failures:
        logger.warning("%d latching maps of the %d-cube over %s are not injective", len(failures), n, F.name)
    return LatchingReport(n, arity, checked, tuple(failures))
