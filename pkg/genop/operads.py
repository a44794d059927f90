# genop/operads.py
"""
The free genuine operad monad on finite G-symmetric sequences, its algebras
and the verification of weak indexing systems.

Elements of the free sequence are ``TreeTerm`` values: a G-tree, a rooted
identification of the corolla with its leaf-root, and one label per
G-vertex. Terms are kept in a canonical form so that equality of terms is
equality of isomorphism classes.
"""
import concurrent.futures
import logging
from abc import ABC, abstractmethod
from itertools import product
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

from .conf import get_setting
from .exceptions import BoundExceeded, DomainError
from .families import CorollaFamily
from .groups import Subgroup, conjugacy_classes, homomorphisms, symmetric
from .gtrees import (
    GTree,
    GTreeMap,
    GVertex,
    HTree,
    MapKind,
    assemble,
    automorphisms,
    corolla_classes,
    corolla_hom,
    corolla_map,
    g_leaf_root,
    g_substitute,
    g_vertices,
    induce,
    pinned_forms,
    root_pullback,
    rooted_shapes,
    unary_corolla,
)
from .sequences import DeltaSeq, Element, EqOperad, GSymSeq, IotaStar, order_key
from .trees import STICK, corolla
from .utils import identity, invert

logger = logging.getLogger(__name__)


# --- Tree terms ---
class TreeTerm(NamedTuple):
    """A G-tree over a corolla with one label per G-vertex, aligned with ``g_vertices(tree)``."""

    tree: GTree
    pins: Tuple[int, ...]
    labels: Tuple[Element, ...]

    def order_key(self):
        return self.tree.sort_key, self.pins, tuple(order_key(l) for l in self.labels)


def vertex_owners(vertices: Sequence[GVertex]) -> Dict[int, int]:
    """Output edge -> index of its G-vertex."""
    return {u: i for i, v in enumerate(vertices) for u in v.outputs}


def pull_labels(X: GSymSeq, source: GTree, f: GTreeMap, labels: Sequence[Element]) -> Tuple[Element, ...]:
    """
    Labels on the G-vertices of ``source`` restricted from those of f.target
    along the corolla maps induced by f.
    """
    targets = g_vertices(f.target)
    owner = vertex_owners(targets)
    pulled = []
    for w in g_vertices(source):
        i = owner[f.edges[w.outputs[0]]]
        q = GTreeMap(w.corolla, targets[i].corolla, corolla_map(w, targets[i], f.edges), MapKind.QUOTIENT)
        pulled.append(X.restrict(labels[i], q))
    return tuple(pulled)


def canonical_term(X: GSymSeq, C: GTree, T: GTree, pins: Sequence[int], labels: Sequence[Element]) -> TreeTerm:
    """The least labelled pinned form of (T, pins, labels)."""
    best: Optional[TreeTerm] = None
    for form in pinned_forms(T, C, pins):
        back = invert(form.iso)
        f = GTreeMap(form.tree, T, back, MapKind.ISO)
        term = TreeTerm(form.tree, form.pins, pull_labels(X, form.tree, f, labels))
        if best is None or term.order_key() < best.order_key():
            best = term
    return best


# --- Free evaluation ---
class FreeEvaluation(NamedTuple):
    corolla: GTree
    elements: Tuple[TreeTerm, ...]
    exact: bool


def _label_shape(X: GSymSeq, C: GTree, T: GTree, pins: Tuple[int, ...]) -> Set[TreeTerm]:
    options = [X.values(v.corolla) for v in g_vertices(T)]
    return {canonical_term(X, C, T, pins, labels) for labels in product(*options)}


def free_eval(X: GSymSeq, C: GTree, max_gv: Optional[int] = None) -> FreeEvaluation:
    """
    The terms of the free operad on X over C, up to ``max_gv`` G-vertices.

    Args:
        X: Labels for the G-vertices.
        C: The G-corolla.
        max_gv: Bound on the number of G-vertices, MAX_GV by default.

    Returns:
        A FreeEvaluation. ``exact`` is set when X vanishes in arities 0 and 1
        and the bound admits every tree over C.
    """
    max_gv = get_setting("MAX_GV") if max_gv is None else max_gv
    arities = frozenset(n for n in range(X.bound + 1) if X.supports(n))
    shapes = rooted_shapes(C, max_gv, arities)

    budget = get_setting("ENUMERATION_BOUND")
    total = 0
    for T, _ in shapes:
        count = 1
        for v in g_vertices(T):
            count *= len(X.values(v.corolla))
        total += count
    if total > budget:
        raise BoundExceeded(f"{total} labelled trees over {C!r} exceed ENUMERATION_BOUND",
                            bound="ENUMERATION_BOUND")

    found: Set[TreeTerm] = set()
    threads = get_setting("THREADS")
    if threads > 1 and len(shapes) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            future_to_shape = {
                executor.submit(_label_shape, X, C, T, pins): T
                for T, pins in shapes
            }
            for future in concurrent.futures.as_completed(future_to_shape):
                found |= future.result()
    else:
        for T, pins in shapes:
            found |= _label_shape(X, C, T, pins)

    exact = not X.supports(0) and not X.supports(1) and max_gv >= C.arity - 1
    elements = tuple(sorted(found, key=order_key))
    logger.debug("free_eval of %r over %r: %d shapes, %d terms, exact=%s", X, C, len(shapes), len(elements), exact)
    return FreeEvaluation(C, elements, exact)


def _reaches(steps: Set[int], target: int) -> bool:
    """Whether target is a sum of at least one non-negative step."""
    reached: Set[int] = set()
    frontier = {s for s in steps if 0 <= s <= target}
    while frontier:
        reached |= frontier
        frontier = {r + s for r in frontier for s in steps if s > 0 and r + s <= target} - reached
    return target in reached


# --- The free monad ---
class FreeSeq(GSymSeq):
    """
    The free operad on X as a G-symmetric sequence, truncated at ``max_gv``
    G-vertices. The reduced variant leaves out the stick.
    """

    def __init__(self, X: GSymSeq, max_gv: Optional[int] = None, reduced: bool = False,
                 bound: Optional[int] = None, name: str = ""):
        super().__init__(X.group, X.bound if bound is None else bound, name or f"F[{X.name}]")
        self.X = X
        self.max_gv = get_setting("MAX_GV") if max_gv is None else max_gv
        self.reduced = reduced
        self._cache: Dict[GTree, Tuple[TreeTerm, ...]] = {}

    def values(self, C):
        self.check_corolla(C)
        if C not in self._cache:
            elements = free_eval(self.X, C, self.max_gv).elements
            if self.reduced:
                elements = tuple(t for t in elements if not t.tree.is_stick)
            self._cache[C] = elements
        return self._cache[C]

    def supports(self, n):
        if n > self.bound:
            return False
        if n == 1 and not self.reduced:
            return True
        steps = {m - 1 for m in range(self.X.bound + 1) if self.X.supports(m)}
        if not steps:
            return False
        if -1 in steps and max(steps) > 0:
            return True
        if n == 0:
            return -1 in steps
        return _reaches(steps, n - 1)

    def restrict(self, t: TreeTerm, q: GTreeMap) -> TreeTerm:
        """Root pullback of the term along q: C' -> C."""
        C2, C = q.source, q.target
        T, a = t.tree, C.arity
        psi = tuple(T.comp_of[t.pins[C.offsets[q.orbit_map[x]] + a]] for x in range(len(C2.components)))
        P, f = root_pullback(T, C2.orbit, psi)
        pins = tuple(P.offsets[C2.comp_of[c]] + t.pins[q.edges[c]] - T.offsets[psi[C2.comp_of[c]]]
                     for c in range(C2.size))
        return canonical_term(self.X, C2, P, pins, pull_labels(self.X, P, f, t.labels))


def unit(X: GSymSeq, C: GTree, x: Element) -> TreeTerm:
    """eta: the corolla term labelled by x."""
    v = g_vertices(C)[0]
    label = X.restrict(x, GTreeMap(v.corolla, C, v.embedding, MapKind.ISO))
    return canonical_term(X, C, C, identity(C.size), (label,))


def stick_term(X: GSymSeq, C: GTree) -> TreeTerm:
    """The operad unit over a unary corolla C."""
    if C.arity != 1:
        raise DomainError("units live over unary corollas", invariant="unit")
    T = GTree(C.group, (STICK,) * len(C.components), C.orbit.action)
    return canonical_term(X, C, T, C.comp_of, ())


def multiply(X: GSymSeq, C: GTree, t: TreeTerm) -> TreeTerm:
    """
    mu: flattens a term whose labels are terms of the free sequence on X by
    substituting each label tree into its G-vertex.
    """
    sub = g_substitute(t.tree, [(u.tree, u.pins) for u in t.labels])
    back = [{e: i for i, e in enumerate(embedding)} for embedding in sub.embeddings]
    labels = []
    for r in g_vertices(sub.tree):
        i, u = sub.origin[r.outputs[0]]
        piece = t.labels[i]
        vertices = g_vertices(piece.tree)
        j = vertex_owners(vertices)[u]
        q = GTreeMap(r.corolla, vertices[j].corolla, corolla_map(r, vertices[j], back[i]), MapKind.QUOTIENT)
        labels.append(X.restrict(piece.labels[j], q))
    pins = tuple(sub.map.edges[p] for p in t.pins)
    return canonical_term(X, C, sub.tree, pins, labels)


def map_labels(t: TreeTerm, fn: Callable[[GTree, Element], Element], Z: GSymSeq, C: GTree) -> TreeTerm:
    """The free functor on a map of sequences fn(corolla, label) with values in Z."""
    labels = tuple(fn(v.corolla, l) for v, l in zip(g_vertices(t.tree), t.labels))
    return canonical_term(Z, C, t.tree, t.pins, labels)


class MonadReport(NamedTuple):
    left_unit: bool
    right_unit: bool
    associative: bool
    checked: int
    failures: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.left_unit and self.right_unit and self.associative


def monad_laws(X: GSymSeq, C: GTree, max_gv: int = 1) -> MonadReport:
    """
    Unit and associativity laws of the free monad at C, each level of
    nesting truncated at ``max_gv`` G-vertices.
    """
    FX = FreeSeq(X, max_gv)
    FFX = FreeSeq(FX, max_gv)
    FFFX = FreeSeq(FFX, max_gv)
    failures: List[str] = []
    checked = 0
    for t in FX.values(C):
        checked += 1
        if multiply(X, C, unit(FX, C, t)) != t:
            failures.append(f"left unit fails on {t.tree!r}")
        if multiply(X, C, map_labels(t, lambda D, l: unit(X, D, l), FX, C)) != t:
            failures.append(f"right unit fails on {t.tree!r}")
    for s in FFFX.values(C):
        checked += 1
        outer = multiply(X, C, multiply(FX, C, s))
        inner = multiply(X, C, map_labels(s, lambda D, l: multiply(X, D, l), FX, C))
        if outer != inner:
            failures.append(f"associativity fails on {s.tree!r}")
    if failures:
        logger.warning("monad laws over %r: %d failures", C, len(failures))
    return MonadReport(not any(f.startswith("left") for f in failures),
                       not any(f.startswith("right") for f in failures),
                       not any(f.startswith("assoc") for f in failures), checked, tuple(failures))


# --- Genuine operads ---
class GOperad(ABC):
    """An algebra over the free monad: a G-symmetric sequence with composition along G-trees."""

    def __init__(self, sequence: GSymSeq, name: str = ""):
        self.sequence = sequence
        self.group = sequence.group
        self.name = name or type(self).__name__

    def __repr__(self):
        return f"{self.name}({self.sequence!r})"

    @abstractmethod
    def compose(self, C: GTree, term: TreeTerm) -> Element:
        """The composite in sequence(C) of a term labelled by elements of the sequence."""


class FreeOperad(GOperad):
    def __init__(self, X: GSymSeq, max_gv: Optional[int] = None, reduced: bool = False):
        super().__init__(FreeSeq(X, max_gv, reduced), f"free[{X.name}]")
        self.X = X

    def compose(self, C, term):
        return multiply(self.X, C, term)


class DeltaOperad(GOperad):
    """delta_F, a point on the corollas of F. Composition fails on F-trees whose leaf-root leaves F."""

    def __init__(self, family: CorollaFamily):
        super().__init__(DeltaSeq(family), f"delta[{family.name}]")
        self.family = family

    def compose(self, C, term):
        if not self.sequence.values(C):
            raise DomainError(f"composite over {C!r} leaves {self.family.name}", invariant="weak indexing")
        return ()


class IotaStarOperad(GOperad):
    """iota_* of an operad in G-sets: labels are fixed tuples, composed one root component at a time."""

    def __init__(self, operad: EqOperad):
        super().__init__(IotaStar(operad), f"iota_*[{operad.name}]")
        self.operad = operad

    def compose(self, C, term):
        T, a = term.tree, C.arity
        owner = {u: (i, k) for i, v in enumerate(g_vertices(T)) for k, u in enumerate(v.outputs)}
        result = []
        for x in range(len(C.components)):
            z = T.comp_of[term.pins[C.offsets[x] + a]]
            base, Tz = T.offsets[z], T.components[z]
            labels = {}
            for u in Tz.vertices:
                i, k = owner[base + u]
                labels[u] = term.labels[i][k]
            y = self.operad.compose_tree(Tz, labels)
            position = {l: j for j, l in enumerate(Tz.leaves)}
            rho = tuple(position[term.pins[C.offsets[x] + i] - base] for i in range(a))
            result.append(self.operad.act(0, invert(rho), y))
        return tuple(result)


def algebra_compose(P: GOperad, C: GTree, T: GTree, pins: Sequence[int], labels: Sequence[Element]) -> Element:
    return P.compose(C, TreeTerm(T, tuple(pins), tuple(labels)))


class AlgebraReport(NamedTuple):
    unit: bool
    equivariant: bool
    associative: bool
    checked: int
    failures: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.unit and self.equivariant and self.associative


def algebra_check(P: GOperad, C: GTree, max_gv: int = 1) -> AlgebraReport:
    """
    Checks the unit law, equivariance under the automorphisms of C and
    associativity (flatten then compose against compose twice) at C.
    """
    X = P.sequence
    FX = FreeSeq(X, max_gv)
    failures: List[str] = []
    checked = 0

    def attempt(label: str, fn) -> None:
        try:
            if not fn():
                failures.append(label)
        except DomainError as e:
            failures.append(f"{label}: {e.message}")

    for x in X.values(C):
        checked += 1
        attempt(f"unit fails on {x!r}", lambda: P.compose(C, unit(X, C, x)) == x)
    for t in FX.values(C):
        for q in automorphisms(C):
            checked += 1
            attempt(f"equivariance fails on {t.tree!r}",
                    lambda: P.compose(C, FX.restrict(t, q)) == X.restrict(P.compose(C, t), q))
    for s in FreeSeq(FX, max_gv).values(C):
        checked += 1
        attempt(f"associativity fails on {s.tree!r}",
                lambda: P.compose(C, multiply(X, C, s))
                == P.compose(C, map_labels(s, lambda D, l: P.compose(D, l), X, C)))
    if failures:
        logger.warning("%r fails %d algebra checks over %r", P, len(failures), C)
    return AlgebraReport(not any(f.startswith("unit") for f in failures),
                         not any(f.startswith("equivariance") for f in failures),
                         not any(f.startswith("associativity") for f in failures), checked, tuple(failures))


# --- Weak indexing systems ---
class IndexingVerdict(NamedTuple):
    weak_indexing: bool
    witness: Optional[GTree]
    partial: bool
    mode: str
    checked: int


class DeltaResult(NamedTuple):
    sequence: DeltaSeq
    operad: Optional[DeltaOperad]
    witness: Optional[GTree]


def _leaf_orbits(C: GTree) -> List[Tuple[Subgroup, int]]:
    """Stabilizer and size of each orbit of the root stabilizer on the leaves of component 0."""
    H, a = C.stabilizer(0), C.arity
    seen: Set[int] = set()
    orbits = []
    for i in range(a):
        if i not in seen:
            images = {C.component_iso(h, 0)[i] for h in H.elements}
            seen |= images
            S = Subgroup(H.group, tuple(h for h in H.elements if C.component_iso(h, 0)[i] == i))
            orbits.append((S, len(images)))
    return orbits


def _attachments(F: CorollaFamily, S: Subgroup) -> List[Tuple[int, HTree]]:
    """One S-corolla per class of admissible actions, as (arity, tree)."""
    found = [(1, HTree(STICK, {s: (0,) for s in S.elements}, {}, 0))]
    for k in range(F.bound + 1):
        Sk = symmetric(k)
        seen: Set[Tuple[int, ...]] = set()
        for psi in homomorphisms(S, Sk):
            if not F.contains_hom(psi):
                continue
            key = min(tuple(Sk.conjugate(s, x) for x in psi.images) for s in Sk.elements)
            if key in seen:
                continue
            seen.add(key)
            action = {s: Sk.points[psi(s)] + (k,) for s in S.elements}
            found.append((k, HTree(corolla(k), action, {}, 1)))
    return found


def _two_level_trees(F: CorollaFamily, C: GTree) -> Iterator[Tuple[int, Optional[GTree]]]:
    """(composite arity, tree) for the F-trees of height two rooted at C; the tree is None beyond the bound."""
    H = C.stabilizer(0)
    orbits = _leaf_orbits(C)
    options = [_attachments(F, S) for S, _ in orbits]
    for choice in product(*options):
        arity = sum(width * k for (_, width), (k, _) in zip(orbits, choice))
        if arity > F.bound:
            yield arity, None
            continue
        parts = [(S, t) for (S, _), (_, t) in zip(orbits, choice)]
        top = assemble(H, {}, parts)
        yield arity, induce(H, top.tree, top.action)


def _stick_failures(F: CorollaFamily) -> Iterator[GTree]:
    for cls in conjugacy_classes(F.group):
        H = cls[0]
        if not F.contains_hom(corolla_hom(unary_corolla(H))):
            yield induce(H, STICK, {h: (0,) for h in H.elements})


def is_weak_indexing(F: CorollaFamily, mode: str = "two_level", max_gv: Optional[int] = None) -> IndexingVerdict:
    """
    Whether the leaf-root of every F-tree lies in F.

    Args:
        F: The corolla family.
        mode: "two_level" checks the stick G-trees and every F-tree of height
            two; "algebra" searches for F-trees over corollas outside F.
        max_gv: G-vertex bound of the algebra search, MAX_GV by default.

    Returns:
        An IndexingVerdict; ``partial`` marks composites beyond the arity bound
        or a truncated search.
    """
    G = F.group
    checked = 0
    partial = False
    if mode == "two_level":
        for T in _stick_failures(F):
            return IndexingVerdict(False, T, False, mode, 1)
        for n in range(F.bound + 1):
            for C in corolla_classes(G, n):
                if not F.contains_hom(corolla_hom(C)):
                    continue
                for arity, T in _two_level_trees(F, C):
                    checked += 1
                    if T is None:
                        partial = True
                        continue
                    if not F.contains_hom(corolla_hom(g_leaf_root(T)[0])):
                        logger.info("%s is not a weak indexing system: leaf-root of %r leaves it", F.name, T)
                        return IndexingVerdict(False, T, partial, mode, checked)
        if partial:
            logger.warning("%s: composites beyond arity %d were not checked", F.name, F.bound)
        return IndexingVerdict(True, None, partial, mode, checked)
    if mode == "algebra":
        X = DeltaSeq(F)
        for n in range(F.bound + 1):
            for C in corolla_classes(G, n):
                if F.contains_hom(corolla_hom(C)):
                    continue
                checked += 1
                result = free_eval(X, C, max_gv)
                partial = partial or not result.exact
                if result.elements:
                    return IndexingVerdict(False, result.elements[0].tree, partial, mode, checked)
        return IndexingVerdict(True, None, partial, mode, checked)
    raise DomainError(f"unknown weak indexing mode {mode!r}", invariant="mode")


def delta_family(F: CorollaFamily, mode: str = "two_level") -> DeltaResult:
    """delta_F with its operad structure when F is a weak indexing system, else the failing F-tree."""
    verdict = is_weak_indexing(F, mode)
    operad = DeltaOperad(F) if verdict.weak_indexing else None
    return DeltaResult(DeltaSeq(F), operad, verdict.witness)
