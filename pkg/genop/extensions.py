# genop/extensions.py
"""
Labelled G-trees and free extensions of genuine operads.

For an operad P, an injection u: X -> Y and a map f: X -> P of G-symmetric
sequences, the pushout P[u] of P <- F X -> F Y is computed over finite sets.
Its elements are alternating G-trees whose active vertices carry elements of
P and whose inert vertices carry elements of Y outside the image of u; an
inert vertex labelled by u(x) is absorbed into its active neighbours, which
compose with f(x). Counting inert vertices filters P = P_0 -> P_1 -> ...
"""
import logging
from dataclasses import dataclass
from itertools import accumulate, product
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import pandas as pd

from .conf import get_setting
from .exceptions import BoundExceeded, DomainError
from .gtrees import (
    GSet,
    GTree,
    GTreeMap,
    MapKind,
    alternating_shapes,
    corolla_hom,
    corolla_map,
    g_faces,
    g_vertices,
    root_pullback,
)
from .operads import GOperad, TreeTerm, canonical_term, pull_labels, vertex_owners
from .sequences import Element, GSymSeq, SumSeq, order_key
from .trees import Tree, from_children
from .utils import UnionFind

logger = logging.getLogger(__name__)

PLABEL, XLABEL, YLABEL = "P", "X", "Y"
EXTENSION_LABELS = frozenset((PLABEL, XLABEL, YLABEL))

# Roles of the edges of lr_P(U) over an edge of U: a boundary edge is kept
# once, an edge with no P vertex on either side is split by a unary P vertex.
MID, UP, DOWN = "mid", "up", "down"


# --- Labelled G-trees ---
@dataclass(frozen=True)
class LabeledGTree:
    """A G-tree with a label on every vertex; ``labels[e]`` labels the vertex with output e."""

    tree: GTree
    labels: Tuple[Optional[Hashable], ...]

    def __post_init__(self):
        T = self.tree
        if len(self.labels) != T.size:
            raise DomainError("one label per edge is required", invariant="labelling")
        for e, kids in enumerate(T.children):
            if (kids is None) != (self.labels[e] is None):
                raise DomainError(f"edge {e}: leaves carry no label, vertices carry one", invariant="labelling")
        for p in T.action:
            if any(self.labels[p[e]] != self.labels[e] for e in range(T.size)):
                raise DomainError("labels are not constant on vertex orbits", invariant="G-invariant labelling")

    @property
    def is_extension(self) -> bool:
        return all(label is None or label in EXTENSION_LABELS for label in self.labels)

    def vertices_labelled(self, label: Hashable, x: int = 0) -> Tuple[int, ...]:
        """Local vertices of component x carrying ``label``."""
        T = self.tree
        off = T.offsets[x]
        return tuple(v for v in T.components[x].vertices if self.labels[off + v] == label)

    def relabel(self, mapping: Mapping[Hashable, Hashable]) -> "LabeledGTree":
        return LabeledGTree(self.tree, tuple(None if l is None else mapping.get(l, l) for l in self.labels))

    def pullback(self, Y: GSet, psi: Sequence[int]) -> Tuple["LabeledGTree", GTreeMap]:
        """Root pullback along psi: Y -> r(T), labels carried along."""
        P, f = root_pullback(self.tree, Y, psi)
        return LabeledGTree(P, tuple(self.labels[e] for e in f.edges)), f


def labelled_gtree(tree: GTree, kinds: Mapping[int, Hashable]) -> LabeledGTree:
    """Labels every vertex orbit by the label given to any of its outputs."""
    labels: List[Optional[Hashable]] = [None] * tree.size
    for v in g_vertices(tree):
        given = {kinds[e] for e in v.outputs if e in kinds}
        if len(given) != 1:
            raise DomainError(f"vertex orbit {v.outputs} needs exactly one label", invariant="labelling")
        label = given.pop()
        for e in v.outputs:
            labels[e] = label
    return LabeledGTree(tree, tuple(labels))


def to_P(U: LabeledGTree) -> LabeledGTree:
    """U with its X labels turned into P labels."""
    return U.relabel({XLABEL: PLABEL})


# --- Alternating trees ---
class Alternation(NamedTuple):
    alternating: bool
    active: Tuple[bool, ...]  # per edge: a vertex with an odd input path
    offending: Optional[int]  # first leaf with an odd input path


def alternating_classify(T: GTree) -> Alternation:
    active: List[bool] = []
    offending = None
    for e, kids in enumerate(T.children):
        x, local = T.local(e)
        odd = len(T.components[x].paths[local]) % 2 == 1
        if kids is None:
            if odd and offending is None:
                offending = e
            active.append(False)
        else:
            active.append(odd)
    return Alternation(offending is None, tuple(active), offending)


def inert_degree(T: GTree) -> int:
    """Inert vertices of a single component."""
    active = alternating_classify(T).active
    off = T.offsets[0]
    return sum(1 for v in T.components[0].vertices if not active[off + v])


def in_hat(U: LabeledGTree) -> bool:
    """Alternating, with P labels exactly on the active vertices and X or Y on the inert ones."""
    result = alternating_classify(U.tree)
    if not result.alternating:
        return False
    for e, kids in enumerate(U.tree.children):
        if kids is None:
            continue
        if result.active[e] != (U.labels[e] == PLABEL) or U.labels[e] not in EXTENSION_LABELS:
            return False
    return True


# --- Degrees ---
class Degrees(NamedTuple):
    x: int
    y: int

    @property
    def total(self) -> int:
        return self.x + self.y

    def at_most(self, k: int) -> bool:
        return self.total <= k

    def exactly(self, k: int) -> bool:
        return self.total == k

    def without_y(self, k: int) -> bool:
        """Degree k, not all of it from Y vertices."""
        return self.total == k and self.y != k

    def at_most_without_y(self, k: int) -> bool:
        return self.total <= k and self.y != k


def degrees(U: LabeledGTree) -> Degrees:
    return Degrees(len(U.vertices_labelled(XLABEL)), len(U.vertices_labelled(YLABEL)))


# --- The retraction lr_P ---
class LeafRootP(NamedTuple):
    tree: LabeledGTree
    map: GTreeMap  # planar label map to U
    keys: Tuple[Tuple[int, str], ...]  # edge -> (edge of U, role)


def _lr_p_component(U: LabeledGTree, x: int) -> Tuple[Tree, Dict[Tuple[int, str], int], Dict[Tuple[int, str], str]]:
    T = U.tree
    Tx, off = T.components[x], T.offsets[x]

    def is_p(e: int) -> bool:
        return Tx.children[e] is not None and U.labels[off + e] == PLABEL

    def below_p(e: int) -> bool:
        p = Tx.parent[e]
        return p is not None and is_p(p)

    def lower(e: int) -> Tuple[int, str]:
        return (off + e, MID) if is_p(e) or below_p(e) else (off + e, DOWN)

    def upper(e: int) -> Tuple[int, str]:
        return (off + e, MID) if is_p(e) or below_p(e) else (off + e, UP)

    children: Dict[Tuple[int, str], Tuple[Tuple[int, str], ...]] = {}
    kinds: Dict[Tuple[int, str], str] = {}
    for e, kids in enumerate(Tx.children):
        if not is_p(e) and not below_p(e):
            children[(off + e, DOWN)] = ((off + e, UP),)
            kinds[(off + e, DOWN)] = PLABEL
        if kids is None:
            continue
        if not is_p(e):
            children[upper(e)] = tuple(lower(c) for c in kids)
            kinds[upper(e)] = U.labels[off + e]
        elif not below_p(e):
            inputs = []
            stack = list(reversed(kids))
            while stack:
                c = stack.pop()
                if is_p(c):
                    stack.extend(reversed(Tx.children[c]))
                else:
                    inputs.append(lower(c))
            children[(off + e, MID)] = tuple(inputs)
            kinds[(off + e, MID)] = PLABEL
    tree, index = from_children(children, lower(Tx.root))
    return tree, index, kinds


def lr_P(U: LabeledGTree) -> LeafRootP:
    """
    The tree in which every maximal P-labelled outer face of U becomes a
    single P vertex, and every edge with no P vertex on either side gets a
    unary P vertex, with its planar label map to U.

    Raises:
        DomainError: U carries labels other than P, X and Y.
    """
    if not U.is_extension:
        raise DomainError("lr_P takes {P, X, Y}-labelled trees", invariant="extension labels")
    T = U.tree
    built = [_lr_p_component(U, x) for x in range(len(T.components))]
    offsets = [0] + list(accumulate(len(tree) for tree, _, _ in built))[:-1]
    keys: List[Tuple[int, str]] = [(0, MID)] * sum(len(tree) for tree, _, _ in built)
    kinds: Dict[Tuple[int, str], str] = {}
    for off, (_, index, component_kinds) in zip(offsets, built):
        for key, i in index.items():
            keys[off + i] = key
        kinds.update(component_kinds)
    position = {key: i for i, key in enumerate(keys)}
    action = tuple(tuple(position[(p[e], role)] for e, role in keys) for p in T.action)
    R = GTree(T.group, tuple(tree for tree, _, _ in built), action)
    labelled = LabeledGTree(R, tuple(kinds.get(key) for key in keys))
    phi = GTreeMap(R, T, tuple(e for e, _ in keys), MapKind.PLANAR_TALL)
    return LeafRootP(labelled, phi, tuple(keys))


def lr_P_map(phi: GTreeMap, U: LabeledGTree, V: LabeledGTree) -> GTreeMap:
    """lr_P on a label-preserving isomorphism U -> V."""
    if sorted(phi.edges) != list(range(V.tree.size)) or not phi.is_quotient() \
            or any(V.labels[phi(e)] != U.labels[e] for e in range(U.tree.size)):
        raise DomainError("lr_P_map takes label-preserving isomorphisms", invariant="label isomorphism")
    a, b = lr_P(U), lr_P(V)
    position = {key: i for i, key in enumerate(b.keys)}
    return GTreeMap(a.tree.tree, b.tree.tree, tuple(position[(phi(e), role)] for e, role in a.keys), MapKind.ISO)


def face_vertices(T: GTree, top: int, low: Sequence[int]) -> Tuple[int, ...]:
    """Vertices of the outer face of T between the edges ``low`` and ``top``."""
    x, t = T.local(top)
    Tx, off = T.components[x], T.offsets[x]
    lows = [l - off for l in low]
    return tuple(off + w for w in Tx.vertices if Tx.leq(w, t) and not any(Tx.leq(w, l) for l in lows))


def is_label_map(phi: GTreeMap, S: LabeledGTree, T: LabeledGTree) -> bool:
    """
    Whether phi: S -> T is a tall map sending X and Y vertices onto vertices
    with the same label and P vertices onto faces with only P labels.
    """
    if not phi.is_equivariant() or not all(phi.component_map(x).is_tall() for x in range(len(S.tree.components))):
        return False
    for v, kids in enumerate(S.tree.children):
        if kids is None:
            continue
        face = face_vertices(T.tree, phi(v), [phi(c) for c in kids])
        if S.labels[v] == PLABEL:
            if any(T.labels[w] != PLABEL for w in face):
                return False
        elif len(face) != 1 or T.labels[face[0]] != S.labels[v]:
            return False
    return True


# --- Free extensions ---
class FiltrationStep(NamedTuple):
    corolla: GTree
    degree: int
    previous: Tuple[TreeTerm, ...]
    current: Tuple[TreeTerm, ...]
    cells: int  # terms of exactly this degree, before identification
    latching: int  # those carrying a label in the image of u
    consistent: bool

    @property
    def new(self) -> int:
        return len(self.current) - len(self.previous)

    @property
    def is_iso(self) -> bool:
        return self.new == 0


class Extension:
    """
    The free extension P[u] of P along u: X -> Y, glued to P by f: X -> P.

    Args:
        P: The operad being extended.
        X: Source of u.
        Y: Target of u; must be injective at every corolla.
        u: u(D, x) in Y(D) for x in X(D), natural in D.
        f: f(D, x) in P(D) for x in X(D), natural in D.
        name: Display name.
    """

    def __init__(self, P: GOperad, X: GSymSeq, Y: GSymSeq, u: Callable[[GTree, Element], Element],
                 f: Callable[[GTree, Element], Element], name: str = ""):
        if len({P.group, X.group, Y.group}) != 1:
            raise DomainError("P, X and Y must share one group", invariant="group")
        self.P, self.X, self.Y, self.u, self.f = P, X, Y, u, f
        self.group = P.group
        self.labels = SumSeq([P.sequence, Y])
        self.name = name or f"{P.name}[{X.name} -> {Y.name}]"
        self._image: Dict[GTree, Dict[Element, Element]] = {}
        self._terms: Dict[Tuple[GTree, int], Tuple[TreeTerm, ...]] = {}

    def __repr__(self):
        return f"Extension({self.name})"

    def preimages(self, D: GTree) -> Dict[Element, Element]:
        """u restricted to D, inverted."""
        if D not in self._image:
            xs = self.X.values(D) if D.arity <= self.X.bound else ()
            image: Dict[Element, Element] = {}
            for x in xs:
                y = self.u(D, x)
                if y in image:
                    raise DomainError(f"u identifies {image[y]!r} and {x!r}", invariant="injective u")
                image[y] = x
            self._image[D] = image
        return self._image[D]

    def marked(self, t: TreeTerm) -> Tuple[int, ...]:
        """G-vertices of t labelled by an element of the image of u."""
        return tuple(i for i, (v, (tag, y)) in enumerate(zip(g_vertices(t.tree), t.labels))
                     if tag == 1 and y in self.preimages(v.corolla))

    def terms(self, C: GTree, max_degree: int) -> Tuple[TreeTerm, ...]:
        """Labelled alternating terms over C of degree at most ``max_degree``, before identification."""
        key = (C, max_degree)
        if key in self._terms:
            return self._terms[key]
        PS, Y = self.P.sequence, self.Y
        active = frozenset(n for n in range(PS.bound + 1) if PS.supports(n))
        inert = frozenset(n for n in range(Y.bound + 1) if Y.supports(n))
        shapes = alternating_shapes(C, max_degree, active, inert)
        budget = get_setting("ENUMERATION_BOUND")
        total = 0
        labelled = []
        for T, pins in shapes:
            if inert_degree(T) > max_degree:
                continue
            kinds = alternating_classify(T).active
            options = [[(0, p) for p in PS.values(v.corolla)] if kinds[v.outputs[0]]
                       else [(1, y) for y in Y.values(v.corolla)] for v in g_vertices(T)]
            count = 1
            for o in options:
                count *= len(o)
            total += count
            labelled.append((T, pins, options))
        if total > budget:
            raise BoundExceeded(f"{total} labelled extension trees over {C!r} exceed ENUMERATION_BOUND",
                                bound="ENUMERATION_BOUND")
        found = {canonical_term(self.labels, C, T, pins, labels)
                 for T, pins, options in labelled for labels in product(*options)}
        result = tuple(sorted(found, key=order_key))
        logger.debug("%r over %r: %d shapes, %d terms of degree <= %d", self, C, len(shapes), len(result), max_degree)
        self._terms[key] = result
        return result

    def collapse(self, C: GTree, t: TreeTerm, which: Iterable[int]) -> TreeTerm:
        """
        Absorbs the inert G-vertices ``which``, all labelled in the image of u,
        into the surrounding active vertices, composing in P.
        """
        T = t.tree
        vertices = g_vertices(T)
        which = set(which)
        kinds: List[Optional[str]] = [None] * T.size
        in_p: List[Optional[Element]] = []
        for i, v in enumerate(vertices):
            tag, y = t.labels[i]
            if tag == 1 and i in which:
                x = self.preimages(v.corolla).get(y)
                if x is None:
                    raise DomainError(f"label {y!r} is not in the image of u", invariant="image of u")
                in_p.append(self.f(v.corolla, x))
            else:
                in_p.append(y if tag == 0 else None)
            for e in v.outputs:
                kinds[e] = PLABEL if in_p[-1] is not None else YLABEL
        lr = lr_P(LabeledGTree(T, tuple(kinds)))
        R = lr.tree.tree
        owner = vertex_owners(vertices)
        labels = []
        for w, piece in zip(g_vertices(R), g_faces(lr.map)):
            if lr.tree.labels[w.outputs[0]] == YLABEL:
                i = owner[lr.map(w.outputs[0])]
                q = GTreeMap(w.corolla, vertices[i].corolla, corolla_map(w, vertices[i], lr.map.edges),
                             MapKind.QUOTIENT)
                labels.append(self.labels.restrict(t.labels[i], q))
            else:
                embed = GTreeMap(piece.tree, T, piece.embedding, MapKind.OUTER_FACE)
                face = TreeTerm(piece.tree, piece.pins, pull_labels(self.P.sequence, piece.tree, embed, in_p))
                labels.append((0, self.P.compose(w.corolla, face)))
        back = {lr.map(e): e for e in R.leaves + R.roots}
        return canonical_term(self.labels, C, R, tuple(back[p] for p in t.pins), labels)

    def normal_form(self, C: GTree, t: TreeTerm) -> TreeTerm:
        marked = self.marked(t)
        return self.collapse(C, t, marked) if marked else t

    def free_extension(self, C: GTree, max_degree: Optional[int] = None) -> Tuple[TreeTerm, ...]:
        """P[u](C) up to degree ``max_degree`` (MAX_GV by default), one normal form per element."""
        max_degree = get_setting("MAX_GV") if max_degree is None else max_degree
        return tuple(t for t in self.terms(C, max_degree) if not self.marked(t))

    def filtration_step(self, C: GTree, k: int) -> FiltrationStep:
        """
        P_{k-1}(C) -> P_k(C) as a pushout: terms of degree k with a label in
        the image of u are glued to P_{k-1} along their collapse. The
        identifications are saturated with a union-find over single collapses;
        ``consistent`` records that every class holds exactly one normal form.
        """
        if k < 0:
            raise DomainError("filtration degrees are non-negative", invariant="degree")
        current = self.free_extension(C, k)
        if k == 0:
            return FiltrationStep(C, 0, current, current, len(current), 0,
                                  len(current) == len(self.P.sequence.values(C)))
        previous = self.free_extension(C, k - 1)
        normal = set(current)
        lower = set(previous)
        uf = UnionFind(previous)
        cells = [t for t in self.terms(C, k) if inert_degree(t.tree) == k]
        latching = 0
        consistent = True
        for t in cells:
            uf.add(t)
            marked = self.marked(t)
            if not marked:
                continue
            latching += 1
            target = self.collapse(C, t, marked)
            consistent = consistent and target in lower
            uf.add(target)
            uf.union(t, target)
            for i in marked:
                step = self.collapse(C, t, (i,))
                final = self.normal_form(C, step)
                for s in (step, final):
                    uf.add(s)
                uf.union(t, step)
                uf.union(step, final)
        for members in uf.classes().values():
            if sum(1 for m in members if m in normal) != 1:
                consistent = False
        if not consistent:
            logger.warning("%r: filtration step %d over %r is inconsistent", self, k, C)
        return FiltrationStep(C, k, previous, current, len(cells), latching, consistent)

    def filtration(self, C: GTree, max_degree: Optional[int] = None) -> Tuple[FiltrationStep, ...]:
        max_degree = get_setting("MAX_GV") if max_degree is None else max_degree
        return tuple(self.filtration_step(C, k) for k in range(max_degree + 1))


def filtration_table(ext: Extension, corollas: Sequence[GTree], max_degree: Optional[int] = None) -> pd.DataFrame:
    """Sizes of P_k(C) per corolla and degree."""
    rows = []
    for C in corollas:
        for step in ext.filtration(C, max_degree):
            rows.append({
                "arity": C.arity,
                "images": corolla_hom(C).images,
                "degree": step.degree,
                "size": len(step.current),
                "new": step.new,
                "latching": step.latching,
                "consistent": step.consistent,
            })
    return pd.DataFrame(rows, columns=["arity", "images", "degree", "size", "new", "latching", "consistent"])
