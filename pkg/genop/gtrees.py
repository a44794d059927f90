# genop/gtrees.py
"""
G-trees: tuples of trees indexed by a transitive G-set.

A G-tree stores its components back to back. Edge e of component x has
the global index ``offsets[x] + e`` and ``action[g]`` permutes global edges,
carrying each component onto another one by a tree isomorphism. Trees
induced from a subgroup H list their components by the cosets gH, each
coset represented by its smallest element.
"""
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations, product
from typing import Dict, FrozenSet, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from .conf import get_setting
from .exceptions import BoundExceeded, DomainError
from .groups import (
    FiniteGroup,
    PartialHom,
    Subgroup,
    conjugacy_class,
    direct_product,
    graph_of,
    graph_subgroups,
    partial_hom_of,
    subgroups_of,
    symmetric,
    trivial_subgroup,
    whole,
)
from .trees import (
    STICK,
    MapKind,
    Piece,
    SubstitutionDatum,
    Tree,
    TreeMap,
    corolla,
    isomorphisms,
    leaf_fixing_automorphisms,
    outer_face,
    standardize,
    substitute,
)
from .utils import Permutation, compose, identity, invert, is_permutation, memoize, set_partitions

logger = logging.getLogger(__name__)


# --- Helpers ---
def _check_homomorphism(G: FiniteGroup, perms: Sequence[Permutation], what: str):
    A = np.asarray(perms, dtype=np.int64).reshape(G.order, -1)
    if not np.array_equal(A[0], np.arange(A.shape[1])):
        raise DomainError(f"the identity must act trivially on the {what}", invariant="unit")
    composed = A[np.arange(G.order)[:, None, None], A[None, :, :]]
    if not np.array_equal(composed, A[G.mul]):
        raise DomainError(f"the {what} action is not a homomorphism", invariant="cocycle")


def _is_isomorphism(S: Tree, T: Tree, m: Sequence[int]) -> bool:
    if len(S) != len(T) or m[S.root] != T.root:
        return False
    for e, kids in enumerate(S.children):
        image = T.children[m[e]]
        if (kids is None) != (image is None):
            return False
        if kids is not None and sorted(m[c] for c in kids) != sorted(image):
            return False
    return True


def _offsets(sizes: Sequence[int]) -> Tuple[int, ...]:
    result, total = [], 0
    for n in sizes:
        result.append(total)
        total += n
    return tuple(result)


@memoize
def _cosets(G: FiniteGroup, elements: Tuple[int, ...]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    coset_of = [-1] * G.order
    reps: List[int] = []
    for g in G.elements:
        if coset_of[g] < 0:
            for h in elements:
                coset_of[G.op(g, h)] = len(reps)
            reps.append(g)
    return tuple(reps), tuple(coset_of)


def coset_representatives(H: Subgroup) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """The smallest element of each coset gH in increasing order, and the coset of every element."""
    return _cosets(H.group, H.elements)


# --- G-sets ---
@dataclass(frozen=True)
class GSet:
    group: FiniteGroup = field(repr=False)
    action: Tuple[Permutation, ...]

    def __post_init__(self):
        if len(self.action) != self.group.order:
            raise DomainError("a G-set needs one permutation per group element", invariant="action")
        if any(not is_permutation(p, self.size) for p in self.action):
            raise DomainError("G-set action entries must be permutations", invariant="action")
        _check_homomorphism(self.group, self.action, "G-set")

    @property
    def size(self) -> int:
        return len(self.action[0])

    def __call__(self, g: int, x: int) -> int:
        return self.action[g][x]

    def orbit(self, x: int) -> Tuple[int, ...]:
        return tuple(sorted({p[x] for p in self.action}))

    def stabilizer(self, x: int) -> Subgroup:
        return Subgroup(self.group, tuple(g for g, p in enumerate(self.action) if p[x] == x))

    @property
    def is_transitive(self) -> bool:
        return len(self.orbit(0)) == self.size


def coset_space(H: Subgroup) -> GSet:
    """G/H with the ordering of ``coset_representatives``."""
    G = H.group
    reps, coset_of = coset_representatives(H)
    return GSet(G, tuple(tuple(coset_of[G.op(g, r)] for r in reps) for g in G.elements))


# --- G-trees ---
@dataclass(frozen=True)
class GTree:
    group: FiniteGroup = field(repr=False)
    components: Tuple[Tree, ...]
    action: Tuple[Permutation, ...]

    def __post_init__(self):
        G = self.group
        if not self.components or len(self.action) != G.order:
            raise DomainError("a G-tree needs components and one edge permutation per group element",
                              invariant="action")
        for g, p in enumerate(self.action):
            if not is_permutation(p, self.size):
                raise DomainError(f"element {g} does not permute the edges", invariant="action")
            for x, T in enumerate(self.components):
                y = self.comp_of[p[self.offsets[x]]]
                if any(self.comp_of[p[self.offsets[x] + e]] != y for e in T.edges) \
                        or not _is_isomorphism(T, self.components[y], self.component_iso(g, x)):
                    raise DomainError(f"element {g} does not act on component {x} by a tree isomorphism",
                                      invariant="action isomorphism")
        _check_homomorphism(G, self.action, "edge")
        if not self.orbit.is_transitive:
            raise DomainError("the components of a G-tree form a single orbit", invariant="transitive")

    def __repr__(self):
        return f"GTree({len(self.components)} x {self.components[0].text()})"

    # --- Layout ---
    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        return _offsets([len(T) for T in self.components])

    @cached_property
    def comp_of(self) -> Tuple[int, ...]:
        return tuple(x for x, T in enumerate(self.components) for _ in T.edges)

    @property
    def size(self) -> int:
        return sum(len(T) for T in self.components)

    def local(self, e: int) -> Tuple[int, int]:
        x = self.comp_of[e]
        return x, e - self.offsets[x]

    @cached_property
    def children(self) -> Tuple[Optional[Tuple[int, ...]], ...]:
        result: List[Optional[Tuple[int, ...]]] = []
        for off, T in zip(self.offsets, self.components):
            result.extend(None if kids is None else tuple(off + c for c in kids) for kids in T.children)
        return tuple(result)

    @cached_property
    def roots(self) -> Tuple[int, ...]:
        return tuple(off + T.root for off, T in zip(self.offsets, self.components))

    @cached_property
    def leaves(self) -> Tuple[int, ...]:
        return tuple(e for e, kids in enumerate(self.children) if kids is None)

    @property
    def is_stick(self) -> bool:
        return self.components[0].is_stick

    @property
    def is_corolla(self) -> bool:
        return self.components[0].is_corolla

    @property
    def arity(self) -> int:
        """Number of leaves of each component."""
        return len(self.components[0].leaves)

    @cached_property
    def sort_key(self):
        return tuple(T.key for T in self.components), self.action

    # --- Action ---
    @cached_property
    def orbit(self) -> GSet:
        """The root orbit r(T)."""
        return GSet(self.group, tuple(tuple(self.comp_of[p[off]] for off in self.offsets) for p in self.action))

    def component_iso(self, g: int, x: int) -> Permutation:
        """The tree isomorphism T_x -> T_gx as a map of local edges."""
        p, off = self.action[g], self.offsets[x]
        target = self.offsets[self.comp_of[p[off]]]
        return tuple(p[off + e] - target for e in self.components[x].edges)

    def stabilizer(self, x: int) -> Subgroup:
        return self.orbit.stabilizer(x)

    def edge_stabilizer(self, e: int) -> Subgroup:
        return Subgroup(self.group, tuple(g for g, p in enumerate(self.action) if p[e] == e))

    @cached_property
    def vertex_orbits(self) -> Tuple["GVertex", ...]:
        G = self.group
        seen: Set[int] = set()
        result = []
        for e, kids in enumerate(self.children):
            if kids is None or e in seen:
                continue
            outputs = tuple(sorted({p[e] for p in self.action}))
            seen.update(outputs)
            a = len(kids)
            position = {u: k for k, u in enumerate(outputs)}
            embedding: List[int] = []
            for u in outputs:
                embedding.extend(self.children[u])
                embedding.append(u)
            perms = []
            for p in self.action:
                perm = [0] * len(embedding)
                for k, u in enumerate(outputs):
                    k2 = position[p[u]]
                    slot = {c: i for i, c in enumerate(self.children[p[u]])}
                    for i, c in enumerate(self.children[u]):
                        perm[k * (a + 1) + i] = k2 * (a + 1) + slot[p[c]]
                    perm[k * (a + 1) + a] = k2 * (a + 1) + a
                perms.append(tuple(perm))
            C = GTree(G, (corolla(a),) * len(outputs), tuple(perms))
            result.append(GVertex(outputs, C, tuple(embedding)))
        return tuple(result)

    def text(self) -> str:
        """Expanded form: the components side by side."""
        return " | ".join(T.text() for T in self.components)


class GVertex(NamedTuple):
    """A G-vertex: its output edges, its G-corolla and where the corolla's edges sit in the tree."""

    outputs: Tuple[int, ...]
    corolla: GTree
    embedding: Tuple[int, ...]


def g_vertices(T: GTree) -> Tuple[GVertex, ...]:
    """G-vertices ordered by their smallest output edge."""
    return T.vertex_orbits


def corolla_map(source: GVertex, target: GVertex, edge_map: Sequence[int]) -> Permutation:
    """The map of G-corollas induced by a map of trees carrying ``source`` onto ``target``."""
    position = {t: c for c, t in enumerate(target.embedding)}
    return tuple(position[edge_map[x]] for x in source.embedding)


# --- Maps ---
@dataclass(frozen=True)
class GTreeMap:
    source: GTree
    target: GTree
    edges: Tuple[int, ...]
    kind: MapKind = MapKind.GENERAL

    def __call__(self, e: int) -> int:
        return self.edges[e]

    @cached_property
    def orbit_map(self) -> Tuple[int, ...]:
        return tuple(self.target.comp_of[self.edges[off]] for off in self.source.offsets)

    def component_map(self, x: int) -> TreeMap:
        S, T = self.source, self.target
        y = self.orbit_map[x]
        return TreeMap(S.components[x], T.components[y],
                       tuple(self.edges[S.offsets[x] + e] - T.offsets[y] for e in S.components[x].edges),
                       self.kind)

    def compose(self, other: "GTreeMap") -> "GTreeMap":
        """self after other."""
        if other.target != self.source:
            raise DomainError("maps are not composable", invariant="composable")
        kind = self.kind if self.kind == other.kind else MapKind.GENERAL
        return GTreeMap(other.source, self.target, tuple(self.edges[x] for x in other.edges), kind)

    def is_equivariant(self) -> bool:
        S, T = self.source, self.target
        return all(self.edges[p[e]] == q[self.edges[e]]
                   for p, q in zip(S.action, T.action) for e in range(S.size))

    def is_quotient(self) -> bool:
        if not self.is_equivariant():
            return False
        for x, T in enumerate(self.source.components):
            m = self.component_map(x)
            if not _is_isomorphism(T, m.target, m.edges):
                return False
        return True


def identity_gmap(T: GTree) -> GTreeMap:
    return GTreeMap(T, T, tuple(range(T.size)), MapKind.ISO)


# --- Induction ---
def is_tree_automorphism(tree: Tree, p: Sequence[int]) -> bool:
    return is_permutation(p, len(tree)) and _is_isomorphism(tree, tree, p)


def induce(H: Subgroup, tree: Tree, action: Mapping[int, Sequence[int]]) -> GTree:
    """
    The G-tree G x_H T for an H-action on ``tree``.

    Args:
        H: Subgroup of G stabilizing the first component.
        tree: Standard model of that component.
        action: Edge permutation of every element of H.

    Returns:
        The induced G-tree, components ordered by the cosets of H.
    """
    G = H.group
    for h in H.elements:
        if not is_tree_automorphism(tree, action[h]):
            raise DomainError("action not by automorphisms", invariant="automorphism")
    reps, coset_of = coset_representatives(H)
    n = len(tree)
    perms = []
    for g in G.elements:
        perm = [0] * (len(reps) * n)
        for x, r in enumerate(reps):
            gr = G.op(g, r)
            y = coset_of[gr]
            sigma = action[G.op(G.inv(reps[y]), gr)]
            for e in range(n):
                perm[x * n + e] = y * n + sigma[e]
        perms.append(tuple(perm))
    return GTree(G, (tree,) * len(reps), tuple(perms))


def make_gtree(H: Subgroup, tree: Tree, generator_images: Mapping[int, Sequence[int]]) -> GTree:
    """Induced G-tree from the images of generators of H, extended along the Cayley graph."""
    G = H.group
    images = {int(h): tuple(p) for h, p in generator_images.items()}
    for h, p in images.items():
        if h not in H:
            raise DomainError(f"element {h} is not in the subgroup", invariant="subgroup")
        if not is_tree_automorphism(tree, p):
            raise DomainError("action not by automorphisms", invariant="automorphism")
    assignment: Dict[int, Permutation] = {0: identity(len(tree))}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for h, p in images.items():
                y, value = G.op(x, h), compose(assignment[x], p)
                if y not in assignment:
                    assignment[y] = value
                    nxt.append(y)
                elif assignment[y] != value:
                    raise DomainError("generator images do not define an action", invariant="cocycle")
        frontier = nxt
    if len(assignment) != H.order:
        raise DomainError("the given elements do not generate the subgroup", invariant="generators")
    return induce(H, tree, assignment)


def _induced_form(T: GTree, x0: int, pi: Permutation, S0: Tree) -> Tuple[GTree, Permutation]:
    """Rebuilds T by induction from component x0 relabelled along pi: T_x0 -> S0."""
    G = T.group
    H = T.stabilizer(x0)
    pi_inv = invert(pi)
    action = {h: compose(pi, compose(T.component_iso(h, x0), pi_inv)) for h in H.elements}
    N = induce(H, S0, action)
    reps, _ = coset_representatives(H)
    n = len(S0)
    iso = [0] * T.size
    for z, r in enumerate(reps):
        y = T.orbit(r, x0)
        sigma = T.component_iso(r, x0)
        for e in range(n):
            iso[T.offsets[y] + sigma[e]] = z * n + pi[e]
    return N, tuple(iso)


def canonical_gtree(T: GTree) -> Tuple[GTree, Permutation]:
    """Canonical representative of the isomorphism class of T and an isomorphism onto it."""
    best: Optional[Tuple[GTree, Permutation]] = None
    for x, Tx in enumerate(T.components):
        S0, iso0 = standardize(Tx, {v: tuple(sorted(Tx.children[v], key=Tx.shapes.__getitem__))
                                    for v in Tx.vertices})
        for alpha in isomorphisms(S0, S0):
            N, iso = _induced_form(T, x, compose(alpha, iso0.edges), S0)
            if best is None or N.sort_key < best[0].sort_key:
                best = (N, iso)
    return best


def is_isomorphic(S: GTree, T: GTree) -> bool:
    return S.group == T.group and canonical_gtree(S)[0] == canonical_gtree(T)[0]


def relabel(T: GTree, order: Sequence[int], orderings: Sequence[Mapping[int, Sequence[int]]]) -> Tuple[GTree, GTreeMap]:
    """
    Another standard model of T: components taken in ``order``, component x
    re-planarized by ``orderings[x]``.
    """
    standard = [standardize(T.components[x], orderings[x]) for x in range(len(T.components))]
    offsets = _offsets([len(T.components[x]) for x in order])
    iso = [0] * T.size
    for k, x in enumerate(order):
        for e, image in enumerate(standard[x][1].edges):
            iso[T.offsets[x] + e] = offsets[k] + image
    inverse = invert(iso)
    action = tuple(tuple(iso[p[inverse[e]]] for e in range(T.size)) for p in T.action)
    N = GTree(T.group, tuple(standard[x][0] for x in order), action)
    return N, GTreeMap(T, N, tuple(iso), MapKind.ISO)


def isomorphism_class(T: GTree) -> Set[GTree]:
    """Every standard-model G-tree isomorphic to T, by exhausting component orders and planar structures."""
    m = len(T.components)
    per_component = []
    total = 1
    for Tx in T.components:
        choices = [[(v, p) for p in permutations(Tx.children[v])] for v in Tx.vertices if Tx.children[v]]
        per_component.append(choices)
        for c in choices:
            total *= len(c)
    for k in range(2, m + 1):
        total *= k
    budget = get_setting("ENUMERATION_BOUND")
    if total > budget:
        raise BoundExceeded(f"{total} relabelings exceed ENUMERATION_BOUND", bound="ENUMERATION_BOUND")
    logger.debug("exhausting %d relabelings of %r", total, T)
    found: Set[GTree] = set()
    for order in permutations(range(m)):
        for combo in product(*(product(*choices) for choices in per_component)):
            N, _ = relabel(T, order, [dict(c) for c in combo])
            found.add(N)
    return found


# --- Corollas ---
def _symmetric_arity(sigma: FiniteGroup) -> int:
    return len(sigma.points[0]) if sigma.points else 0


def corolla_hom(C: GTree) -> PartialHom:
    """The partial homomorphism stab(0) -> Sigma_n of a G-corolla."""
    if not C.is_corolla:
        raise DomainError(f"{C!r} is not a G-corolla", invariant="corolla")
    a = C.arity
    H = C.stabilizer(0)
    S = symmetric(a)
    return PartialHom(H, S, tuple(S.point_index[C.component_iso(h, 0)[:a]] for h in H.elements))


def canonical_corolla(phi: PartialHom) -> GTree:
    return _canonical_corolla(phi.group, _symmetric_arity(phi.target), phi)


@memoize
def _canonical_corolla(G: FiniteGroup, a: int, phi: PartialHom) -> GTree:
    points = phi.target.points
    return induce(phi.source, corolla(a), {h: points[phi(h)] + (a,) for h in phi.source.elements})


def free_corolla(G: FiniteGroup, n: int) -> GTree:
    """G . C_n, whose components are indexed by the elements of G."""
    return canonical_corolla(PartialHom(trivial_subgroup(G), symmetric(n), (0,)))


def trivial_corolla(G: FiniteGroup, n: int) -> GTree:
    """(C_n)_{G/G} with trivial action on the leaves."""
    return canonical_corolla(PartialHom(whole(G), symmetric(n), (0,) * G.order))


def unary_corolla(H: Subgroup) -> GTree:
    """(C_1)_{G/H}."""
    return canonical_corolla(PartialHom(H, symmetric(1), (0,) * H.order))


@memoize
def _graph_class(G: FiniteGroup, a: int, elements: Tuple[int, ...]) -> Tuple[int, ...]:
    ambient = direct_product(G, symmetric(a))
    return conjugacy_class(Subgroup(ambient, elements))[0].elements


def corolla_class_key(C: GTree) -> Tuple[int, Tuple[int, ...]]:
    """Arity and minimal conjugate of the graph subgroup; equal exactly for isomorphic G-corollas."""
    gamma = graph_of(corolla_hom(C))
    return C.arity, _graph_class(C.group, C.arity, gamma.elements)


def class_corolla(G: FiniteGroup, key: Tuple[int, Tuple[int, ...]]) -> GTree:
    a, elements = key
    return canonical_corolla(partial_hom_of(Subgroup(direct_product(G, symmetric(a)), elements)))


@memoize
def corolla_classes(G: FiniteGroup, n: int) -> Tuple[GTree, ...]:
    """One canonical G-corolla per isomorphism class of arity n."""
    keys = sorted({(n, _graph_class(G, n, gamma.elements)) for gamma, _ in graph_subgroups(G, n)})
    return tuple(class_corolla(G, key) for key in keys)


# --- Quotients and automorphisms ---
def quotients(S: GTree, T: GTree) -> Tuple[GTreeMap, ...]:
    """All quotient maps S -> T: equivariant maps that are isomorphisms on components."""
    if S.group != T.group:
        raise DomainError("G-trees over different groups", invariant="group")
    return _quotients(S.group, S, T)


@memoize
def _quotients(G: FiniteGroup, S: GTree, T: GTree) -> Tuple[GTreeMap, ...]:
    H = S.stabilizer(0)
    S0 = S.components[0]
    found = []
    for z in range(len(T.components)):
        if not H.is_subgroup_of(T.stabilizer(z)):
            continue
        for alpha in isomorphisms(S0, T.components[z]):
            if any(compose(alpha, S.component_iso(h, 0)) != compose(T.component_iso(h, z), alpha)
                   for h in H.generators):
                continue
            edges = [0] * S.size
            for p, q in zip(S.action, T.action):
                for e in S0.edges:
                    edges[p[e]] = q[T.offsets[z] + alpha[e]]
            found.append(GTreeMap(S, T, tuple(edges), MapKind.QUOTIENT))
    return tuple(sorted(found, key=lambda f: f.edges))


def automorphisms(T: GTree) -> Tuple[GTreeMap, ...]:
    return quotients(T, T)


# --- Root pullbacks ---
def orbit_map_from(K: Subgroup, T: GTree, x: int) -> Tuple[GSet, Tuple[int, ...]]:
    """The map G/K -> r(T), gK -> gx, for K inside the stabilizer of x."""
    if not K.is_subgroup_of(T.stabilizer(x)):
        raise DomainError(f"subgroup does not fix component {x}", invariant="equivariance")
    reps, _ = coset_representatives(K)
    return coset_space(K), tuple(T.orbit(r, x) for r in reps)


def root_pullback(T: GTree, Y: GSet, psi: Sequence[int]) -> Tuple[GTree, GTreeMap]:
    """
    The pullback psi*T = (T_psi(y)) along an equivariant map psi: Y -> r(T).

    Returns:
        The pulled back G-tree and its root pullback map to T.
    """
    G = T.group
    psi = tuple(psi)
    if len(psi) != Y.size or any(not 0 <= x < len(T.components) for x in psi):
        raise DomainError("orbit map has the wrong shape", invariant="equivariance")
    if not Y.is_transitive:
        raise DomainError("root pullbacks are taken along transitive G-sets", invariant="transitive")
    for g in G.elements:
        for y in range(Y.size):
            if psi[Y(g, y)] != T.orbit(g, psi[y]):
                raise DomainError("orbit map is not equivariant", invariant="equivariance")
    components = tuple(T.components[x] for x in psi)
    offsets = _offsets([len(c) for c in components])
    action = []
    for g in G.elements:
        perm = [0] * sum(len(c) for c in components)
        for y, x in enumerate(psi):
            sigma = T.component_iso(g, x)
            target = offsets[Y(g, y)]
            for e, image in enumerate(sigma):
                perm[offsets[y] + e] = target + image
        action.append(tuple(perm))
    P = GTree(G, components, tuple(action))
    edges = tuple(T.offsets[x] + e for x, c in zip(psi, components) for e in c.edges)
    return P, GTreeMap(P, T, edges, MapKind.ROOT_PULLBACK)


# --- Leaf-root ---
def g_leaf_root(T: GTree) -> Tuple[GTree, GTreeMap]:
    """
    The G-corolla lr(T) with its planar tall map to T. A stick G-tree has
    unary corollas as leaf-root, mapping both edges onto the stick.
    """
    G = T.group
    m = len(T.components)
    if T.is_stick:
        action = tuple(tuple(2 * T.orbit(g, x) + i for x in range(m) for i in range(2)) for g in G.elements)
        C = GTree(G, (corolla(1),) * m, action)
        return C, GTreeMap(C, T, tuple(T.offsets[x] for x in range(m) for _ in range(2)), MapKind.DEGENERACY)
    k = T.arity
    slots = [{l: i for i, l in enumerate(Tx.leaves)} for Tx in T.components]
    action = []
    for g in G.elements:
        perm = [0] * (m * (k + 1))
        for x, Tx in enumerate(T.components):
            y = T.orbit(g, x)
            sigma = T.component_iso(g, x)
            for i, l in enumerate(Tx.leaves):
                perm[x * (k + 1) + i] = y * (k + 1) + slots[y][sigma[l]]
            perm[x * (k + 1) + k] = y * (k + 1) + k
        action.append(tuple(perm))
    C = GTree(G, (corolla(k),) * m, tuple(action))
    edges = tuple(off + e for off, Tx in zip(T.offsets, T.components) for e in Tx.leaves + (Tx.root,))
    return C, GTreeMap(C, T, edges, MapKind.PLANAR_TALL)


def is_F_tree(T: GTree, F) -> bool:
    """Every G-vertex corolla lies in the corolla family F; vertices beyond its arity bound do not."""
    for v in g_vertices(T):
        if v.corolla.arity > F.bound or not F.contains_hom(corolla_hom(v.corolla)):
            return False
    return True


# --- Substitution ---
GPiece = Tuple[GTree, Tuple[int, ...]]


class GSubstitution(NamedTuple):
    tree: GTree
    map: GTreeMap
    origin: Dict[int, Tuple[int, int]]  # vertex of the result -> (G-vertex of the base, vertex of its piece)
    embeddings: Tuple[Tuple[int, ...], ...] = ()  # per G-vertex: piece edge -> edge of the result


def _check_piece(C: GTree, U: GTree, pins: Sequence[int]):
    if len(pins) != C.size or any(not 0 <= p < U.size for p in pins):
        raise DomainError("piece identification has the wrong size", invariant="leaf-root")
    a = C.arity
    roots = [pins[k * (a + 1) + a] for k in range(len(C.components))]
    leaves = [pins[k * (a + 1) + i] for k in range(len(C.components)) for i in range(a)]
    if sorted(roots) != list(U.roots) or sorted(leaves) != sorted(U.leaves):
        raise DomainError("piece leaf-root does not match its G-vertex", invariant="leaf-root")
    for k in range(len(C.components)):
        if any(U.comp_of[pins[k * (a + 1) + i]] != U.comp_of[roots[k]] for i in range(a)):
            raise DomainError("piece identification splits a corolla", invariant="leaf-root")
    for p, q in zip(C.action, U.action):
        if any(pins[p[c]] != q[pins[c]] for c in range(C.size)):
            raise DomainError("piece is not compatible with the action", invariant="action compatibility")


def g_substitute(T: GTree, datum: Sequence[GPiece]) -> GSubstitution:
    """
    Substitutes a G-tree into every G-vertex of T.

    Args:
        T: Base G-tree.
        datum: Aligned with ``g_vertices(T)``: a G-tree U_v and an
            equivariant identification of the G-vertex corolla with lr(U_v),
            as a map of corolla edges to edges of U_v.

    Returns:
        The assembled G-tree, the tall map from T and the provenance of its vertices.
    """
    G = T.group
    vertices = g_vertices(T)
    if len(datum) != len(vertices):
        raise DomainError("one piece per G-vertex is required", invariant="leaf-root")
    pieces = [(U, tuple(pins)) for U, pins in datum]
    for v, (U, pins) in zip(vertices, pieces):
        _check_piece(v.corolla, U, pins)
    if not vertices:
        return GSubstitution(T, identity_gmap(T), {}, ())
    owner = {u: (i, k) for i, v in enumerate(vertices) for k, u in enumerate(v.outputs)}

    def placement(x: int, u: int) -> Tuple[int, int, int]:
        i, k = owner[T.offsets[x] + u]
        U, pins = pieces[i]
        a = T.components[x].arity(u)
        return i, k * (a + 1), U.comp_of[pins[k * (a + 1) + a]]

    results = []
    for x, Tx in enumerate(T.components):
        local = []
        for u in Tx.vertices:
            i, base, c = placement(x, u)
            U, pins = pieces[i]
            slot = {l: j for j, l in enumerate(U.components[c].leaves)}
            local.append(Piece(U.components[c],
                               tuple(slot[pins[base + j] - U.offsets[c]] for j in range(Tx.arity(u)))))
        results.append(substitute(SubstitutionDatum(Tx, tuple(local))))
    offsets = _offsets([len(r.tree) for r in results])
    index = [{u: j for j, u in enumerate(Tx.vertices)} for Tx in T.components]
    action = []
    for g in G.elements:
        perm = [0] * sum(len(r.tree) for r in results)
        for x, Tx in enumerate(T.components):
            y = T.orbit(g, x)
            for j, u in enumerate(Tx.vertices):
                i, _, c = placement(x, u)
                U = pieces[i][0]
                u2 = T.action[g][T.offsets[x] + u] - T.offsets[y]
                sigma = U.component_iso(g, c)
                src, dst = results[x].piece_maps[j], results[y].piece_maps[index[y][u2]]
                for e in U.components[c].edges:
                    perm[offsets[x] + src(e)] = offsets[y] + dst(sigma[e])
        action.append(tuple(perm))
    assembled = GTree(G, tuple(r.tree for r in results), tuple(action))
    edges = tuple(offsets[x] + results[x].map(e) for x, Tx in enumerate(T.components) for e in Tx.edges)
    planar = all(r.map.kind == MapKind.PLANAR_TALL for r in results)
    origin: Dict[int, Tuple[int, int]] = {}
    embeddings = [[0] * U.size for U, _ in pieces]
    for x, Tx in enumerate(T.components):
        for j, u in enumerate(Tx.vertices):
            i, _, c = placement(x, u)
            U = pieces[i][0]
            for e in U.components[c].edges:
                embeddings[i][U.offsets[c] + e] = offsets[x] + results[x].piece_maps[j](e)
            for w in U.components[c].vertices:
                origin[offsets[x] + results[x].piece_maps[j](w)] = (i, U.offsets[c] + w)
    kind = MapKind.PLANAR_TALL if planar else MapKind.ROOTED_TALL
    return GSubstitution(assembled, GTreeMap(T, assembled, edges, kind), origin,
                         tuple(tuple(m) for m in embeddings))


class EmbeddedPiece(NamedTuple):
    tree: GTree
    pins: Tuple[int, ...]
    embedding: Tuple[int, ...]  # piece edge -> edge of the target


def g_desubstitute(phi: GTreeMap) -> Tuple[GPiece, ...]:
    """The substitution datum of an equivariant tall map: the outer face over each G-vertex."""
    return tuple((p.tree, p.pins) for p in g_faces(phi))


def g_faces(phi: GTreeMap) -> Tuple[EmbeddedPiece, ...]:
    """The outer faces of ``g_desubstitute`` together with their embeddings into the target."""
    T, U = phi.source, phi.target
    G = T.group
    if not phi.is_equivariant():
        raise DomainError("map is not equivariant", invariant="equivariance")
    if not all(phi.component_map(x).is_tall() for x in range(len(T.components))):
        raise DomainError("map is not tall", invariant="tall")
    datum: List[EmbeddedPiece] = []
    for v in g_vertices(T):
        a = v.corolla.arity
        faces: List[Tuple[Tree, Dict[int, int]]] = []
        for u in v.outputs:
            low = tuple(phi(c) for c in T.children[u])
            top = phi(u)
            z = U.comp_of[top]
            base = U.offsets[z]
            if low == (top,):
                faces.append((STICK, {top: 0}))
                continue
            face = outer_face(U.components[z], sorted(l - base for l in low), top - base)
            faces.append((face.source, {base + face(i): i for i in face.source.edges}))
        offsets = _offsets([len(f) for f, _ in faces])
        position = {u: k for k, u in enumerate(v.outputs)}
        action = []
        for p, q in zip(T.action, U.action):
            perm = [0] * sum(len(f) for f, _ in faces)
            for k, u in enumerate(v.outputs):
                k2 = position[p[u]]
                for w, i in faces[k][1].items():
                    perm[offsets[k] + i] = offsets[k2] + faces[k2][1][q[w]]
            action.append(tuple(perm))
        piece = GTree(G, tuple(f for f, _ in faces), tuple(action))
        pins = [0] * v.corolla.size
        for k, u in enumerate(v.outputs):
            for i, c in enumerate(T.children[u]):
                pins[k * (a + 1) + i] = offsets[k] + faces[k][1][phi(c)]
            pins[k * (a + 1) + a] = offsets[k] + faces[k][1][phi(u)]
        embedding = [0] * piece.size
        for k in range(len(faces)):
            for w, i in faces[k][1].items():
                embedding[offsets[k] + i] = w
        datum.append(EmbeddedPiece(piece, tuple(pins), tuple(embedding)))
    return tuple(datum)


def corolla_datum(T: GTree) -> Tuple[GPiece, ...]:
    """Each G-vertex substituted by its own corolla."""
    return tuple((v.corolla, tuple(range(v.corolla.size))) for v in g_vertices(T))


# --- Rooted trees over a corolla ---
class PinnedForm(NamedTuple):
    tree: GTree
    pins: Tuple[int, ...]  # corolla edge -> edge of tree
    iso: Permutation  # old edge -> edge of tree


def pinned_forms(T: GTree, C: GTree, pins: Sequence[int]) -> List[PinnedForm]:
    """
    Candidate normal forms of T under the rooted identification ``pins`` of C
    with lr(T); the normal form is the least candidate under any order that
    extends the comparison of (action, pins).
    """
    a = C.arity
    x0 = T.comp_of[pins[a]]
    T0, base = T.components[x0], T.offsets[x0]
    rank = {pins[i] - base: i for i in range(a)}
    first: List[Optional[int]] = []
    for e, kids in enumerate(T0.children):
        if kids is None:
            first.append(rank.get(e))
        else:
            ranks = [first[c] for c in kids if first[c] is not None]
            first.append(min(ranks) if ranks else None)

    def order(c: int):
        return (0, first[c], ()) if first[c] is not None else (1, 0, T0.shapes[c])

    S0, iso0 = standardize(T0, {v: tuple(sorted(T0.children[v], key=order)) for v in T0.vertices})
    forms = []
    for alpha in leaf_fixing_automorphisms(S0):
        N, iso = _induced_form(T, x0, compose(alpha, iso0.edges), S0)
        forms.append(PinnedForm(N, tuple(iso[p] for p in pins), iso))
    return forms


def canonical_rooted(T: GTree, C: GTree, pins: Sequence[int]) -> PinnedForm:
    return min(pinned_forms(T, C, pins), key=lambda f: (f.tree.action, f.pins))


class HTree(NamedTuple):
    """A tree with an action of a subgroup K, leaves labelled by corolla inputs."""

    tree: Tree
    action: Dict[int, Permutation]
    pins: Dict[int, int]  # leaf edge -> input label
    orbits: int  # K-orbits of vertices


def _cosets_within(K: Subgroup, S: Subgroup) -> Tuple[Tuple[int, ...], Dict[int, int]]:
    G = K.group
    index: Dict[int, int] = {}
    reps: List[int] = []
    for k in K.elements:
        if k not in index:
            for s in S.elements:
                index[G.op(k, s)] = len(reps)
            reps.append(k)
    return tuple(reps), index


def assemble(K: Subgroup, label_action: Mapping[int, Permutation],
             parts: Sequence[Tuple[Subgroup, HTree]], cost: int = 1) -> HTree:
    """
    A root vertex over the orbits K x_S t of the given parts.

    Args:
        K: Group acting on the result.
        label_action: Permutation of the input labels for each element of K.
        parts: For each input orbit, the stabilizer S of its first input and
            the S-tree grafted there.
        cost: What the root vertex counts towards the G-vertex budget.

    Returns:
        The assembled K-tree.
    """
    G = K.group
    cosets = [_cosets_within(K, S) for S, _ in parts]
    start: Dict[Tuple[int, int], int] = {}
    children: List[Optional[Tuple[int, ...]]] = []
    pins: Dict[int, int] = {}
    for o, (S, t) in enumerate(parts):
        for j, r in enumerate(cosets[o][0]):
            offset = len(children)
            start[(o, j)] = offset
            children.extend(None if kids is None else tuple(offset + c for c in kids) for kids in t.tree.children)
            for e, label in t.pins.items():
                pins[offset + e] = label_action[r][label]
    children.append(tuple(start[key] + len(parts[key[0]][1].tree) - 1 for key in start))
    tree = Tree(tuple(children))
    action = {}
    for k in K.elements:
        perm = list(tree.edges)
        for (o, j), offset in start.items():
            t = parts[o][1]
            reps, index = cosets[o]
            kr = G.op(k, reps[j])
            j2 = index[kr]
            local = t.action[G.op(G.inv(reps[j2]), kr)]
            for e in t.tree.edges:
                perm[offset + e] = start[(o, j2)] + local[e]
        action[k] = tuple(perm)
    return HTree(tree, action, pins, cost + sum(t.orbits for _, t in parts))


class _Counter:
    def __init__(self):
        self.count = 0
        self.budget = get_setting("ENUMERATION_BOUND")

    def tick(self):
        self.count += 1
        if self.count > self.budget:
            raise BoundExceeded(f"tree enumeration visited more than {self.budget} shapes",
                                bound="ENUMERATION_BOUND")


def _choices(options: Sequence[Sequence[HTree]], remaining: int) -> Iterator[Tuple[HTree, ...]]:
    if not options:
        yield ()
        return
    for t in options[0]:
        if t.orbits <= remaining:
            for rest in _choices(options[1:], remaining - t.orbits):
                yield (t,) + rest


def _multisets(options: Sequence[Tuple[Subgroup, HTree]], widths: Sequence[int], remaining: int,
               room: Optional[int], start: int = 0) -> Iterator[Tuple[Tuple[Subgroup, HTree], ...]]:
    yield ()
    for i in range(start, len(options)):
        cost = options[i][1].orbits
        if cost <= remaining and (room is None or widths[i] <= room):
            left = None if room is None else room - widths[i]
            for rest in _multisets(options, widths, remaining - cost, left, i):
                yield (options[i],) + rest


def _classes_within(K: Subgroup) -> List[Subgroup]:
    seen: Set[Subgroup] = set()
    reps = []
    for S in subgroups_of(K):
        if S not in seen:
            seen.update(S.conjugate(k) for k in K.elements)
            reps.append(S)
    return reps


# Positions in an alternating tree: active vertices sit on edges with an odd
# number of edges on their path to the root, inert vertices and leaves on even ones.
ACTIVE, INERT = "active", "inert"


class _Mode(NamedTuple):
    arities: Optional[FrozenSet[int]]
    inert_arities: Optional[FrozenSet[int]] = None
    alternating: bool = False

    def at(self, parity: Optional[str]) -> Tuple[int, Optional[FrozenSet[int]], Optional[str]]:
        """Cost, allowed arities and the parity of the children for a vertex at ``parity``."""
        if not self.alternating:
            return 1, self.arities, None
        if parity == INERT:
            return 1, self.inert_arities, ACTIVE
        return 0, self.arities, INERT


def _htrees(K: Subgroup, labels: Tuple[int, ...], label_action: Mapping[int, Permutation], budget: int,
            mode: _Mode, allow_leaf: bool, counter: _Counter, parity: Optional[str] = None) -> List[HTree]:
    results: List[HTree] = []
    if allow_leaf and len(labels) == 1 and parity != ACTIVE:
        results.append(HTree(STICK, {k: (0,) for k in K.elements}, {0: labels[0]}, 0))
    cost, allowed, below = mode.at(parity)
    if budget < cost or (allowed is not None and not allowed):
        return results
    remaining = budget - cost
    room_total = None if allowed is None else max(allowed)
    G = K.group
    leafless: List[Tuple[Subgroup, HTree]] = []
    if mode.alternating or allowed is None or 0 in allowed:
        for S in _classes_within(K):
            leafless.extend((S, t) for t in _htrees(S, (), label_action, remaining, mode, False, counter, below))
    widths = [K.order // S.order for S, _ in leafless]

    def image(k: int, block: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(sorted(label_action[k][l] for l in block))

    for partition in set_partitions(list(labels)):
        blocks = sorted(tuple(sorted(b)) for b in partition)
        if room_total is not None and len(blocks) > room_total:
            continue
        block_set = set(blocks)
        if any(image(k, b) not in block_set for k in K.generators for b in blocks):
            continue
        orbit_reps: List[Tuple[Subgroup, Tuple[int, ...]]] = []
        seen: Set[Tuple[int, ...]] = set()
        for b in blocks:
            if b not in seen:
                seen.update(image(k, b) for k in K.elements)
                orbit_reps.append((Subgroup(G, tuple(k for k in K.elements if image(k, b) == b)), b))
        options = [_htrees(S, b, label_action, remaining, mode, True, counter, below) for S, b in orbit_reps]
        room = None if room_total is None else room_total - len(blocks)
        for choice in _choices(options, remaining):
            used = sum(t.orbits for t in choice)
            for extra in _multisets(leafless, widths, remaining - used, room):
                arity = len(blocks) + sum(K.order // S.order for S, _ in extra)
                if allowed is not None and arity not in allowed:
                    continue
                counter.tick()
                parts = [(S, t) for (S, _), t in zip(orbit_reps, choice)] + list(extra)
                results.append(assemble(K, label_action, parts, cost))
    return results


def _rooted_pins(C: GTree, T: GTree, t: HTree) -> Tuple[int, ...]:
    a = C.arity
    first = {label: e for e, label in t.pins.items()}
    pins = [0] * C.size
    for i in range(a):
        pins[i] = first[i]
    pins[a] = T.roots[0]
    for p, q in zip(C.action, T.action):
        for c in range(a + 1):
            pins[p[c]] = q[pins[c]]
    return tuple(pins)


def _shapes(C: GTree, budget: int, mode: _Mode) -> Tuple[Tuple[GTree, Tuple[int, ...]], ...]:
    H = C.stabilizer(0)
    a = C.arity
    label_action = {h: C.component_iso(h, 0)[:a] for h in H.elements}
    counter = _Counter()
    parity = ACTIVE if mode.alternating else None
    found: Dict[Tuple[GTree, Tuple[int, ...]], None] = {}
    for t in _htrees(H, tuple(range(a)), label_action, budget, mode, True, counter, parity):
        T = induce(H, t.tree, t.action)
        best = canonical_rooted(T, C, _rooted_pins(C, T, t))
        found[(best.tree, best.pins)] = None
    return tuple(sorted(found, key=lambda pair: (pair[0].sort_key, pair[1])))


def rooted_shapes(C: GTree, max_gv: int,
                  arities: Optional[FrozenSet[int]] = None) -> Tuple[Tuple[GTree, Tuple[int, ...]], ...]:
    """
    One canonical representative per isomorphism class of G-trees T with
    a rooted identification of C with lr(T).

    Args:
        C: The G-corolla.
        max_gv: Bound on the number of G-vertices.
        arities: Allowed vertex arities, or None for all.

    Returns:
        Pairs (T, pins) with pins the identification as a map of edges of C
        to edges of T, in canonical order.
    """
    if not C.is_corolla:
        raise DomainError(f"{C!r} is not a G-corolla", invariant="corolla")
    return _rooted_shapes(C.group, C, max_gv, None if arities is None else frozenset(arities))


@memoize
def _rooted_shapes(G: FiniteGroup, C: GTree, max_gv: int, arities: Optional[FrozenSet[int]]):
    shapes = _shapes(C, max_gv, _Mode(arities))
    logger.debug("%d rooted shapes over %r with at most %d G-vertices", len(shapes), C, max_gv)
    return shapes


def alternating_shapes(C: GTree, max_inert: int, active_arities: FrozenSet[int],
                       inert_arities: FrozenSet[int]) -> Tuple[Tuple[GTree, Tuple[int, ...]], ...]:
    """
    Rooted shapes over C whose leaves all sit at even depth, so that vertices
    alternate between active ones (the root among them) and inert ones.

    Args:
        C: The G-corolla.
        max_inert: Bound on the number of inert G-vertices; active ones are not counted.
        active_arities: Allowed arities of active vertices.
        inert_arities: Allowed arities of inert vertices.
    """
    if not C.is_corolla:
        raise DomainError(f"{C!r} is not a G-corolla", invariant="corolla")
    return _alternating_shapes(C.group, C, max_inert, frozenset(active_arities), frozenset(inert_arities))


@memoize
def _alternating_shapes(G: FiniteGroup, C: GTree, max_inert: int, active: FrozenSet[int],
                        inert: FrozenSet[int]):
    shapes = _shapes(C, max_inert, _Mode(active, inert, alternating=True))
    logger.debug("%d alternating shapes over %r with at most %d inert G-vertices", len(shapes), C, max_inert)
    return shapes


class EnumeratedGTree(NamedTuple):
    tree: GTree
    pins: Tuple[int, ...]
    automorphisms: Tuple[GTreeMap, ...]


def enumerate_gtrees(C: GTree, max_gv: int,
                     arities: Optional[FrozenSet[int]] = None) -> Tuple[EnumeratedGTree, ...]:
    """Isomorphism classes of G-trees rooted over C, with their automorphism groups."""
    return tuple(EnumeratedGTree(T, pins, automorphisms(T)) for T, pins in rooted_shapes(C, max_gv, arities))


# --- Random G-trees ---
def random_gtree(rng: random.Random, G: FiniteGroup, max_gv: int = 2,
                 max_arity: int = 3) -> Tuple[GTree, GTree, Tuple[int, ...]]:
    """A random rooted G-tree (T, C, pins) drawn from the shapes over a random G-corolla."""
    while True:
        C = rng.choice(corolla_classes(G, rng.randint(0, max_arity)))
        shapes = rooted_shapes(C, max_gv, frozenset(range(max_arity + 1)))
        if shapes:
            T, pins = rng.choice(shapes)
            return T, C, pins
