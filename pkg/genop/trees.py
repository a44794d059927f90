# genop/trees.py
"""
Rooted trees with planar structure, stored as standard models.

Edges are 0..n-1 listed in planar (postorder) order, so the root is the last
edge and every subtree occupies a contiguous block of edges. A vertex is
named by its output edge; ``children[e]`` is None for a leaf, the empty
tuple for a stump and the ordered inputs otherwise.
"""
import logging
import random
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import permutations, product
from typing import Any, Dict, Hashable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .exceptions import DomainError
from .groups import FiniteGroup, permutation_group
from .utils import Permutation, UnionFind, memoize

logger = logging.getLogger(__name__)

# --- Type aliases ---
Children = Tuple[Optional[Tuple[int, ...]], ...]
ShapeKey = Tuple[Any, ...]


@dataclass(frozen=True)
class Tree:
    children: Children

    def __post_init__(self):
        n = len(self.children)
        if n == 0:
            raise DomainError("a tree has at least one edge", invariant="non-empty")
        order: List[int] = []
        stack = [(n - 1, False)]
        pushes = 0
        while stack:
            e, expanded = stack.pop()
            kids = self.children[e]
            if expanded or not kids:
                order.append(e)
                continue
            stack.append((e, True))
            for c in reversed(kids):
                if not 0 <= c < n:
                    raise DomainError(f"edge {c} out of range", invariant="edge range")
                pushes += 1
                if pushes > n:
                    raise DomainError("edge reused or cyclic incidence", invariant="acyclic")
                stack.append((c, False))
        if order != list(range(n)):
            raise DomainError("edges are not numbered in planar order from a single root",
                              invariant="standard model")

    def __len__(self):
        return len(self.children)

    def __repr__(self):
        return f"Tree({self.text()})"

    # --- Basic structure ---
    @property
    def root(self) -> int:
        return len(self.children) - 1

    @property
    def edges(self) -> range:
        return range(len(self.children))

    @property
    def is_stick(self) -> bool:
        return len(self.children) == 1 and self.children[0] is None

    @cached_property
    def leaves(self) -> Tuple[int, ...]:
        return tuple(e for e, kids in enumerate(self.children) if kids is None)

    @cached_property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(e for e, kids in enumerate(self.children) if kids is not None)

    @property
    def is_corolla(self) -> bool:
        return len(self.vertices) == 1 and self.vertices[0] == self.root

    def arity(self, e: int) -> int:
        return len(self.children[e] or ())

    @cached_property
    def parent(self) -> Tuple[Optional[int], ...]:
        parents: List[Optional[int]] = [None] * len(self)
        for e, kids in enumerate(self.children):
            for c in kids or ():
                parents[c] = e
        return tuple(parents)

    @cached_property
    def start(self) -> Tuple[int, ...]:
        """First edge of the subtree above each edge."""
        first: List[int] = []
        for e, kids in enumerate(self.children):
            first.append(first[kids[0]] if kids else e)
        return tuple(first)

    @cached_property
    def paths(self) -> Tuple[Tuple[int, ...], ...]:
        """I(e): the edge and everything below it, down to the root."""
        result: List[Tuple[int, ...]] = [()] * len(self)
        for e in reversed(self.edges):
            p = self.parent[e]
            result[e] = (e,) if p is None else (e,) + result[p]
        return tuple(result)

    def input_path(self, e: int) -> Tuple[int, ...]:
        self._check(e)
        return self.paths[e]

    @cached_property
    def keys(self) -> Tuple[ShapeKey, ...]:
        """Planar shape of the subtree above each edge, children in order."""
        result: List[ShapeKey] = []
        for kids in self.children:
            result.append((0,) if kids is None else (1,) + tuple(result[c] for c in kids))
        return tuple(result)

    @property
    def key(self) -> ShapeKey:
        return self.keys[self.root]

    @cached_property
    def shapes(self) -> Tuple[ShapeKey, ...]:
        """Shape of the subtree above each edge with children unordered; equal exactly on isomorphic subtrees."""
        result: List[ShapeKey] = []
        for kids in self.children:
            result.append((0,) if kids is None else (1,) + tuple(sorted(result[c] for c in kids)))
        return tuple(result)

    # --- Order queries ---
    def _check(self, e: int):
        if not 0 <= e < len(self):
            raise DomainError(f"edge {e} out of range", invariant="edge range")

    def leq(self, e: int, f: int) -> bool:
        """e <=_d f, i.e. e lies on or above f."""
        return self.start[f] <= e <= f

    def join(self, e: int, f: int) -> int:
        self._check(e)
        self._check(f)
        x = f
        while not self.leq(e, x):
            x = self.parent[x]
        return x

    def join_all(self, *edges: int) -> int:
        result = edges[0]
        for e in edges[1:]:
            result = self.join(result, e)
        return result

    def predecessor(self, b: int, e: int) -> int:
        """The input of b whose subtree contains e (b up-arrow e)."""
        if e == b or not self.leq(e, b):
            raise DomainError(f"edge {e} is not strictly above {b}", invariant="descendancy")
        for c in self.children[b]:
            if self.leq(e, c):
                return c
        raise DomainError(f"edge {e} is not strictly above {b}", invariant="descendancy")

    def subtree(self, e: int) -> Tuple["Tree", int]:
        """The tree of edges on or above e, with the global index of its first edge."""
        s = self.start[e]
        kids = tuple(None if k is None else tuple(c - s for c in k) for k in self.children[s:e + 1])
        return Tree(kids), s

    def text(self, labels: Optional[Mapping[int, str]] = None) -> str:
        """Nested text form: a vertex is (inputs), a leaf is a symbol."""

        def render(e: int) -> str:
            name = labels.get(e, "") if labels else ""
            kids = self.children[e]
            if kids is None:
                return name or "|"
            return f"{name}({','.join(render(c) for c in kids)})"

        return render(self.root)


# --- Constructors ---
class Node(NamedTuple):
    label: Optional[str]
    children: Optional[Tuple["Node", ...]]


STICK = Tree((None,))


def corolla(n: int) -> Tree:
    return Tree((None,) * n + (tuple(range(n)),))


def build(root: Node) -> Tuple[Tree, Tuple[Optional[str], ...]]:
    """Standard model of a nested node structure, with the label of each edge."""
    children: List[Optional[Tuple[int, ...]]] = []
    labels: List[Optional[str]] = []
    stack: List[Tuple[Node, Optional[List[int]]]] = [(root, None)]
    results: List[int] = []
    while stack:
        node, done = stack.pop()
        if node.children is None:
            children.append(None)
            labels.append(node.label)
            results.append(len(children) - 1)
        elif done is None:
            stack.append((node, []))
            for child in reversed(node.children):
                stack.append((child, None))
        else:
            k = len(node.children)
            kids = tuple(results[len(results) - k:]) if k else ()
            del results[len(results) - k:]
            children.append(kids)
            labels.append(node.label)
            results.append(len(children) - 1)
    return Tree(tuple(children)), tuple(labels)


def _to_node(spec) -> Node:
    if spec is None or isinstance(spec, str):
        return Node(spec, None)
    if isinstance(spec, tuple) and len(spec) == 2 and isinstance(spec[0], str):
        return Node(spec[0], tuple(_to_node(c) for c in spec[1]))
    if isinstance(spec, (list, tuple)):
        return Node(None, tuple(_to_node(c) for c in spec))
    raise DomainError(f"cannot read {spec!r} as a tree", invariant="nested form")


def from_nested(spec) -> Tree:
    """A list is a vertex, a string (or None) a leaf, ("label", [...]) a labelled vertex."""
    return build(_to_node(spec))[0]


def labelled(spec) -> Tuple[Tree, Dict[str, int]]:
    tree, labels = build(_to_node(spec))
    return tree, {label: e for e, label in enumerate(labels) if label is not None}


def from_children(children: Mapping[Hashable, Optional[Sequence[Hashable]]],
                  root: Optional[Hashable] = None) -> Tuple[Tree, Dict[Hashable, int]]:
    """
    Standardizes explicit incidence data.

    Args:
        children: Maps each edge label to its ordered inputs (None for a leaf).
            Labels appearing only as inputs are leaves.
        root: The root label; inferred when exactly one edge is nobody's input.

    Returns:
        (tree, index) where index maps each label to its edge.
    """
    labels = set(children)
    parent_of: Dict[Hashable, Hashable] = {}
    for e, kids in children.items():
        for c in kids or ():
            if c in parent_of:
                raise DomainError(f"edge {c!r} is an input of two vertices", invariant="single parent")
            parent_of[c] = e
            labels.add(c)
    if root is None:
        roots = [e for e in labels if e not in parent_of]
        if len(roots) != 1:
            raise DomainError(f"expected exactly one root, found {len(roots)}", invariant="single root")
        root = roots[0]
    elif root in parent_of:
        raise DomainError(f"root {root!r} is an input of a vertex", invariant="single root")
    labels.add(root)
    order: List[Hashable] = []
    stack = [(root, False)]
    visited = set()
    while stack:
        e, expanded = stack.pop()
        kids = children.get(e)
        if expanded or not kids:
            order.append(e)
            continue
        if e in visited:
            raise DomainError(f"cycle through edge {e!r}", invariant="acyclic")
        visited.add(e)
        stack.append((e, True))
        for c in reversed(kids):
            stack.append((c, False))
    if len(order) != len(labels):
        raise DomainError("incidence data is disconnected", invariant="connected")
    index = {label: i for i, label in enumerate(order)}
    kids_tuple = tuple(None if children.get(label) is None else tuple(index[c] for c in children[label])
                       for label in order)
    return Tree(kids_tuple), index


# --- Tree maps ---
class MapKind(str, Enum):
    ISO = "iso"
    PLANAR_TALL = "planar-tall"
    ROOTED_TALL = "rooted-tall"
    OUTER_FACE = "outer-face"
    DEGENERACY = "degeneracy"
    QUOTIENT = "quotient-component"
    ROOT_PULLBACK = "root-pullback"
    GENERAL = "general"


@dataclass(frozen=True)
class TreeMap:
    source: Tree
    target: Tree
    edges: Tuple[int, ...]
    kind: MapKind = MapKind.GENERAL

    def __call__(self, e: int) -> int:
        return self.edges[e]

    def compose(self, other: "TreeMap") -> "TreeMap":
        """self after other."""
        if other.target != self.source:
            raise DomainError("maps are not composable", invariant="composable")
        kind = self.kind if self.kind == other.kind else MapKind.GENERAL
        return TreeMap(other.source, self.target, tuple(self.edges[x] for x in other.edges), kind)

    def is_tall(self) -> bool:
        leaves = sorted(self.edges[l] for l in self.source.leaves)
        return self.edges[self.source.root] == self.target.root and leaves == list(self.target.leaves)

    def is_planar(self) -> bool:
        return all(a <= b for a, b in zip(self.edges, self.edges[1:]))


def identity_map(tree: Tree) -> TreeMap:
    return TreeMap(tree, tree, tuple(tree.edges), MapKind.ISO)


# --- Planar structures ---
def planarize(tree: Tree, orderings: Mapping[int, Sequence[int]]) -> Tuple[int, ...]:
    """
    The planar order induced by per-vertex input orderings.

    Args:
        tree: Any tree.
        orderings: For some vertices, their inputs in the desired order;
            unlisted vertices keep their current order.

    Returns:
        The edges of ``tree`` listed in the new planar order.
    """
    for v, order in orderings.items():
        kids = tree.children[v]
        if kids is None or len(order) != len(kids) or set(order) != set(kids):
            raise DomainError(f"ordering {list(order)} does not match the inputs of vertex {v}",
                              invariant="ordering length")
    result: List[int] = []
    stack = [(tree.root, False)]
    while stack:
        e, expanded = stack.pop()
        kids = orderings.get(e, tree.children[e])
        if expanded or not kids:
            result.append(e)
            continue
        stack.append((e, True))
        for c in reversed(tuple(kids)):
            stack.append((c, False))
    return tuple(result)


def extract_orderings(tree: Tree, planar: Sequence[int]) -> Dict[int, Tuple[int, ...]]:
    rank = {e: i for i, e in enumerate(planar)}
    return {v: tuple(sorted(tree.children[v], key=rank.__getitem__)) for v in tree.vertices}


def is_planar_order(tree: Tree, planar: Sequence[int]) -> bool:
    if sorted(planar) != list(tree.edges):
        return False
    return tuple(planar) == planarize(tree, extract_orderings(tree, planar))


def standardize(tree: Tree, orderings: Mapping[int, Sequence[int]]) -> Tuple[Tree, TreeMap]:
    """Relabels edges so the planar order from ``orderings`` becomes numeric order."""
    planar = planarize(tree, orderings)
    new = {e: i for i, e in enumerate(planar)}
    kids = []
    for e in planar:
        inputs = orderings.get(e, tree.children[e])
        kids.append(None if inputs is None else tuple(new[c] for c in inputs))
    standard = Tree(tuple(kids))
    return standard, TreeMap(tree, standard, tuple(new[e] for e in tree.edges), MapKind.ISO)


# --- Outer faces ---
def outer_face(tree: Tree, low: Sequence[int], top: int) -> TreeMap:
    """
    The outer face cut out by the broad relation low <= top, as its inclusion.

    Args:
        tree: Ambient tree.
        low: Edges above ``top`` that become the leaves of the face.
        top: Root of the face.

    Returns:
        The planar outer-face inclusion into ``tree``.
    """
    low = tuple(low)
    tree._check(top)
    for l in low:
        tree._check(l)
        if not tree.leq(l, top):
            raise DomainError(f"edge {l} is not above {top}", invariant="broad relation")
    for a in low:
        for b in low:
            if a != b and tree.leq(a, b):
                raise DomainError(f"edges {a} and {b} are comparable", invariant="broad relation")
    if len(set(low)) != len(low):
        raise DomainError("repeated edge in broad relation", invariant="broad relation")
    cut = set(low)
    face = [x for x in range(tree.start[top], top + 1)
            if not any(tree.leq(x, l) and x != l for l in low)]
    face_leaves = {x for x in face if x in cut or tree.children[x] is None}
    if face_leaves != cut:
        raise DomainError(f"{sorted(cut)} <= {top} is not a broad relation of the tree",
                          invariant="broad relation")
    local = {x: i for i, x in enumerate(face)}
    kids = tuple(None if x in cut or tree.children[x] is None else tuple(local[c] for c in tree.children[x])
                 for x in face)
    return TreeMap(Tree(kids), tree, tuple(face), MapKind.OUTER_FACE)


def vertex_face(tree: Tree, vertices: Sequence[int]) -> TreeMap:
    """The outer face whose vertex set is ``vertices`` (named by output edges)."""
    vs = set(vertices)
    if not vs:
        raise DomainError("a vertex face needs at least one vertex", invariant="non-empty")
    inputs = {c for v in vs for c in tree.children[v]}
    tops = [v for v in vs if v not in inputs]
    if len(tops) != 1:
        raise DomainError("vertices do not form a connected face", invariant="connected")
    low = sorted(c for c in inputs if c not in vs)
    face = outer_face(tree, low, tops[0])
    if {face(v) for v in face.source.vertices} != vs:
        raise DomainError("vertices do not form a connected face", invariant="connected")
    return face


def outer_union(tree: Tree, a: TreeMap, b: TreeMap) -> TreeMap:
    """The outer face with vertex set V(a) u V(b); the faces must share an edge."""
    if not set(a.edges) & set(b.edges):
        raise DomainError("outer faces share no edge", invariant="common edge")
    vs = {a(v) for v in a.source.vertices} | {b(v) for v in b.source.vertices}
    if not vs:
        e = a.edges[0]
        return outer_face(tree, (e,), e)
    return vertex_face(tree, sorted(vs))


# --- Grafting and degeneracies ---
def graft(S: Tree, R: Tree, leaf: int) -> Tuple[Tree, TreeMap, TreeMap]:
    """
    Grafts R onto the leaf ``leaf`` of S.

    Returns:
        (U, S -> U, R -> U), both inclusions planar outer faces.
    """
    if not 0 <= leaf < len(S) or S.children[leaf] is not None:
        raise DomainError(f"edge {leaf} is not a leaf of the base tree", invariant="graft leaf")
    children: Dict[Hashable, Optional[Tuple[Hashable, ...]]] = {}
    for e, kids in enumerate(S.children):
        children[("S", e)] = None if kids is None else tuple(("S", c) for c in kids)
    r_kids = R.children[R.root]
    children[("S", leaf)] = None if r_kids is None else tuple(("R", c) for c in r_kids)
    for f, kids in enumerate(R.children[:-1]):
        children[("R", f)] = None if kids is None else tuple(("R", c) for c in kids)
    U, index = from_children(children, ("S", S.root))
    s_map = TreeMap(S, U, tuple(index[("S", e)] for e in S.edges), MapKind.OUTER_FACE)
    r_map = TreeMap(R, U, tuple(index[("R", f)] if f != R.root else index[("S", leaf)] for f in R.edges),
                    MapKind.OUTER_FACE)
    return U, s_map, r_map


def insert_unary(tree: Tree, e: int) -> TreeMap:
    """Degeneracy onto ``tree`` from the tree with a unary vertex inserted at edge e."""
    tree._check(e)
    children: Dict[Hashable, Optional[Tuple[Hashable, ...]]] = {}
    for x, kids in enumerate(tree.children):
        children[("T", x)] = None if kids is None else tuple(("T", c) for c in kids)
    children[("new",)] = children[("T", e)]
    children[("T", e)] = (("new",),)
    S, index = from_children(children, ("T", tree.root))
    edges = [0] * len(S)
    for label, i in index.items():
        edges[i] = e if label == ("new",) else label[1]
    return TreeMap(S, tree, tuple(edges), MapKind.DEGENERACY)


def tall_outer_factor(phi: TreeMap) -> Tuple[TreeMap, TreeMap]:
    """Factors phi as (tall part S -> face, outer face inclusion face -> T)."""
    S, T = phi.source, phi.target
    low = sorted({phi(l) for l in S.leaves})
    face = outer_face(T, low, phi(S.root))
    local = {x: i for i, x in enumerate(face.edges)}
    try:
        tall_edges = tuple(local[x] for x in phi.edges)
    except KeyError as exc:
        raise DomainError("map leaves the face spanned by its leaves and root", invariant="tall factor") from exc
    kind = phi.kind if phi.kind != MapKind.OUTER_FACE else MapKind.ISO
    return TreeMap(S, face.source, tall_edges, kind), face


# --- Leaf-root ---
class LeafRoot(NamedTuple):
    corolla: Tree
    map: TreeMap
    stick: bool


def leaf_root(tree: Tree) -> LeafRoot:
    """The corolla with a planar tall map to ``tree``; the stick is its own leaf-root."""
    if tree.is_stick:
        return LeafRoot(tree, identity_map(tree), True)
    k = len(tree.leaves)
    C = corolla(k)
    return LeafRoot(C, TreeMap(C, tree, tree.leaves + (tree.root,), MapKind.PLANAR_TALL), False)


# --- Substitution ---
class Piece(NamedTuple):
    """Tree substituted for a vertex; input i goes to ``tree.leaves[leaf_map[i]]``."""

    tree: Tree
    leaf_map: Tuple[int, ...]


@dataclass(frozen=True)
class SubstitutionDatum:
    base: Tree
    pieces: Tuple[Piece, ...]  # aligned with base.vertices

    def __post_init__(self):
        if len(self.pieces) != len(self.base.vertices):
            raise DomainError("one piece per vertex is required", invariant="leaf-root")
        for v, piece in zip(self.base.vertices, self.pieces):
            arity = self.base.arity(v)
            if len(piece.tree.leaves) != arity or sorted(piece.leaf_map) != list(range(arity)):
                raise DomainError(f"piece for vertex {v} has the wrong leaf-root", invariant="leaf-root")
            if piece.tree.is_stick and arity != 1:
                raise DomainError(f"stick substituted for non-unary vertex {v}", invariant="leaf-root")

    @property
    def planar(self) -> bool:
        return all(p.leaf_map == tuple(range(len(p.leaf_map))) for p in self.pieces)


def corolla_datum(tree: Tree) -> SubstitutionDatum:
    return SubstitutionDatum(tree, tuple(Piece(corolla(tree.arity(v)), tuple(range(tree.arity(v))))
                                         for v in tree.vertices))


class Substitution(NamedTuple):
    tree: Tree
    map: TreeMap
    vertex_origin: Dict[int, int]  # vertex of the result -> vertex of the base
    piece_maps: Tuple[TreeMap, ...]  # aligned with base.vertices


def substitute(datum: SubstitutionDatum) -> Substitution:
    """Assembles the pieces along the base tree; the map base -> result is tall."""
    T = datum.base
    uf = UnionFind(("T", e) for e in T.edges)
    for v, piece in zip(T.vertices, datum.pieces):
        P = piece.tree
        for x in P.edges:
            uf.add(("P", v, x))
        uf.union(("P", v, P.root), ("T", v))
        for i, c in enumerate(T.children[v]):
            uf.union(("P", v, P.leaves[piece.leaf_map[i]]), ("T", c))
    children: Dict[Hashable, Optional[Tuple[Hashable, ...]]] = {}
    origin_label: Dict[Hashable, int] = {}
    for v, piece in zip(T.vertices, datum.pieces):
        P = piece.tree
        for x in P.vertices:
            label = uf.find(("P", v, x))
            children[label] = tuple(uf.find(("P", v, c)) for c in P.children[x])
            origin_label[label] = v
    U, index = from_children(children, uf.find(("T", T.root)))
    kind = MapKind.PLANAR_TALL if datum.planar else MapKind.ROOTED_TALL
    phi = TreeMap(T, U, tuple(index[uf.find(("T", e))] for e in T.edges), kind)
    piece_maps = tuple(
        TreeMap(piece.tree, U, tuple(index[uf.find(("P", v, x))] for x in piece.tree.edges), MapKind.OUTER_FACE)
        for v, piece in zip(T.vertices, datum.pieces)
    )
    return Substitution(U, phi, {index[label]: v for label, v in origin_label.items()}, piece_maps)


def desubstitute(phi: TreeMap) -> SubstitutionDatum:
    """The substitution datum of a (planar or rooted) tall map."""
    T, U = phi.source, phi.target
    pieces = []
    for v in T.vertices:
        low = tuple(phi(c) for c in T.children[v])
        if low == (phi(v),):
            pieces.append(Piece(STICK, (0,)))
            continue
        face = outer_face(U, sorted(low), phi(v))
        position = {face(l): i for i, l in enumerate(face.source.leaves)}
        pieces.append(Piece(face.source, tuple(position[x] for x in low)))
    return SubstitutionDatum(T, tuple(pieces))


def tall_map_from_cover(U: Tree, faces: Sequence[TreeMap]) -> TreeMap:
    """
    The planar tall map T -> U whose vertex faces are ``faces``.

    Non-stick faces must partition the vertices of U; a stick face at edge x
    becomes a unary vertex of T over x and may not be an inner edge of
    another face.
    """
    counts: Dict[int, int] = {}
    owner: Dict[int, int] = {}
    for i, face in enumerate(faces):
        if face.target != U:
            raise DomainError("cover face lives in another tree", invariant="cover")
        if face.source.is_stick:
            counts[face(0)] = counts.get(face(0), 0) + 1
            continue
        for v in face.source.vertices:
            if face(v) in owner:
                raise DomainError(f"vertex {face(v)} lies in two faces", invariant="cover partition")
            owner[face(v)] = i
    if set(owner) != set(U.vertices):
        raise DomainError("faces do not cover every vertex", invariant="cover partition")
    for face in faces:
        if face.source.is_stick:
            continue
        inner = set(face.edges) - {face(l) for l in face.source.leaves} - {face(face.source.root)}
        for x in inner:
            if counts.get(x):
                raise DomainError(f"stick face at {x} is an inner edge of another face", invariant="cover sticks")
    children: Dict[Hashable, Optional[Tuple[Hashable, ...]]] = {}
    for face in faces:
        if face.source.is_stick:
            continue
        top = face(face.source.root)
        children[(top, counts.get(top, 0))] = tuple((face(l), 0) for l in face.source.leaves)
    for x, m in counts.items():
        for j in range(m):
            children[(x, j)] = ((x, j + 1),)
    T, index = from_children(children, (U.root, 0))
    edges = [0] * len(T)
    for (x, _), i in index.items():
        edges[i] = x
    phi = TreeMap(T, U, tuple(edges), MapKind.PLANAR_TALL)
    if not phi.is_tall():
        raise DomainError("cover does not determine a tall map", invariant="cover")
    return phi


# --- Isomorphisms and automorphisms ---
def _isos_at(S: Tree, s: int, T: Tree, t: int) -> List[Dict[int, int]]:
    if S.shapes[s] != T.shapes[t]:
        return []
    s_kids, t_kids = S.children[s], T.children[t]
    if s_kids is None:
        return [{s: t}]
    results: List[Dict[int, int]] = []
    for perm in permutations(range(len(t_kids))):
        if any(S.shapes[s_kids[i]] != T.shapes[t_kids[perm[i]]] for i in range(len(s_kids))):
            continue
        options = [_isos_at(S, s_kids[i], T, t_kids[perm[i]]) for i in range(len(s_kids))]
        for combo in product(*options):
            mapping = {s: t}
            for part in combo:
                mapping.update(part)
            results.append(mapping)
    return results


@memoize
def isomorphisms(S: Tree, T: Tree) -> Tuple[Permutation, ...]:
    """All tree isomorphisms S -> T as edge maps, sorted."""
    if len(S) != len(T):
        return ()
    return tuple(sorted(tuple(m[e] for e in S.edges) for m in _isos_at(S, S.root, T, T.root)))


@memoize
def leaf_fixing_automorphisms(tree: Tree) -> Tuple[Permutation, ...]:
    """
    Automorphisms fixing every leaf, sorted.

    A subtree containing a leaf is mapped to itself, so only leafless
    subtrees with equal shapes can be exchanged.
    """
    leafy = [False] * len(tree)
    for e, kids in enumerate(tree.children):
        leafy[e] = kids is None or any(leafy[c] for c in kids)

    def at(e: int) -> List[Dict[int, int]]:
        kids = tree.children[e]
        if not kids:
            return [{e: e}]
        options = [at(c) for c in kids if leafy[c]]
        bare = [c for c in kids if not leafy[c]]
        swaps: List[Dict[int, int]] = []
        for image in set(permutations(bare)):
            if any(tree.shapes[c] != tree.shapes[d] for c, d in zip(bare, image)):
                continue
            for combo in product(*(_isos_at(tree, c, tree, d) for c, d in zip(bare, image))):
                mapping: Dict[int, int] = {}
                for part in combo:
                    mapping.update(part)
                swaps.append(mapping)
        results = []
        for combo in product(*options, swaps):
            mapping = {e: e}
            for part in combo:
                mapping.update(part)
            results.append(mapping)
        return results

    return tuple(sorted({tuple(m[x] for x in tree.edges) for m in at(tree.root)}))


@memoize
def automorphism_group(tree: Tree) -> FiniteGroup:
    """Aut(T) as a permutation group on edges; for a corolla this is Sigma_n's table."""
    return permutation_group(isomorphisms(tree, tree), f"aut-{len(tree)}")


# --- Random trees ---
def random_tree(rng: random.Random, vertices: int = 4, max_arity: int = 3, stumps: bool = True) -> Tree:
    """Grows a tree by repeatedly turning a random leaf into a vertex."""
    children: Dict[int, Optional[Tuple[int, ...]]] = {0: None}
    next_label = 1
    for _ in range(vertices):
        leaves = [e for e, kids in children.items() if kids is None]
        if not leaves:
            break
        e = rng.choice(leaves)
        arity = rng.randint(0 if stumps else 1, max_arity)
        kids = tuple(range(next_label, next_label + arity))
        next_label += arity
        children[e] = kids
        for c in kids:
            children[c] = None
    return from_children(children, 0)[0]


def random_orderings(rng: random.Random, tree: Tree) -> Dict[int, Tuple[int, ...]]:
    result = {}
    for v in tree.vertices:
        kids = list(tree.children[v])
        rng.shuffle(kids)
        result[v] = tuple(kids)
    return result
