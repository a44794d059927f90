# genop/groups.py
"""
Finite groups stored as multiplication tables over {0..order-1}.

Element 0 is always the identity. Besides the group type this module holds
subgroups, homomorphisms, partial homomorphisms H -> Sigma defined on a
subgroup H <= G, and graph subgroups of products G x Sigma.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations, product
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .conf import get_setting
from .exceptions import BoundExceeded, DomainError, ParseError
from .utils import Permutation, compose, identity, is_permutation, memoize

logger = logging.getLogger(__name__)

# --- Constants ---
# Tables are dense, so constructors refuse groups beyond this order.
MAX_GROUP_ORDER = 2048
NAMED_GROUPS = ("trivial", "cyclic-<n>", "symmetric-<n>", "klein-4", "quaternion-8")

# --- Type aliases ---
Table = Tuple[Tuple[int, ...], ...]
GroupSpec = Union[str, Dict[str, Any]]


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """
    A finite group given by its multiplication table.

    ``points`` optionally records a faithful permutation representation
    (element i acts as ``points[i]``); ``factors`` records the two factors
    of a direct product, whose element (g, k) is stored as g * |K| + k.
    """

    table: Table
    name: str = ""
    points: Optional[Tuple[Permutation, ...]] = None
    factors: Optional[Tuple["FiniteGroup", "FiniteGroup"]] = None

    def __post_init__(self):
        n = len(self.table)
        if n == 0 or any(len(row) != n for row in self.table):
            raise DomainError("multiplication table must be square and non-empty", invariant="table shape")
        if tuple(self.table[0]) != tuple(range(n)):
            raise DomainError("element 0 must be the identity", invariant="identity")

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FiniteGroup) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.table)

    def __repr__(self):
        return f"FiniteGroup({self.name or 'order ' + str(self.order)})"

    @cached_property
    def _key(self) -> Tuple[Any, ...]:
        # the name is a label; points and factors are structure
        return self.table, self.points, self.factors

    @cached_property
    def _hash(self) -> int:
        return hash(self._key)

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> range:
        return range(len(self.table))

    @cached_property
    def mul(self) -> np.ndarray:
        array = np.array(self.table, dtype=np.int64)
        array.setflags(write=False)
        return array

    @cached_property
    def inverses(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.argmax(self.mul == 0, axis=1))

    @cached_property
    def point_index(self) -> Dict[Permutation, int]:
        if self.points is None:
            raise DomainError(f"{self!r} has no permutation representation", invariant="points")
        return {p: i for i, p in enumerate(self.points)}

    def op(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def conjugate(self, g: int, x: int) -> int:
        """g x g^-1."""
        return self.table[self.table[g][x]][self.inverses[g]]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.table[x][a]
            k += 1
        return k

    def validate(self) -> "FiniteGroup":
        """Exhaustive group-axiom check; returns self."""
        n = self.order
        M = self.mul
        if M.min() < 0 or M.max() >= n:
            raise DomainError("table entries out of range", invariant="table range")
        ids = np.arange(n)
        if not np.array_equal(M[:, 0], ids):
            raise DomainError("element 0 must be a two-sided identity", invariant="identity")
        if not (np.all(np.sort(M, axis=1) == ids) and np.all(np.sort(M, axis=0) == ids[:, None])):
            raise DomainError("every element needs an inverse (rows and columns must be permutations)",
                              invariant="inverses")
        if not np.array_equal(M[M], M[:, M]):
            raise DomainError("table is not associative", invariant="associativity")
        return self

    # --- Direct products ---
    def pair(self, g: int, k: int) -> int:
        return g * self.factors[1].order + k

    def split(self, x: int) -> Tuple[int, int]:
        return divmod(x, self.factors[1].order)


# --- Constructors ---
def from_table(rows: Sequence[Sequence[int]], name: str = "") -> FiniteGroup:
    """
    Builds a group from an arbitrary multiplication table, relabelling
    elements so that the identity becomes 0.

    Args:
        rows: Square table, rows[a][b] = ab.
        name: Optional label.

    Returns:
        A validated FiniteGroup.
    """
    try:
        rows = [[int(x) for x in row] for row in rows]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"table entries must be integers: {exc}", field="table") from exc
    n = len(rows)
    if n == 0 or any(len(row) != n for row in rows):
        raise DomainError("multiplication table must be square and non-empty", invariant="table shape")
    if any(not 0 <= x < n for row in rows for x in row):
        raise DomainError("table entries out of range", invariant="table range")
    candidates = [e for e in range(n)
                  if rows[e] == list(range(n)) and all(rows[a][e] == a for a in range(n))]
    if not candidates:
        raise DomainError("table has no identity element", invariant="identity")
    e = candidates[0]
    order = [e] + [a for a in range(n) if a != e]
    position = {a: i for i, a in enumerate(order)}
    table = tuple(tuple(position[rows[order[i]][order[j]]] for j in range(n)) for i in range(n))
    return FiniteGroup(table, name).validate()


def _closure(generators: Sequence[Permutation], degree: int) -> List[Permutation]:
    start = identity(degree)
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for g in generators:
            y = compose(x, g)
            if y not in seen:
                seen.add(y)
                if len(seen) > MAX_GROUP_ORDER:
                    raise BoundExceeded(f"generated group exceeds order {MAX_GROUP_ORDER}", bound="group order")
                queue.append(y)
    return sorted(seen)


def permutation_group(perms: Sequence[Permutation], name: str = "") -> FiniteGroup:
    """Group on a complete, lexicographically sorted list of permutations."""
    perms = tuple(perms)
    index = {p: i for i, p in enumerate(perms)}
    table = tuple(tuple(index[compose(p, q)] for q in perms) for p in perms)
    return FiniteGroup(table, name, points=perms)


def from_permutations(generators: Iterable[Sequence[int]], degree: Optional[int] = None,
                      name: str = "") -> FiniteGroup:
    """
    The permutation group generated by 0-based permutations, elements in
    lexicographic order (the identity comes first).
    """
    generators = [tuple(g) for g in generators]
    if degree is None:
        if not generators:
            raise DomainError("degree needed for an empty generator list", invariant="degree")
        degree = len(generators[0])
    for g in generators:
        if not is_permutation(g, degree):
            raise DomainError(f"{list(g)} is not a permutation of {degree} points", invariant="permutation")
    return permutation_group(_closure(generators, degree), name)


@memoize
def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise DomainError("cyclic groups need positive order", invariant="order")
    return FiniteGroup(tuple(tuple((i + j) % n for j in range(n)) for i in range(n)), f"cyclic-{n}")


@memoize
def symmetric(n: int) -> FiniteGroup:
    """Sigma_n in one-line notation, lexicographically indexed."""
    if n < 0:
        raise DomainError("symmetric groups need n >= 0", invariant="order")
    if n > 6:
        raise BoundExceeded(f"symmetric-{n} exceeds order {MAX_GROUP_ORDER}", bound="group order")
    return permutation_group(sorted(permutations(range(n))), f"symmetric-{n}")


@memoize
def direct_product(G: FiniteGroup, K: FiniteGroup, name: str = "") -> FiniteGroup:
    if G.order * K.order > MAX_GROUP_ORDER:
        raise BoundExceeded(f"{G!r} x {K!r} exceeds order {MAX_GROUP_ORDER}", bound="group order")
    m, k = G.order, K.order
    M = G.mul[:, None, :, None] * k + K.mul[None, :, None, :]
    table = tuple(tuple(int(x) for x in row) for row in M.reshape(m * k, m * k))
    return FiniteGroup(table, name or f"{G.name}x{K.name}", factors=(G, K))


def klein4() -> FiniteGroup:
    return direct_product(cyclic(2), cyclic(2), "klein-4")


@memoize
def quaternion8() -> FiniteGroup:
    """Unit quaternions, elements ordered 1, -1, i, -i, j, -j, k, -k."""

    def unit_product(u: int, v: int) -> Tuple[int, int]:
        # units 0..3 stand for 1, i, j, k
        if u == 0:
            return 1, v
        if v == 0:
            return 1, u
        if u == v:
            return -1, 0
        sign = 1 if (u, v) in ((1, 2), (2, 3), (3, 1)) else -1
        return sign, 6 - u - v

    def index(sign: int, unit: int) -> int:
        return 2 * unit + (1 if sign < 0 else 0)

    table = []
    for a in range(8):
        row = []
        for b in range(8):
            sign, unit = unit_product(a // 2, b // 2)
            sign *= (-1) ** (a % 2 + b % 2)
            row.append(index(sign, unit))
        table.append(tuple(row))
    return FiniteGroup(tuple(table), "quaternion-8")


def regular_representation(G: FiniteGroup) -> Tuple[Permutation, ...]:
    """Left multiplication, g -> (x -> gx)."""
    return tuple(tuple(G.op(g, x) for x in G.elements) for g in G.elements)


@dataclass(frozen=True)
class Wreath:
    """
    Sigma_n wr G realised on n * d points, (i, a) stored as i * d + a.
    The element (s; t_0, ..., t_{n-1}) sends (i, a) to (s(i), t_i(a)).
    """

    group: FiniteGroup
    n: int
    base: FiniteGroup
    representation: Tuple[Permutation, ...]

    @property
    def degree(self) -> int:
        return len(self.representation[0])

    @cached_property
    def _representation_index(self) -> Dict[Permutation, int]:
        return {p: g for g, p in enumerate(self.representation)}

    def top(self, w: int) -> Permutation:
        d, p = self.degree, self.group.points[w]
        return tuple(p[i * d] // d for i in range(self.n))

    def coordinate(self, w: int, i: int) -> int:
        d, p = self.degree, self.group.points[w]
        shift = (p[i * d] // d) * d
        return self._representation_index[tuple(p[i * d + a] - shift for a in range(d))]

    def element(self, top: Sequence[int], coordinates: Sequence[int]) -> int:
        return self.group.point_index[wreath_permutation(top, coordinates, self.representation)]

    def stabilizer(self, e: int) -> "Subgroup":
        return Subgroup(self.group, tuple(w for w in self.group.elements if self.top(w)[e] == e))


def wreath_permutation(top: Sequence[int], coordinates: Sequence[int],
                       representation: Sequence[Permutation]) -> Permutation:
    d = len(representation[0])
    image = [0] * (len(top) * d)
    for i, s in enumerate(top):
        tau = representation[coordinates[i]]
        for a in range(d):
            image[i * d + a] = s * d + tau[a]
    return tuple(image)


@memoize
def wreath(n: int, base: FiniteGroup) -> Wreath:
    """
    Sigma_n wr base, using the base's own permutation representation when it
    has one and the left regular representation otherwise.
    """
    representation = base.points or regular_representation(base)
    size = 1
    for i in range(2, n + 1):
        size *= i
    size *= base.order ** n
    if size > MAX_GROUP_ORDER:
        raise BoundExceeded(f"Sigma_{n} wr {base!r} has order {size}", bound="group order")
    perms = sorted(
        wreath_permutation(top, coords, representation)
        for top in permutations(range(n))
        for coords in product(base.elements, repeat=n)
    )
    group = permutation_group(perms, f"symmetric-{n}-wr-{base.name}")
    return Wreath(group, n, base, tuple(representation))


# --- Subgroups ---
@dataclass(frozen=True)
class Subgroup:
    group: FiniteGroup = field(repr=False)
    elements: Tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def members(self) -> frozenset:
        return frozenset(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        return self.members <= other.members

    def conjugate(self, g: int) -> "Subgroup":
        return Subgroup(self.group, tuple(sorted({self.group.conjugate(g, x) for x in self.elements})))

    def intersection(self, other: "Subgroup") -> "Subgroup":
        return Subgroup(self.group, tuple(x for x in self.elements if x in other.members))

    def is_normal(self) -> bool:
        return all(self.conjugate(g) == self for g in self.group.elements)

    @cached_property
    def generators(self) -> Tuple[int, ...]:
        """Greedy generating set, elements of larger order first."""
        G = self.group
        ranked = sorted(self.elements, key=lambda x: (-G.element_order(x), x))
        gens: List[int] = []
        current = {0}
        for x in ranked:
            if len(current) == self.order:
                break
            if x not in current:
                gens.append(x)
                current = set(generated(G, gens).elements)
        return tuple(gens)

    @cached_property
    def position(self) -> Dict[int, int]:
        return {x: i for i, x in enumerate(self.elements)}

    def as_group(self) -> FiniteGroup:
        """The subgroup as a group in its own right; local index i is ``elements[i]``."""
        G, pos = self.group, self.position
        table = tuple(tuple(pos[G.op(a, b)] for b in self.elements) for a in self.elements)
        points = tuple(G.points[x] for x in self.elements) if G.points is not None else None
        return FiniteGroup(table, f"{G.name}<{self.order}>", points=points)


def subgroup_key(H: Subgroup) -> Tuple[int, Tuple[int, ...]]:
    return H.order, H.elements


def generated(group: FiniteGroup, generators: Iterable[int]) -> Subgroup:
    gens = list(dict.fromkeys(generators))
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = group.op(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return Subgroup(group, tuple(sorted(seen)))


def make_subgroup(group: FiniteGroup, elements: Iterable[int]) -> Subgroup:
    """Validated subgroup from an element list."""
    members = sorted(set(int(x) for x in elements))
    if not members or members[0] != 0 or members[-1] >= group.order:
        raise DomainError(f"{members} is not a subset of {group!r} containing the identity",
                          invariant="subgroup")
    candidate = Subgroup(group, tuple(members))
    if generated(group, members) != candidate:
        raise DomainError(f"{members} is not closed under multiplication", invariant="subgroup closure")
    return candidate


def trivial_subgroup(group: FiniteGroup) -> Subgroup:
    return Subgroup(group, (0,))


def whole(group: FiniteGroup) -> Subgroup:
    return Subgroup(group, tuple(group.elements))


@memoize
def subgroups(group: FiniteGroup) -> Tuple[Subgroup, ...]:
    """
    All subgroups of ``group``, sorted by (order, elements).

    Every subgroup is a join of cyclic subgroups, so joins are saturated
    starting from the cyclic ones.
    """
    bound = get_setting("SUBGROUP_BOUND")
    if group.order > bound:
        raise BoundExceeded(f"subgroup enumeration of {group!r} exceeds order bound {bound}",
                            bound="SUBGROUP_BOUND")
    cyclics = sorted({generated(group, [g]) for g in group.elements}, key=subgroup_key)
    found = set(cyclics)
    frontier = list(cyclics)
    while frontier:
        new = []
        for S in frontier:
            for C in cyclics:
                if not C.is_subgroup_of(S):
                    joined = generated(group, S.generators + C.generators)
                    if joined not in found:
                        found.add(joined)
                        new.append(joined)
        frontier = new
    result = tuple(sorted(found, key=subgroup_key))
    logger.debug("%r has %d subgroups", group, len(result))
    return result


def subgroups_of(H: Subgroup) -> Tuple[Subgroup, ...]:
    """Subgroups of H, computed inside H so the ambient group may be large."""
    local = subgroups(H.as_group())
    return tuple(sorted((Subgroup(H.group, tuple(sorted(H.elements[i] for i in K.elements)))
                         for K in local), key=subgroup_key))


def conjugacy_class(H: Subgroup) -> Tuple[Subgroup, ...]:
    return tuple(sorted({H.conjugate(g) for g in H.group.elements}, key=subgroup_key))


@memoize
def conjugacy_classes(group: FiniteGroup) -> Tuple[Tuple[Subgroup, ...], ...]:
    seen = set()
    classes = []
    for H in subgroups(group):
        if H not in seen:
            members = conjugacy_class(H)
            seen.update(members)
            classes.append(members)
    return tuple(classes)


def subgroup_table(group: FiniteGroup) -> pd.DataFrame:
    """One row per subgroup: order, elements, generators, class size and normality."""
    class_size = {H: len(members) for members in conjugacy_classes(group) for H in members}
    rows = [
        {
            "order": H.order,
            "elements": list(H.elements),
            "generators": list(H.generators),
            "class_size": class_size[H],
            "normal": class_size[H] == 1,
        }
        for H in subgroups(group)
    ]
    return pd.DataFrame(rows, columns=["order", "elements", "generators", "class_size", "normal"])


# --- Homomorphisms ---
@dataclass(frozen=True)
class Homomorphism:
    source: FiniteGroup = field(repr=False)
    target: FiniteGroup = field(repr=False)
    images: Tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.source.order:
            raise DomainError("homomorphism needs one image per source element", invariant="homomorphism")
        img = np.asarray(self.images, dtype=np.int64)
        if img.min() < 0 or img.max() >= self.target.order:
            raise DomainError("image outside the target group", invariant="homomorphism")
        if not np.array_equal(img[self.source.mul], self.target.mul[np.ix_(img, img)]):
            raise DomainError("map does not preserve multiplication", invariant="homomorphism")

    def __call__(self, x: int) -> int:
        return self.images[x]

    def image(self, H: Subgroup) -> Subgroup:
        return Subgroup(self.target, tuple(sorted({self.images[h] for h in H.elements})))

    def preimage(self, K: Subgroup) -> Subgroup:
        return Subgroup(self.source, tuple(x for x in self.source.elements if self.images[x] in K))

    def kernel(self) -> Subgroup:
        return self.preimage(trivial_subgroup(self.target))


def inclusion(H: Subgroup) -> Homomorphism:
    return Homomorphism(H.as_group(), H.group, H.elements)


def projection(product_group: FiniteGroup, side: int) -> Homomorphism:
    """Projection of a direct product onto factor 0 or 1."""
    factor = product_group.factors[side]
    return Homomorphism(product_group, factor,
                        tuple(product_group.split(x)[side] for x in product_group.elements))


@dataclass(frozen=True)
class PartialHom:
    """A homomorphism H -> target defined on a subgroup H of G; images align with H.elements."""

    source: Subgroup
    target: FiniteGroup = field(repr=False)
    images: Tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.source.order:
            raise DomainError("partial homomorphism needs one image per source element",
                              invariant="partial homomorphism")
        G, pos, T = self.source.group, self.source.position, self.target
        for i, a in enumerate(self.source.elements):
            for j, b in enumerate(self.source.elements):
                if self.images[pos[G.op(a, b)]] != T.op(self.images[i], self.images[j]):
                    raise DomainError("map does not preserve multiplication", invariant="partial homomorphism")

    @property
    def group(self) -> FiniteGroup:
        return self.source.group

    def __call__(self, h: int) -> int:
        return self.images[self.source.position[h]]

    def restrict(self, K: Subgroup) -> "PartialHom":
        return PartialHom(K, self.target, tuple(self(k) for k in K.elements))

    def conjugate(self, g: int, s: int) -> "PartialHom":
        """The partial hom whose graph is the (g, s)-conjugate of this one's graph."""
        G, T = self.group, self.target
        source = self.source.conjugate(g)
        images = tuple(T.conjugate(s, self(G.conjugate(G.inv(g), h))) for h in source.elements)
        return PartialHom(source, T, images)


def homomorphisms(H: Subgroup, target: FiniteGroup) -> List[PartialHom]:
    """
    All homomorphisms H -> target, found by choosing generator images and
    propagating them along the Cayley graph of H.
    """
    G = H.group
    gens = H.generators
    candidates = [[t for t in target.elements if G.element_order(g) % target.element_order(t) == 0]
                  for g in gens]
    budget = get_setting("ENUMERATION_BOUND")
    total = 1
    for c in candidates:
        total *= len(c)
    if total > budget:
        raise BoundExceeded(f"{total} generator assignments exceed ENUMERATION_BOUND", bound="ENUMERATION_BOUND")
    result = []
    for choice in product(*candidates):
        assignment = {0: 0}
        frontier = [0]
        consistent = True
        while frontier and consistent:
            nxt = []
            for x in frontier:
                for g, t in zip(gens, choice):
                    y = G.op(x, g)
                    value = target.op(assignment[x], t)
                    if y in assignment:
                        if assignment[y] != value:
                            consistent = False
                            break
                    else:
                        assignment[y] = value
                        nxt.append(y)
                if not consistent:
                    break
            frontier = nxt
        if consistent:
            result.append(PartialHom(H, target, tuple(assignment[h] for h in H.elements)))
    return result


# --- Graph subgroups ---
@dataclass(frozen=True)
class GraphSubgroup:
    """A subgroup of G x Sigma meeting 1 x Sigma trivially."""

    ambient: FiniteGroup = field(repr=False)
    elements: Tuple[int, ...]

    def __post_init__(self):
        if self.ambient.factors is None:
            raise DomainError("graph subgroups live in a direct product", invariant="graph")
        for x in self.elements:
            g, s = self.ambient.split(x)
            if g == 0 and s != 0:
                raise DomainError("subgroup meets 1 x Sigma non-trivially", invariant="graph")

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def subgroup(self) -> Subgroup:
        return Subgroup(self.ambient, self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.subgroup

    def partial_hom(self) -> PartialHom:
        return partial_hom_of(self)


def is_graph(H: Subgroup) -> bool:
    ambient = H.group
    return all(not (g == 0 and s != 0) for g, s in map(ambient.split, H.elements))


def graph_of(phi: PartialHom) -> GraphSubgroup:
    ambient = direct_product(phi.group, phi.target)
    return GraphSubgroup(ambient, tuple(sorted(ambient.pair(h, phi(h)) for h in phi.source.elements)))


def partial_hom_of(gamma: Union[GraphSubgroup, Subgroup]) -> PartialHom:
    ambient = gamma.group if isinstance(gamma, Subgroup) else gamma.ambient
    if isinstance(gamma, Subgroup):
        if ambient.factors is None or not is_graph(gamma):
            raise DomainError("subgroup meets 1 x Sigma non-trivially", invariant="graph")
    G, target = ambient.factors
    pairs = sorted(ambient.split(x) for x in gamma.elements)
    source = Subgroup(G, tuple(g for g, _ in pairs))
    return PartialHom(source, target, tuple(s for _, s in pairs))


def partial_hom_roundtrip(x: Union[GraphSubgroup, PartialHom, Subgroup]) -> Union[GraphSubgroup, PartialHom]:
    """Graph subgroup -> partial homomorphism and back."""
    if isinstance(x, PartialHom):
        return graph_of(x)
    return partial_hom_of(x)


@memoize
def graph_subgroups_in(G: FiniteGroup, target: FiniteGroup) -> Tuple[Tuple[GraphSubgroup, PartialHom], ...]:
    """All graph subgroups of G x target with their partial homomorphisms."""
    budget = get_setting("ENUMERATION_BOUND")
    if G.order * target.order > budget:
        raise BoundExceeded(f"|G x Sigma| = {G.order * target.order} exceeds ENUMERATION_BOUND",
                            bound="ENUMERATION_BOUND")
    pairs = [(graph_of(phi), phi) for H in subgroups(G) for phi in homomorphisms(H, target)]
    pairs.sort(key=lambda pair: (pair[0].order, pair[0].elements))
    logger.debug("%d graph subgroups in %r x %r", len(pairs), G, target)
    return tuple(pairs)


def graph_subgroups(G: FiniteGroup, n: int) -> Tuple[Tuple[GraphSubgroup, PartialHom], ...]:
    return graph_subgroups_in(G, symmetric(n))


# --- Group specs ---
def _named(name: str) -> FiniteGroup:
    name = name.strip().lower()
    if name in ("trivial", "cyclic-1"):
        return cyclic(1)
    if name == "klein-4":
        return klein4()
    if name == "quaternion-8":
        return quaternion8()
    for prefix, constructor in (("cyclic-", cyclic), ("symmetric-", symmetric)):
        if name.startswith(prefix):
            try:
                n = int(name[len(prefix):])
            except ValueError:
                break
            return constructor(n)
    raise ParseError(f"unknown group name {name!r}; known: {', '.join(NAMED_GROUPS)}", field="name")


def _structured_table(spec: Dict[str, Any]) -> FiniteGroup:
    """A table spec carrying points or factors; the table is taken as is, identity first."""
    try:
        table = tuple(tuple(int(x) for x in row) for row in spec["table"])
        points = None if spec.get("points") is None else tuple(tuple(int(i) for i in p) for p in spec["points"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"table entries must be integers: {exc}", field="table") from exc
    factors = None
    if spec.get("factors") is not None:
        factors = tuple(make_group(f) for f in spec["factors"])
        if len(factors) != 2 or factors[0].order * factors[1].order != len(table):
            raise DomainError("factors do not multiply to the table", invariant="factors")
    if points is not None and len(points) != len(table):
        raise DomainError("one point permutation per element is needed", invariant="points")
    return FiniteGroup(table, spec.get("name", ""), points=points, factors=factors).validate()


def make_group(spec: GroupSpec) -> FiniteGroup:
    """
    Builds a group from a name or a JSON group spec.

    Args:
        spec: A named group ("cyclic-3", "quaternion-8", ...) or a dict with
            "kind" one of table, perms, named, product, wreath.

    Returns:
        The validated FiniteGroup.
    """
    if isinstance(spec, FiniteGroup):
        return spec
    if isinstance(spec, str):
        return _named(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ParseError("group spec must be a name or an object with a 'kind'", field="group")
    kind = spec["kind"]
    try:
        if kind == "named":
            return _named(spec["name"])
        if kind == "table" and ("points" in spec or "factors" in spec):
            return _structured_table(spec)
        if kind == "table":
            return from_table(spec["table"], spec.get("name", ""))
        if kind == "perms":
            generators = [tuple(int(i) - 1 for i in g) for g in spec["generators"]]
            degree = spec.get("degree")
            return from_permutations(generators, degree, spec.get("name", ""))
        if kind == "product":
            left, right = (make_group(f) for f in spec["factors"])
            return direct_product(left, right, spec.get("name", ""))
        if kind == "wreath":
            return wreath(int(spec["n"]), make_group(spec["group"])).group
    except KeyError as exc:
        raise ParseError(f"group spec of kind {kind!r} lacks field {exc}", field=str(exc)) from exc
    raise ParseError(f"unknown group spec kind {kind!r}", field="kind")


def describe_group(group: FiniteGroup) -> Dict[str, Any]:
    return {"name": group.name, "order": group.order}
