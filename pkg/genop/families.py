# genop/families.py
"""
Families of subgroups: sets closed under conjugation and passing to subgroups.

A Family lives over one ambient group. A CorollaFamily is a sequence of
families of graph subgroups F_n <= G x Sigma_n, one per arity up to a bound,
i.e. a sieve of G-corollas.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from .conf import get_setting
from .exceptions import BoundExceeded, DomainError
from .groups import (
    FiniteGroup,
    GraphSubgroup,
    Homomorphism,
    PartialHom,
    Subgroup,
    conjugacy_class,
    direct_product,
    graph_of,
    graph_subgroups,
    graph_subgroups_in,
    make_subgroup,
    partial_hom_of,
    subgroup_key,
    subgroups,
    subgroups_of,
    symmetric,
    wreath,
)
from .trees import Tree, automorphism_group, isomorphisms
from .utils import Permutation, compose, invert

logger = logging.getLogger(__name__)

# --- Type aliases ---
SubgroupLike = Union[Subgroup, GraphSubgroup, Sequence[int]]
TransportMode = str


def _elements(H: SubgroupLike) -> Tuple[int, ...]:
    return tuple(sorted(getattr(H, "elements", H)))


@dataclass(frozen=True)
class Family:
    ambient: FiniteGroup = field(repr=False)
    members: Tuple[Subgroup, ...]

    @classmethod
    def of(cls, ambient: FiniteGroup, members: Iterable[Subgroup]) -> "Family":
        unique = {Subgroup(ambient, _elements(H)) for H in members}
        return cls(ambient, tuple(sorted(unique, key=subgroup_key)))

    @cached_property
    def _keys(self) -> frozenset:
        return frozenset(H.elements for H in self.members)

    def __contains__(self, H: SubgroupLike) -> bool:
        return _elements(H) in self._keys

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @cached_property
    def classes(self) -> Tuple[Subgroup, ...]:
        """Minimal member of each conjugacy class."""
        return tuple(sorted({conjugacy_class(H)[0] for H in self.members}, key=subgroup_key))

    def is_closed(self) -> bool:
        return all(
            K in self
            for H in self.members
            for K in conjugacy_class(H) + subgroups_of(H)
        )

    def issubset(self, other: "Family") -> bool:
        return self._keys <= other._keys

    def table(self) -> pd.DataFrame:
        """One row per conjugacy class of members."""
        rows = [
            {"order": H.order, "representative": list(H.elements), "class_size": len(conjugacy_class(H))}
            for H in self.classes
        ]
        return pd.DataFrame(rows, columns=["order", "representative", "class_size"])


def empty_family(ambient: FiniteGroup) -> Family:
    return Family(ambient, ())


def family_closure(G: FiniteGroup, seeds: Iterable[SubgroupLike]) -> Family:
    """
    The smallest family of G containing ``seeds``.

    Args:
        G: Ambient group.
        seeds: Subgroups of G, as Subgroup objects or element lists.

    Returns:
        The closure under conjugation and subgroups.
    """
    found = set()
    for seed in seeds:
        H = make_subgroup(G, _elements(seed))
        if H in found:
            continue
        for C in conjugacy_class(H):
            found.update(subgroups_of(C))
    return Family.of(G, found)


# --- Transport along homomorphisms ---
def family_transport(mode: TransportMode, phi: Homomorphism, F: Family) -> Family:
    """
    Moves a family along phi: source -> target.

    Args:
        mode: "pullback" (F over the target), "pushforward" or "coinduce"
            (F over the source).
        phi: A verified homomorphism.
        F: The family to transport.

    Returns:
        pullback: {H <= source : phi(H) in F};
        pushforward: the closure of the images phi(H), H in F;
        coinduce: {K <= target : phi^-1(gKg^-1) in F for every g}.
    """
    if mode == "pullback":
        if F.ambient != phi.target:
            raise DomainError("pullback needs a family over the target", invariant="ambient group")
        return Family.of(phi.source, (H for H in subgroups(phi.source) if phi.image(H) in F))
    if F.ambient != phi.source:
        raise DomainError(f"{mode} needs a family over the source", invariant="ambient group")
    if mode == "pushforward":
        return family_closure(phi.target, (phi.image(H) for H in F))
    if mode == "coinduce":
        target = phi.target
        return Family.of(target, (
            K for K in subgroups(target)
            if all(phi.preimage(K.conjugate(g)) in F for g in target.elements)
        ))
    raise DomainError(f"unknown transport mode {mode!r}", invariant="transport mode")


# --- External intersections ---
def _split3(ambient: FiniteGroup, x: int):
    g, rest = ambient.split(x)
    return g, ambient.factors[1].split(rest)


def external_intersection(F: Family, F_bar: Family, diagonal: bool = False) -> Family:
    """
    Subgroups whose projections land in F and F_bar.

    In diagonal mode both families are graph families over G x Sigma and
    G x Sigma_bar for one group G, and the result lives over
    G x (Sigma x Sigma_bar) with G acting diagonally.
    """
    if not diagonal:
        P = direct_product(F.ambient, F_bar.ambient)
        left, right = (Homomorphism(P, P.factors[side], tuple(P.split(x)[side] for x in P.elements))
                       for side in (0, 1))
        return Family.of(P, (K for K in subgroups(P) if left.image(K) in F and right.image(K) in F_bar))
    A, A_bar = F.ambient, F_bar.ambient
    if A.factors is None or A_bar.factors is None or A.factors[0] != A_bar.factors[0]:
        raise DomainError("diagonal intersection needs graph families over one group", invariant="common group")
    G, sigma, sigma_bar = A.factors[0], A.factors[1], A_bar.factors[1]
    P = direct_product(G, direct_product(sigma, sigma_bar))

    def project(x: int, side: int) -> int:
        g, (s, t) = _split3(P, x)
        return (A if side == 0 else A_bar).pair(g, s if side == 0 else t)

    left = Homomorphism(P, A, tuple(project(x, 0) for x in P.elements))
    right = Homomorphism(P, A_bar, tuple(project(x, 1) for x in P.elements))
    return Family.of(P, (K for K in subgroups(P) if left.image(K) in F and right.image(K) in F_bar))


# --- Semidirect powers ---
def semidirect_contains(F: Family, n: int, perms: Iterable[Permutation],
                        representation: Sequence[Permutation]) -> bool:
    """
    Membership of a subgroup of Sigma_n wr G in the n-th semidirect power.

    Args:
        F: Family over G.
        n: Number of blocks.
        perms: The subgroup, as permutations of n * d points in block form.
        representation: The permutation representation of G on d points.

    Returns:
        True iff for every block e the coordinates at e of the elements
        fixing e form a member of F.
    """
    d = len(representation[0])
    index = {p: g for g, p in enumerate(representation)}
    perms = list(perms)
    for e in range(n):
        images = set()
        for p in perms:
            if p[e * d] // d == e:
                images.add(index[tuple(p[e * d + a] - e * d for a in range(d))])
        if tuple(sorted(images)) not in F:
            return False
    return True


def _transposition(n: int, a: int, b: int) -> Permutation:
    p = list(range(n))
    p[a], p[b] = b, a
    return tuple(p)


def _coinduced_verdict(F: Family, W, K: Subgroup, e: int) -> bool:
    # K belongs to the coinduction from the stabilizer of e iff every
    # conjugate by a coset representative meets the stabilizer in F.
    group = W.group
    for other in range(W.n):
        c = W.element(_transposition(W.n, e, other), (0,) * W.n)
        conjugate = K.conjugate(c)
        local = {W.coordinate(w, e) for w in conjugate.elements if W.top(w)[e] == e}
        if tuple(sorted(local)) not in F:
            return False
    return True


def semidirect_power(F: Family, n: int, g_variant: bool = False) -> Family:
    """
    The n-th semidirect power of F.

    Args:
        F: A family over G, or (g_variant) a graph family over G x Sigma.
        n: Number of blocks, n >= 1.
        g_variant: Use the graph-family variant over G x (Sigma_n wr Sigma).

    Returns:
        The family over Sigma_n wr G, or over G x (Sigma_n wr Sigma).
    """
    if n < 1:
        raise DomainError("semidirect powers need n >= 1", invariant="positive power")
    if g_variant:
        return _graph_semidirect_power(F, n)
    W = wreath(n, F.ambient)
    members = []
    for K in subgroups(W.group):
        verdict = semidirect_contains(F, n, (W.group.points[w] for w in K.elements), W.representation)
        for e in range(n):
            if _coinduced_verdict(F, W, K, e) != verdict:
                raise DomainError(f"semidirect power verdict for {list(K.elements)} depends on index {e}",
                                  invariant="index independence")
        if verdict:
            members.append(K)
    logger.debug("semidirect power %d of a %d-member family: %d members", n, len(F), len(members))
    return Family.of(W.group, members)


def _graph_semidirect_power(F: Family, n: int) -> Family:
    A = F.ambient
    if A.factors is None:
        raise DomainError("the graph variant needs a family over G x Sigma", invariant="graph family")
    G, sigma = A.factors
    W = wreath(n, sigma)
    P = direct_product(G, W.group)
    members = []
    for K in subgroups(P):
        ok = True
        for e in range(n):
            local = set()
            for x in K.elements:
                g, w = P.split(x)
                if W.top(w)[e] == e:
                    local.add(A.pair(g, W.coordinate(w, e)))
            if tuple(sorted(local)) not in F:
                ok = False
                break
        if ok:
            members.append(K)
    return Family.of(P, members)


# --- Corolla families ---
@dataclass(frozen=True)
class CorollaFamily:
    """Per-arity graph families F_0, ..., F_bound of G x Sigma_n."""

    group: FiniteGroup = field(repr=False)
    families: Tuple[Family, ...]
    name: str = field(default="", compare=False)

    @property
    def bound(self) -> int:
        return len(self.families) - 1

    def __getitem__(self, n: int) -> Family:
        if n > self.bound:
            raise BoundExceeded(f"arity {n} is beyond the family bound {self.bound}", bound="ARITY_BOUND")
        return self.families[n]

    def contains(self, n: int, gamma: SubgroupLike) -> bool:
        return gamma in self[n]

    def contains_hom(self, phi: PartialHom) -> bool:
        return graph_of(phi) in self[_arity_of(phi.target)]

    def contains_action(self, n: int, pairs: Iterable[Tuple[int, Permutation]]) -> bool:
        """Membership of the graph {(h, sigma_h)} given by explicit pairs."""
        A = direct_product(self.group, symmetric(n))
        index = symmetric(n).point_index
        return tuple(sorted(A.pair(h, index[tuple(s)]) for h, s in pairs)) in self[n]

    def without(self, n: int, gamma: SubgroupLike) -> "CorollaFamily":
        """Drops the class of gamma from F_n, together with every member containing a conjugate."""
        F = self[n]
        doomed = conjugacy_class(Subgroup(F.ambient, _elements(gamma)))
        kept = [H for H in F if not any(D.is_subgroup_of(H) for D in doomed)]
        families = list(self.families)
        families[n] = Family.of(F.ambient, kept)
        return CorollaFamily(self.group, tuple(families), self.name)

    def issubset(self, other: "CorollaFamily") -> bool:
        return all(a.issubset(b) for a, b in zip(self.families, other.families))

    def admissible_sets(self) -> pd.DataFrame:
        """Per arity, one row per admitted class: the source H and its action on {0..n-1}."""
        rows = []
        for n, F in enumerate(self.families):
            for gamma in F.classes:
                phi = partial_hom_of(gamma)
                perms = [phi.target.points[s] for s in phi.images]
                rows.append({
                    "arity": n,
                    "source": list(phi.source.elements),
                    "images": [list(p) for p in perms],
                    "orbits": _orbit_sizes(n, perms),
                })
        return pd.DataFrame(rows, columns=["arity", "source", "images", "orbits"])

    def table(self) -> pd.DataFrame:
        rows = [{"arity": n, "members": len(F), "classes": len(F.classes)} for n, F in enumerate(self.families)]
        return pd.DataFrame(rows, columns=["arity", "members", "classes"])


def _arity_of(sigma: FiniteGroup) -> int:
    return len(sigma.points[0]) if sigma.points else 0


def _orbit_sizes(n: int, perms: Sequence[Permutation]) -> List[int]:
    seen, sizes = set(), []
    for i in range(n):
        if i in seen:
            continue
        orbit, frontier = {i}, [i]
        while frontier:
            j = frontier.pop()
            for p in perms:
                if p[j] not in orbit:
                    orbit.add(p[j])
                    frontier.append(p[j])
        seen |= orbit
        sizes.append(len(orbit))
    return sorted(sizes)


def _default_bound(bound: Optional[int]) -> int:
    return get_setting("ARITY_BOUND") if bound is None else bound


def _per_arity(G: FiniteGroup, bound: int, keep, name: str) -> CorollaFamily:
    families = []
    for n in range(bound + 1):
        ambient = direct_product(G, symmetric(n))
        families.append(Family.of(ambient, (gamma.subgroup for gamma, phi in graph_subgroups(G, n)
                                            if keep(n, phi))))
    return CorollaFamily(G, tuple(families), name)


def complete_family(G: FiniteGroup, bound: Optional[int] = None) -> CorollaFamily:
    return _per_arity(G, _default_bound(bound), lambda n, phi: True, "complete")


def trivial_graph_family(G: FiniteGroup, bound: Optional[int] = None) -> CorollaFamily:
    """Graphs of trivial homomorphisms H -> Sigma_n: every H acting trivially."""
    return _per_arity(G, _default_bound(bound), lambda n, phi: all(s == 0 for s in phi.images), "trivial-graphs")


def free_family(G: FiniteGroup, bound: Optional[int] = None) -> CorollaFamily:
    return _per_arity(G, _default_bound(bound), lambda n, phi: phi.source.order == 1, "free")


def unary_family(G: FiniteGroup, bound: Optional[int] = None) -> CorollaFamily:
    return _per_arity(G, _default_bound(bound), lambda n, phi: n == 1, "unary-only")


def corolla_family_from_seeds(G: FiniteGroup, seeds: Mapping[int, Iterable[SubgroupLike]],
                              bound: Optional[int] = None, name: str = "seeded") -> CorollaFamily:
    """
    Per-arity closures of seed graph subgroups.

    Args:
        G: The group.
        seeds: Arity -> graph subgroups of G x Sigma_n (element lists in the
            product's indexing or Subgroup objects).
        bound: Arity bound; arities without seeds get the empty family.

    Returns:
        The CorollaFamily.
    """
    bound = _default_bound(bound)
    families = []
    for n in range(bound + 1):
        ambient = direct_product(G, symmetric(n))
        F = family_closure(ambient, seeds.get(n, ()))
        for H in F.classes:
            partial_hom_of(H)  # rejects non-graph seeds
        families.append(F)
    return CorollaFamily(G, tuple(families), name)


NAMED_FAMILIES = {
    "complete": complete_family,
    "trivial-graphs": trivial_graph_family,
    "free": free_family,
    "unary-only": unary_family,
}


def named_family(name: str, G: FiniteGroup, bound: Optional[int] = None) -> CorollaFamily:
    try:
        return NAMED_FAMILIES[name](G, bound)
    except KeyError:
        raise DomainError(f"unknown corolla family {name!r}; known: {', '.join(NAMED_FAMILIES)}",
                          invariant="family name") from None


# --- Tree families ---
def _vertex_action(tree: Tree, v: int, p: Permutation) -> Optional[Permutation]:
    kids = tree.children[v]
    if p[v] != v:
        return None
    position = {c: i for i, c in enumerate(kids)}
    return tuple(position[p[c]] for c in kids)


def _vertex_condition(F: CorollaFamily, tree: Tree, v: int, phi: PartialHom) -> bool:
    aut = phi.target
    pairs = []
    for h, s in zip(phi.source.elements, phi.images):
        sigma = _vertex_action(tree, v, aut.points[s])
        if sigma is not None:
            pairs.append((h, sigma))
    return F.contains_action(tree.arity(v), pairs)


def tree_family(F: CorollaFamily, tree: Tree, mode: str = "brute") -> Family:
    """
    The graph family F_T of G x Aut(T).

    Args:
        F: A corolla family.
        tree: The tree T.
        mode: "brute" tests every vertex directly; "recursive" pulls F_n back
            along the root and meets it with the graph semidirect powers of
            the subtree families, one per class of isomorphic root inputs.

    Returns:
        The family over G x Aut(T).
    """
    if mode == "brute":
        return _tree_family_brute(F, tree)
    if mode == "recursive":
        if tree.is_stick:
            raise DomainError("the recursive tree family needs a vertex", invariant="non-stick")
        return _tree_family_recursive(F, tree)
    raise DomainError(f"unknown tree family mode {mode!r}", invariant="tree family mode")


def _tree_family_brute(F: CorollaFamily, tree: Tree) -> Family:
    aut = automorphism_group(tree)
    ambient = direct_product(F.group, aut)
    members = [gamma.subgroup for gamma, phi in graph_subgroups_in(F.group, aut)
               if all(_vertex_condition(F, tree, v, phi) for v in tree.vertices)]
    return Family.of(ambient, members)


def _tree_family_recursive(F: CorollaFamily, tree: Tree) -> Family:
    # F_T is the root pullback of F_n met with the image of G x Aut(T) in the
    # diagonal intersection of the graph semidirect powers of the subtree
    # families, one power per isomorphism class of non-leaf root inputs.
    aut = automorphism_group(tree)
    ambient = direct_product(F.group, aut)
    G = F.group
    blocks = _input_classes(tree)
    combined: Optional[Family] = None
    for block in blocks:
        power = semidirect_power(_tree_family_recursive(F, block.rep), len(block.inputs), g_variant=True)
        combined = power if combined is None else external_intersection(combined, power, diagonal=True)
    members = []
    for gamma, phi in graph_subgroups_in(G, aut):
        if not _vertex_condition(F, tree, tree.root, phi):
            continue
        if combined is None or _above_root_image(phi, blocks, combined) in combined:
            members.append(gamma.subgroup)
    logger.debug("recursive tree family on %d edges: %d classes above the root, %d members",
                 len(tree), len(blocks), len(members))
    return Family.of(ambient, members)


@dataclass(frozen=True)
class _InputClass:
    """Isomorphic non-leaf root inputs with reference isomorphisms onto one representative."""

    inputs: Tuple[int, ...]
    starts: Tuple[int, ...]
    rep: Tree
    to_rep: Tuple[Permutation, ...]

    @cached_property
    def wreath(self):
        return wreath(len(self.inputs), automorphism_group(self.rep))


def _input_classes(tree: Tree) -> List[_InputClass]:
    grouped = {}
    for c in tree.children[tree.root]:
        if tree.children[c] is not None:
            grouped.setdefault(tree.shapes[c], []).append(c)
    blocks = []
    for inputs in grouped.values():
        subs = [tree.subtree(c) for c in inputs]
        rep = subs[0][0]
        to_rep = tuple(isomorphisms(sub, rep)[0] for sub, _ in subs)
        blocks.append(_InputClass(tuple(inputs), tuple(s for _, s in subs), rep, to_rep))
    return blocks


def _wreath_coordinates(block: _InputClass, p: Permutation) -> int:
    # p moves input a onto input top[a]; the coordinate at a is that move
    # read through the reference isomorphisms.
    sigma = block.wreath.base
    position = {c: a for a, c in enumerate(block.inputs)}
    top, coordinates = [], []
    for a, c in enumerate(block.inputs):
        b = position[p[c]]
        local = tuple(p[block.starts[a] + e] - block.starts[b] for e in block.rep.edges)
        coordinate = compose(block.to_rep[b], compose(local, invert(block.to_rep[a])))
        top.append(b)
        coordinates.append(sigma.point_index[coordinate])
    return block.wreath.element(top, coordinates)


def _above_root_image(phi: PartialHom, blocks: Sequence[_InputClass], combined: Family) -> Tuple[int, ...]:
    Q = combined.ambient
    nested = [Q.factors[1]]
    while len(nested) < len(blocks):
        nested.append(nested[-1].factors[0])
    nested.reverse()
    elements = []
    for h, s in zip(phi.source.elements, phi.images):
        p = phi.target.points[s]
        x = _wreath_coordinates(blocks[0], p)
        for level, block in zip(nested[1:], blocks[1:]):
            x = level.pair(x, _wreath_coordinates(block, p))
        elements.append(Q.pair(h, x))
    return tuple(sorted(elements))
