# genop/sequences.py
"""
G-symmetric sequences of finite sets and the functors relating them.

A ``GSymSeq`` is a presheaf on G-corollas: a finite set X(C) of hashable
elements for every G-corolla C, and a restriction X(C) -> X(C') along every
quotient C' -> C. Values are computed on demand for any concrete corolla, so
isomorphic corollas carry isomorphic values. An ``EqSymSeq`` is the
classical notion: finite G x Sigma_n-sets Y(n). The functors iota_!, iota^*
and iota_* pass between the two; gamma_! and gamma^* restrict to a sieve.
"""
import logging
from abc import ABC, abstractmethod
from itertools import permutations
from typing import Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import pandas as pd

from .conf import get_setting
from .exceptions import BoundExceeded, DomainError
from .families import CorollaFamily
from .groups import FiniteGroup, direct_product, symmetric
from .gtrees import (
    GTree,
    GTreeMap,
    MapKind,
    class_corolla,
    corolla_class_key,
    corolla_classes,
    corolla_hom,
    free_corolla,
    quotients,
)
from .trees import Tree
from .utils import Permutation, compose, identity, invert

logger = logging.getLogger(__name__)

# --- Type aliases ---
Element = Hashable
ClassKey = Tuple[int, Tuple[int, ...]]


# --- Ordering of elements ---
def order_key(x: Element):
    """Total order on elements: ints, strings, tuples and tree terms may be mixed."""
    if hasattr(x, "order_key"):
        return 3, x.order_key()
    if isinstance(x, tuple):
        return 2, tuple(order_key(e) for e in x)
    if isinstance(x, str):
        return 1, x
    if isinstance(x, int):
        return 0, x
    raise DomainError(f"unsupported element {x!r}", invariant="hashable element")


def sorted_elements(xs: Iterable[Element]) -> Tuple[Element, ...]:
    return tuple(sorted(set(xs), key=order_key))


# --- Corolla helpers ---
def leaf_permutation(C: GTree, g: int, x: int) -> Permutation:
    """How g carries the leaves of component x onto those of component gx."""
    return C.component_iso(g, x)[:C.arity]


def coset_transversal(C: GTree) -> Tuple[int, ...]:
    """For each component x, the smallest g with g . 0 = x."""
    reps: List[Optional[int]] = [None] * len(C.components)
    for g in C.group.elements:
        x = C.orbit(g, 0)
        if reps[x] is None:
            reps[x] = g
    return tuple(reps)


def orbit_quotient(C: GTree, x: int) -> GTreeMap:
    """The quotient G . C_a -> C carrying the component of k onto component kx."""
    G, a = C.group, C.arity
    F = free_corolla(G, a)
    edges = [0] * F.size
    for k in G.elements:
        comp, y = F.orbit(k, 0), C.orbit(k, x)
        sigma = leaf_permutation(C, k, x)
        for i in range(a):
            edges[F.offsets[comp] + i] = C.offsets[y] + sigma[i]
        edges[F.offsets[comp] + a] = C.offsets[y] + a
    return GTreeMap(F, C, tuple(edges), MapKind.QUOTIENT)


def free_automorphism(G: FiniteGroup, n: int, g: int, sigma: Sequence[int]) -> GTreeMap:
    """
    The automorphism of G . C_n restricting along which realizes (g, sigma):
    the component of k goes to the component of kg and leaf i to sigma^-1(i).
    """
    F = free_corolla(G, n)
    inverse = invert(sigma)
    edges = [0] * F.size
    for k in G.elements:
        src, dst = F.offsets[F.orbit(k, 0)], F.offsets[F.orbit(G.op(k, g), 0)]
        for i in range(n):
            edges[src + i] = dst + inverse[i]
        edges[src + n] = dst + n
    return GTreeMap(F, F, tuple(edges), MapKind.QUOTIENT)


def inverse_map(q: GTreeMap) -> GTreeMap:
    return GTreeMap(q.target, q.source, invert(q.edges), q.kind)


def class_key(C: GTree) -> ClassKey:
    return corolla_class_key(C)


def corolla_domain(G: FiniteGroup, bound: int, arities: Optional[Iterable[int]] = None) -> Tuple[GTree, ...]:
    """Canonical G-corollas of the given arities, all arities up to ``bound`` by default."""
    wanted = range(bound + 1) if arities is None else sorted(n for n in arities if n <= bound)
    return tuple(C for n in wanted for C in corolla_classes(G, n))


# --- G-symmetric sequences ---
class GSymSeq(ABC):
    """A presheaf of finite sets on the G-corollas of arity at most ``bound``."""

    def __init__(self, group: FiniteGroup, bound: Optional[int] = None, name: str = ""):
        self.group = group
        self.bound = get_setting("ARITY_BOUND") if bound is None else bound
        self.name = name or type(self).__name__

    def __repr__(self):
        return f"{self.name}[{self.group.name}, <= {self.bound}]"

    def check_corolla(self, C: GTree):
        if C.group != self.group:
            raise DomainError(f"{self.name} lives over {self.group.name}", invariant="group")
        if not C.is_corolla:
            raise DomainError(f"{C!r} is not a G-corolla", invariant="corolla")
        if C.arity > self.bound:
            raise BoundExceeded(f"{self.name} is only defined up to arity {self.bound}", bound="ARITY_BOUND")

    @abstractmethod
    def values(self, C: GTree) -> Tuple[Element, ...]:
        """X(C) in canonical order."""

    @abstractmethod
    def restrict(self, x: Element, q: GTreeMap) -> Element:
        """The image of x in X(q.source) for a quotient q of G-corollas."""

    def supports(self, n: int) -> bool:
        """False only when X vanishes at every corolla of arity n."""
        return n <= self.bound

    def contains(self, C: GTree, x: Element) -> bool:
        return x in set(self.values(C))

    def table(self) -> pd.DataFrame:
        """Sizes of X at the canonical corollas."""
        rows = []
        for C in corolla_domain(self.group, self.bound):
            rows.append({
                "arity": C.arity,
                "stabilizer": C.stabilizer(0).elements,
                "images": corolla_hom(C).images,
                "size": len(self.values(C)),
            })
        return pd.DataFrame(rows, columns=["arity", "stabilizer", "images", "size"])


class EmptySeq(GSymSeq):
    def values(self, C):
        self.check_corolla(C)
        return ()

    def restrict(self, x, q):
        raise DomainError("the empty sequence has no elements", invariant="element")

    def supports(self, n):
        return False


class DeltaSeq(GSymSeq):
    """delta_F: a point at the corollas of the family F, empty elsewhere."""

    def __init__(self, family: CorollaFamily, name: str = ""):
        super().__init__(family.group, family.bound, name or f"delta[{family.name}]")
        self.family = family

    def values(self, C):
        self.check_corolla(C)
        return ((),) if self.family.contains_hom(corolla_hom(C)) else ()

    def restrict(self, x, q):
        return ()

    def supports(self, n):
        return n <= self.bound and len(self.family[n]) > 0


class FreePresheaf(GSymSeq):
    """
    The free presheaf L A on generators A at canonical corollas: elements over
    C are triples (key, f, a) with a a generator at the class ``key`` and f
    the edges of a quotient C -> class_corolla(key).
    """

    def __init__(self, group: FiniteGroup, generators: Mapping[ClassKey, Sequence[Element]],
                 bound: Optional[int] = None, name: str = ""):
        gens: Dict[ClassKey, Tuple[Element, ...]] = {}
        for key, labels in generators.items():
            D = class_corolla(group, key)
            gens[class_key(D)] = sorted_elements(list(gens.get(class_key(D), ())) + list(labels))
        top = max((key[0] for key in gens), default=0)
        super().__init__(group, top if bound is None else bound, name)
        if top > self.bound:
            raise BoundExceeded(f"generator of arity {top} beyond the bound {self.bound}", bound="ARITY_BOUND")
        self.generators = gens
        self._cache: Dict[GTree, Tuple[Element, ...]] = {}

    def values(self, C):
        self.check_corolla(C)
        if C not in self._cache:
            found = []
            for key, labels in self.generators.items():
                if key[0] != C.arity or not labels:
                    continue
                for f in quotients(C, class_corolla(self.group, key)):
                    found.extend((key, f.edges, a) for a in labels)
            self._cache[C] = sorted_elements(found)
        return self._cache[C]

    def restrict(self, x, q):
        key, edges, a = x
        return key, tuple(edges[q.edges[e]] for e in range(q.source.size)), a

    def supports(self, n):
        return any(key[0] == n and labels for key, labels in self.generators.items())


class SumSeq(GSymSeq):
    """Coproduct: elements are pairs (i, x) with x an element of the i-th summand."""

    def __init__(self, parts: Sequence[GSymSeq], name: str = ""):
        if not parts or len({p.group for p in parts}) != 1:
            raise DomainError("summands must share one group", invariant="group")
        super().__init__(parts[0].group, min(p.bound for p in parts),
                         name or " + ".join(p.name for p in parts))
        self.parts = tuple(parts)

    def values(self, C):
        self.check_corolla(C)
        return tuple((i, x) for i, p in enumerate(self.parts) for x in p.values(C))

    def restrict(self, x, q):
        i, y = x
        return i, self.parts[i].restrict(y, q)

    def supports(self, n):
        return any(p.supports(n) for p in self.parts)


class Restricted(GSymSeq):
    """
    X seen on the sieve of a corolla family. Strict instances model gamma^* X
    and refuse corollas outside the family; the others model gamma_! gamma^* X,
    empty outside the family.
    """

    def __init__(self, inner: GSymSeq, family: CorollaFamily, strict: bool):
        bound = min(inner.bound, family.bound)
        tag = "restrict" if strict else "extend"
        super().__init__(inner.group, bound, f"{tag}[{inner.name}, {family.name}]")
        self.inner, self.family, self.strict = inner, family, strict

    def values(self, C):
        self.check_corolla(C)
        if self.family.contains_hom(corolla_hom(C)):
            return self.inner.values(C)
        if self.strict:
            raise DomainError(f"{C!r} is outside the sieve of {self.family.name}", invariant="sieve")
        return ()

    def restrict(self, x, q):
        return self.inner.restrict(x, q)

    def supports(self, n):
        return n <= self.bound and len(self.family[n]) > 0 and self.inner.supports(n)


def sieve_restrict(X: GSymSeq, family: CorollaFamily) -> Restricted:
    """gamma^* X."""
    return Restricted(X, family, strict=True)


def sieve_extend(X: Restricted) -> Restricted:
    """gamma_! of a sequence on the sieve: extension by the empty set."""
    return Restricted(X.inner, X.family, strict=False)


# --- Equivariant symmetric sequences ---
class EqSymSeq(ABC):
    """Finite G x Sigma_n-sets Y(n) for n up to ``bound``, acting on the left."""

    def __init__(self, group: FiniteGroup, bound: Optional[int] = None, name: str = ""):
        self.group = group
        self.bound = get_setting("ARITY_BOUND") if bound is None else bound
        self.name = name or type(self).__name__

    def __repr__(self):
        return f"{self.name}[{self.group.name}, <= {self.bound}]"

    def check_arity(self, n: int):
        if n > self.bound:
            raise BoundExceeded(f"{self.name} is only defined up to arity {self.bound}", bound="ARITY_BOUND")

    @abstractmethod
    def elements(self, n: int) -> Tuple[Element, ...]:
        pass

    @abstractmethod
    def act(self, g: int, sigma: Permutation, y: Element) -> Element:
        pass

    def action_failures(self, n: int) -> List[Tuple[int, int, Element]]:
        """Pairs of G x Sigma_n elements (by index in the product) violating the action laws."""
        S = symmetric(n)
        P = direct_product(self.group, S)
        failures = []
        for y in self.elements(n):
            if self.act(0, identity(n), y) != y:
                failures.append((0, 0, y))
        for a in P.elements:
            g, s = P.split(a)
            for b in P.elements:
                h, t = P.split(b)
                for y in self.elements(n):
                    left = self.act(g, S.points[s], self.act(h, S.points[t], y))
                    if left != self.act(self.group.op(g, h), compose(S.points[s], S.points[t]), y):
                        failures.append((a, b, y))
        return failures


class EqOperad(EqSymSeq):
    """An operad in G-sets: composition along planar trees, equivariant for G and the symmetric groups."""

    @abstractmethod
    def compose_tree(self, tree: Tree, labels: Mapping[int, Element]) -> Element:
        """Composite of the vertex labels, leaves numbered in planar order."""

    @abstractmethod
    def unit(self) -> Element:
        pass


class SingletonEq(EqOperad):
    """One point in every arity: the commutative operad."""

    def elements(self, n):
        self.check_arity(n)
        return ((),)

    def act(self, g, sigma, y):
        return ()

    def compose_tree(self, tree, labels):
        return ()

    def unit(self):
        return ()


class AssociativeEq(EqOperad):
    """Orderings of the leaves, listed left to right; G acts trivially."""

    def elements(self, n):
        self.check_arity(n)
        return tuple(permutations(range(n)))

    def act(self, g, sigma, y):
        return tuple(sigma[i] for i in y)

    def compose_tree(self, tree, labels):
        position = {l: i for i, l in enumerate(tree.leaves)}

        def word(e: int) -> Tuple[int, ...]:
            kids = tree.children[e]
            if kids is None:
                return (position[e],)
            return tuple(i for j in labels[e] for i in word(kids[j]))

        return word(tree.root)

    def unit(self):
        return (0,)


class FreeOrbitEq(EqSymSeq):
    """The free G x Sigma_n-set on one point in each of the given arities."""

    def __init__(self, group: FiniteGroup, arities: Iterable[int], bound: Optional[int] = None):
        super().__init__(group, bound, "free-orbit")
        self.arities = frozenset(arities)

    def elements(self, n):
        self.check_arity(n)
        if n not in self.arities:
            return ()
        return tuple((g, p) for g in self.group.elements for p in permutations(range(n)))

    def act(self, g, sigma, y):
        h, p = y
        return self.group.op(g, h), compose(sigma, p)


class MarkedLeafEq(EqSymSeq):
    """A marked leaf in every positive arity."""

    def elements(self, n):
        self.check_arity(n)
        return tuple((i,) for i in range(n))

    def act(self, g, sigma, y):
        return (sigma[y[0]],)


# --- iota functors ---
def twisted_diagonal(Y: EqSymSeq, C: GTree, y0: Element) -> Tuple[Element, ...]:
    """The tuple (g . y0) over the components g . 0 of C."""
    return tuple(Y.act(r, leaf_permutation(C, r, 0), y0) for r in coset_transversal(C))


class IotaStar(GSymSeq):
    """iota_* Y: at C, the G-fixed tuples of elements of Y(a) indexed by the components of C."""

    def __init__(self, Y: EqSymSeq):
        super().__init__(Y.group, Y.bound, f"iota_*[{Y.name}]")
        self.Y = Y

    def values(self, C):
        self.check_corolla(C)
        H = C.stabilizer(0)
        found = []
        for y0 in self.Y.elements(C.arity):
            if all(self.Y.act(h, leaf_permutation(C, h, 0), y0) == y0 for h in H.generators):
                found.append(twisted_diagonal(self.Y, C, y0))
        return sorted_elements(found)

    def restrict(self, y, q):
        C = q.source
        a = C.arity
        return tuple(self.Y.act(0, invert(q.component_map(x).edges[:a]), y[q.orbit_map[x]])
                     for x in range(len(C.components)))

    def supports(self, n):
        return n <= self.bound and len(self.Y.elements(n)) > 0


class IotaShriek(IotaStar):
    """iota_! Y: Y(a) at free corollas, presented by twisted diagonals, empty elsewhere."""

    def __init__(self, Y: EqSymSeq):
        super().__init__(Y)
        self.name = f"iota_![{Y.name}]"

    def values(self, C):
        self.check_corolla(C)
        if C.stabilizer(0).order != 1:
            return ()
        return super().values(C)


class Underlying(EqSymSeq):
    """iota^* X: the values at the free corollas G . C_n with their G x Sigma_n-action."""

    def __init__(self, X: GSymSeq):
        super().__init__(X.group, X.bound, f"iota^*[{X.name}]")
        self.X = X

    def elements(self, n):
        self.check_arity(n)
        return self.X.values(free_corolla(self.group, n))

    def act(self, g, sigma, y):
        return self.X.restrict(y, free_automorphism(self.group, len(sigma), g, sigma))


# --- Units and counits ---
def shriek_unit(Y: EqSymSeq, n: int, y: Element) -> Element:
    """eta_!: Y(n) -> (iota^* iota_! Y)(n)."""
    return twisted_diagonal(Y, free_corolla(Y.group, n), y)


def shriek_counit(X: GSymSeq, C: GTree, z: Tuple[Element, ...]) -> Element:
    """epsilon_!: (iota_! iota^* X)(C) -> X(C) at a free corolla C."""
    return X.restrict(z[0], inverse_map(orbit_quotient(C, 0)))


def star_unit(X: GSymSeq, C: GTree, x: Element) -> Tuple[Element, ...]:
    """eta_*: X(C) -> (iota_* iota^* X)(C)."""
    return tuple(X.restrict(x, orbit_quotient(C, j)) for j in range(len(C.components)))


def star_counit(z: Tuple[Element, ...]) -> Element:
    """epsilon_*: (iota^* iota_* Y)(n) -> Y(n), the entry of the identity component."""
    return z[0]


def beta(z: Tuple[Element, ...]) -> Tuple[Element, ...]:
    """beta: iota_! Y -> iota_* Y, the identity on twisted diagonals."""
    return z


class AdjunctionReport(NamedTuple):
    shriek_triangles: bool
    star_triangles: bool
    beta_square: bool
    coreflexive: bool
    failures: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.shriek_triangles and self.star_triangles and self.beta_square and self.coreflexive


def adjunction_report(Y: EqSymSeq, X: Optional[GSymSeq] = None, bound: Optional[int] = None) -> AdjunctionReport:
    """
    Checks both triangle identities of iota_! -| iota^* -| iota_*, the two
    triangles defining beta, and that eta_! is a bijection, on Y and X.

    Args:
        Y: Equivariant sequence feeding iota_! and iota_*.
        X: G-symmetric sequence feeding iota^*; iota_* Y by default.
        bound: Largest arity checked.

    Returns:
        An AdjunctionReport listing every failing instance.
    """
    G = Y.group
    X = IotaStar(Y) if X is None else X
    bound = min(Y.bound, X.bound) if bound is None else bound
    shriek, star = IotaShriek(Y), IotaStar(Y)
    failures: List[str] = []

    for n in range(bound + 1):
        F = free_corolla(G, n)

        # iota_! -| iota^*
        for y in Y.elements(n):
            z = shriek_unit(Y, n, y)
            if shriek_counit(shriek, F, tuple(shriek_unit(Y, n, w) for w in z)) != z:
                failures.append(f"shriek triangle on iota_! Y at arity {n}")
            if star_unit(shriek, F, z) != tuple(shriek_unit(Y, n, w) for w in beta(z)):
                failures.append(f"beta lower triangle at arity {n}")
        for x in X.values(F):
            if shriek_counit(X, F, shriek_unit(Underlying(X), n, x)) != x:
                failures.append(f"shriek triangle on iota^* X at arity {n}")
            if star_counit(star_unit(X, F, x)) != x:
                failures.append(f"star triangle on iota^* X at arity {n}")
        image = [shriek_unit(Y, n, y) for y in Y.elements(n)]
        if len(set(image)) != len(image) or set(image) != set(shriek.values(F)):
            failures.append(f"eta_! is not a bijection at arity {n}")

        # iota^* -| iota_*
        for w in IotaShriek(Underlying(star)).values(F):
            if shriek_counit(star, F, w) != beta(tuple(star_counit(v) for v in w)):
                failures.append(f"beta upper triangle at arity {n}")
        for C in corolla_classes(G, n):
            for z in star.values(C):
                if tuple(star_counit(v) for v in star_unit(star, C, z)) != z:
                    failures.append(f"star triangle on iota_* Y at {C!r}")

    def clean(prefix: str) -> bool:
        return not any(f.startswith(prefix) for f in failures)

    if failures:
        logger.warning("adjunction check on %r found %d failures", Y, len(failures))
    return AdjunctionReport(clean("shriek triangle"), clean("star triangle"), clean("beta"),
                            clean("eta_!"), tuple(failures))
