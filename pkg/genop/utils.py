# genop/utils.py
"""Small shared helpers: memoization, union-find and permutation arithmetic."""
from functools import wraps
from typing import Dict, Hashable, Iterable, Iterator, List, Sequence, Tuple

# --- Type aliases ---
Permutation = Tuple[int, ...]


def memoize(func):
    """Simple memoization decorator for function results"""
    cache_dict = {}

    @wraps(func)
    def wrapper(*args, **kwargs):
        # Arguments are immutable library values, so they key the cache directly
        key = (args, tuple(sorted(kwargs.items())))

        if key in cache_dict:
            return cache_dict[key]

        result = func(*args, **kwargs)
        cache_dict[key] = result
        return result

    wrapper.cache_clear = cache_dict.clear
    return wrapper


# --- Permutations ---
def compose(p: Sequence[int], q: Sequence[int]) -> Permutation:
    """Composite p after q, i.e. i -> p[q[i]]."""
    return tuple(p[i] for i in q)


def invert(p: Sequence[int]) -> Permutation:
    inverse = [0] * len(p)
    for i, image in enumerate(p):
        inverse[image] = i
    return tuple(inverse)


def identity(n: int) -> Permutation:
    return tuple(range(n))


def is_permutation(p: Sequence[int], n: int) -> bool:
    return len(p) == n and sorted(p) == list(range(n))


# --- Union-find ---
class UnionFind:
    def __init__(self, X: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        self.rank: Dict[Hashable, int] = {}
        self.size: Dict[Hashable, int] = {}
        for x in X:
            self.add(x)

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0
            self.size[x] = 1

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x
        self.size[x] += self.size[y]
        del self.rank[y]

    def reps(self):
        return set(self.rank)

    def classes(self) -> Dict[Hashable, List[Hashable]]:
        groups: Dict[Hashable, List[Hashable]] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return groups

    def __len__(self):
        return len(self.rank)

    def __iter__(self):
        return iter(self.reps())


# --- Set partitions ---
def set_partitions(items: Sequence) -> Iterator[List[Tuple]]:
    """All partitions of ``items`` into non-empty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [(first,)] + partition
        for i, block in enumerate(partition):
            yield partition[:i] + [(first,) + block] + partition[i + 1:]
