# genop/serialization.py
"""
Text, JSON and DOT forms of trees, G-trees and their maps.

Tree-text: a vertex is ``name(inputs)`` with the name optional, a leaf is a
name or ``|``, and ``()`` is a stump. Whitespace is ignored. Names label the
edge below them and are kept in a side map.
"""
import json
import logging
import re
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from .exceptions import GenopError, ParseError
from .groups import FiniteGroup, make_group, make_subgroup
from .gtrees import GTree, GTreeMap, canonical_gtree, make_gtree
from .trees import Node, Tree, TreeMap, build

logger = logging.getLogger(__name__)

# --- Constants ---
TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z0-9_.']+)|(?P<symbol>[(),|]))")
DOT_MODES = ("expanded", "orbital")
SUBGROUP_LETTERS = "HKLMNJPQRSUVW"


class ParsedTree(NamedTuple):
    tree: Tree
    labels: Dict[int, str]


# --- Tree-text ---
def _tokens(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if not text[pos:].strip():
            break
        match = TOKEN.match(text, pos)
        if match is None:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[offset]!r}", position=offset)
        kind = "name" if match.group("name") is not None else match.group("symbol")
        tokens.append((kind, match.group(match.lastgroup), match.start(match.lastgroup)))
        pos = match.end()
    return tokens


def parse_tree(text: str) -> ParsedTree:
    """
    Reads tree-text.

    Args:
        text: e.g. "((),())" or "d(c(a,b),|)".

    Returns:
        The standard model and the edge labels that were named.

    Raises:
        ParseError: with the character position of the offending token.
    """
    tokens = _tokens(text)
    frames: List[Tuple[Optional[str], List[Node]]] = []
    result: Optional[Node] = None
    expect_node, just_opened = True, False

    def emit(node: Node):
        nonlocal result
        if frames:
            frames[-1][1].append(node)
        else:
            result = node

    i = 0
    while i < len(tokens):
        kind, value, position = tokens[i]
        opens = kind == "(" or (kind == "name" and i + 1 < len(tokens) and tokens[i + 1][0] == "(")
        if expect_node and opens:
            frames.append((value if kind == "name" else None, []))
            i += 2 if kind == "name" else 1
            just_opened = True
            continue
        if expect_node and kind == ")" and just_opened:
            label, _ = frames.pop()
            emit(Node(label, ()))
        elif expect_node and kind in ("name", "|"):
            emit(Node(value if kind == "name" else None, None))
        elif not expect_node and kind == "," and frames:
            expect_node, just_opened = True, False
            i += 1
            continue
        elif not expect_node and kind == ")" and frames:
            label, kids = frames.pop()
            emit(Node(label, tuple(kids)))
        elif result is not None and not frames:
            raise ParseError("trailing input after the root", position=position)
        else:
            raise ParseError(f"unexpected {value!r}", position=position)
        expect_node, just_opened = False, False
        i += 1
    if frames:
        raise ParseError("unclosed vertex", position=len(text))
    if result is None:
        raise ParseError("empty tree text", position=len(text))
    tree, names = build(result)
    labels = {e: name for e, name in enumerate(names) if name is not None}
    logger.debug("parsed %r into %d edges", text, len(tree))
    return ParsedTree(tree, labels)


# --- JSON ---
def loads(text: str) -> Any:
    """json.loads reporting the character position as a ParseError."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", position=exc.pos) from exc


class ReportEncoder(DjangoJSONEncoder):
    """Also encodes numpy scalars and sets, as found in pandas records."""

    def default(self, o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        return super().default(o)


def dumps(value: Any) -> str:
    """Deterministic JSON."""
    return json.dumps(value, sort_keys=True, cls=ReportEncoder)


def tree_to_json(tree: Tree, labels: Optional[Mapping[int, str]] = None) -> Dict[str, Any]:
    return {
        "children": [None if kids is None else list(kids) for kids in tree.children],
        "labels": {str(e): name for e, name in sorted((labels or {}).items())},
    }


def tree_from_json(data: Union[str, Mapping[str, Any]]) -> ParsedTree:
    """Accepts tree-text or {"children": [...], "labels": {...}}."""
    if isinstance(data, str):
        return parse_tree(data)
    if not isinstance(data, Mapping) or "children" not in data:
        raise ParseError("a tree is tree-text or an object with 'children'", field="children")
    try:
        children = tuple(None if kids is None else tuple(int(c) for c in kids) for kids in data["children"])
        labels = {int(e): str(name) for e, name in (data.get("labels") or {}).items()}
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad tree JSON: {exc}", field="children") from exc
    return ParsedTree(Tree(children), labels)


def group_to_json(group: FiniteGroup) -> Dict[str, Any]:
    """A table spec; points and factors ride along so the group comes back equal."""
    data: Dict[str, Any] = {"kind": "table", "name": group.name, "table": [list(row) for row in group.table]}
    if group.points is not None:
        data["points"] = [list(p) for p in group.points]
    if group.factors is not None:
        data["factors"] = [group_to_json(K) for K in group.factors]
    return data


def gtree_to_json(T: GTree) -> Dict[str, Any]:
    """
    The canonical representative of T, as its root stabilizer H, the base
    tree T_0 and the action of generators of H on it.
    """
    N, _ = canonical_gtree(T)
    H = N.stabilizer(0)
    return {
        "group": group_to_json(N.group),
        "orbit_stabilizer": list(H.elements),
        "base_tree": tree_to_json(N.components[0]),
        "action": {str(h): list(N.component_iso(h, 0)) for h in H.generators},
    }


def gtree_from_json(data: Mapping[str, Any], group: Optional[FiniteGroup] = None) -> GTree:
    """Inverse of gtree_to_json; the result is induced from the given stabilizer."""
    for key in ("orbit_stabilizer", "base_tree", "action"):
        if key not in data:
            raise ParseError(f"G-tree JSON lacks {key!r}", field=key)
    if group is None:
        if "group" not in data:
            raise ParseError("G-tree JSON lacks 'group'", field="group")
        group = make_group(data["group"])
    H = make_subgroup(group, data["orbit_stabilizer"])
    tree = tree_from_json(data["base_tree"]).tree
    try:
        images = {int(h): tuple(int(i) for i in p) for h, p in data["action"].items()}
    except (AttributeError, TypeError, ValueError) as exc:
        raise ParseError(f"bad action: {exc}", field="action") from exc
    return make_gtree(H, tree, images)


def read_gtree(path: str) -> GTree:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", field="input") from exc
    return gtree_from_json(loads(text))


# --- DOT ---
def _tree_lines(tree: Tree, prefix: str, labels: Optional[Mapping[int, str]] = None,
                offset: int = 0) -> List[str]:
    root = f"{prefix}root"
    lines = [f'  {root} [shape=point];']
    for e in tree.edges:
        if tree.children[e] is None:
            lines.append(f'  {prefix}l{e} [shape=point];')
        else:
            lines.append(f'  {prefix}v{e} [shape=circle, label=""];')
    parent = tree.parent
    for e in tree.edges:
        top = _top(tree, prefix, e)
        bottom = root if parent[e] is None else f"{prefix}v{parent[e]}"
        name = (labels or {}).get(offset + e, str(offset + e))
        lines.append(f'  {top} -> {bottom} [label="{name}"];')
    return lines


def _top(tree: Tree, prefix: str, e: int) -> str:
    return f"{prefix}l{e}" if tree.children[e] is None else f"{prefix}v{e}"


def _header(name: str) -> List[str]:
    return [f"digraph {name} {{", "  rankdir=BT;", "  edge [arrowhead=none];"]


def tree_dot(tree: Tree, labels: Optional[Mapping[int, str]] = None, name: str = "tree") -> str:
    """One circle per vertex, one DOT edge per tree edge, root at the bottom."""
    return "\n".join(_header(name) + _tree_lines(tree, "", labels) + ["}"]) + "\n"


def _expanded_lines(T: GTree, prefix: str, labels: Optional[Mapping[int, str]]) -> List[str]:
    lines = []
    for x, (off, component) in enumerate(zip(T.offsets, T.components)):
        lines.append(f"  subgraph cluster_{prefix}{x} {{")
        lines.append(f'    label="{x}";')
        lines.extend("  " + line for line in _tree_lines(component, f"{prefix}c{x}_", labels, off))
        lines.append("  }")
    return lines


def _orbital_lines(T: GTree, labels: Optional[Mapping[int, str]]) -> List[str]:
    base = T.components[0]
    H = T.stabilizer(0)
    rep: Dict[int, int] = {}
    for e in base.edges:
        if e not in rep:
            for h in H.elements:
                rep.setdefault(T.component_iso(h, 0)[e], e)
    # distinct stabilizers get letters root first; the whole group is G
    letters: Dict[Tuple[int, ...], str] = {}
    fresh = iter(SUBGROUP_LETTERS)
    lines = []
    order = sorted(set(rep.values()), reverse=True)
    for e in order:
        K = T.edge_stabilizer(e).elements
        if K not in letters:
            letters[K] = "G" if len(K) == T.group.order else next(fresh, f"H{len(letters)}")
    for K, letter in sorted(letters.items(), key=lambda item: item[1]):
        lines.append(f"  // {letter} = {{{', '.join(str(k) for k in K)}}}")
    lines.append("  root [shape=point];")
    parent = base.parent
    for e in order:
        lines.append(f'  l{e} [shape=point];' if base.children[e] is None else f'  v{e} [shape=circle, label=""];')
    for e in order:
        bottom = "root" if parent[e] is None else f"v{rep[parent[e]]}"
        name = (labels or {}).get(e, str(e))
        letter = letters[T.edge_stabilizer(e).elements]
        lines.append(f'  {_top(base, "", e)} -> {bottom} [label="(G/{letter})·{name}"];')
    return lines


def gtree_dot(T: GTree, mode: str = "expanded", labels: Optional[Mapping[int, str]] = None,
              name: str = "gtree") -> str:
    """
    DOT for a G-tree.

    Args:
        T: The G-tree.
        mode: "expanded" draws every component in its own cluster;
            "orbital" draws one edge per edge orbit labelled (G/H)·e, with H
            the stabilizer of the representative edge e of component 0.
        labels: Optional names of edges, by global index.
        name: Graph name.
    """
    if mode == "expanded":
        body = _expanded_lines(T, "", labels)
    elif mode == "orbital":
        body = _orbital_lines(T, labels)
    else:
        raise ParseError(f"unknown DOT mode {mode!r}; known: {', '.join(DOT_MODES)}", field="format")
    return "\n".join(_header(name) + body + ["}"]) + "\n"


def map_dot(phi: Union[TreeMap, GTreeMap], name: str = "map") -> str:
    """Source and target side by side, with a dashed arrow from each source edge to its image."""
    lines = _header(name)
    if isinstance(phi, TreeMap):
        for prefix, tree in (("s_", phi.source), ("t_", phi.target)):
            lines.append(f"  subgraph cluster_{prefix[0]} {{")
            lines.extend("  " + line for line in _tree_lines(tree, prefix))
            lines.append("  }")
        for e, image in enumerate(phi.edges):
            lines.append(f"  {_top(phi.source, 's_', e)} -> {_top(phi.target, 't_', image)} "
                         "[style=dashed, arrowhead=normal, constraint=false];")
    else:
        lines.extend(_expanded_lines(phi.source, "s", None))
        lines.extend(_expanded_lines(phi.target, "t", None))
        for e, image in enumerate(phi.edges):
            (x, a), (y, b) = phi.source.local(e), phi.target.local(image)
            source = _top(phi.source.components[x], f"sc{x}_", a)
            target = _top(phi.target.components[y], f"tc{y}_", b)
            lines.append(f"  {source} -> {target} [style=dashed, arrowhead=normal, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(value: Union[Tree, GTree, TreeMap, GTreeMap], mode: str = "expanded",
               labels: Optional[Mapping[int, str]] = None) -> str:
    if isinstance(value, Tree):
        return tree_dot(value, labels)
    if isinstance(value, GTree):
        return gtree_dot(value, mode, labels)
    if isinstance(value, (TreeMap, GTreeMap)):
        return map_dot(value)
    raise GenopError(f"cannot draw a {type(value).__name__}", invariant="dot value")
