# genop/commands.py
"""
The command layer shared by the management command and the JSON API.

A command is ``<verb> <subcommand> --flag value ...``; every verb has a
fixed flag schema and a handler returning a JSON-ready result.
"""
import concurrent.futures
import logging
import shlex
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import conf
from .exceptions import GenopError, ParseError
from .extensions import Extension, filtration_table
from .families import corolla_family_from_seeds, named_family, tree_family
from .groups import FiniteGroup, conjugacy_classes, describe_group, make_group, subgroup_table, subgroups
from .gtrees import automorphisms, corolla_classes, corolla_hom, enumerate_gtrees
from .ninfty import extract_indexing, fixed_point_pattern, fixed_point_table, latching_check, ninfty_build
from .operads import FreeOperad, free_eval, is_weak_indexing, monad_laws
from .sequences import DeltaSeq, EmptySeq
from .serialization import dumps, export_dot, gtree_to_json, loads, parse_tree, read_gtree, tree_to_json
from .trees import automorphism_group, leaf_root

logger = logging.getLogger(__name__)

# --- Type aliases ---
Flags = Dict[str, Any]
Result = Tuple[Any, bool]
Handler = Callable[[Flags], Result]

# --- Constants ---
EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_PARSE = 2

FLAG_TYPES: Dict[str, type] = {
    "group": str,
    "named": str,
    "family": str,
    "arity": int,
    "depth": int,
    "max-gv": int,
    "max-degree": int,
    "bound": int,
    "dimension": int,
    "tree": str,
    "mode": str,
    "format": str,
    "input": str,
    "dot": bool,
    "verify": bool,
}
FORMATS = ("expanded", "orbital")
GROUP_FLAGS = {"group", "named"}

SCHEMA: Dict[str, Dict[str, frozenset]] = {
    "group": {
        "info": frozenset(GROUP_FLAGS),
    },
    "family": {
        "show": frozenset(GROUP_FLAGS | {"family", "bound"}),
        "tree": frozenset(GROUP_FLAGS | {"family", "bound", "tree", "mode"}),
    },
    "tree": {
        "parse": frozenset({"tree", "dot"}),
    },
    "gtree": {
        "corollas": frozenset(GROUP_FLAGS | {"arity"}),
        "enumerate": frozenset(GROUP_FLAGS | {"arity", "max-gv", "dot", "format"}),
        "show": frozenset({"input", "dot", "format"}),
    },
    "operad": {
        "free": frozenset(GROUP_FLAGS | {"family", "arity", "max-gv"}),
        "laws": frozenset(GROUP_FLAGS | {"family", "arity", "max-gv"}),
    },
    "indexing": {
        "check": frozenset(GROUP_FLAGS | {"family", "arity", "mode", "max-gv"}),
    },
    "extension": {
        "filtrate": frozenset(GROUP_FLAGS | {"arity", "max-gv", "max-degree"}),
    },
    "ninfty": {
        "build": frozenset(GROUP_FLAGS | {"family", "arity", "depth", "verify"}),
        "extract": frozenset(GROUP_FLAGS | {"family", "arity", "depth"}),
        "latching": frozenset(GROUP_FLAGS | {"family", "arity", "dimension"}),
    },
}


@dataclass(frozen=True)
class Command:
    verb: str
    subcommand: str
    flags: Tuple[Tuple[str, Any], ...] = ()
    inputs: Tuple[str, ...] = ()

    @property
    def options(self) -> Flags:
        return dict(self.flags)

    @property
    def text(self) -> str:
        """Canonical form: flags sorted, booleans bare."""
        words = [self.verb, self.subcommand]
        for name, value in self.flags:
            if value is True:
                words.append(f"--{name}")
            elif value is not False:
                shown = value if isinstance(value, str) else dumps(value)
                words.extend([f"--{name}", shlex.quote(str(shown))])
        return " ".join(words)


@dataclass
class Report:
    command: str
    results: Any = None
    exit_code: int = EXIT_OK
    exact: Optional[bool] = None
    error: Optional[Dict[str, Any]] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK

    def as_dict(self, timings: bool = False) -> Dict[str, Any]:
        data = {
            "command": self.command,
            "exit_code": self.exit_code,
            "exact": self.exact,
            "results": self.results,
            "error": self.error,
        }
        if timings:
            data["timings"] = dict(self.timings)
        return data


# --- Parsing ---
def _convert(name: str, value: Any) -> Any:
    kind = FLAG_TYPES[name]
    if kind is bool:
        if isinstance(value, bool):
            return value
        if str(value).lower() in ("1", "true", "yes"):
            return True
        if str(value).lower() in ("0", "false", "no"):
            return False
        raise ParseError(f"--{name} is a switch, got {value!r}", field=name)
    if kind is int:
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ParseError(f"--{name} expects an integer, got {value!r}", field=name) from None
    if name == "group" and not isinstance(value, str):
        return value
    return str(value)


def _validated(verb: str, subcommand: str, flags: Mapping[str, Any]) -> Command:
    if verb not in SCHEMA:
        raise ParseError(f"unknown verb {verb!r}; known: {', '.join(SCHEMA)}", field="verb")
    if subcommand not in SCHEMA[verb]:
        raise ParseError(f"unknown {verb} subcommand {subcommand!r}; known: {', '.join(SCHEMA[verb])}",
                         field="subcommand")
    allowed = SCHEMA[verb][subcommand]
    converted: Flags = {}
    for name, value in flags.items():
        if name not in allowed:
            raise ParseError(f"{verb} {subcommand} does not take --{name}", field=name)
        converted[name] = _convert(name, value)
    if "format" in converted and converted["format"] not in FORMATS:
        raise ParseError(f"--format is one of {', '.join(FORMATS)}", field="format")
    inputs = (converted["input"],) if "input" in converted else ()
    return Command(verb, subcommand, tuple(sorted(converted.items())), inputs)


def parse_command(source: Union[str, Sequence[str], Mapping[str, Any]]) -> Command:
    """
    Reads a command from text, an argument list or a JSON object.

    Args:
        source: "indexing check --group cyclic-2 --arity 3", the same split
            into words, or {"verb": ..., "subcommand": ..., "flags": {...}}.

    Returns:
        The validated Command.

    Raises:
        ParseError: naming the offending field.
    """
    if isinstance(source, Mapping):
        try:
            verb, subcommand = source["verb"], source["subcommand"]
        except KeyError as exc:
            raise ParseError(f"command object lacks {exc}", field=str(exc).strip("'")) from exc
        flags = source.get("flags") or {}
        if not isinstance(flags, Mapping):
            raise ParseError("'flags' must be an object", field="flags")
        return _validated(str(verb), str(subcommand), {str(k).lstrip("-"): v for k, v in flags.items()})
    if isinstance(source, str):
        try:
            words = shlex.split(source)
        except ValueError as exc:
            raise ParseError(f"cannot split command: {exc}", field="command") from exc
    else:
        words = list(source)
    if len(words) < 2:
        raise ParseError("a command needs a verb and a subcommand", field="verb" if not words else "subcommand")
    verb, subcommand, rest = words[0], words[1], words[2:]
    flags: Flags = {}
    i = 0
    while i < len(rest):
        word = rest[i]
        if not word.startswith("--"):
            raise ParseError(f"expected a flag, got {word!r}", field=word)
        name, eq, value = word[2:].partition("=")
        if name not in FLAG_TYPES:
            raise ParseError(f"unknown flag --{name}", field=name)
        if FLAG_TYPES[name] is bool and not eq:
            flags[name] = True
        elif eq:
            flags[name] = value
        elif i + 1 < len(rest):
            i += 1
            flags[name] = rest[i]
        else:
            raise ParseError(f"--{name} needs a value", field=name)
        i += 1
    return _validated(verb, subcommand, flags)


# --- Handlers ---
def _group(flags: Flags) -> FiniteGroup:
    spec = flags.get("group", flags.get("named"))
    if spec is None:
        raise ParseError("a --group is required", field="group")
    if isinstance(spec, str) and spec.lstrip().startswith("{"):
        spec = loads(spec)
    return make_group(spec)


def _family(flags: Flags, G: FiniteGroup, bound: Optional[int] = None):
    return named_family(flags.get("family", "complete"), G, bound)


def _required(flags: Flags, name: str) -> Any:
    if name not in flags:
        raise ParseError(f"--{name} is required", field=name)
    return flags[name]


def _records(frame) -> List[Dict[str, Any]]:
    return frame.to_dict(orient="records")


def group_info(flags: Flags) -> Result:
    G = _group(flags)
    found = subgroups(G)
    result = describe_group(G)
    result.update({
        "subgroups": len(found),
        "conjugacy_classes": len(conjugacy_classes(G)),
        "table": _records(subgroup_table(G)),
    })
    return result, True


def family_show(flags: Flags) -> Result:
    G = _group(flags)
    F = _family(flags, G, flags.get("bound"))
    return {
        "family": F.name,
        "bound": F.bound,
        "classes": _records(F.table()),
        "admissible_sets": _records(F.admissible_sets()),
    }, True


def family_tree(flags: Flags) -> Result:
    G = _group(flags)
    F = _family(flags, G, flags.get("bound"))
    parsed = parse_tree(_required(flags, "tree"))
    members = tree_family(F, parsed.tree, flags.get("mode", "brute"))
    return {
        "tree": parsed.tree.text(parsed.labels),
        "members": len(members),
        "classes": _records(members.table()),
    }, True


def tree_parse(flags: Flags) -> Result:
    parsed = parse_tree(_required(flags, "tree"))
    tree = parsed.tree
    result = {
        "text": tree.text(parsed.labels),
        "edges": len(tree),
        "leaves": list(tree.leaves),
        "vertices": list(tree.vertices),
        "leaf_root_arity": len(leaf_root(tree).corolla.leaves),
        "automorphisms": automorphism_group(tree).order,
        "json": tree_to_json(tree, parsed.labels),
    }
    if flags.get("dot"):
        result["dot"] = export_dot(tree, labels=parsed.labels)
    return result, True


def gtree_corollas(flags: Flags) -> Result:
    G = _group(flags)
    n = _required(flags, "arity")
    return [{
        "stabilizer": list(C.stabilizer(0).elements),
        "images": list(corolla_hom(C).images),
        "components": len(C.components),
    } for C in corolla_classes(G, n)], True


def gtree_enumerate(flags: Flags) -> Result:
    G = _group(flags)
    n = _required(flags, "arity")
    max_gv = flags.get("max-gv", conf.get_setting("MAX_GV"))
    rows = []
    for C in corolla_classes(G, n):
        found = enumerate_gtrees(C, max_gv)
        trees = []
        for item in found:
            entry = {"text": item.tree.text(), "automorphisms": len(item.automorphisms)}
            if flags.get("dot"):
                entry["dot"] = export_dot(item.tree, flags.get("format", "expanded"))
            trees.append(entry)
        rows.append({"images": list(corolla_hom(C).images), "count": len(found), "trees": trees})
    return rows, False


def gtree_show(flags: Flags) -> Result:
    T = read_gtree(_required(flags, "input"))
    result = {
        "text": T.text(),
        "canonical": gtree_to_json(T),
        "components": len(T.components),
        "automorphisms": len(automorphisms(T)),
    }
    if flags.get("dot"):
        result["dot"] = export_dot(T, flags.get("format", "expanded"))
    return result, True


def _delta(flags: Flags) -> Tuple[FiniteGroup, DeltaSeq, int]:
    G = _group(flags)
    n = _required(flags, "arity")
    return G, DeltaSeq(_family(flags, G, n)), n


def operad_free(flags: Flags) -> Result:
    G, X, n = _delta(flags)
    rows = []
    for C in corolla_classes(G, n):
        evaluation = free_eval(X, C, flags.get("max-gv"))
        rows.append({"images": list(corolla_hom(C).images), "size": len(evaluation.elements),
                     "exact": evaluation.exact})
    return rows, all(row["exact"] for row in rows)


def operad_laws(flags: Flags) -> Result:
    G, X, n = _delta(flags)
    rows = []
    for C in corolla_classes(G, n):
        report = monad_laws(X, C, flags.get("max-gv", 1))
        rows.append({"images": list(corolla_hom(C).images), "ok": report.ok,
                     "checked": report.checked, "failures": list(report.failures)})
    return rows, False


def indexing_check(flags: Flags) -> Result:
    G = _group(flags)
    F = _family(flags, G, _required(flags, "arity"))
    verdict = is_weak_indexing(F, flags.get("mode", "two_level"), flags.get("max-gv"))
    return {
        "family": F.name,
        "weak_indexing": verdict.weak_indexing,
        "witness": None if verdict.witness is None else gtree_to_json(verdict.witness),
        "partial": verdict.partial,
        "mode": verdict.mode,
        "checked": verdict.checked,
    }, not verdict.partial


def extension_filtrate(flags: Flags) -> Result:
    """Free binary cells glued onto the free operad on one free binary generator."""
    G = _group(flags)
    n = _required(flags, "arity")
    bound = max(n, 2)
    free_binary = corolla_family_from_seeds(G, {2: [(0,)]}, bound=bound, name="free-binary")
    Z, Y = DeltaSeq(free_binary), DeltaSeq(free_binary)
    ext = Extension(FreeOperad(Z, flags.get("max-gv")), EmptySeq(G, bound), Y,
                    lambda D, x: x, lambda D, x: x)
    table = filtration_table(ext, corolla_classes(G, n), flags.get("max-degree"))
    return {"steps": _records(table), "consistent": bool(table["consistent"].all())}, False


def ninfty_run(flags: Flags) -> Result:
    G = _group(flags)
    n = _required(flags, "arity")
    report = ninfty_build(_family(flags, G, n), n, flags.get("depth"), flags.get("verify", False))
    result = report.as_dict()
    result["table"] = _records(fixed_point_table(report))
    return result, report.pi0_checked


def ninfty_extract(flags: Flags) -> Result:
    G = _group(flags)
    n = _required(flags, "arity")
    F = _family(flags, G, n)
    report = ninfty_build(F, n, flags.get("depth"))
    extracted = extract_indexing(G, fixed_point_pattern([report], G), n)
    return {
        "classes": _records(extracted.family.table()),
        "weak_indexing": extracted.verdict.weak_indexing,
        "matches_family": extracted.family[n].issubset(F[n]) and F[n].issubset(extracted.family[n]),
    }, report.pi0_checked


def ninfty_latching(flags: Flags) -> Result:
    G = _group(flags)
    arity = flags.get("arity", 2)
    report = latching_check(_family(flags, G, arity), _required(flags, "dimension"), arity)
    return {
        "dimension": report.dimension,
        "arity": report.arity,
        "checked": report.checked,
        "failures": [list(map(str, failure)) for failure in report.failures],
        "ok": report.ok,
    }, True


HANDLERS: Dict[Tuple[str, str], Handler] = {
    ("group", "info"): group_info,
    ("family", "show"): family_show,
    ("family", "tree"): family_tree,
    ("tree", "parse"): tree_parse,
    ("gtree", "corollas"): gtree_corollas,
    ("gtree", "enumerate"): gtree_enumerate,
    ("gtree", "show"): gtree_show,
    ("operad", "free"): operad_free,
    ("operad", "laws"): operad_laws,
    ("indexing", "check"): indexing_check,
    ("extension", "filtrate"): extension_filtrate,
    ("ninfty", "build"): ninfty_run,
    ("ninfty", "extract"): ninfty_extract,
    ("ninfty", "latching"): ninfty_latching,
}


# --- Running ---
def run(command: Union[Command, str, Sequence[str], Mapping[str, Any]]) -> Report:
    """
    Executes one command.

    Args:
        command: A Command or anything parse_command accepts.

    Returns:
        A Report with exit code 0 on success, 1 on a domain error or an
        exceeded bound and 2 on a parse or schema error.
    """
    started = time.perf_counter()
    echo = command.text if isinstance(command, Command) else str(command)
    try:
        if not isinstance(command, Command):
            command = parse_command(command)
        echo = command.text
        results, exact = HANDLERS[(command.verb, command.subcommand)](command.options)
    except ParseError as exc:
        logger.error("%s: %s", echo, exc.message)
        return Report(echo, exit_code=EXIT_PARSE, error=exc.as_dict(),
                      timings={"total": time.perf_counter() - started})
    except GenopError as exc:
        logger.error("%s: %s (%s)", echo, exc.message, exc.invariant)
        return Report(echo, exit_code=EXIT_DOMAIN, error=exc.as_dict(),
                      timings={"total": time.perf_counter() - started})
    elapsed = time.perf_counter() - started
    logger.info("%s finished in %.3fs", echo, elapsed)
    return Report(echo, results, EXIT_OK, exact, None, {"total": elapsed})


def parse_batch(text: str) -> List[Any]:
    """A batch file: a JSON array of command strings or command objects."""
    data = loads(text)
    if not isinstance(data, list):
        raise ParseError("a batch is a JSON array of commands", position=0)
    return data


def run_batch(commands: Sequence[Any], threads: Optional[int] = None) -> List[Report]:
    """
    Runs independent commands, in parallel when THREADS > 1. Reports come
    back in input order.
    """
    threads = conf.get_setting("THREADS") if threads is None else threads
    if threads <= 1 or len(commands) <= 1:
        return [run(c) for c in commands]
    reports: List[Optional[Report]] = [None] * len(commands)
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        future_to_index = {executor.submit(run, c): i for i, c in enumerate(commands)}
        for future in concurrent.futures.as_completed(future_to_index):
            reports[future_to_index[future]] = future.result()
    return reports


def exit_code(reports: Sequence[Report]) -> int:
    """The worst exit code of a batch."""
    return max((r.exit_code for r in reports), default=EXIT_OK)


def summary(report: Report) -> str:
    """One human-readable line."""
    if report.ok:
        exact = "" if report.exact is None else (" (exact)" if report.exact else " (bounded)")
        return f"{report.command}: ok{exact}"
    return f"{report.command}: {report.error['type']}: {report.error['message']}"


