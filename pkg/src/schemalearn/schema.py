"""Graph schemas: objects, generating edges, and path-equivalence equations.

A schema presents a free category on a directed multigraph together with a
set of equations between parallel paths. Equivalence of paths under the
congruence generated by those equations is undecidable in general, so every
query here is bounded by a maximum path length and may answer "unknown".
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .validation import SchemaError, ValidationError

__all__ = [
    "Generator",
    "Path",
    "Schema",
    "EquivClasses",
    "parse_schema",
    "format_schema",
    "identity_path",
    "compose_paths",
    "path_from_edges",
    "parse_path",
    "format_path",
    "enumerate_paths",
    "congruence_classes",
    "paths_equivalent",
    "YES",
    "NO",
    "UNKNOWN",
]

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Generator:
    name: str
    src: str
    dst: str


@dataclass(frozen=True)
class Path:
    """A composable sequence of generator names, in diagrammatic order:
    the first edge leaves src. An empty edge sequence is the identity."""

    src: str
    dst: str
    edges: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.edges)

    def is_identity(self) -> bool:
        return not self.edges


@dataclass(frozen=True)
class Schema:
    objects: tuple[str, ...]
    generators: tuple[Generator, ...]
    equations: tuple[tuple[Path, Path], ...]

    def __post_init__(self) -> None:
        names: set[str] = set()
        for obj in self.objects:
            if not _NAME_RE.match(obj):
                raise SchemaError(f"invalid object name {obj!r}")
            if obj in names:
                raise SchemaError(f"duplicate name {obj!r}")
            names.add(obj)
        objects = set(self.objects)
        for gen in self.generators:
            if not _NAME_RE.match(gen.name):
                raise SchemaError(f"invalid generator name {gen.name!r}")
            if gen.name in names:
                raise SchemaError(f"duplicate name {gen.name!r}")
            names.add(gen.name)
            for endpoint in (gen.src, gen.dst):
                if endpoint not in objects:
                    raise SchemaError(f"unknown object {endpoint!r} in generator {gen.name!r}")
        for lhs, rhs in self.equations:
            self.validate_path(lhs)
            self.validate_path(rhs)
            if lhs.src != rhs.src or lhs.dst != rhs.dst:
                raise SchemaError(
                    f"equation endpoint mismatch: {format_path(lhs)} "
                    f"({lhs.src}->{lhs.dst}) vs {format_path(rhs)} ({rhs.src}->{rhs.dst})"
                )

    @cached_property
    def generator_by_name(self) -> dict[str, Generator]:
        return {g.name: g for g in self.generators}

    @cached_property
    def generator_index(self) -> dict[str, int]:
        return {g.name: i for i, g in enumerate(self.generators)}

    def validate_path(self, path: Path) -> None:
        if path.src not in self.objects:
            raise SchemaError(f"unknown object {path.src!r}")
        if path.dst not in self.objects:
            raise SchemaError(f"unknown object {path.dst!r}")
        at = path.src
        for name in path.edges:
            gen = self.generator_by_name.get(name)
            if gen is None:
                raise SchemaError(f"unknown generator {name!r}")
            if gen.src != at:
                raise SchemaError(
                    f"path not composable: {name!r} starts at {gen.src}, expected {at}"
                )
            at = gen.dst
        if at != path.dst:
            raise SchemaError(f"path ends at {at}, declared dst is {path.dst}")


def identity_path(obj: str) -> Path:
    return Path(obj, obj, ())


def compose_paths(p: Path, q: Path) -> Path:
    """Concatenate two paths; p runs first."""
    if p.dst != q.src:
        raise SchemaError(f"cannot compose: first path ends at {p.dst}, second starts at {q.src}")
    return Path(p.src, q.dst, p.edges + q.edges)


def path_from_edges(schema: Schema, edges) -> Path:
    """Build a Path from a generator-name sequence, inferring endpoints."""
    edges = tuple(edges)
    if not edges:
        raise SchemaError("cannot infer endpoints of an empty path; use identity_path")
    first = schema.generator_by_name.get(edges[0])
    if first is None:
        raise SchemaError(f"unknown generator {edges[0]!r}")
    at = first.src
    for name in edges:
        gen = schema.generator_by_name.get(name)
        if gen is None:
            raise SchemaError(f"unknown generator {name!r}")
        if gen.src != at:
            raise SchemaError(f"path not composable at {name!r}")
        at = gen.dst
    return Path(first.src, at, edges)


def parse_path(schema: Schema, text: str) -> Path:
    """Parse `id(<object>)` or `<gen>(;<gen>)*` against a schema."""
    text = text.strip()
    m = re.match(r"^id\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)$", text)
    if m:
        obj = m.group(1)
        if obj not in schema.objects:
            raise SchemaError(f"unknown object {obj!r}")
        return identity_path(obj)
    parts = [part.strip() for part in text.split(";")]
    if not all(parts):
        raise SchemaError(f"malformed path {text!r}")
    return path_from_edges(schema, parts)


def format_path(path: Path) -> str:
    if path.is_identity():
        return f"id({path.src})"
    return ";".join(path.edges)


def parse_schema(text: str) -> Schema:
    """Parse the line-oriented schema grammar.

    object <name>
    gen <name> : <object> -> <object>
    eq <path> = <path>

    `#` starts a comment; blank lines are ignored.
    """
    objects: list[str] = []
    generators: list[Generator] = []
    eq_lines: list[tuple[int, str, str]] = []
    seen: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split(None, 1)
        keyword, rest = fields[0], (fields[1] if len(fields) > 1 else "")
        if keyword == "object":
            name = rest.strip()
            if not _NAME_RE.match(name):
                raise SchemaError(f"invalid object declaration {raw.strip()!r}", lineno)
            if name in seen:
                raise SchemaError(f"duplicate name {name!r}", lineno)
            seen.add(name)
            objects.append(name)
        elif keyword == "gen":
            m = re.match(
                r"^([A-Za-z_][A-Za-z0-9_]*)\s*:\s*([A-Za-z_][A-Za-z0-9_]*)\s*->\s*([A-Za-z_][A-Za-z0-9_]*)$",
                rest.strip(),
            )
            if not m:
                raise SchemaError(f"invalid generator declaration {raw.strip()!r}", lineno)
            name, src, dst = m.groups()
            if name in seen:
                raise SchemaError(f"duplicate name {name!r}", lineno)
            if src not in objects:
                raise SchemaError(f"unknown object {src}", lineno)
            if dst not in objects:
                raise SchemaError(f"unknown object {dst}", lineno)
            seen.add(name)
            generators.append(Generator(name, src, dst))
        elif keyword == "eq":
            if "=" not in rest:
                raise SchemaError(f"invalid equation {raw.strip()!r}", lineno)
            lhs_text, rhs_text = rest.split("=", 1)
            eq_lines.append((lineno, lhs_text.strip(), rhs_text.strip()))
        else:
            raise SchemaError(f"unknown directive {keyword!r}", lineno)

    partial = Schema(tuple(objects), tuple(generators), ())
    equations: list[tuple[Path, Path]] = []
    for lineno, lhs_text, rhs_text in eq_lines:
        try:
            lhs = parse_path(partial, lhs_text)
            rhs = parse_path(partial, rhs_text)
        except SchemaError as exc:
            raise SchemaError(str(exc), lineno) from exc
        if lhs.src != rhs.src or lhs.dst != rhs.dst:
            raise SchemaError(
                f"equation endpoint mismatch: {lhs_text} is {lhs.src}->{lhs.dst}, "
                f"{rhs_text} is {rhs.src}->{rhs.dst}",
                lineno,
            )
        equations.append((lhs, rhs))
    return Schema(tuple(objects), tuple(generators), tuple(equations))


def format_schema(schema: Schema) -> str:
    """Render a schema in the same grammar parse_schema accepts."""
    lines = [f"object {o}" for o in schema.objects]
    lines += [f"gen {g.name} : {g.src} -> {g.dst}" for g in schema.generators]
    lines += [f"eq {format_path(l)} = {format_path(r)}" for l, r in schema.equations]
    return "\n".join(lines) + "\n"


def _path_sort_key(schema: Schema, path: Path):
    index = schema.generator_index
    return tuple(index[e] for e in path.edges)


def enumerate_paths(schema: Schema, src: str, dst: str, max_len: int) -> list[Path]:
    """All paths src->dst of length <= max_len, in lexicographic order by
    generator declaration index (a path precedes its proper extensions)."""
    for obj in (src, dst):
        if obj not in schema.objects:
            raise SchemaError(f"unknown object {obj!r}")
    if max_len < 0:
        raise ValidationError("max_len must be >= 0")
    out_edges: dict[str, list[Generator]] = {o: [] for o in schema.objects}
    for gen in schema.generators:
        out_edges[gen.src].append(gen)

    found: list[Path] = []

    def walk(at: str, edges: tuple[str, ...]) -> None:
        if at == dst:
            found.append(Path(src, dst, edges))
        if len(edges) == max_len:
            return
        for gen in out_edges[at]:
            walk(gen.dst, edges + (gen.name,))

    walk(src, ())
    return found


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic: smaller index wins, so class roots are stable
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass(frozen=True)
class EquivClasses:
    """Partition of all paths of length <= bound into congruence classes.
    Classes are endpoint-homogeneous and sorted deterministically."""

    bound: int
    classes: tuple[tuple[Path, ...], ...]

    @cached_property
    def class_index(self) -> dict[Path, int]:
        return {p: i for i, group in enumerate(self.classes) for p in group}

    def same_class(self, p: Path, q: Path) -> bool:
        ci = self.class_index
        return p in ci and q in ci and ci[p] == ci[q]


def _all_paths(schema: Schema, max_len: int) -> list[Path]:
    paths: list[Path] = []
    for src in schema.objects:
        for dst in schema.objects:
            paths.extend(enumerate_paths(schema, src, dst, max_len))
    return paths


def _vertex_sequence(schema: Schema, path: Path) -> list[str]:
    verts = [path.src]
    for name in path.edges:
        verts.append(schema.generator_by_name[name].dst)
    return verts


def congruence_classes(schema: Schema, max_len: int) -> EquivClasses:
    """Bounded congruence generated by the schema's equations.

    Every path of length <= max_len is a node in a union-find; for every
    occurrence of an equation side inside a path, the path is identified
    with the rewritten path, provided the rewrite also fits in the bound.
    The result is the closure of one-step rewriting restricted to paths of
    length <= max_len, which is deterministic.
    """
    for lhs, rhs in schema.equations:
        if max(len(lhs), len(rhs)) > max_len:
            raise ValidationError(
                f"max_len {max_len} is below equation side length "
                f"{max(len(lhs), len(rhs))}"
            )
    universe = _all_paths(schema, max_len)
    index = {p: i for i, p in enumerate(universe)}
    uf = _UnionFind(len(universe))

    for path in universe:
        verts = _vertex_sequence(schema, path)
        for lhs, rhs in schema.equations:
            k = len(lhs)
            if len(path) - k + len(rhs) > max_len:
                continue
            for i in range(len(path) - k + 1):
                if verts[i] != lhs.src:
                    continue
                if path.edges[i:i + k] != lhs.edges:
                    continue
                rewritten = Path(path.src, path.dst, path.edges[:i] + rhs.edges + path.edges[i + k:])
                uf.union(index[path], index[rewritten])

    groups: dict[int, list[Path]] = {}
    for path in universe:
        groups.setdefault(uf.find(index[path]), []).append(path)
    sort_key = lambda p: (p.src, p.dst, len(p), _path_sort_key(schema, p))
    classes = [tuple(sorted(group, key=sort_key)) for group in groups.values()]
    classes.sort(key=lambda group: sort_key(group[0]))
    return EquivClasses(max_len, tuple(classes))


def paths_equivalent(schema: Schema, p: Path, q: Path, max_len: int) -> str:
    """Three-valued bounded equivalence check: YES, NO, or UNKNOWN.

    YES when both paths fall in the same bounded congruence class. NO is a
    heuristic certificate: the bound already exceeds both path lengths plus
    the length of every equation side, yet the classes stay separate.
    Anything else is UNKNOWN - the bound cannot certify either answer.
    """
    schema.validate_path(p)
    schema.validate_path(q)
    if p.src != q.src or p.dst != q.dst:
        raise SchemaError("paths_equivalent: endpoint mismatch")
    if p == q:
        return YES
    if max(len(p), len(q)) > max_len:
        return UNKNOWN
    classes = congruence_classes(schema, max_len)
    if classes.same_class(p, q):
        return YES
    no_threshold = len(p) + len(q) + sum(max(len(l), len(r)) for l, r in schema.equations)
    if max_len >= no_threshold:
        return NO
    return UNKNOWN
