"""Text formats for graphs, trees, permutations and match sets.

Graph file: a header line ``n m`` followed by ``m`` lines ``u v`` with
``u < v``, sorted, LF-terminated.

Tree file: one JSON object ``{"empty": bool, "root": int | null,
"parent": [...]}`` with ``-1`` marking the root in ``parent``.

Sigma file: line ``i`` holds ``sigma(i)``.  Match file: CSV rows ``i,u``
under an ``i,u`` header.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .alignment import MatchSet
from .structures import Graph, RootedTree, TreeError


class FormatError(ValueError):
    pass


def format_graph(g: Graph) -> str:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("line 1: missing 'n m' header")
    try:
        n, m = (int(x) for x in lines[0].split())
    except ValueError:
        raise FormatError("line 1: expected 'n m'") from None
    if n < 0 or m < 0:
        raise FormatError("line 1: n and m must be nonnegative")
    if len(lines) - 1 != m:
        raise FormatError(f"header announces {m} edges, found {len(lines) - 1}")
    seen: set[tuple[int, int]] = set()
    edges = []
    for lineno, line in enumerate(lines[1:], 2):
        try:
            u, v = (int(x) for x in line.split())
        except ValueError:
            raise FormatError(f"line {lineno}: expected 'u v'") from None
        if u == v:
            raise FormatError(f"self-loop at line {lineno}")
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"vertex out of range at line {lineno}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise FormatError(f"duplicate edge at line {lineno}")
        seen.add(key)
        edges.append(key)
    return Graph.from_edges(n, edges)


def write_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_graph(g), newline="\n")


def read_graph(path: str | Path) -> Graph:
    return parse_graph(Path(path).read_text())


def format_tree(t: RootedTree) -> str:
    doc = {
        "empty": t.is_empty,
        "root": None if t.is_empty else t.root,
        "parent": t.parent.tolist(),
    }
    return json.dumps(doc) + "\n"


def parse_tree(text: str) -> RootedTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "parent" not in doc:
        raise FormatError("tree document needs a 'parent' array")
    parent = doc["parent"]
    if not isinstance(parent, list) or not all(isinstance(p, int) for p in parent):
        raise FormatError("'parent' must be a list of integers")
    empty = bool(doc.get("empty", not parent))
    if empty != (len(parent) == 0):
        raise FormatError("'empty' flag disagrees with the parent array")
    try:
        tree = RootedTree(np.array(parent, dtype=np.int64))
    except TreeError as exc:
        raise FormatError(str(exc)) from None
    root = doc.get("root")
    if not empty and root is not None and root != tree.root:
        raise FormatError(f"'root' is {root} but the parent array roots at {tree.root}")
    return tree


def write_tree(t: RootedTree, path: str | Path) -> None:
    Path(path).write_text(format_tree(t), newline="\n")


def read_tree(path: str | Path) -> RootedTree:
    return parse_tree(Path(path).read_text())


def write_sigma(sigma: Sequence[int], path: str | Path) -> None:
    Path(path).write_text("".join(f"{s}\n" for s in sigma), newline="\n")


def read_sigma(path: str | Path) -> tuple[int, ...]:
    sigma = tuple(int(x) for x in Path(path).read_text().split())
    if sorted(sigma) != list(range(len(sigma))):
        raise FormatError("sigma file is not a permutation of 0..n-1")
    return sigma


def write_matches(pairs: Iterable[tuple[int, int]], path: str | Path) -> None:
    lines = ["i,u"] + [f"{i},{u}" for i, u in pairs]
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_matches(path: str | Path) -> MatchSet:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or (lineno == 1 and line.replace(" ", "") == "i,u"):
            continue
        try:
            i, u = (int(x) for x in line.split(","))
        except ValueError:
            raise FormatError(f"line {lineno}: expected 'i,u'") from None
        pairs.append((i, u))
    return MatchSet(tuple(pairs))
