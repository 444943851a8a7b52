"""Plain-text arc-list format.

::

    # optional comment lines
    n m
    u v        (m lines, 0-based ids)

A digraph whose vertex set is a strict subset of ``range(n)`` records it in a
``# vertices: ...`` comment so that parsing gives back the same object.
"""

from __future__ import annotations

from typing import Iterable

from .digraph import Digraph, build_digraph
from .errors import GraphSyntaxError, InvalidArc, InvalidVertex


def _int_token(tok: str, line: int, col: int) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise GraphSyntaxError(f"expected an integer, got {tok!r}", line, col) from None
    return value


def _split(text_line: str) -> list[tuple[str, int]]:
    out = []
    col = 0
    for tok in text_line.split():
        col = text_line.index(tok, col)
        out.append((tok, col + 1))
        col += len(tok)
    return out


def parse_arc_list(text: str) -> Digraph:
    header = None
    arcs: list[tuple[int, int]] = []
    vertices = None
    expected = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("vertices:"):
                toks = body[len("vertices:"):].split()
                vertices = [_int_token(t, lineno, None) for t in toks]
            continue
        toks = _split(line)
        if len(toks) != 2:
            col = toks[2][1] if len(toks) > 2 else len(line) + 1
            raise GraphSyntaxError(f"expected two integers, found {len(toks)} token(s)", lineno, col)
        a, b = (_int_token(t, lineno, c) for t, c in toks)
        if header is None:
            if a < 0 or b < 0:
                raise GraphSyntaxError("header counts must be non-negative", lineno, toks[0][1])
            header = (a, b)
            expected = b
            continue
        if len(arcs) >= expected:
            raise GraphSyntaxError(f"more arc lines than the declared {expected}", lineno, 1)
        n = header[0]
        if not (0 <= a < n) or not (0 <= b < n):
            raise InvalidVertex(f"arc ({a}, {b}) has an endpoint outside [0, {n}) (line {lineno})")
        if a == b:
            raise InvalidArc(f"self-loop at vertex {a} (line {lineno})")
        arcs.append((a, b))
    if header is None:
        raise GraphSyntaxError("missing 'n m' header line", 1, 1)
    if len(arcs) != expected:
        raise GraphSyntaxError(f"declared {expected} arcs but found {len(arcs)}")
    return build_digraph(header[0], arcs, vertices)


def format_arc_list(D: Digraph, comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    if D.order != D.n:
        lines.append("# vertices: " + " ".join(map(str, D.vertex_list())))
    arcs = D.arc_list()
    lines.append(f"{D.n} {len(arcs)}")
    lines.extend(f"{u} {v}" for u, v in arcs)
    return "\n".join(lines) + "\n"


def read_arc_list(path) -> Digraph:
    with open(path, encoding="utf-8") as fh:
        return parse_arc_list(fh.read())


def write_arc_list(path, D: Digraph, comments: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_arc_list(D, comments))


def format_dot(D: Digraph, name: str = "D") -> str:
    lines = [f"digraph {name} {{"]
    lines.extend(f"  {v};" for v in D.vertex_list())
    lines.extend(f"  {u} -> {v};" for u, v in D.arc_list())
    lines.append("}")
    return "\n".join(lines) + "\n"
