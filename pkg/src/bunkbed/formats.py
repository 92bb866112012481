"""Edge-list and graph6 readers/writers."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterator

from .graphs import HALF, Edge, WeightedGraph, as_fraction


class FormatError(ValueError):
    """Malformed graph input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _parse_prob(token: str, lineno: int) -> Fraction:
    try:
        p = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"bad probability literal {token!r}", lineno) from None
    if not 0 <= p <= 1:
        raise FormatError(f"probability {token} outside [0, 1]", lineno)
    return p


def parse_edge_list(text: str) -> WeightedGraph:
    """Read ``n m`` followed by ``m`` lines ``u v p``.

    ``p`` may be a ratio (``349/10000``) or a decimal (``0.0349``); both
    become exact rationals.  Blank lines and ``#`` comments are skipped.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise FormatError("empty input, expected header 'n m'", 1)
    lineno, header = rows[0]
    if len(header) != 2:
        raise FormatError("header must be 'n m'", lineno)
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError("header must hold two integers", lineno) from None
    if n < 0 or m < 0:
        raise FormatError("negative counts in header", lineno)
    body = rows[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] if body else lineno)
        raise FormatError(f"header announces {m} edges, found {len(body)}", where)
    edges = []
    for lineno, tok in body:
        if len(tok) != 3:
            raise FormatError("edge line must be 'u v p'", lineno)
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise FormatError("edge endpoints must be integers", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"endpoint out of range 0..{n - 1}", lineno)
        if u == v:
            raise FormatError("self-loops are not allowed", lineno)
        edges.append(Edge(u, v, _parse_prob(tok[2], lineno)))
    return WeightedGraph(n, tuple(edges))


def emit_edge_list(g: WeightedGraph, canonical: bool = True) -> str:
    if canonical:
        g = g.canonical()
    lines = [f"{g.vertex_count} {g.edge_count}"]
    lines += [f"{u} {v} {p}" for u, v, p in g.edges]
    return "\n".join(lines) + "\n"


def _graph6_size(data: bytes, lineno: int | None) -> tuple[int, int]:
    if not data:
        raise FormatError("empty graph6 string", lineno)
    if data[0] != 126:
        return data[0] - 63, 1
    if len(data) >= 4 and data[1] != 126:
        return ((data[1] - 63) << 12) | ((data[2] - 63) << 6) | (data[3] - 63), 4
    if len(data) >= 8 and data[1] == 126:
        n = 0
        for ch in data[2:8]:
            n = (n << 6) | (ch - 63)
        return n, 8
    raise FormatError("truncated graph6 size header", lineno)


def parse_graph6(line: str, p=HALF, lineno: int | None = None) -> WeightedGraph:
    """Decode one graph6 string; every edge gets open probability ``p``."""
    text = line.strip()
    if text.startswith(">>graph6<<"):
        text = text[len(">>graph6<<"):]
    data = text.encode("ascii", errors="replace")
    for ch in data:
        if not 63 <= ch <= 126:
            raise FormatError(f"invalid graph6 character {chr(ch)!r}", lineno)
    n, offset = _graph6_size(data, lineno)
    nbits = n * (n - 1) // 2
    need = (nbits + 5) // 6
    body = data[offset:]
    if len(body) != need:
        kind = "truncated" if len(body) < need else "overlong"
        raise FormatError(f"{kind} graph6 bit vector: {len(body)} bytes for n={n}, expected {need}", lineno)
    p = as_fraction(p)
    edges = []
    k = 0
    for j in range(1, n):
        for i in range(j):
            byte = body[k // 6] - 63
            if (byte >> (5 - k % 6)) & 1:
                edges.append(Edge(i, j, p))
            k += 1
    return WeightedGraph(n, tuple(edges))


def emit_graph6(g: WeightedGraph) -> str:
    n = g.vertex_count
    pairs = {(min(u, v), max(u, v)) for u, v, _ in g.edges}
    if len(pairs) != g.edge_count:
        raise ValueError("graph6 cannot encode parallel edges")
    if n < 63:
        head = [n + 63]
    elif n < 258048:
        head = [126, 63 + (n >> 12), 63 + ((n >> 6) & 63), 63 + (n & 63)]
    else:
        head = [126, 126] + [63 + ((n >> s) & 63) for s in (30, 24, 18, 12, 6, 0)]
    bits = [1 if (i, j) in pairs else 0 for j in range(1, n) for i in range(j)]
    bits += [0] * (-len(bits) % 6)
    body = [63 + int("".join(map(str, bits[k:k + 6])), 2) for k in range(0, len(bits), 6)]
    return bytes(head + body).decode("ascii")


def iter_graph6_file(text: str, p=HALF) -> Iterator[tuple[int, WeightedGraph | FormatError]]:
    """Yield ``(lineno, graph or error)`` for each non-blank line."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith(">>graph6<<"):
            line = line[len(">>graph6<<"):]
        if not line or line.startswith("#"):
            continue
        try:
            yield lineno, parse_graph6(line, p, lineno)
        except FormatError as exc:
            yield lineno, exc
