"""Group files (JSON) and point-cloud export (CSV)."""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from chg.errors import ParseError
from chg.orbit import GroupPresentation, OrbitCloud
from chg.pu1n import GROUP_TOL

PathLike = Union[str, Path]


def _line_col(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _locate(text: str, path: Sequence[int]) -> int:
    """Offset of the element at ``path`` inside the "generators" array, or -1."""
    m = re.search(r'"generators"\s*:\s*\[', text)
    if not m:
        return -1
    i = m.end() - 1
    stack = []  # element index at each open bracket
    in_str = False
    while i < len(text):
        ch = text[i]
        if in_str:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "[":
            if tuple(stack) == tuple(path):
                return i
            stack.append(0)
        elif ch == "]":
            stack.pop()
            if not stack:
                return -1
        elif ch == "," and stack:
            stack[-1] += 1
            j = i + 1
            while j < len(text) and text[j].isspace():
                j += 1
            if tuple(stack) == tuple(path):
                return j
        elif stack and not ch.isspace() and tuple(stack) == tuple(path):
            return i
        i += 1
    return -1


def _fail(text: str, message: str, path: Sequence[int] = ()) -> ParseError:
    pos = _locate(text, path) if path else -1
    if pos < 0:
        return ParseError(message)
    return ParseError(message, *_line_col(text, pos))


def _entry(text, value, path) -> complex:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise _fail(text, f"entry {list(path)} must be a [re, im] pair of numbers, got {value!r}", path)
    return complex(float(value[0]), float(value[1]))


def parse_group(text: str, validate: bool = True, tol: float = GROUP_TOL) -> GroupPresentation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1, 1)
    for key in ("n", "generators"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"field 'n' must be a positive integer, got {n!r}")
    gens_raw = doc["generators"]
    if not isinstance(gens_raw, list):
        raise ParseError("field 'generators' must be a list")
    gens = []
    for g, mat in enumerate(gens_raw):
        if not isinstance(mat, list) or len(mat) != n + 1:
            raise _fail(text, f"generator {g} must have {n + 1} rows", [g])
        M = np.empty((n + 1, n + 1), dtype=complex)
        for i, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != n + 1:
                raise _fail(text, f"generator {g} row {i} must have {n + 1} entries", [g, i])
            for j, val in enumerate(row):
                M[i, j] = _entry(text, val, [g, i, j])
        gens.append(M)
    G = GroupPresentation(n, gens, list(doc.get("labels", [])) or [], str(doc.get("name", "")),
                          str(doc.get("description", "")))
    if validate:
        G.validate(tol)
    return G


def load_group(path: PathLike, tol: float = GROUP_TOL) -> GroupPresentation:
    return parse_group(Path(path).read_text(), tol=tol)


def group_to_json(G: GroupPresentation) -> str:
    """JSON text; floats use repr, so a reload reproduces the matrices bit for bit."""
    doc = {
        "name": G.name,
        "n": G.n,
        "labels": list(G.labels),
        "description": G.description,
        "generators": [[[[float(z.real), float(z.imag)] for z in row] for row in g]
                       for g in G.generators],
    }
    return json.dumps(doc, indent=1) + "\n"


def save_group(G: GroupPresentation, path: PathLike) -> None:
    Path(path).write_text(group_to_json(G))


def cloud_header(m: int):
    cols = []
    for k in range(m):
        cols += [f"re_{k}", f"im_{k}"]
    return cols + ["word_length", "ball_value"]


def cloud_to_csv(points: np.ndarray, word_lengths, ball_values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cloud_header(points.shape[1]))
    for p, L, b in zip(points, word_lengths, ball_values):
        row = []
        for z in p:
            row += [repr(float(z.real)), repr(float(z.imag))]
        w.writerow(row + [int(L), repr(float(b))])
    return buf.getvalue()


def orbit_to_csv(cloud: OrbitCloud) -> str:
    return cloud_to_csv(cloud.points, cloud.word_lengths, cloud.ball_values)


def read_cloud_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    m = (len(header) - 2) // 2
    A = np.array([[float(x) for x in r] for r in body]) if body else np.zeros((0, len(header)))
    pts = A[:, 0:2 * m:2] + 1j * A[:, 1:2 * m:2]
    return pts, A[:, 2 * m].astype(int), A[:, 2 * m + 1]
