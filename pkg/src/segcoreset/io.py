"""File ingestion and serialization.

Signals come in as CSV (rows of comma-separated decimals) or PGM (P2/P5
grayscale, pixel value as label).  Coresets and trees round-trip through
versioned JSON documents; floats use Python's shortest-repr encoding, so a
load of a save reproduces the object bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .builder import Coreset
from .caratheodory import BlockCoreset, CoresetPoint
from .errors import ParseError, ValidationError
from .grid import Rect, Signal
from .segmentation import KTreeNode, Leaf, Split

CORESET_FILE_VERSION = 1
TREE_FILE_VERSION = 1


# ---------------------------------------------------------------------------
# signal ingestion
# ---------------------------------------------------------------------------


def read_signal_csv(path) -> Signal:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split(",")
            if width is None:
                width = len(tokens)
            elif len(tokens) != width:
                raise ParseError(
                    f"ragged csv row: {len(tokens)} fields, expected {width}",
                    line=ln,
                )
            try:
                rows.append([float(t) for t in tokens])
            except ValueError:
                raise ParseError("non-numeric csv field", line=ln)
    if not rows:
        raise ParseError("empty csv file")
    return Signal(np.array(rows))


def _pgm_tokens(data: bytes):
    """Yield (token, byte_offset) for PGM headers, skipping '#' comments."""
    i = 0
    n = len(data)
    while i < n:
        ch = data[i : i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            start = i
            while i < n and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
                i += 1
            yield data[start:i], start


def read_signal_pgm(path) -> Signal:
    data = Path(path).read_bytes()
    toks = _pgm_tokens(data)

    def next_tok(what):
        try:
            return next(toks)
        except StopIteration:
            raise ParseError(f"truncated pgm header: missing {what}", byte=len(data))

    magic, off = next_tok("magic")
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"unsupported pgm magic {magic!r}", byte=off)
    vals = []
    tok = b""
    for what in ("width", "height", "maxval"):
        tok, off = next_tok(what)
        try:
            vals.append(int(tok))
        except ValueError:
            raise ParseError(f"bad pgm {what} {tok!r}", byte=off)
    width, height, maxval = vals
    if width < 1 or height < 1:
        raise ParseError(f"bad pgm dimensions {width}x{height}")
    if not (1 <= maxval <= 65535):
        raise ParseError(f"unsupported pgm maxval {maxval}")

    if magic == b"P2":
        pixels = []
        for _ in range(width * height):
            tok, off = next_tok("pixel")
            try:
                v = int(tok)
            except ValueError:
                raise ParseError(f"bad pgm pixel {tok!r}", byte=off)
            if not (0 <= v <= maxval):
                raise ParseError(f"pgm pixel {v} exceeds maxval {maxval}", byte=off)
            pixels.append(v)
        arr = np.array(pixels, dtype=np.float64)
    else:
        # single whitespace byte after the maxval token, then raw pixel data
        start = off + len(tok) + 1
        per = 1 if maxval < 256 else 2
        need = width * height * per
        raw = data[start : start + need]
        if len(raw) < need:
            raise ParseError(
                f"truncated pgm raster: {len(raw)} bytes, expected {need}",
                byte=start + len(raw),
            )
        dt = np.uint8 if per == 1 else np.dtype(">u2")
        arr = np.frombuffer(raw, dtype=dt).astype(np.float64)
    return Signal(arr.reshape(height, width))


def ingest(path, fmt: str = None) -> Signal:
    """Load a signal from csv or pgm; the format defaults to the extension."""
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such file: {p}")
    if fmt is None:
        fmt = p.suffix.lstrip(".").lower()
    if fmt == "csv":
        return read_signal_csv(p)
    if fmt == "pgm":
        return read_signal_pgm(p)
    raise ParseError(f"unsupported input format {fmt!r} (use csv or pgm)")


def write_signal_csv(signal: Signal, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in signal.labels:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


# ---------------------------------------------------------------------------
# coreset files
# ---------------------------------------------------------------------------


def coreset_to_doc(c: Coreset) -> dict:
    return {
        "version": CORESET_FILE_VERSION,
        "n": c.n,
        "m": c.m,
        "k": c.k,
        "eps": c.eps,
        "gamma": c.gamma,
        "sigma": c.sigma,
        "mode": c.mode,
        "blocks": [
            {
                "rect": list(b.rect.as_tuple()),
                "points": [
                    {"row": p.row, "col": p.col, "label": p.label, "weight": p.weight}
                    for p in b.points
                ],
            }
            for b in c.blocks
        ],
    }


def coreset_from_doc(doc: dict) -> Coreset:
    if doc.get("version") != CORESET_FILE_VERSION:
        raise ParseError(f"unsupported coreset file version {doc.get('version')!r}")
    try:
        blocks = []
        for b in doc["blocks"]:
            rect = Rect(*b["rect"])
            pts = tuple(
                CoresetPoint(int(p["row"]), int(p["col"]), float(p["label"]),
                             float(p["weight"]))
                for p in b["points"]
            )
            if len(pts) != 4:
                raise ParseError(f"block {rect.as_tuple()} has {len(pts)} points, not 4")
            blocks.append(BlockCoreset(rect=rect, points=pts))
        return Coreset(
            n=int(doc["n"]), m=int(doc["m"]), k=int(doc["k"]),
            eps=float(doc["eps"]), gamma=float(doc["gamma"]),
            sigma=float(doc["sigma"]), mode=str(doc["mode"]), blocks=blocks,
        )
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed coreset document: {e}")


def save_coreset(c: Coreset, path):
    Path(path).write_text(json.dumps(coreset_to_doc(c), indent=1) + "\n",
                          encoding="utf-8")


def load_coreset(path) -> Coreset:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid json: {e.msg}", line=e.lineno)
    return coreset_from_doc(doc)


# ---------------------------------------------------------------------------
# tree files
# ---------------------------------------------------------------------------


def _node_to_doc(node: KTreeNode):
    if isinstance(node, Leaf):
        return {"leaf": {"label": node.label}}
    return {
        "split": {
            "axis": node.axis,
            "threshold": node.threshold,
            "low": _node_to_doc(node.low),
            "high": _node_to_doc(node.high),
        }
    }


def _node_from_doc(doc) -> KTreeNode:
    if not isinstance(doc, dict):
        raise ParseError(f"malformed tree node {doc!r}")
    if "leaf" in doc:
        return Leaf(float(doc["leaf"]["label"]))
    if "split" in doc:
        s = doc["split"]
        try:
            return Split(str(s["axis"]), int(s["threshold"]),
                         _node_from_doc(s["low"]), _node_from_doc(s["high"]))
        except (KeyError, ValidationError) as e:
            raise ParseError(f"malformed split node: {e}")
    raise ParseError(f"tree node must have 'leaf' or 'split', got {sorted(doc)}")


def tree_to_doc(tree: KTreeNode, n: int, m: int) -> dict:
    return {"version": TREE_FILE_VERSION, "n": n, "m": m, "root": _node_to_doc(tree)}


def tree_from_doc(doc: dict):
    """Returns (tree, n, m) for the declared grid."""
    if doc.get("version") != TREE_FILE_VERSION:
        raise ParseError(f"unsupported tree file version {doc.get('version')!r}")
    try:
        return _node_from_doc(doc["root"]), int(doc["n"]), int(doc["m"])
    except KeyError as e:
        raise ParseError(f"malformed tree document: missing {e}")


def save_tree(tree: KTreeNode, n: int, m: int, path):
    Path(path).write_text(json.dumps(tree_to_doc(tree, n, m), indent=1) + "\n",
                          encoding="utf-8")


def load_tree(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid json: {e.msg}", line=e.lineno)
    return tree_from_doc(doc)
