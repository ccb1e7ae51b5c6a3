"""Dissimilarity functions: l1 / l2 / cosine on dense vectors, and unit-cost
ordered tree edit distance (Zhang-Shasha) on rooted labeled trees, plus the
one-line tree text format used by data files.

Tree grammar: ``node := LABEL [ '(' node (',' node)* ')' ]`` with
``LABEL = [A-Za-z0-9_]+``. Child order is significant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TreeNode",
    "ParseError",
    "l1",
    "l2",
    "cosine",
    "parse_tree",
    "format_tree",
    "tree_edit_distance",
]

_LABEL_RE = re.compile(r"[A-Za-z0-9_]+")


@dataclass(frozen=True)
class TreeNode:
    """A rooted, ordered, labeled tree node."""

    label: str
    children: tuple["TreeNode", ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("tree node labels must be non-empty")

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


class ParseError(ValueError):
    """Malformed tree text; carries the 0-based offset of the failure."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


# ---------------------------------------------------------------------------
# vector metrics
#
# The row variants (*_rows) evaluate d(x_a, x_b) for blocks of points in one
# lane-wise numpy pass; the scalar entry points delegate to them so that every
# code path produces bit-identical values for the same pair.
# ---------------------------------------------------------------------------


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def l1_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """d(A_i, B_j) matrix for the l1 metric; A is (p,d), B is (q,d)."""
    _check_dims(A, B)
    return np.abs(A[:, None, :] - B[None, :, :]).sum(axis=-1)


def l2_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    _check_dims(A, B)
    diff = A[:, None, :] - B[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def cosine_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """1 - cos similarity; raises on any zero-norm vector (never a silent 0)."""
    _check_dims(A, B)
    na = np.sqrt((A * A).sum(axis=-1))
    nb = np.sqrt((B * B).sum(axis=-1))
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise ValueError("cosine distance is undefined for zero-norm vectors")
    dots = (A[:, None, :] * B[None, :, :]).sum(axis=-1)
    return 1.0 - dots / (na[:, None] * nb[None, :])


def _as_matrix(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-d vector")
    return arr.reshape(1, -1)


def l1(a, b) -> float:
    """Sum of absolute coordinate differences."""
    return float(l1_rows(_as_matrix(a), _as_matrix(b))[0, 0])


def l2(a, b) -> float:
    """Euclidean norm of the difference."""
    return float(l2_rows(_as_matrix(a), _as_matrix(b))[0, 0])


def cosine(a, b) -> float:
    """1 - (a.b)/(|a||b|), in [0, 2]. Raises ValueError on zero vectors."""
    return float(cosine_rows(_as_matrix(a), _as_matrix(b))[0, 0])


# ---------------------------------------------------------------------------
# tree text format
# ---------------------------------------------------------------------------


def parse_tree(text: str) -> TreeNode:
    """Parse one tree expression; raises ParseError with the failing offset."""
    node, pos = _parse_node(text, 0)
    if pos != len(text):
        raise ParseError(f"unexpected {text[pos]!r}", pos)
    return node


def _parse_node(text: str, pos: int) -> tuple[TreeNode, int]:
    m = _LABEL_RE.match(text, pos)
    if m is None:
        what = repr(text[pos]) if pos < len(text) else "end of input"
        raise ParseError(f"expected label, found {what}", pos)
    label = m.group(0)
    pos = m.end()
    children: list[TreeNode] = []
    if pos < len(text) and text[pos] == "(":
        pos += 1
        while True:
            child, pos = _parse_node(text, pos)
            children.append(child)
            if pos >= len(text):
                raise ParseError("expected ',' or ')', found end of input", pos)
            if text[pos] == ",":
                pos += 1
                continue
            if text[pos] == ")":
                pos += 1
                break
            raise ParseError(f"expected ',' or ')', found {text[pos]!r}", pos)
    return TreeNode(label, tuple(children)), pos


def format_tree(node: TreeNode) -> str:
    """Inverse of parse_tree."""
    if not node.children:
        return node.label
    return node.label + "(" + ",".join(format_tree(c) for c in node.children) + ")"


# ---------------------------------------------------------------------------
# Zhang-Shasha ordered tree edit distance, unit costs
# (insert = delete = relabel = 1, match = 0)
# ---------------------------------------------------------------------------


class _Annotated:
    """Postorder arrays for the Zhang-Shasha dynamic program."""

    def __init__(self, root: TreeNode):
        self.labels: list[str] = []
        self.lmld: list[int] = []  # postorder index of leftmost leaf descendant
        self._walk(root)
        self.n = len(self.labels)
        # keyroots: for each distinct leftmost-leaf value keep the largest
        # postorder index that has it
        seen: dict[int, int] = {}
        for i, l in enumerate(self.lmld):
            seen[l] = i
        self.keyroots = sorted(seen.values())

    def _walk(self, node: TreeNode) -> int:
        first_leaf = -1
        for child in node.children:
            leaf = self._walk(child)
            if first_leaf == -1:
                first_leaf = leaf
        idx = len(self.labels)
        if first_leaf == -1:
            first_leaf = idx
        self.labels.append(node.label)
        self.lmld.append(first_leaf)
        return first_leaf


def tree_edit_distance(a: TreeNode, b: TreeNode) -> int:
    """Minimum unit-cost edit script length turning tree a into tree b."""
    A, B = _Annotated(a), _Annotated(b)
    la, lb = A.lmld, B.lmld
    td = np.zeros((A.n, B.n), dtype=np.int64)

    for i in A.keyroots:
        for j in B.keyroots:
            # forest distance over postorder slices [la[i]..i] x [lb[j]..j]
            ioff, joff = la[i], lb[j]
            m, n = i - ioff + 2, j - joff + 2
            fd = np.zeros((m, n), dtype=np.int64)
            fd[:, 0] = np.arange(m)
            fd[0, :] = np.arange(n)
            for di in range(1, m):
                ai = ioff + di - 1
                for dj in range(1, n):
                    bj = joff + dj - 1
                    if la[ai] == ioff and lb[bj] == joff:
                        # both prefixes are whole subtrees: tree-tree case
                        cost = 0 if A.labels[ai] == B.labels[bj] else 1
                        fd[di, dj] = min(
                            fd[di - 1, dj] + 1,
                            fd[di, dj - 1] + 1,
                            fd[di - 1, dj - 1] + cost,
                        )
                        td[ai, bj] = fd[di, dj]
                    else:
                        fd[di, dj] = min(
                            fd[di - 1, dj] + 1,
                            fd[di, dj - 1] + 1,
                            fd[la[ai] - ioff, lb[bj] - joff] + td[ai, bj],
                        )
    return int(td[A.n - 1, B.n - 1])
