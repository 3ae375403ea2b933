"""Depth-capped binary classification trees (entropy and gini splitting).

Plain greedy top-down induction, no pruning, minimum one sample per leaf.
"Depth" counts layers of nodes with the root as layer 1, so max_depth=1 is a
single leaf. Candidate thresholds are midpoints between consecutive distinct
sorted values per dimension; the best (dimension, threshold) pair maximizes
the impurity decrease, with ties resolved toward the lowest dimension and
then the lowest threshold so induction is deterministic. Leaves carry the
majority action of their training subset (ties to the lowest action id).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PoolFormatError
from .experience import ExperiencePool, format_real

__all__ = [
    "CRITERIA",
    "TreeNode",
    "DecisionTreeModel",
    "fit_tree",
    "predict_tree",
    "write_tree",
    "read_tree",
]

CRITERIA = ("gini", "entropy")

_MIN_GAIN = 1e-12  # below this a "split" is numerical noise, stop instead


@dataclass
class TreeNode:
    # internal: split_dim >= 0, threshold set, children present
    # leaf: split_dim == -1, action set
    split_dim: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    action: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.split_dim < 0


class DecisionTreeModel:
    def __init__(self, criterion: str, max_depth: int, root: TreeNode, dim: int):
        self.criterion = criterion
        self.max_depth = max_depth
        self.root = root
        self.dim = dim

    def act(self, state) -> int:
        return predict_tree(self, state)

    def depth(self) -> int:
        """Number of node layers, root counted as layer 1."""

        def walk(node):
            if node.is_leaf:
                return 1
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def n_nodes(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 1
            return 1 + walk(node.left) + walk(node.right)

        return walk(self.root)


def _impurity(counts: np.ndarray, criterion: str) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts[counts > 0] / n
    if criterion == "gini":
        return float(1.0 - np.sum(p * p))
    return float(-np.sum(p * np.log2(p)))


def _impurity_rows(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity per row of a (m, k) count matrix."""
    n = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(n > 0, counts / n, 0.0)
        if criterion == "gini":
            return 1.0 - np.sum(p * p, axis=1)
        logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return -np.sum(p * logp, axis=1)


def _best_split(states, actions, n_classes, criterion):
    """(gain, dim, threshold) of the best candidate, or gain <= 0 if none."""
    n = actions.shape[0]
    parent = _impurity(np.bincount(actions, minlength=n_classes), criterion)
    best_gain = 0.0
    best_dim = -1
    best_thr = 0.0
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), actions] = 1.0
    total = onehot.sum(axis=0)
    for dim in range(states.shape[1]):
        vals = states[:, dim]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        cuts = np.flatnonzero(sv[:-1] != sv[1:])
        if cuts.size == 0:
            continue
        cum = np.cumsum(onehot[order], axis=0)
        left_counts = cum[cuts]
        right_counts = total - left_counts
        n_left = (cuts + 1).astype(np.float64)
        n_right = n - n_left
        child = (
            n_left * _impurity_rows(left_counts, criterion)
            + n_right * _impurity_rows(right_counts, criterion)
        ) / n
        gains = parent - child
        pos = int(np.argmax(gains))  # first max == lowest threshold
        if gains[pos] > best_gain:  # strict: earlier dim wins ties
            best_gain = float(gains[pos])
            best_dim = dim
            best_thr = float((sv[cuts[pos]] + sv[cuts[pos] + 1]) / 2.0)
    return best_gain, best_dim, best_thr


def _grow(states, actions, n_classes, criterion, layer, max_depth):
    counts = np.bincount(actions, minlength=n_classes)
    majority = int(np.argmax(counts))
    if layer >= max_depth or counts.max() == actions.shape[0]:
        return TreeNode(action=majority)
    gain, dim, thr = _best_split(states, actions, n_classes, criterion)
    if dim < 0 or gain <= _MIN_GAIN:
        return TreeNode(action=majority)
    mask = states[:, dim] <= thr
    left = _grow(states[mask], actions[mask], n_classes, criterion, layer + 1, max_depth)
    right = _grow(states[~mask], actions[~mask], n_classes, criterion, layer + 1, max_depth)
    return TreeNode(split_dim=dim, threshold=thr, left=left, right=right)


def fit_tree(
    pool: ExperiencePool, criterion: str = "gini", max_depth: int = 5
) -> DecisionTreeModel:
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    pool.require_nonempty()
    root = _grow(
        pool.states, pool.actions, pool.action_count, criterion, 1, max_depth
    )
    return DecisionTreeModel(criterion, max_depth, root, pool.dim)


def predict_tree(model: DecisionTreeModel, state) -> int:
    s = np.asarray(state, dtype=np.float64).reshape(-1)
    if s.shape[0] != model.dim:
        raise DimensionError(f"state has dim {s.shape[0]}, tree expects {model.dim}")
    node = model.root
    while not node.is_leaf:
        node = node.left if s[node.split_dim] <= node.threshold else node.right
    return node.action


# ---------------------------------------------------------------------------
# Tree file: one node per line, children indented two spaces, left child
# first. Internal nodes are "dim <d> <= <t>", leaves "leaf <a>". Thresholds
# use shortest round-trip decimals so files round-trip exactly.
# ---------------------------------------------------------------------------

TREE_HEADER = "#dtree"


def write_tree(model: DecisionTreeModel, path) -> None:
    lines = [f"{TREE_HEADER} criterion={model.criterion} max_depth={model.max_depth} dim={model.dim}"]

    def walk(node, indent):
        pad = "  " * indent
        if node.is_leaf:
            lines.append(f"{pad}leaf {node.action}")
        else:
            lines.append(f"{pad}dim {node.split_dim} <= {format_real(node.threshold)}")
            walk(node.left, indent + 1)
            walk(node.right, indent + 1)

    walk(model.root, 0)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_tree(path) -> DecisionTreeModel:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if not header or header[0] != TREE_HEADER:
            raise PoolFormatError(f"bad tree header: {header!r}")
        fields = dict(p.split("=", 1) for p in header[1:] if "=" in p)
        try:
            criterion = fields["criterion"]
            max_depth = int(fields["max_depth"])
            dim = int(fields["dim"])
        except (KeyError, ValueError) as exc:
            raise PoolFormatError(f"bad tree header: {header!r}") from exc
        body = [ln.rstrip("\n") for ln in fh if ln.strip()]

    pos = 0

    def parse(indent):
        nonlocal pos
        if pos >= len(body):
            raise PoolFormatError("truncated tree file")
        line = body[pos]
        depth = (len(line) - len(line.lstrip(" "))) // 2
        if depth != indent:
            raise PoolFormatError(f"bad indentation at line: {line!r}")
        pos += 1
        parts = line.split()
        if parts[0] == "leaf":
            return TreeNode(action=int(parts[1]))
        if parts[0] == "dim" and parts[2] == "<=":
            node = TreeNode(split_dim=int(parts[1]), threshold=float(parts[3]))
            node.left = parse(indent + 1)
            node.right = parse(indent + 1)
            return node
        raise PoolFormatError(f"bad tree line: {line!r}")

    root = parse(0)
    if pos != len(body):
        raise PoolFormatError("trailing content in tree file")
    return DecisionTreeModel(criterion, max_depth, root, dim)
