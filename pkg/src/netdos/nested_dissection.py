"""Exact per-node Chebyshev moments through nested-dissection recurrences.

A vertex-separator tree lets the three-term matrix recurrence be advanced
block-column-wise: for every tree node t the columns T_m(H)(I_p, I_s) are
kept, where I_p is the partition's node set and I_s its separator (leaves
use I_s = I_p). Because a partition's rows only touch rows inside the
partition or in ancestor separators, the update needs the ancestors' column
blocks at degree m, which a pre-order traversal has just produced; the
cross block T_m(I_s', I_s) is read from the ancestor's block by symmetry.
Leaf blocks and separator columns expose the exact diagonal entries, so the
result carries no stochastic error.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import PartitionError
from .graph import GraphCSR
from .kpm import MODE_PER_NODE, ChebMoments
from .operators import ScaledOperator


@dataclass
class PartitionNode:
    """One tree node: separator plus left/right node sets (leaf: sep only)."""

    node_id: int
    parent: int
    sep: np.ndarray
    left: np.ndarray
    right: np.ndarray
    children: list = field(default_factory=list)

    @property
    def part(self) -> np.ndarray:
        return np.sort(np.concatenate([self.sep, self.left, self.right]))

    @property
    def is_leaf(self) -> bool:
        return self.left.size == 0 and self.right.size == 0


@dataclass
class PartitionTree:
    """Nested-dissection tree; node 0 is the root and ids are pre-order."""

    n: int
    nodes: list

    def preorder(self):
        return range(len(self.nodes))

    def ancestors(self, node_id):
        """Path of strict ancestors, root first."""
        path = []
        cur = self.nodes[node_id].parent
        while cur >= 0:
            path.append(cur)
            cur = self.nodes[cur].parent
        return path[::-1]

    def validate(self, g: GraphCSR):
        self.validate_arrays(g.n, g.row_ptr, g.col_idx)

    def validate_arrays(self, n, indptr, indices):
        """Check coverage, disjointness, ordering and the separator property."""
        if self.n != n or self.nodes[0].part.shape[0] != n:
            raise PartitionError("partition tree does not cover the graph")
        covered = np.concatenate([t.sep for t in self.nodes])
        if covered.shape[0] != n or np.unique(covered).shape[0] != n:
            raise PartitionError("separators and leaf blocks do not partition the nodes")
        for t in self.nodes:
            if t.parent >= t.node_id:
                raise PartitionError("tree node ids must order parents before children")
            pieces = np.concatenate([t.sep, t.left, t.right])
            if np.unique(pieces).shape[0] != pieces.shape[0]:
                raise PartitionError(f"tree node {t.node_id} has overlapping pieces")
            if t.left.size and t.right.size:
                mask = np.zeros(n, dtype=bool)
                mask[t.right] = True
                for u in t.left.tolist():
                    nbrs = indices[indptr[u]:indptr[u + 1]]
                    hits = mask[nbrs]
                    if np.any(hits):
                        v = int(nbrs[hits][0])
                        raise PartitionError(
                            f"edge ({u}, {v}) crosses the separator of tree "
                            f"node {t.node_id}")


def _bfs_levels(g, members_mask, start):
    """BFS level per node inside the induced subgraph; -1 outside/unreached."""
    levels = np.full(g.n, -1, dtype=np.int64)
    levels[start] = 0
    queue = deque([start])
    order = [start]
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u).tolist():
            if members_mask[v] and levels[v] < 0:
                levels[v] = levels[u] + 1
                queue.append(v)
                order.append(v)
    return levels, order


def _split_component(g, members):
    """Level-set separator from a pseudo-peripheral BFS; None if inseparable."""
    mask = np.zeros(g.n, dtype=bool)
    mask[members] = True
    _, order = _bfs_levels(g, mask, int(members[0]))
    levels, _ = _bfs_levels(g, mask, order[-1])
    depth = int(levels[members].max())
    if depth < 2:
        return None
    counts = np.bincount(levels[members], minlength=depth + 1)
    below = np.cumsum(counts)
    best, best_cost = 1, None
    for lvl in range(1, depth):
        cost = max(int(below[lvl - 1]), int(below[depth] - below[lvl]))
        if best_cost is None or cost < best_cost:
            best, best_cost = lvl, cost
    lv = levels[members]
    sep = members[lv == best]
    left = members[lv < best]
    right = members[lv > best]
    return sep, left, right


def _components(g, members):
    mask = np.zeros(g.n, dtype=bool)
    mask[members] = True
    out = []
    for u in members.tolist():
        if mask[u]:
            _, order = _bfs_levels(g, mask, u)
            comp = np.array(sorted(order), dtype=np.int64)
            mask[comp] = False
            out.append(comp)
    return out


def build_partition_tree(g: GraphCSR, leaf_size=256) -> PartitionTree:
    """Recursive vertex-separator decomposition; deterministic given g.

    Connected pieces are split at the most balanced BFS level set grown from
    a pseudo-peripheral node; disconnected pieces split with an empty
    separator. Pieces whose BFS depth admits no interior level (dense blobs)
    become leaves regardless of size.
    """
    if leaf_size < 1:
        raise ValueError("leaf_size must be >= 1")
    nodes = []

    def recurse(members, parent):
        node_id = len(nodes)
        empty = np.zeros(0, dtype=np.int64)
        node = PartitionNode(node_id=node_id, parent=parent, sep=members,
                             left=empty, right=empty)
        nodes.append(node)
        if members.shape[0] <= leaf_size:
            return node_id
        comps = _components(g, members)
        if len(comps) > 1:
            comps.sort(key=lambda c: (-c.shape[0], int(c[0])))
            side = [[], []]
            sizes = [0, 0]
            for comp in comps:
                pick = 0 if sizes[0] <= sizes[1] else 1
                side[pick].append(comp)
                sizes[pick] += comp.shape[0]
            sep = empty
            left = np.sort(np.concatenate(side[0]))
            right = np.sort(np.concatenate(side[1]))
        else:
            split = _split_component(g, members)
            if split is None:
                if members.shape[0] > leaf_size:
                    warnings.warn(
                        f"piece of {members.shape[0]} nodes has no level-set "
                        "separator; keeping it as a dense leaf", stacklevel=2)
                return node_id
            sep, left, right = split
            if sep.shape[0] > max(left.shape[0], right.shape[0]):
                warnings.warn(
                    f"separator ({sep.shape[0]} nodes) larger than both sides "
                    f"({left.shape[0]}, {right.shape[0]}); recurrence stays "
                    "exact but loses its cost advantage", stacklevel=2)
        node.sep = np.sort(sep)
        node.left = left
        node.right = right
        node.children.append(recurse(left, node_id))
        node.children.append(recurse(right, node_id))
        return node_id

    recurse(np.arange(g.n, dtype=np.int64), -1)
    tree = PartitionTree(n=g.n, nodes=nodes)
    tree.validate(g)
    return tree


def save_partition(tree: PartitionTree, path):
    """One line per tree node: `node_id parent_id sep:<ids> left:<ids> right:<ids>`."""
    with open(path, "w") as fh:
        for t in tree.nodes:
            fh.write(f"{t.node_id} {t.parent}"
                     f" sep:{','.join(map(str, t.sep.tolist()))}"
                     f" left:{','.join(map(str, t.left.tolist()))}"
                     f" right:{','.join(map(str, t.right.tolist()))}\n")


def load_partition(path, n=None) -> PartitionTree:
    nodes = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                parts = line.split()
                node_id, parent = int(parts[0]), int(parts[1])
                fields = {}
                for tok in parts[2:]:
                    name, _, body = tok.partition(":")
                    ids = [int(x) for x in body.split(",") if x != ""]
                    fields[name] = np.array(sorted(ids), dtype=np.int64)
                node = PartitionNode(node_id=node_id, parent=parent,
                                     sep=fields["sep"], left=fields["left"],
                                     right=fields["right"])
            except (ValueError, KeyError, IndexError) as exc:
                raise PartitionError(f"{path}:{lineno}: malformed partition line") from exc
            nodes[node_id] = node
    if not nodes or 0 not in nodes:
        raise PartitionError("partition file has no root (node 0)")
    ordered = [nodes[i] for i in sorted(nodes)]
    if [t.node_id for t in ordered] != list(range(len(ordered))):
        raise PartitionError("partition node ids must be 0..count-1")
    for t in ordered:
        if t.parent >= 0:
            nodes[t.parent].children.append(t.node_id)
    total = ordered[0].part.shape[0]
    return PartitionTree(n=int(n) if n is not None else int(total), nodes=ordered)


def _submatrix(indptr, indices, data, rows, col_lookup):
    """CSR block (rows x mapped-columns); preserves in-row column order."""
    counts = (indptr[rows + 1] - indptr[rows]).astype(np.int64)
    total = int(counts.sum())
    sub_ptr = np.zeros(rows.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=sub_ptr[1:])
    if total == 0:
        return sub_ptr, np.zeros(0, dtype=np.int64), np.zeros(0)
    take = np.repeat(indptr[rows] - sub_ptr[:-1], counts) + np.arange(total)
    cols = col_lookup[indices[take]]
    vals = data[take]
    keep = cols >= 0
    if not np.all(keep):
        # reduce over non-empty rows only (zero-length reduceat segments
        # would swallow part of the preceding row)
        nonempty = np.flatnonzero(counts > 0)
        kept = np.add.reduceat(keep.astype(np.int64), sub_ptr[:-1][nonempty])
        kept_per_row = np.zeros(rows.shape[0], dtype=np.int64)
        kept_per_row[nonempty] = kept
        sub_ptr = np.zeros(rows.shape[0] + 1, dtype=np.int64)
        np.cumsum(kept_per_row, out=sub_ptr[1:])
        cols, vals = cols[keep], vals[keep]
    return sub_ptr, np.ascontiguousarray(cols), np.ascontiguousarray(vals)


class _BlockState:
    __slots__ = ("part", "sep", "pos_self", "a_pp", "cross", "prev", "cur", "scratch")


def nd_pdos_moments(sop: ScaledOperator, tree: PartitionTree, m_max,
                    threads=1) -> ChebMoments:
    """Exact per-node moments c_mk = T_m(H)_kk via the partition tree."""
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    n = sop.n
    if tree.n != n:
        raise PartitionError("partition tree built for a different graph")
    scaled = sop.to_csr()
    indptr, indices, data = scaled.csr_arrays()
    tree.validate_arrays(n, indptr, indices)

    lookup = np.full(n, -1, dtype=np.int64)
    states = []
    for t in tree.nodes:
        st = _BlockState()
        st.part = t.part
        st.sep = t.sep
        st.pos_self = np.searchsorted(st.part, st.sep)
        lookup[st.part] = np.arange(st.part.shape[0])
        st.a_pp = _submatrix(indptr, indices, data, st.part, lookup)
        lookup[st.part] = -1
        st.cross = []
        for anc in tree.ancestors(t.node_id):
            anc_sep = tree.nodes[anc].sep
            if anc_sep.size == 0:
                continue
            lookup[anc_sep] = np.arange(anc_sep.shape[0])
            blk = _submatrix(indptr, indices, data, st.part, lookup)
            lookup[anc_sep] = -1
            if blk[1].size:
                anc_pos = np.searchsorted(states[anc].part, st.sep)
                st.cross.append((anc, anc_pos, blk))
        states.append(st)

    moments = np.empty((n, m_max + 1))
    moments[:, 0] = 1.0
    for st in states:
        ns, npart = st.sep.shape[0], st.part.shape[0]
        st.prev = np.zeros((npart, ns))
        st.prev[st.pos_self, np.arange(ns)] = 1.0
        dense = np.zeros((npart, ns))
        lookup[st.sep] = np.arange(ns)
        sub = _submatrix(indptr, indices, data, st.part, lookup)
        lookup[st.sep] = -1
        rows = np.repeat(np.arange(npart), np.diff(sub[0]))
        dense[rows, sub[1]] = sub[2]
        st.cur = dense
        st.scratch = np.empty_like(dense)
        if m_max >= 1:
            moments[st.sep, 1] = st.cur[st.pos_self, np.arange(ns)]

    for m in range(1, m_max):
        for st in states:
            ns = st.sep.shape[0]
            ptr, idx, val = st.a_pp
            nxt = _kernels.csr_matvec(ptr, idx, val, st.cur, out=st.scratch,
                                      threads=threads)
            nxt *= 2.0
            nxt -= st.prev
            for anc, anc_pos, (bptr, bidx, bval) in st.cross:
                # T_m(anc_sep, sep) read from the ancestor's block by symmetry;
                # pre-order means the ancestor's prev slot already holds T_m.
                tm_cross = np.ascontiguousarray(states[anc].prev[anc_pos].T)
                nxt += 2.0 * _kernels.csr_matvec(bptr, bidx, bval, tm_cross,
                                                 threads=threads)
            st.prev, st.cur, st.scratch = st.cur, nxt, st.prev
            moments[st.sep, m + 1] = st.cur[st.pos_self, np.arange(ns)]

    return ChebMoments(mode=MODE_PER_NODE, values=moments,
                       scale_map=sop.scale_map,
                       probe_meta={"kind": "exact", "method": "nested-dissection"})
