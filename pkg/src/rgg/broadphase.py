"""Static AABB tree with box and sphere overlap queries.

The hierarchy lives in flat arrays (one item per leaf) and is traversed by a
compiled stack-based loop, which keeps per-query overhead in the microseconds.
"""

from __future__ import annotations

import numba
import numpy as np

_BOX, _SPHERE = 0, 1


@numba.njit(cache=True)
def _node_hit(kind, qa, qb, q, lo, hi, n):
    if kind == _BOX:
        for k in range(3):
            if lo[n, k] > qb[q, k] or qa[q, k] > hi[n, k]:
                return False
        return True
    d2 = 0.0
    for k in range(3):
        c = qa[q, k]
        if c < lo[n, k]:
            d = lo[n, k] - c
        elif c > hi[n, k]:
            d = c - hi[n, k]
        else:
            d = 0.0
        d2 += d * d
    return d2 <= qb[q, 0] * qb[q, 0]


@numba.njit(cache=True)
def _traverse(kind, qa, qb, lo, hi, left, right, item, stack_size):
    cap = 64
    out_q = np.empty(cap, np.int64)
    out_i = np.empty(cap, np.int64)
    m = 0
    stack = np.empty(stack_size, np.int64)
    for q in range(qa.shape[0]):
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            n = stack[top]
            if not _node_hit(kind, qa, qb, q, lo, hi, n):
                continue
            if item[n] >= 0:
                if m == cap:
                    cap *= 2
                    grown_q = np.empty(cap, np.int64)
                    grown_i = np.empty(cap, np.int64)
                    grown_q[:m] = out_q[:m]
                    grown_i[:m] = out_i[:m]
                    out_q, out_i = grown_q, grown_i
                out_q[m] = q
                out_i[m] = item[n]
                m += 1
            else:
                stack[top] = right[n]
                stack[top + 1] = left[n]
                top += 2
    return out_q[:m], out_i[:m]


class AabbTree:
    """Binary bounding-volume hierarchy; one item per leaf, median split on the longest centroid axis."""

    def __init__(self, ids, lo, hi):
        self.ids = list(ids)
        self.item_lo = np.asarray(lo, dtype=float).reshape(-1, 3)
        self.item_hi = np.asarray(hi, dtype=float).reshape(-1, 3)
        if len(self.item_lo) != len(self.ids) or len(self.item_hi) != len(self.ids):
            raise ValueError("ids and boxes differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate item id")
        self._build()

    @classmethod
    def from_items(cls, items):
        items = sorted(items, key=lambda it: it[0])
        ids = [i for i, _ in items]
        lo = np.array([b.min for _, b in items]).reshape(-1, 3)
        hi = np.array([b.max for _, b in items]).reshape(-1, 3)
        return cls(ids, lo, hi)

    def __len__(self):
        return len(self.ids)

    def _build(self):
        n = len(self.ids)
        cap = max(2 * n - 1, 0)
        self.lo = np.zeros((cap, 3))
        self.hi = np.zeros((cap, 3))
        self.left = np.full(cap, -1, dtype=np.int64)
        self.right = np.full(cap, -1, dtype=np.int64)
        self.item = np.full(cap, -1, dtype=np.int64)
        self.height = 0
        if n == 0:
            return
        centroids = 0.5 * (self.item_lo + self.item_hi)
        next_free = 1
        stack = [(0, np.arange(n), 1)]
        while stack:
            node, members, depth = stack.pop()
            self.height = max(self.height, depth)
            self.lo[node] = self.item_lo[members].min(axis=0)
            self.hi[node] = self.item_hi[members].max(axis=0)
            if len(members) == 1:
                self.item[node] = members[0]
                continue
            c = centroids[members]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            order = members[np.argsort(c[:, axis], kind="stable")]
            half = len(order) // 2
            self.left[node], self.right[node] = next_free, next_free + 1
            next_free += 2
            stack.append((self.left[node], order[:half], depth + 1))
            stack.append((self.right[node], order[half:], depth + 1))

    @property
    def n_nodes(self):
        return len(self.left)

    def _query(self, kind, qa, qb):
        if len(self.ids) == 0 or len(qa) == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        # depth-first: one pending sibling per level at most
        return _traverse(kind, qa, qb, self.lo, self.hi, self.left, self.right, self.item, self.height + 2)

    def query_boxes(self, lo, hi):
        """All (query, item position) pairs whose closed boxes overlap."""
        lo = np.ascontiguousarray(lo, dtype=float).reshape(-1, 3)
        hi = np.ascontiguousarray(hi, dtype=float).reshape(-1, 3)
        return self._query(_BOX, lo, hi)

    def query_spheres(self, centers, radii):
        """All (query, item position) pairs where the closed sphere touches the item box."""
        centers = np.ascontiguousarray(centers, dtype=float).reshape(-1, 3)
        radii = np.ascontiguousarray(radii, dtype=float).reshape(-1, 1)
        if len(radii) != len(centers):
            raise ValueError("one radius per center")
        return self._query(_SPHERE, centers, radii)


def build_tree(items):
    """Build from ``(id, AABB)`` pairs; ids must be unique and mutually sortable."""
    return AabbTree.from_items(list(items))


def query_aabb(t, q):
    _, pos = t.query_boxes(q.min, q.max)
    return {t.ids[i] for i in pos}


def query_sphere(t, s):
    _, pos = t.query_spheres(s.center, s.radius)
    return {t.ids[i] for i in pos}


__all__ = ["AabbTree", "build_tree", "query_aabb", "query_sphere"]
