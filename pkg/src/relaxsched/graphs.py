"""Weighted digraphs: CSR storage, random G(n, m) generation, and loaders
for DIMACS `.gr` shortest-path files and 0-indexed TSV edge lists."""

from __future__ import annotations

import numpy as np

from .errors import InputError, ParseError


class WeightedDigraph:
    """Adjacency in CSR form; all edge weights strictly positive."""

    def __init__(self, n, edges, source=0):
        if n < 1:
            raise InputError("graph needs at least one vertex")
        if not (0 <= source < n):
            raise InputError(f"source {source} out of range")
        self.n = n
        self.source = source
        edges = sorted(edges)
        self.m = len(edges)
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        self.targets = np.empty(self.m, dtype=np.int64)
        self.weights = np.empty(self.m, dtype=np.int64)
        for idx, (u, v, w) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) out of range")
            if w <= 0:
                raise InputError(f"nonpositive weight {w} on edge ({u}, {v})")
            self.indptr[u + 1] += 1
            self.targets[idx] = v
            self.weights[idx] = w
        np.cumsum(self.indptr, out=self.indptr)
        # Python-list mirrors for the hot relaxation loop.
        self._targets_list = self.targets.tolist()
        self._weights_list = self.weights.tolist()
        self._indptr_list = self.indptr.tolist()

    @classmethod
    def from_arrays(cls, n, us, vs, ws, source=0):
        """Vectorized CSR construction (used by the random generator, where
        per-edge Python loops would dominate)."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        ws = np.asarray(ws, dtype=np.int64)
        if us.size and (us.min() < 0 or us.max() >= n
                        or vs.min() < 0 or vs.max() >= n):
            raise InputError("edge endpoint out of range")
        if ws.size and ws.min() <= 0:
            raise InputError("nonpositive edge weight")
        graph = cls.__new__(cls)
        graph.n = n
        graph.source = source
        graph.m = int(us.size)
        order = np.argsort(us, kind="stable")
        graph.targets = vs[order]
        graph.weights = ws[order]
        counts = np.bincount(us, minlength=n)
        graph.indptr = np.concatenate(
            [[0], np.cumsum(counts)]).astype(np.int64)
        graph._targets_list = graph.targets.tolist()
        graph._weights_list = graph.weights.tolist()
        graph._indptr_list = graph.indptr.tolist()
        return graph

    def out_edges(self, v):
        lo, hi = self._indptr_list[v], self._indptr_list[v + 1]
        return zip(self._targets_list[lo:hi], self._weights_list[lo:hi])

    def min_weight(self):
        if self.m == 0:
            raise InputError("graph has no edges")
        return int(self.weights.min())

    def edge_list(self):
        for u in range(self.n):
            lo, hi = self._indptr_list[u], self._indptr_list[u + 1]
            for idx in range(lo, hi):
                yield u, self._targets_list[idx], self._weights_list[idx]


def generate_random_graph(n, m, rng_seed, *, w_min=1, w_max=100, source=0):
    """Uniform multigraph-free undirected G(n, m) with integer weights
    uniform in [w_min, w_max]; stored as a symmetric digraph."""
    if m > n * (n - 1) // 2:
        raise InputError("m exceeds simple-graph capacity")
    rng = np.random.default_rng(rng_seed)
    chosen = np.empty(0, dtype=np.int64)
    while chosen.size < m:
        need = m - chosen.size
        u = rng.integers(0, n, size=2 * need + 16, dtype=np.int64)
        v = rng.integers(0, n, size=2 * need + 16, dtype=np.int64)
        mask = u != v
        u, v = u[mask], v[mask]
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        keys = lo * n + hi
        chosen = np.unique(np.concatenate([chosen, keys]))
        # np.unique sorts; subsample deterministically to keep uniformity
        if chosen.size > m:
            chosen = rng.permutation(chosen)[:m]
    lo = chosen // n
    hi = chosen % n
    w = rng.integers(w_min, w_max + 1, size=m, dtype=np.int64)
    us = np.concatenate([lo, hi])
    vs = np.concatenate([hi, lo])
    ws = np.concatenate([w, w])
    return WeightedDigraph.from_arrays(n, us, vs, ws, source=source)


def load_graph(path, fmt="dimacs-gr", source=0):
    if fmt == "dimacs-gr":
        return _load_dimacs(path, source)
    if fmt == "tsv":
        return _load_tsv(path, source)
    raise InputError(f"unknown graph format {fmt!r}")


def _load_dimacs(path, source):
    n = None
    m = None
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("c"):
                continue
            parts = line.split()
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "sp":
                    raise ParseError("malformed problem line", path, lineno)
                n, m = int(parts[2]), int(parts[3])
            elif parts[0] == "a":
                if n is None:
                    raise ParseError("arc before problem line", path, lineno)
                if len(parts) != 4:
                    raise ParseError("malformed arc line", path, lineno)
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
                if not (1 <= u <= n and 1 <= v <= n):
                    raise ParseError(
                        f"arc references vertex outside 1..{n}", path, lineno)
                if w <= 0:
                    raise ParseError(f"nonpositive weight {w}", path, lineno)
                edges.append((u - 1, v - 1, w))
            else:
                raise ParseError(f"unknown line type {parts[0]!r}",
                                 path, lineno)
    if n is None:
        raise ParseError("missing problem line", path)
    if len(edges) != m:
        raise ParseError(
            f"header declares {m} arcs but file contains {len(edges)}", path)
    return WeightedDigraph(n, edges, source=source)


def _load_tsv(path, source):
    edges = []
    top = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError("expected u<TAB>v<TAB>w", path, lineno)
            u, v, w = int(parts[0]), int(parts[1]), int(parts[2])
            if u < 0 or v < 0:
                raise ParseError("negative vertex id", path, lineno)
            if w <= 0:
                raise ParseError(f"nonpositive weight {w}", path, lineno)
            edges.append((u, v, w))
            top = max(top, u, v)
    if not edges:
        raise ParseError("empty graph file", path)
    return WeightedDigraph(top + 1, edges, source=source)


def write_dimacs(graph, path):
    with open(path, "w") as fh:
        fh.write(f"p sp {graph.n} {graph.m}\n")
        for u, v, w in graph.edge_list():
            fh.write(f"a {u + 1} {v + 1} {w}\n")
