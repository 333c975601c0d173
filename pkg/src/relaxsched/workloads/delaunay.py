"""Incremental 2D Delaunay triangulation (Bowyer-Watson with conflict
lists) over integer grid points, using exact integer predicates.

A point "encroaches" a triangle iff it lies strictly inside the triangle's
circumcircle.  An unprocessed point is processable iff, for every triangle
it encroaches, it is the smallest-label unprocessed point encroaching that
triangle or any triangle sharing an edge with it.
"""

from __future__ import annotations

import random

from ..errors import ContractError, InputError
from ..sched import LabeledTask

GRID_SIDE = 1 << 30


def orientation(ax, ay, bx, by, cx, cy):
    """Sign of the signed area of (a, b, c): >0 counterclockwise."""
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def in_circumcircle(ax, ay, bx, by, cx, cy, px, py):
    """True iff p is strictly inside the circumcircle of CCW triangle
    (a, b, c).  Exact integer arithmetic."""
    adx = ax - px
    ady = ay - py
    bdx = bx - px
    bdy = by - py
    cdx = cx - px
    cdy = cy - py
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    det = (ad * (bdx * cdy - bdy * cdx)
           - bd * (adx * cdy - ady * cdx)
           + cd * (adx * bdy - ady * bdx))
    return det > 0


class DelaunayWorkload:
    """Insert n labeled points into a triangulation seeded with a large
    super-triangle (vertices at 4x the grid extent, excluded from the
    final mesh)."""

    def __init__(self, points):
        points = [(int(x), int(y)) for x, y in points]
        if len(set(points)) != len(points):
            raise InputError("duplicate input points")
        if not points:
            raise InputError("need at least one point")
        self.n = len(points)
        g = GRID_SIDE
        # coords[1..n] are input points; n+1..n+3 the super-triangle.
        self.coords = [None] + points + [
            (-4 * g, -4 * g), (9 * g, -4 * g), (-4 * g, 9 * g)]
        self.super_vertices = (self.n + 1, self.n + 2, self.n + 3)
        self._reset()

    @classmethod
    def generate(cls, n, rng_seed):
        if n > GRID_SIDE * GRID_SIDE:
            raise InputError("n exceeds grid capacity")
        rng = random.Random(rng_seed)
        seen = set()
        points = []
        while len(points) < n:
            p = (rng.randrange(GRID_SIDE), rng.randrange(GRID_SIDE))
            if p not in seen:
                seen.add(p)
                points.append(p)
        return cls(points)

    @classmethod
    def from_tsv(cls, path):
        points = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                x, y = line.split("\t")
                points.append((int(x), int(y)))
        return cls(points)

    def write_tsv(self, path):
        with open(path, "w") as fh:
            for x, y in self.coords[1:self.n + 1]:
                fh.write(f"{x}\t{y}\n")

    def _reset(self):
        self.processed = [False] * (self.n + 1)
        self._next_tid = 1
        self.tri_verts = {}    # tid -> (a, b, c) CCW vertex ids
        self.edge_tris = {}    # frozenset({u, v}) -> set of tids
        self.tri_pts = {}      # tid -> set of unprocessed encroaching labels
        self.pt_tris = {}      # label -> set of tids it encroaches
        a, b, c = self.super_vertices
        t0 = self._add_triangle(a, b, c)
        self.tri_pts[t0] = set(range(1, self.n + 1))
        for label in range(1, self.n + 1):
            self.pt_tris[label] = {t0}

    def _add_triangle(self, a, b, c):
        ax, ay = self.coords[a]
        bx, by = self.coords[b]
        cx, cy = self.coords[c]
        orient = orientation(ax, ay, bx, by, cx, cy)
        if orient == 0:
            raise InputError(f"degenerate triangle ({a}, {b}, {c})")
        if orient < 0:
            b, c = c, b
        tid = self._next_tid
        self._next_tid += 1
        self.tri_verts[tid] = (a, b, c)
        for edge in (frozenset((a, b)), frozenset((b, c)), frozenset((c, a))):
            self.edge_tris.setdefault(edge, set()).add(tid)
        self.tri_pts[tid] = set()
        return tid

    def _remove_triangle(self, tid):
        a, b, c = self.tri_verts.pop(tid)
        for edge in (frozenset((a, b)), frozenset((b, c)), frozenset((c, a))):
            owners = self.edge_tris[edge]
            owners.discard(tid)
            if not owners:
                del self.edge_tris[edge]
        for label in self.tri_pts.pop(tid):
            self.pt_tris[label].discard(tid)

    def _encroaches(self, label, tid):
        a, b, c = self.tri_verts[tid]
        ax, ay = self.coords[a]
        bx, by = self.coords[b]
        cx, cy = self.coords[c]
        px, py = self.coords[label]
        return in_circumcircle(ax, ay, bx, by, cx, cy, px, py)

    def _neighborhood(self, tid):
        a, b, c = self.tri_verts[tid]
        seen = {tid}
        for edge in (frozenset((a, b)), frozenset((b, c)), frozenset((c, a))):
            seen.update(self.edge_tris.get(edge, ()))
        return seen

    # -- workload contract -------------------------------------------------

    def initial_tasks(self):
        return [LabeledTask(task_id=label, label=label)
                for label in range(1, self.n + 1)]

    def is_ready(self, label) -> bool:
        for tid in self.pt_tris[label]:
            for other in self._neighborhood(tid):
                for candidate in self.tri_pts[other]:
                    if candidate < label:
                        return False
        return True

    def unprocessed_ancestors(self, label):
        found = set()
        for tid in self.pt_tris[label]:
            for other in self._neighborhood(tid):
                for candidate in self.tri_pts[other]:
                    if candidate < label:
                        found.add(candidate)
        return found

    def process(self, label):
        cavity = list(self.pt_tris[label])
        if not cavity:
            raise ContractError(f"point {label} encroaches no triangle")
        cavity_set = set(cavity)
        boundary = []
        candidates = set()
        for tid in cavity:
            a, b, c = self.tri_verts[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                owners = self.edge_tris[frozenset((u, v))]
                across = owners - {tid}
                if across and next(iter(across)) in cavity_set:
                    continue  # interior edge of the cavity
                boundary.append((u, v))
                # The circumdisk of a new triangle on this edge is covered
                # by the disks of the killed triangle and of the surviving
                # neighbor across the edge, so both conflict lists feed the
                # new candidates.
                for neighbor in across:
                    candidates.update(self.tri_pts[neighbor])
        for tid in cavity:
            candidates.update(self.tri_pts[tid])
        candidates.discard(label)
        for tid in cavity:
            self._remove_triangle(tid)
        px, py = self.coords[label]
        new_tids = []
        for u, v in boundary:
            new_tids.append(self._add_triangle(u, v, label))
        for candidate in candidates:
            for tid in new_tids:
                if self._encroaches(candidate, tid):
                    self.tri_pts[tid].add(candidate)
                    self.pt_tris[candidate].add(tid)
        self.processed[label] = True
        del self.pt_tris[label]
        return None

    # -- verification helpers ----------------------------------------------

    def final_triangles(self):
        """Canonical final mesh: sorted vertex triples of triangles with no
        super-triangle vertex."""
        cutoff = self.n
        return frozenset(
            tuple(sorted(verts))
            for verts in self.tri_verts.values()
            if max(verts) <= cutoff)

    def all_triangles(self):
        return frozenset(tuple(sorted(v)) for v in self.tri_verts.values())

    def validate_empty_circumcircles(self, labels=None) -> bool:
        """Brute-force validator: no (processed) point lies strictly inside
        the circumcircle of any triangle.  Checks all input points by
        default."""
        if labels is None:
            labels = range(1, self.n + 1)
        labels = [l for l in labels]
        for tid, verts in self.tri_verts.items():
            for label in labels:
                if label in verts:
                    continue
                if self._encroaches(label, tid):
                    return False
        return True


def sequential_dependency_oracle(workload: DelaunayWorkload):
    """Replay insertion in label order on a fresh copy of the instance and
    record encroachment-overlap pairs: right before point i is inserted,
    every unprocessed j > i whose encroaching region shares a triangle or
    an edge-adjacent triangle with i's region depends on i.

    Returns {label: set of ancestor labels}."""
    replay = DelaunayWorkload(workload.coords[1:workload.n + 1])
    ancestors = {label: set() for label in range(1, replay.n + 1)}
    for label in range(1, replay.n + 1):
        region = set()
        for tid in replay.pt_tris[label]:
            region.update(replay._neighborhood(tid))
        for tid in region:
            for other in replay.tri_pts[tid]:
                if other > label:
                    ancestors[other].add(label)
        replay.process(label)
    return ancestors
