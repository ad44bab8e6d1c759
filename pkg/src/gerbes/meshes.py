"""Builders for the test complexes and their standard covers.

The workhorse is the edgewise (Freudenthal) subdivision: every simplex of a
complex is cut into ``N**d`` small simplices whose vertices are lattice points
``x`` with nonnegative integer barycentric coordinates summing to ``N``. The
coarse vertices then give a cover ``U_v = {x_v >= 1}`` whose nerve is the
coarse complex itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

from .complex import Chain, OrientedSimplicialComplex


def simplex(n: int) -> OrientedSimplicialComplex:
    """The full n-simplex on vertices 0..n."""
    return OrientedSimplicialComplex([tuple(range(n + 1))])


def boundary_simplex(n: int) -> OrientedSimplicialComplex:
    """Boundary of the n-simplex, a triangulated (n-1)-sphere."""
    return OrientedSimplicialComplex(combinations(range(n + 1), n))


def circle(n: int) -> OrientedSimplicialComplex:
    """Cycle graph on n >= 3 vertices."""
    return OrientedSimplicialComplex((i, (i + 1) % n) for i in range(n))


# minimal six-vertex real projective plane
RP2_TRIANGLES = [
    (1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
    (2, 3, 5), (2, 4, 5), (2, 4, 6), (3, 4, 6), (3, 5, 6),
]


def projective_plane() -> OrientedSimplicialComplex:
    return OrientedSimplicialComplex(RP2_TRIANGLES)


def product(K: OrientedSimplicialComplex, L: OrientedSimplicialComplex) -> tuple[OrientedSimplicialComplex, dict]:
    """Staircase triangulation of ``K x L`` using the vertex orders of both.

    Returns the complex (integer vertex ids) and the map id -> (k, l).
    """
    pairs = {}

    def vid(a, b):
        key = (a, b)
        if key not in pairs:
            pairs[key] = len(pairs)
        return pairs[key]

    tops_k = maximal_simplices(K)
    tops_l = maximal_simplices(L)
    cells = []
    for s in tops_k:
        for t in tops_l:
            p, q = len(s) - 1, len(t) - 1
            # monotone lattice paths from (0,0) to (p,q)
            for steps in combinations(range(p + q), p):
                i = j = 0
                path = [vid(s[0], t[0])]
                step_set = set(steps)
                for k in range(p + q):
                    if k in step_set:
                        i += 1
                    else:
                        j += 1
                    path.append(vid(s[i], t[j]))
                cells.append(path)
    labels = {v: k for k, v in pairs.items()}
    return OrientedSimplicialComplex(cells), labels


def maximal_simplices(K: OrientedSimplicialComplex) -> list[tuple]:
    faces = set()
    tops = []
    for k in range(K.dim, -1, -1):
        for s in K.simplices(k):
            if s not in faces:
                tops.append(s)
            for r in range(1, len(s)):
                faces.update(combinations(s, r))
    return tops


@dataclass(frozen=True)
class LatticeMesh:
    """Edgewise subdivision together with lattice coordinates.

    ``coordinates[i, j]`` is the barycentric weight (times ``level``) of fine
    vertex ``i`` on coarse vertex ``coarse.vertices[j]``.
    """

    complex: OrientedSimplicialComplex
    coarse: OrientedSimplicialComplex
    level: int
    coordinates: np.ndarray

    def coordinate_charts(self) -> list[list[int]]:
        """Chart ``U_v = {x_v >= 1}`` for every coarse vertex v."""
        verts = np.array(self.complex.vertices)
        return [verts[self.coordinates[:, j] >= 1].tolist() for j in range(self.coordinates.shape[1])]

    def cell_chain(self, cell: Sequence, orientation: Chain) -> Chain:
        """Fine top simplices inside a coarse cell, signed as in ``orientation``."""
        K = self.complex
        outside = [j for j, v in enumerate(self.coarse.vertices) if v not in set(cell)]
        F = K.face_array(K.dim)
        mask = np.all(self.coordinates[F][:, :, outside] == 0, axis=(1, 2)) if outside else np.ones(len(F), dtype=bool)
        return Chain(K, K.dim, np.where(mask, orientation.coefficients, 0))


def edgewise_subdivision(K: OrientedSimplicialComplex, level: int) -> LatticeMesh:
    """Freudenthal subdivision of every simplex of K into ``level**d`` pieces."""
    if level < 1:
        raise ValueError("subdivision level must be positive")
    n_coarse = K.count(0)
    points: dict[tuple, int] = {}
    cells = []

    def pid(x: tuple) -> int:
        if x not in points:
            points[x] = len(points)
        return points[x]

    for top in maximal_simplices(K):
        pos = [K.vertex_index[v] for v in top]
        d = len(pos) - 1
        if d == 0:
            x = [0] * n_coarse
            x[pos[0]] = level
            cells.append([pid(tuple(x))])
            continue
        perms = list(permutations(range(d)))
        for corner in np.ndindex(*([level] * d)):
            for perm in perms:
                y = list(corner)
                verts = [tuple(y)]
                for axis in perm:
                    y[axis] += 1
                    verts.append(tuple(y))
                if not all(_monotone(v, level) for v in verts):
                    continue
                simplex_ids = []
                for v in verts:
                    x = [0] * n_coarse
                    x[pos[0]] = level - v[0]
                    for i in range(1, d):
                        x[pos[i]] = v[i - 1] - v[i]
                    x[pos[d]] = v[d - 1]
                    simplex_ids.append(pid(tuple(x)))
                cells.append(simplex_ids)
    fine = OrientedSimplicialComplex(cells)
    coords = np.zeros((len(points), n_coarse), dtype=np.int64)
    for x, i in points.items():
        coords[i] = x
    return LatticeMesh(fine, K, level, coords)


def _monotone(y: Sequence[int], level: int) -> bool:
    prev = level
    for v in y:
        if v > prev or v < 0:
            return False
        prev = v
    return True


@dataclass(frozen=True)
class BarycentricSubdivision:
    """``complex`` has one vertex per simplex of ``coarse``; ``cells[i]`` names it."""

    complex: OrientedSimplicialComplex
    coarse: OrientedSimplicialComplex
    cells: list[tuple]

    def star_charts(self) -> list[list[int]]:
        """Open-star chart of every coarse vertex: the cells containing it."""
        return [
            [i for i, cell in enumerate(self.cells) if v in cell]
            for v in self.coarse.vertices
        ]


def barycentric_subdivision(K: OrientedSimplicialComplex) -> BarycentricSubdivision:
    cells = [s for k in range(K.dim + 1) for s in K.simplices(k)]
    ids = {s: i for i, s in enumerate(cells)}
    flags = []
    for top in maximal_simplices(K):
        for order in permutations(top):
            flags.append([ids[tuple(sorted(order[: r + 1]))] for r in range(len(order))])
    return BarycentricSubdivision(OrientedSimplicialComplex(flags), K, cells)


def s3_mesh(level: int = 12) -> LatticeMesh:
    """Edgewise subdivision of the boundary of the 4-simplex (a 3-sphere)."""
    return edgewise_subdivision(boundary_simplex(4), level)


def s2_mesh(level: int = 4) -> LatticeMesh:
    """Edgewise subdivision of the boundary of the 3-simplex (a 2-sphere)."""
    return edgewise_subdivision(boundary_simplex(3), level)


def six_cycle_charts() -> tuple[OrientedSimplicialComplex, list[list[int]]]:
    """A 6-vertex circle with three overlapping arcs as a good cover."""
    return circle(6), [[0, 1, 2, 3], [2, 3, 4, 5], [4, 5, 0, 1]]
