"""Good covers, nerves and ℂ×-valued Čech cochains.

A cover is a list of charts, each a set of base vertices spanning a full
subcomplex. A Čech cochain of level q assigns to every nerve q-simplex a
nonzero complex function on the vertices of the corresponding overlap. Values
are stored as principal logarithms ``log|z| + i*arg z`` with ``arg`` in
``(-pi, pi]``, so multiplication is addition followed by angle wrapping.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components

from . import _linalg
from .complex import OrientedSimplicialComplex, orient
from .errors import (
    BranchAmbiguity,
    ClassNonTrivial,
    CoverNotGood,
    InconsistentInput,
    NonIntegralResult,
    NotACocycle,
    NotAnIntegerCocycle,
    PartitionInvalid,
)

TWO_PI = 2 * math.pi
INTEGRALITY_TOL = 1e-6
SOLVER_TOL = 1e-9
EXACT_TOL = 1e-12


def wrap_angle(theta):
    """Map angles into ``(-pi, pi]``."""
    out = np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), TWO_PI)
    return out if np.ndim(out) else float(out)


def principal_log(logs):
    """Normalize complex logarithms so the imaginary part lies in ``(-pi, pi]``."""
    logs = np.asarray(logs, dtype=complex)
    return logs.real + 1j * wrap_angle(logs.imag)


@dataclass(frozen=True)
class CxValue:
    """A nonzero complex number as ``exp(log_modulus + i*angle)``."""

    log_modulus: float
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "log_modulus", float(self.log_modulus))
        object.__setattr__(self, "angle", wrap_angle(self.angle))

    @classmethod
    def from_log(cls, log: complex) -> "CxValue":
        return cls(log.real, log.imag)

    @classmethod
    def from_complex(cls, z: complex) -> "CxValue":
        if z == 0:
            raise InconsistentInput("zero is not in ℂ×")
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @property
    def log(self) -> complex:
        return complex(self.log_modulus, self.angle)

    def to_complex(self) -> complex:
        return complex(np.exp(self.log))

    def __mul__(self, other: "CxValue") -> "CxValue":
        return CxValue(self.log_modulus + other.log_modulus, self.angle + other.angle)

    def __truediv__(self, other: "CxValue") -> "CxValue":
        return CxValue(self.log_modulus - other.log_modulus, self.angle - other.angle)

    def inverse(self) -> "CxValue":
        return CxValue(-self.log_modulus, -self.angle)

    def distance_to_one(self) -> float:
        return float(abs(self.log))


# ---------------------------------------------------------------------------
# covers


class CoverNerve:
    """A cover of a simplicial complex by full subcomplexes, with its nerve.

    Args:
        base: the complex being covered.
        charts: vertex sets, one per chart; chart indices are 0, 1, ...
        require_good: verify that every overlap is connected with vanishing
            rational first homology and raise ``CoverNotGood`` otherwise.

    Every simplex of ``base`` must lie in at least one chart.
    """

    def __init__(self, base: OrientedSimplicialComplex, charts: Sequence[Iterable[Hashable]], require_good: bool = True):
        self.base = base
        n = base.count(0)
        masks = np.zeros((len(charts), n), dtype=bool)
        for a, chart in enumerate(charts):
            for v in chart:
                if v not in base.vertex_index:
                    raise InconsistentInput(f"chart {a} names unknown vertex {v!r}")
                masks[a, base.vertex_index[v]] = True
            if not masks[a].any():
                raise InconsistentInput(f"chart {a} is empty")
        if len(charts) == 0:
            raise InconsistentInput("a cover needs at least one chart")
        self.masks = masks
        self.charts = [tuple(np.array(base.vertices, dtype=object)[m].tolist()) for m in masks]
        if not masks.any(axis=0).all():
            missing = [base.vertices[i] for i in np.nonzero(~masks.any(axis=0))[0]]
            raise CoverNotGood(f"vertices not covered: {missing[:5]}")
        for k in range(1, base.dim + 1):
            inside = np.zeros(base.count(k), dtype=bool)
            for m in masks:
                inside |= base.induced_mask(m, k)
            if not inside.all():
                bad = base.simplices(k)[int(np.argmin(inside))]
                raise CoverNotGood(f"simplex {bad} lies in no chart")
        chart_sets = {tuple(np.nonzero(masks[:, v])[0].tolist()) for v in range(n)}
        self.nerve = OrientedSimplicialComplex(chart_sets)
        self.vertex_charts = [tuple(np.nonzero(masks[:, v])[0].tolist()) for v in range(n)]
        self._overlap_cache: dict[tuple, np.ndarray] = {}
        self.is_good = True
        if require_good:
            self.check_good()

    @property
    def n_charts(self) -> int:
        return self.masks.shape[0]

    def overlap_mask(self, sigma: Sequence[int]) -> np.ndarray:
        key = tuple(sorted(set(sigma)))
        if key not in self._overlap_cache:
            self._overlap_cache[key] = np.logical_and.reduce(self.masks[list(key)], axis=0)
        return self._overlap_cache[key]

    def overlap_vertices(self, sigma: Sequence[int]) -> np.ndarray:
        return np.nonzero(self.overlap_mask(sigma))[0]

    def overlap(self, sigma: Sequence[int]) -> OrientedSimplicialComplex | None:
        return self.base.full_subcomplex(self.overlap_mask(sigma))

    def check_good(self) -> None:
        for k in range(self.nerve.dim + 1):
            for sigma in self.nerve.simplices(k):
                b0, b1 = overlap_betti(self.base, self.overlap_mask(sigma))
                if b0 != 1 or b1 != 0:
                    self.is_good = False
                    raise CoverNotGood(f"overlap {sigma} has b0={b0}, b1={b1}")

    @cached_property
    def _adjacency(self) -> sp.csr_matrix:
        return self.base.edge_graph()

    def overlap_graph(self, sigma: Sequence[int]) -> tuple[np.ndarray, sp.csr_matrix]:
        """Vertex positions of the overlap and its edge graph in local indices."""
        verts = self.overlap_vertices(sigma)
        return verts, self._adjacency[verts][:, verts]

    def __repr__(self) -> str:
        return f"CoverNerve(charts={self.n_charts}, nerve={self.nerve!r})"


def overlap_betti(K: OrientedSimplicialComplex, vertex_mask: np.ndarray) -> tuple[int, int]:
    """Rational b0 and b1 of the full subcomplex on ``vertex_mask``.

    Elementary collapses shrink the subcomplex first; ranks mod a large prime
    finish whatever is left.
    """
    alive = [K.induced_mask(vertex_mask, k).copy() for k in range(K.dim + 1)]
    if not alive[0].any():
        return 0, 0
    _collapse(K, alive)
    n0 = int(alive[0].sum())
    n1 = int(alive[1].sum()) if K.dim >= 1 else 0
    if n0 == 1 and n1 == 0:
        return 1, 0
    verts = np.nonzero(alive[0])[0]
    if n1:
        e = K.face_array(1)[alive[1]]
        remap = -np.ones(K.count(0), dtype=np.int64)
        remap[verts] = np.arange(len(verts))
        a, b = remap[e[:, 0]], remap[e[:, 1]]
        graph = sp.csr_matrix((np.ones(len(a)), (a, b)), shape=(n0, n0))
        b0 = connected_components(graph, directed=False)[0]
    else:
        b0 = n0
    rank2 = 0
    if K.dim >= 2 and alive[2].any():
        B2 = K.boundary(2)[alive[1]][:, alive[2]]
        rank2 = _linalg.sparse_rank(B2)
    b1 = n1 - (n0 - b0) - rank2
    return int(b0), int(b1)


def _collapse(K: OrientedSimplicialComplex, alive: list[np.ndarray]) -> None:
    faces_of = [None] + [sp.csc_matrix(abs(K.boundary(k))) for k in range(1, K.dim + 1)]
    cofaces_of = [sp.csr_matrix(abs(K.boundary(k + 1))) for k in range(K.dim)]
    counts = []
    for k in range(K.dim):
        B = cofaces_of[k]
        c = B @ alive[k + 1].astype(np.int64)
        counts.append(np.where(alive[k], c, 0))
    stack = [(k, int(i)) for k in range(K.dim) for i in np.nonzero(counts[k] == 1)[0]]
    while stack:
        k, i = stack.pop()
        if not alive[k][i] or counts[k][i] != 1:
            continue
        B = cofaces_of[k]
        cof = B.indices[B.indptr[i]:B.indptr[i + 1]]
        j = next(int(c) for c in cof if alive[k + 1][c])
        alive[k][i] = False
        alive[k + 1][j] = False
        F = faces_of[k + 1]
        for f in F.indices[F.indptr[j]:F.indptr[j + 1]]:
            if f != i and alive[k][f]:
                counts[k][f] -= 1
                if counts[k][f] == 1:
                    stack.append((k, int(f)))
        if k >= 1:
            F = faces_of[k]
            for f in F.indices[F.indptr[i]:F.indptr[i + 1]]:
                if alive[k - 1][f]:
                    counts[k - 1][f] -= 1
                    if counts[k - 1][f] == 1:
                        stack.append((k - 1, int(f)))


# ---------------------------------------------------------------------------
# partitions of unity


def admissible_vertices(cover: CoverNerve) -> np.ndarray:
    """``A[a, v]``: the closed star of v lies inside chart a."""
    adj = cover._adjacency
    outside = (~cover.masks).astype(np.int64)
    bad_neighbour = (adj @ outside.T).T > 0
    return cover.masks & ~bad_neighbour


def partition_of_unity(cover: CoverNerve, kind: str = "hat") -> np.ndarray:
    """A partition of unity ``psi[a, v]`` subordinate to the cover.

    ``psi[a, v] > 0`` only when the closed star of v lies in chart a, which
    makes cup products ``psi_a ∪ c`` well defined for cochains c that live on
    chart a alone.

    kinds:
        ``"hat"``: weight = edge distance from v to the non-admissible
            vertices of chart a; on edgewise meshes with coordinate charts this
            is the barycentric hat ``(x_a - 1)_+``.
        ``"flat"``: equal weight on every admissible chart.
    """
    A = admissible_vertices(cover)
    if not A.any(axis=0).all():
        v = cover.base.vertices[int(np.argmin(A.any(axis=0)))]
        raise PartitionInvalid(f"vertex {v!r} has no chart containing its closed star")
    if kind == "flat":
        w = A.astype(float)
    elif kind == "hat":
        w = np.vstack([_distance_to_complement(cover._adjacency, row) for row in A])
    else:
        raise PartitionInvalid(f"unknown partition kind {kind!r}")
    return w / w.sum(axis=0)


def _distance_to_complement(adj: sp.csr_matrix, inside: np.ndarray) -> np.ndarray:
    n = len(inside)
    dist = np.full(n, -1, dtype=np.int64)
    queue = deque()
    for v in np.nonzero(~inside)[0]:
        dist[v] = 0
        queue.append(int(v))
    while queue:
        v = queue.popleft()
        for w in adj.indices[adj.indptr[v]:adj.indptr[v + 1]]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(int(w))
    unreached = dist < 0
    if unreached.any():
        dist[unreached] = max(int(dist.max()), 0) + 1
    return dist.astype(float)


def validate_partition(cover: CoverNerve, psi: np.ndarray, tol: float = EXACT_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    if psi.shape != cover.masks.shape:
        raise PartitionInvalid(f"partition has shape {psi.shape}, expected {cover.masks.shape}")
    if (psi < -tol).any():
        raise PartitionInvalid("partition has negative values")
    if np.abs(psi.sum(axis=0) - 1).max() > 1e-9:
        raise PartitionInvalid("partition does not sum to one")
    if (np.abs(psi) > tol)[~admissible_vertices(cover)].any():
        raise PartitionInvalid("partition is not subordinate to the cover (closed-star condition)")
    return psi


def resolve_partition(cover: CoverNerve, partition) -> np.ndarray:
    if partition is None:
        return partition_of_unity(cover)
    if isinstance(partition, str):
        return partition_of_unity(cover, partition)
    return validate_partition(cover, partition)


# ---------------------------------------------------------------------------
# ℂ×-valued Čech cochains


class CxCochain:
    """ℂ×-valued Čech cochain of a given level on a cover.

    ``logs[sigma]`` (sigma an ascending nerve simplex) is a complex array over
    all base vertex positions; only entries inside ``overlap(sigma)`` carry
    meaning and the rest are kept at zero. Entries are principal logarithms.
    """

    def __init__(self, cover: CoverNerve, level: int, logs: Mapping[tuple, np.ndarray], normalize: bool = True):
        self.cover = cover
        self.level = level
        if level < 0:
            raise InconsistentInput(f"negative level {level}")
        n = cover.base.count(0)
        store: dict[tuple, np.ndarray] = {}
        for sigma in cover.nerve.simplices(level):
            store[sigma] = np.zeros(n, dtype=complex)
        for key, arr in logs.items():
            key = tuple(key)
            sign, ordered = orient(key)
            if ordered not in store:
                raise InconsistentInput(f"{key} is not a level-{level} nerve simplex")
            arr = np.asarray(arr, dtype=complex)
            if arr.shape != (n,):
                raise InconsistentInput("cochain values must cover every base vertex position")
            mask = cover.overlap_mask(ordered)
            vals = np.where(mask, sign * arr, 0)
            store[ordered] = principal_log(vals) if normalize else vals
        self.logs = store

    # construction helpers
    @classmethod
    def constant(cls, cover: CoverNerve, level: int, value: complex = 1.0) -> "CxCochain":
        log = np.log(complex(value))
        n = cover.base.count(0)
        return cls(cover, level, {s: np.full(n, log) for s in cover.nerve.simplices(level)})

    @classmethod
    def from_function(cls, cover: CoverNerve, level: int, fn: Callable[[tuple, Hashable], complex]) -> "CxCochain":
        """Values from ``fn(sigma, vertex_label)`` (a nonzero complex number)."""
        logs = {}
        for sigma in cover.nerve.simplices(level):
            arr = np.zeros(cover.base.count(0), dtype=complex)
            for v in cover.overlap_vertices(sigma):
                arr[v] = np.log(complex(fn(sigma, cover.base.vertices[v])))
            logs[sigma] = arr
        return cls(cover, level, logs)

    @classmethod
    def from_values(cls, cover: CoverNerve, level: int, values: Mapping[tuple, Mapping[Hashable, CxValue]]) -> "CxCochain":
        logs = {}
        for sigma, table in values.items():
            arr = np.zeros(cover.base.count(0), dtype=complex)
            for v, z in table.items():
                arr[cover.base.vertex_index[v]] = z.log
            logs[tuple(sigma)] = arr
        missing = cls._missing(cover, level, logs)
        if missing:
            raise InconsistentInput(f"cochain is undefined at {missing}")
        return cls(cover, level, logs)

    @staticmethod
    def _missing(cover, level, logs) -> list:
        present = {tuple(sorted(k)) for k in logs}
        return [s for s in cover.nerve.simplices(level) if s not in present]

    # access
    def log(self, sigma: Sequence[int]) -> np.ndarray:
        """Principal log array for ``sigma`` in any index order."""
        sigma = tuple(sigma)
        if len(set(sigma)) < len(sigma):
            return np.zeros(self.cover.base.count(0), dtype=complex)
        sign, ordered = orient(sigma)
        if sign == 1:
            return self.logs[ordered]
        return principal_log(-self.logs[ordered])

    def value(self, sigma: Sequence[int], vertex: Hashable) -> CxValue:
        i = self.cover.base.vertex_index[vertex]
        if not self.cover.overlap_mask(sigma)[i]:
            raise InconsistentInput(f"vertex {vertex!r} is not in overlap {tuple(sigma)}")
        return CxValue.from_log(self.log(sigma)[i])

    def values_on(self, sigma: Sequence[int]) -> np.ndarray:
        """Complex values on the overlap vertices (in base position order)."""
        return np.exp(self.log(sigma)[self.cover.overlap_mask(sigma)])

    # algebra
    def _same(self, other: "CxCochain") -> None:
        if other.cover is not self.cover or other.level != self.level:
            raise InconsistentInput("cochains live on different covers or levels")

    def __mul__(self, other: "CxCochain") -> "CxCochain":
        self._same(other)
        return CxCochain(self.cover, self.level, {s: self.logs[s] + other.logs[s] for s in self.logs})

    def __truediv__(self, other: "CxCochain") -> "CxCochain":
        self._same(other)
        return CxCochain(self.cover, self.level, {s: self.logs[s] - other.logs[s] for s in self.logs})

    def inverse(self) -> "CxCochain":
        return CxCochain(self.cover, self.level, {s: -v for s, v in self.logs.items()})

    def conjugate(self) -> "CxCochain":
        return CxCochain(self.cover, self.level, {s: np.conj(v) for s, v in self.logs.items()})

    def distance_to_one(self) -> float:
        """Largest ``|log|`` over all overlap vertices."""
        worst = 0.0
        for s, v in self.logs.items():
            m = self.cover.overlap_mask(s)
            if m.any():
                worst = max(worst, float(np.abs(principal_log(v[m])).max()))
        return worst

    def distance(self, other: "CxCochain") -> float:
        return (self / other).distance_to_one()

    def __repr__(self) -> str:
        return f"CxCochain(level={self.level}, simplices={len(self.logs)})"


def cech_coboundary(c: CxCochain) -> CxCochain:
    """``(δc)_σ = Π_i c_{∂_i σ}^{(-1)^i}`` on the overlap of σ."""
    cover = c.cover
    logs = {}
    for sigma in cover.nerve.simplices(c.level + 1):
        total = np.zeros(cover.base.count(0), dtype=complex)
        for i in range(len(sigma)):
            face = sigma[:i] + sigma[i + 1:]
            total += (-1) ** i * c.logs[face]
        logs[sigma] = np.where(cover.overlap_mask(sigma), total, 0)
    return CxCochain(cover, c.level + 1, logs)


def random_smooth_cochain(
    cover: CoverNerve,
    level: int,
    rng: np.random.Generator,
    max_edge_jump: float = 0.8,
    modulus_scale: float = 0.3,
) -> CxCochain:
    """A random cochain whose angle changes by at most ``max_edge_jump`` per edge.

    Angles get a uniformly random global offset plus a smoothed random field,
    so coboundaries stay branch-unambiguous on good overlaps.
    """
    adj = cover._adjacency
    deg = np.asarray(adj.sum(axis=1)).ravel() + 1
    n = cover.base.count(0)
    edges = cover.base.face_array(1) if cover.base.dim >= 1 else np.zeros((0, 2), dtype=np.int64)
    logs = {}
    for sigma in cover.nerve.simplices(level):
        field_ = rng.normal(size=(2, n))
        for _ in range(4):
            field_ = (field_ + field_ @ adj.T) / deg
        theta, rho = field_
        if len(edges):
            jump = np.abs(theta[edges[:, 0]] - theta[edges[:, 1]]).max()
            if jump > 0:
                theta = theta * (max_edge_jump * rng.uniform(0.5, 1.0) / jump)
        theta = theta + rng.uniform(-np.pi, np.pi)
        rho = modulus_scale * rho / max(np.abs(rho).max(), 1e-12)
        logs[sigma] = rho + 1j * theta
    return CxCochain(cover, level, logs)


# ---------------------------------------------------------------------------
# integer classes


@dataclass(frozen=True, eq=False)
class IntegerClass:
    """Integer Čech cocycle on the nerve with its pairing against H_top generators.

    ``cocycle[i]`` belongs to ``nerve.simplices(degree)[i]``. ``class_vector``
    pairs the cocycle with the free generators of ``H_degree(nerve)``; torsion
    classes have an empty or zero vector and are decided by
    :func:`is_class_trivial`.
    """

    nerve: OrientedSimplicialComplex
    degree: int
    cocycle: np.ndarray
    class_vector: tuple[int, ...] = field(default=())

    @classmethod
    def from_cocycle(cls, nerve: OrientedSimplicialComplex, cocycle, degree: int = 3) -> "IntegerClass":
        cocycle = np.asarray(cocycle, dtype=np.int64)
        if len(cocycle) != nerve.count(degree):
            raise InconsistentInput("cocycle has the wrong length")
        vector = ()
        if nerve.dim >= degree:
            vector = tuple(int(np.dot(z.coefficients, cocycle)) for z in nerve.homology(degree).cycles)
        return cls(nerve, degree, cocycle, vector)

    def as_dict(self) -> dict[tuple, int]:
        return {s: int(c) for s, c in zip(self.nerve.simplices(self.degree), self.cocycle) if c}

    def coboundary(self) -> np.ndarray:
        if self.degree + 1 > self.nerve.dim:
            return np.zeros(0, dtype=np.int64)
        return self.nerve.boundary(self.degree + 1).T @ self.cocycle

    def __add__(self, other: "IntegerClass") -> "IntegerClass":
        return IntegerClass.from_cocycle(self.nerve, self.cocycle + other.cocycle, self.degree)

    def __neg__(self) -> "IntegerClass":
        return IntegerClass.from_cocycle(self.nerve, -self.cocycle, self.degree)


def branch_logs(g: CxCochain, tol: float = 1e-6) -> dict[tuple, np.ndarray]:
    """Continuous logarithm of every component of g on its (good) overlap.

    Each overlap is unwrapped along a breadth-first spanning tree from its
    lowest vertex, whose principal value is kept. Every remaining edge is then
    checked; a mismatch means no continuous branch exists there.
    """
    cover = g.cover
    out = {}
    for sigma, logs in g.logs.items():
        verts, graph = cover.overlap_graph(sigma)
        if len(verts) == 0:
            out[sigma] = logs.copy()
            continue
        local = logs[verts]
        order, pred = breadth_first_order(graph, 0, directed=False, return_predecessors=True)
        if len(order) != len(verts):
            raise BranchAmbiguity(f"overlap {sigma} is disconnected")
        unwrapped = local.copy()
        for v in order[1:]:
            p = pred[v]
            unwrapped[v] = unwrapped[p] + complex(local[v].real - local[p].real, wrap_angle(local[v].imag - local[p].imag))
        coo = sp.triu(graph).tocoo()
        a, b = coo.row, coo.col
        step = wrap_angle(local.imag[b] - local.imag[a])
        mismatch = np.abs(unwrapped.imag[b] - unwrapped.imag[a] - step)
        if len(mismatch) and mismatch.max() > tol:
            raise BranchAmbiguity(f"no continuous branch of log on overlap {sigma}")
        full = np.zeros(cover.base.count(0), dtype=complex)
        full[verts] = unwrapped
        out[sigma] = full
    return out


def check_cocycle(g: CxCochain, tol: float = SOLVER_TOL) -> float:
    residual = cech_coboundary(g).distance_to_one() if g.level < g.cover.nerve.dim else 0.0
    if residual > tol:
        raise NotACocycle(f"coboundary differs from 1 by {residual:.3g}")
    return residual


def integer_class(g: CxCochain, tol: float = INTEGRALITY_TOL) -> IntegerClass:
    """The integer 3-cocycle of a ℂ×-valued Čech 2-cocycle, with its class.

    Raises:
        NotACocycle: δg differs from 1.
        BranchAmbiguity: an overlap admits no continuous log, or the integer
            depends on the vertex where it is evaluated.
        NonIntegralResult: an alternating sum of logs is not in 2πiℤ.
    """
    if g.level != 2:
        raise InconsistentInput("integer_class expects a level-2 cochain")
    check_cocycle(g)
    L = branch_logs(g)
    nerve = g.cover.nerve
    return IntegerClass.from_cocycle(nerve, _integer_cocycle(g.cover, L, tol), 3)


def _integer_cocycle(cover: CoverNerve, L: Mapping[tuple, np.ndarray], tol: float) -> np.ndarray:
    nerve = cover.nerve
    values = np.zeros(nerve.count(3), dtype=np.int64)
    for idx, tau in enumerate(nerve.simplices(3)):
        mask = cover.overlap_mask(tau)
        total = np.zeros(mask.sum(), dtype=complex)
        for i in range(4):
            total += (-1) ** i * L[tau[:i] + tau[i + 1:]][mask]
        n = total.imag / TWO_PI
        rounded = np.rint(n)
        err = np.abs(n - rounded).max()
        if err > tol or np.abs(total.real).max() > tol:
            raise NonIntegralResult(f"alternating log sum on {tau} is off an integer by {err:.3g}")
        if (rounded != rounded[0]).any():
            raise BranchAmbiguity(f"integer on {tau} depends on the vertex")
        values[idx] = int(rounded[0])
    return values


def is_class_trivial(n: IntegerClass) -> tuple[bool, np.ndarray | None]:
    """Decide whether ``n = δm`` for an integer cochain m, returning m if so."""
    nerve = n.nerve
    if n.coboundary().any():
        raise NotAnIntegerCocycle("integer cochain has nonzero coboundary")
    k = n.degree
    if not n.cocycle.any():
        return True, np.zeros(nerve.count(k - 1), dtype=np.int64)
    delta = nerve.boundary(k).T.toarray()
    m = _linalg.solve_integer(delta, n.cocycle.tolist())
    if m is None:
        return False, None
    return True, np.array(m, dtype=np.int64)


_PINV_CACHE: dict[int, np.ndarray] = {}


def _simplex_delta_pinv(r: int) -> np.ndarray:
    """Pseudo-inverse of δ: C^1 -> C^2 on the full simplex with r vertices."""
    if r not in _PINV_CACHE:
        pairs = list(combinations(range(r), 2))
        pair_index = {p: i for i, p in enumerate(pairs)}
        triples = list(combinations(range(r), 3))
        D = np.zeros((len(triples), len(pairs)))
        for t, (a, b, c) in enumerate(triples):
            D[t, pair_index[(b, c)]] += 1
            D[t, pair_index[(a, c)]] -= 1
            D[t, pair_index[(a, b)]] += 1
        _PINV_CACHE[r] = np.linalg.pinv(D) if len(triples) else np.zeros((len(pairs), 0))
    return _PINV_CACHE[r]


def solve_trivialization(g: CxCochain, tol: float = INTEGRALITY_TOL) -> CxCochain:
    """A level-1 cochain ρ with ``δρ = g``.

    Subtracting ``2πi m`` (m the integer certificate) from the branch logs of g
    gives an exact additive Čech cocycle Λ. At each base vertex the charts
    containing it span a simplex of the nerve, and ``δR = Λ`` is solved there
    in the least-norm sense; ``ρ = exp(R)``.

    Raises:
        NotACocycle, ClassNonTrivial
    """
    n = integer_class(g, tol)
    trivial, m = is_class_trivial(n)
    if not trivial:
        raise ClassNonTrivial(f"integer class {n.class_vector or 'torsion'} is not zero")
    cover = g.cover
    L = branch_logs(g)
    lam = {}
    for i, sigma in enumerate(cover.nerve.simplices(2)):
        lam[sigma] = L[sigma] - 2j * math.pi * m[i]
    n_vertices = cover.base.count(0)
    R = {s: np.zeros(n_vertices, dtype=complex) for s in cover.nerve.simplices(1)}
    groups: dict[tuple, list[int]] = {}
    for v, charts in enumerate(cover.vertex_charts):
        if len(charts) >= 3:
            groups.setdefault(charts, []).append(v)
    for charts, verts in groups.items():
        r = len(charts)
        verts = np.array(verts)
        rhs = np.array([lam[tuple(charts[i] for i in t)][verts] for t in combinations(range(r), 3)])
        sol = _simplex_delta_pinv(r) @ rhs
        for p, (i, j) in enumerate(combinations(range(r), 2)):
            R[(charts[i], charts[j])][verts] = sol[p]
    rho = CxCochain(cover, 1, R)
    residual = (cech_coboundary(rho) / g).distance_to_one()
    if residual > SOLVER_TOL:
        raise NotACocycle(f"trivialization residual {residual:.3g}; input is not a cocycle")
    return rho
