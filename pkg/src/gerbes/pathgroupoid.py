"""The ℂ× groupoid of path classes on a simply connected complex.

An element is an edge path with a nonzero scalar. Two elements with the same
endpoints are identified when their scalars differ by ``exp(∫_D f)`` for a
2-chain D bounded by the difference of the paths. Integrality of ``f/2πi``
on closed surfaces makes this independent of D.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .cech import CxValue
from .complex import Chain, Cochain, OrientedSimplicialComplex, fill_boundary, fillings_kernel, integrate
from .errors import (
    EndpointMismatch,
    InconsistentInput,
    NonIntegralForm,
    NotConnected,
    NotSimplyConnected,
)

GROUPOID_TOL = 1e-8


@dataclass(frozen=True)
class EdgePath:
    """A vertex sequence in which consecutive vertices span an edge."""

    vertices: tuple

    @property
    def start(self) -> Hashable:
        return self.vertices[0]

    @property
    def end(self) -> Hashable:
        return self.vertices[-1]

    def __len__(self) -> int:
        return len(self.vertices) - 1

    def reversed(self) -> "EdgePath":
        return EdgePath(self.vertices[::-1])

    def then(self, other: "EdgePath") -> "EdgePath":
        if self.end != other.start:
            raise EndpointMismatch(f"path ends at {self.end!r} but the next starts at {other.start!r}")
        return EdgePath(self.vertices + other.vertices[1:])

    def chain(self, K: OrientedSimplicialComplex) -> Chain:
        coeffs = np.zeros(K.count(1), dtype=np.int64)
        for u, v in zip(self.vertices, self.vertices[1:]):
            sign, i = K.index((u, v))
            coeffs[i] += sign
        return Chain(K, 1, coeffs)


@dataclass(frozen=True)
class GroupoidElement:
    path: EdgePath
    z: CxValue

    @property
    def source(self) -> Hashable:
        return self.path.start

    @property
    def target(self) -> Hashable:
        return self.path.end


class PathGroupoid:
    """Path classes of a connected complex with ``H_1 = 0`` and integral f.

    Raises:
        NotConnected, NotSimplyConnected, NonIntegralForm
    """

    def __init__(self, complex: OrientedSimplicialComplex, f: Cochain, tol: float = GROUPOID_TOL):
        if f.complex is not complex or f.degree != 2:
            raise InconsistentInput("f must be a 2-cochain on the complex")
        self.complex = complex
        self.f = f
        self.tol = tol
        h0 = complex.homology(0)
        if h0.betti != 1:
            raise NotConnected(f"complex has {h0.betti} components")
        h1 = complex.homology(1)
        if h1.betti or h1.torsion:
            raise NotSimplyConnected(f"first homology is not zero (rank {h1.betti}, torsion {list(h1.torsion)})")
        if complex.dim >= 3 and np.abs(complex.boundary(3).T @ f.values).max(initial=0) > tol:
            raise InconsistentInput("f is not closed")
        self.periods = []
        for cycle in fillings_kernel(complex, 1):
            period = integrate(f, cycle) / (2j * np.pi)
            if abs(period - round(period.real)) > tol:
                raise NonIntegralForm(f"f/2πi pairs to {period:.6g} with a closed surface")
            self.periods.append(period)
        self._neighbors = self._build_neighbors()

    def _build_neighbors(self) -> dict[Hashable, list]:
        out: dict[Hashable, list] = {v: [] for v in self.complex.vertices}
        for u, v in self.complex.simplices(1):
            out[u].append(v)
            out[v].append(u)
        return {v: sorted(ns) for v, ns in out.items()}

    # elements
    def path(self, vertices: Sequence[Hashable]) -> EdgePath:
        vertices = tuple(vertices)
        if not vertices:
            raise InconsistentInput("a path needs at least one vertex")
        for v in vertices:
            if v not in self.complex.vertex_index:
                raise InconsistentInput(f"unknown vertex {v!r}")
        for u, v in zip(vertices, vertices[1:]):
            if u == v or not self.complex.contains(tuple(sorted((u, v)))):
                raise InconsistentInput(f"{u!r} and {v!r} are not joined by an edge")
        return EdgePath(vertices)

    def element(self, vertices: Sequence[Hashable], z=1.0) -> GroupoidElement:
        z = z if isinstance(z, CxValue) else CxValue.from_complex(complex(z))
        return GroupoidElement(self.path(vertices), z)

    def identity_at(self, v: Hashable) -> GroupoidElement:
        return self.element([v])

    def product(self, a: GroupoidElement, b: GroupoidElement) -> GroupoidElement:
        """``(γ, z) ⋆ (γ', z') = (γγ', zz')``.

        Raises:
            EndpointMismatch
        """
        return GroupoidElement(a.path.then(b.path), a.z * b.z)

    def inverse(self, a: GroupoidElement) -> GroupoidElement:
        return GroupoidElement(a.path.reversed(), a.z.inverse())

    # equivalence
    def transport(self, first: EdgePath, second: EdgePath, extra_cycle: int | None = None) -> complex:
        """``∫_D f`` for an integer 2-chain D with ``∂D = first - second``.

        ``extra_cycle`` adds the given closed-surface generator to D, giving an
        independent filling.
        """
        if (first.start, first.end) != (second.start, second.end):
            raise EndpointMismatch("paths have different endpoints")
        K = self.complex
        D = fill_boundary(first.chain(K) - second.chain(K))
        if D.degree != 2:
            return 0j
        value = integrate(self.f, D)
        if extra_cycle is not None:
            value += integrate(self.f, fillings_kernel(K, 1)[extra_cycle])
        return value

    def ratio(self, a: GroupoidElement, b: GroupoidElement, extra_cycle: int | None = None) -> CxValue:
        """``a.z / (exp(∫_D f) b.z)``; equal to 1 exactly when a ~ b."""
        return a.z / (CxValue.from_log(self.transport(a.path, b.path, extra_cycle)) * b.z)

    def equal(self, a: GroupoidElement, b: GroupoidElement) -> bool:
        return self.ratio(a, b).distance_to_one() < self.tol

    def geodesic(self, start: Hashable, end: Hashable) -> EdgePath:
        """Lexicographically smallest shortest edge path."""
        dist = self._distances(end)
        if start not in dist:
            raise NotConnected(f"{end!r} is unreachable from {start!r}")
        path = [start]
        while path[-1] != end:
            v = path[-1]
            path.append(next(w for w in self._neighbors[v] if dist.get(w) == dist[v] - 1))
        return EdgePath(tuple(path))

    def _distances(self, root: Hashable) -> dict[Hashable, int]:
        dist = {root: 0}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in self._neighbors[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def canonical(self, a: GroupoidElement) -> GroupoidElement:
        """Representative on the canonical geodesic with the matching scalar."""
        path = self.geodesic(a.source, a.target)
        shift = CxValue.from_log(self.transport(a.path, path))
        return GroupoidElement(path, a.z / shift)

    def trivialize_at(self, basepoint: Hashable) -> "BasepointTrivialization":
        return BasepointTrivialization(self, basepoint)


class BasepointTrivialization:
    """Every class from y to z written as ``p_y⁻¹ ⋆ p_z`` times a scalar.

    ``p_y`` is the canonical geodesic from the basepoint to y with scalar 1.

    Raises:
        NotConnected
    """

    def __init__(self, groupoid: PathGroupoid, basepoint: Hashable):
        if basepoint not in groupoid.complex.vertex_index:
            raise InconsistentInput(f"unknown basepoint {basepoint!r}")
        self.groupoid = groupoid
        self.basepoint = basepoint
        if len(groupoid._distances(basepoint)) != groupoid.complex.count(0):
            raise NotConnected("not every vertex is reachable from the basepoint")

    def section(self, y: Hashable) -> GroupoidElement:
        """The chosen element of the fiber over (basepoint, y)."""
        return GroupoidElement(self.groupoid.geodesic(self.basepoint, y), CxValue(0.0, 0.0))

    def compose(self, y: Hashable, z: Hashable, scalar: CxValue) -> GroupoidElement:
        g = self.groupoid
        base = g.product(g.inverse(self.section(y)), self.section(z))
        return GroupoidElement(base.path, base.z * scalar)

    def decompose(self, a: GroupoidElement) -> tuple[Hashable, Hashable, CxValue]:
        """``(y, z, λ)`` with ``a ~ compose(y, z, λ)``."""
        reference = self.compose(a.source, a.target, CxValue(0.0, 0.0))
        return a.source, a.target, self.groupoid.ratio(a, reference)


__all__ = [
    "GROUPOID_TOL",
    "BasepointTrivialization",
    "EdgePath",
    "GroupoidElement",
    "PathGroupoid",
]
