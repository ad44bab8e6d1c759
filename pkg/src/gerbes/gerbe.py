"""Bundle gerbes over the disjoint union of charts.

With ``Y`` the disjoint union of the charts of a good cover, a bundle gerbe is
the same as a ℂ×-valued Čech 2-cocycle ``g``. This module wraps that cocycle
with the gerbe operations: Dixmier-Douady class, clutching, products,
pullbacks, and the lifting gerbe of a central extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order

from . import _linalg
from .cech import (
    SOLVER_TOL,
    CoverNerve,
    CxCochain,
    IntegerClass,
    cech_coboundary,
    check_cocycle,
    integer_class,
    is_class_trivial,
    solve_trivialization,
)
from .complex import OrientedSimplicialComplex
from .errors import (
    CoverNotGood,
    InconsistentInput,
    NotALift,
    ObstructionNotCentral,
    PullbackCoverNotGood,
    RefinementNotGood,
)


@dataclass(eq=False)
class GerbePresentation:
    """A ℂ× Čech 2-cocycle on a good cover, read as a bundle gerbe.

    Attributes:
        cover: the cover whose charts form the fibration.
        g: level-2 cochain with ``δg = 1``.
        sections: optional level-1 cochain recording the trivializing
            sections of the line bundle over each double overlap.
    """

    cover: CoverNerve
    g: CxCochain
    sections: CxCochain | None = None

    def __post_init__(self):
        if self.g.cover is not self.cover or self.g.level != 2:
            raise InconsistentInput("g must be a level-2 cochain on the gerbe's cover")
        if self.sections is not None and (self.sections.cover is not self.cover or self.sections.level != 1):
            raise InconsistentInput("sections must be a level-1 cochain on the gerbe's cover")
        check_cocycle(self.g)

    @classmethod
    def trivial(cls, cover: CoverNerve) -> "GerbePresentation":
        return cls(cover, CxCochain.constant(cover, 2))

    def resectioned(self, rho: CxCochain) -> "GerbePresentation":
        """Change every section by ``rho``; the cocycle changes by ``δrho``."""
        sections = rho if self.sections is None else self.sections * rho
        return GerbePresentation(self.cover, self.g * cech_coboundary(rho), sections)

    def dual(self) -> "GerbePresentation":
        """The inverse gerbe (complex conjugation for unit-modulus values)."""
        return GerbePresentation(self.cover, self.g.inverse())


def dd_cocycle(gp: GerbePresentation) -> IntegerClass:
    """Dixmier-Douady class as an integer Čech 3-cocycle on the nerve."""
    return integer_class(gp.g)


@dataclass
class Clutching:
    """Trivialization of a gerbe: ``δrho = g`` with the achieved residual."""

    rho: CxCochain
    residual: float

    def reconstruct(self) -> CxCochain:
        return cech_coboundary(self.rho)


def trivialize(gp: GerbePresentation) -> Clutching:
    """Clutching data of a gerbe with vanishing class.

    Raises:
        ClassNonTrivial
    """
    rho = solve_trivialization(gp.g)
    return Clutching(rho, cech_coboundary(rho).distance(gp.g))


def intersection_cover(first: CoverNerve, second: CoverNerve) -> tuple[CoverNerve, list[tuple[int, int]]]:
    """Common refinement by pairwise chart intersections.

    Returns the refined cover and, per refined chart, the pair of original
    charts it came from. Only maximal intersections are kept: a chart inside
    another one adds nothing, since the larger chart holds all its simplices
    and also maps into one chart of each cover.

    Raises:
        RefinementNotGood
    """
    if first.base is not second.base:
        raise InconsistentInput("covers live on different complexes")
    masks, origin = [], []
    for a in range(first.n_charts):
        for b in range(second.n_charts):
            mask = first.masks[a] & second.masks[b]
            if mask.any():
                masks.append(mask)
                origin.append((a, b))
    keep = []
    for i, mask in enumerate(masks):
        covered = False
        for j, other in enumerate(masks):
            if j != i and not (mask & ~other).any():
                # strictly smaller, or equal and listed later
                if (other & ~mask).any() or j < i:
                    covered = True
                    break
        if not covered:
            keep.append(i)
    base = first.base
    labels = [[base.vertices[v] for v in np.nonzero(masks[i])[0]] for i in keep]
    try:
        refined = CoverNerve(base, labels)
    except CoverNotGood as err:
        raise RefinementNotGood(f"intersection cover is not good: {err}") from err
    return refined, [origin[i] for i in keep]


def _transport(g: CxCochain, cover: CoverNerve, chart_map: Sequence[int], vertex_map: np.ndarray | None = None) -> CxCochain:
    """Pull a cochain back along a chart map (and optionally a vertex map)."""
    logs = {}
    for sigma in cover.nerve.simplices(g.level):
        source = g.log(tuple(chart_map[i] for i in sigma))
        values = source if vertex_map is None else source[vertex_map]
        logs[sigma] = np.where(cover.overlap_mask(sigma), values, 0)
    return CxCochain(cover, g.level, logs)


def gerbe_product(a: GerbePresentation, b: GerbePresentation) -> GerbePresentation:
    """Product gerbe; its class is the sum of the two classes.

    Raises:
        RefinementNotGood
    """
    if a.cover is b.cover:
        return GerbePresentation(a.cover, a.g * b.g)
    if a.cover.base is b.cover.base and np.array_equal(a.cover.masks, b.cover.masks):
        return GerbePresentation(a.cover, a.g * CxCochain(a.cover, 2, b.g.logs))
    refined, origin = intersection_cover(a.cover, b.cover)
    ga = _transport(a.g, refined, [o[0] for o in origin])
    gb = _transport(b.g, refined, [o[1] for o in origin])
    return GerbePresentation(refined, ga * gb)


def pullback(gp: GerbePresentation, source: OrientedSimplicialComplex, vertex_map: Mapping[Hashable, Hashable]) -> GerbePresentation:
    """Pull a gerbe back along a simplicial map ``source -> base``.

    Raises:
        PullbackCoverNotGood
    """
    base = gp.cover.base
    try:
        image = np.array([base.vertex_index[vertex_map[v]] for v in source.vertices], dtype=np.int64)
    except KeyError as err:
        raise InconsistentInput(f"vertex map misses or leaves the base at {err}") from err
    for k in range(1, source.dim + 1):
        for s in source.simplices(k):
            t = {vertex_map[v] for v in s}
            if len(t) > 1 and not base.contains(tuple(sorted(t))):
                raise InconsistentInput(f"vertex map is not simplicial on {s}")
    charts, old = [], []
    for a in range(gp.cover.n_charts):
        members = gp.cover.masks[a][image]
        if members.any():
            charts.append([source.vertices[i] for i in np.nonzero(members)[0]])
            old.append(a)
    try:
        cover = CoverNerve(source, charts)
    except CoverNotGood as err:
        raise PullbackCoverNotGood(f"preimage cover is not good: {err}") from err
    return GerbePresentation(cover, _transport(gp.g, cover, old, image))


# ---------------------------------------------------------------------------
# central extensions and lifting


@dataclass(eq=False)
class CentralExtension:
    """``1 -> ℂ× -> G x ℂ× -> G -> 1`` twisted by a group 2-cocycle.

    Attributes:
        table: multiplication table, ``table[g][h]`` is the index of ``gh``.
        cocycle: ``cocycle[g][h] = c(g, h)``, nonzero complex numbers.
    """

    table: np.ndarray
    cocycle: np.ndarray
    identity: int = field(init=False)

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int64)
        self.cocycle = np.asarray(self.cocycle, dtype=complex)
        n = len(self.table)
        if self.table.shape != (n, n) or self.cocycle.shape != (n, n):
            raise InconsistentInput("table and cocycle must be square and of equal size")
        units = [e for e in range(n) if (self.table[e] == np.arange(n)).all() and (self.table[:, e] == np.arange(n)).all()]
        if not units:
            raise InconsistentInput("multiplication table has no identity")
        self.identity = units[0]
        for x in range(n):
            if sorted(self.table[x]) != list(range(n)):
                raise InconsistentInput("multiplication table is not a Latin square")
        t, c = self.table, self.cocycle
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    if t[t[x, y], z] != t[x, t[y, z]]:
                        raise InconsistentInput("multiplication is not associative")
                    if abs(c[x, y] * c[t[x, y], z] - c[x, t[y, z]] * c[y, z]) > SOLVER_TOL:
                        raise InconsistentInput(f"cocycle identity fails at {(x, y, z)}")
        e = self.identity
        if np.abs(c[e, :] - 1).max() > SOLVER_TOL or np.abs(c[:, e] - 1).max() > SOLVER_TOL:
            raise InconsistentInput("cocycle is not normalized")

    @property
    def order(self) -> int:
        return len(self.table)

    def inverse_index(self, x: int) -> int:
        return int(np.nonzero(self.table[x] == self.identity)[0][0])

    def multiply(self, first: tuple[int, complex], second: tuple[int, complex]) -> tuple[int, complex]:
        (x, z), (y, w) = first, second
        return int(self.table[x, y]), z * w * self.cocycle[x, y]

    def invert(self, elem: tuple[int, complex]) -> tuple[int, complex]:
        x, z = elem
        xi = self.inverse_index(x)
        return xi, 1 / (z * self.cocycle[x, xi])

    @classmethod
    def split(cls, table) -> "CentralExtension":
        table = np.asarray(table)
        return cls(table, np.ones(table.shape, dtype=complex))

    @classmethod
    def heisenberg(cls) -> "CentralExtension":
        """``Z/2 x Z/2`` with ``c((a, b), (a', b')) = (-1)^(b a')``; (a, b) has index 2a + b."""
        elems = [(a, b) for a in range(2) for b in range(2)]
        table = [[2 * ((a + a2) % 2) + (b + b2) % 2 for (a2, b2) in elems] for (a, b) in elems]
        cocycle = [[(-1) ** (b * a2) for (a2, _) in elems] for (_, b) in elems]
        return cls(table, cocycle)


@dataclass(eq=False)
class PrincipalBundleData:
    """Constant G-valued transition functions on the double overlaps."""

    cover: CoverNerve
    extension: CentralExtension
    transitions: dict[tuple, int]

    def __post_init__(self):
        ext = self.extension
        given = dict(self.transitions)
        full: dict[tuple, int] = {}
        for a in range(self.cover.n_charts):
            full[(a, a)] = ext.identity
        for (a, b) in self.cover.nerve.simplices(1):
            if (a, b) in given:
                x = int(given.pop((a, b)))
            elif (b, a) in given:
                x = ext.inverse_index(int(given.pop((b, a))))
            else:
                x = ext.identity
            if not 0 <= x < ext.order:
                raise InconsistentInput(f"transition {(a, b)} is not a group element")
            full[(a, b)] = x
            full[(b, a)] = ext.inverse_index(x)
        if given:
            raise InconsistentInput(f"transitions given on non-overlapping charts {sorted(given)}")
        for (a, b, c) in self.cover.nerve.simplices(2):
            if ext.table[full[(a, b)], full[(b, c)]] != full[(a, c)]:
                raise InconsistentInput(f"transitions violate the cocycle condition on {(a, b, c)}")
        self.transitions = full

    def trivial_lift(self) -> dict[tuple, complex]:
        return {e: 1.0 + 0j for e in self.cover.nerve.simplices(1)}


def _lift_element(pb: PrincipalBundleData, lift: Mapping[tuple, object], a: int, b: int) -> tuple[int, object]:
    ext = pb.extension
    if a == b:
        return ext.identity, 1.0
    if a < b:
        return pb.transitions[(a, b)], lift[(a, b)]
    return ext.invert((pb.transitions[(b, a)], lift[(b, a)]))


def _normalize_lift(pb: PrincipalBundleData, lift) -> dict[tuple, complex]:
    """Accept ``{edge: z}`` or ``{edge: (group_index, z)}``; check projections."""
    if lift is None:
        return pb.trivial_lift()
    out = {}
    for edge in pb.cover.nerve.simplices(1):
        if edge not in lift:
            raise NotALift(f"no lift given on {edge}")
        value = lift[edge]
        if isinstance(value, tuple):
            x, z = value
            if int(x) != pb.transitions[edge]:
                raise NotALift(f"lift on {edge} projects to {x}, not {pb.transitions[edge]}")
            value = z
        out[edge] = complex(value)
    return out


def _triangle_product(pb: PrincipalBundleData, lift: Mapping[tuple, object], tri: tuple) -> tuple[int, object]:
    ext = pb.extension
    a, b, c = tri
    prod = ext.multiply(_lift_element(pb, lift, a, b), _lift_element(pb, lift, b, c))
    return ext.multiply(prod, _lift_element(pb, lift, c, a))


def obstruction_values(pb: PrincipalBundleData, lift: Mapping[tuple, object]) -> dict[tuple, object]:
    """``e = ĝ_ab ĝ_bc ĝ_ca`` on every nerve triangle (ℂ× part).

    Lift values may be numbers or arrays over base vertex positions.

    Raises:
        ObstructionNotCentral
    """
    out = {}
    for tri in pb.cover.nerve.simplices(2):
        x, z = _triangle_product(pb, lift, tri)
        if x != pb.extension.identity:
            raise ObstructionNotCentral(f"obstruction on {tri} has group part {x}")
        out[tri] = z
    return out


def lifting_obstruction(ext: CentralExtension, pb: PrincipalBundleData, lift=None) -> GerbePresentation:
    """The lifting gerbe: constant ℂ× values ``e`` on the triple overlaps.

    Raises:
        NotALift, ObstructionNotCentral
    """
    if pb.extension is not ext:
        raise InconsistentInput("bundle data belong to a different extension")
    lift = _normalize_lift(pb, lift)
    e = obstruction_values(pb, lift)
    cover = pb.cover
    n = cover.base.count(0)
    logs = {s: np.full(n, np.log(complex(e[s]))) for s in cover.nerve.simplices(2)}
    return GerbePresentation(cover, CxCochain(cover, 2, logs))


@dataclass
class LiftResult:
    exists: bool
    dd_class: IntegerClass
    corrected: dict[tuple, np.ndarray] | None = None
    residual: float | None = None

    def __bool__(self) -> bool:
        return self.exists


def lift_exists(ext: CentralExtension, pb: PrincipalBundleData, lift=None) -> LiftResult:
    """Decide liftability; if possible return the corrected lift ``ĝ/rho``.

    The corrected lift on edge (a, b) is a function on the overlap (values per
    base vertex position); its cocycle residual is reported.
    """
    gp = lifting_obstruction(ext, pb, lift)
    cls = dd_cocycle(gp)
    trivial, _ = is_class_trivial(cls)
    if not trivial:
        return LiftResult(False, cls)
    rho = trivialize(gp).rho
    lift = _normalize_lift(pb, lift)
    cover = pb.cover
    corrected = {}
    for edge in cover.nerve.simplices(1):
        # rho is 1 off the overlap, so entries there stay finite
        corrected[edge] = lift[edge] * np.exp(-rho.log(edge))
    return LiftResult(True, cls, corrected, corrected_lift_residual(pb, corrected))


def corrected_lift_residual(pb: PrincipalBundleData, corrected: Mapping[tuple, np.ndarray]) -> float:
    """Largest ``|ĝ'_ab ĝ'_bc ĝ'_ca - 1|`` over triangle overlaps (ℂ× part).

    Raises:
        ObstructionNotCentral: the group part is not the identity.
    """
    worst = 0.0
    for tri, z in obstruction_values(pb, corrected).items():
        mask = pb.cover.overlap_mask(tri)
        if mask.any():
            worst = max(worst, float(np.abs(z[mask] - 1).max()))
    return worst


# ---------------------------------------------------------------------------
# brute-force oracle


def _roots_order(values: Sequence[complex], limit: int = 64) -> int:
    """Least m with every value an m-th root of unity."""
    for m in range(1, limit + 1):
        if all(abs(complex(v) ** m - 1) < 1e-9 for v in values):
            return m
    raise InconsistentInput("cocycle values are not roots of unity of small order")


def brute_force_lift(ext: CentralExtension, pb: PrincipalBundleData, roots: int | None = None) -> dict[tuple, int] | None:
    """Exhaustive search for constant lifts with values in the K-th roots of unity.

    Lifts are searched up to gauge: values on a spanning tree of the nerve are
    fixed to 1 (any solution can be gauged there by central vertex values), the
    remaining edges are enumerated with propagation through triangles.
    Returns exponents ``{edge: j}`` (lift value ``exp(2πi j/K)``) or None.
    """
    K = roots or 2 * _roots_order(ext.cocycle.ravel())
    nerve = pb.cover.nerve
    edges = nerve.simplices(1)
    tris = nerve.simplices(2)
    # e(lift) = e(trivial lift) * z_ab z_bc / z_ac for a central shift z
    base_e = obstruction_values(pb, pb.trivial_lift())
    base_exp = {}
    for t, val in base_e.items():
        j = np.angle(val) * K / (2 * np.pi)
        if abs(j - np.rint(j)) > 1e-6 or abs(abs(val) - 1) > 1e-9:
            raise InconsistentInput(f"obstruction on {t} is not a {K}-th root of unity")
        base_exp[t] = int(np.rint(j)) % K
    edge_id = {e: i for i, e in enumerate(edges)}
    tri_edges = [(edge_id[(a, b)], edge_id[(b, c)], edge_id[(a, c)]) for (a, b, c) in tris]
    by_edge: dict[int, list[int]] = {}
    for t, es in enumerate(tri_edges):
        for e in es:
            by_edge.setdefault(e, []).append(t)
    value = [-1] * len(edges)
    if edges:
        verts = nerve.vertices
        index = {v: i for i, v in enumerate(verts)}
        rows = [index[a] for a, b in edges] + [index[b] for a, b in edges]
        cols = [index[b] for a, b in edges] + [index[a] for a, b in edges]
        graph = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(verts), len(verts)))
        seen = np.zeros(len(verts), dtype=bool)
        for root in range(len(verts)):
            if seen[root]:
                continue
            order, pred = breadth_first_order(graph, root, directed=False, return_predecessors=True)
            seen[order] = True
            for v in order[1:]:
                a, b = sorted((verts[v], verts[pred[v]]))
                value[edge_id[(a, b)]] = 0

    def residue(t: int, vals: list[int]) -> int | None:
        ab, bc, ac = tri_edges[t]
        if min(vals[ab], vals[bc], vals[ac]) < 0:
            return None
        return (base_exp[tris[t]] + vals[ab] + vals[bc] - vals[ac]) % K

    def propagate(vals: list[int], start: list[int]) -> bool:
        stack = list(start)
        while stack:
            e = stack.pop()
            for t in by_edge.get(e, ()):
                ab, bc, ac = tri_edges[t]
                unknown = [x for x in (ab, bc, ac) if vals[x] < 0]
                if not unknown:
                    if residue(t, vals) != 0:
                        return False
                elif len(unknown) == 1:
                    u = unknown[0]
                    known = base_exp[tris[t]] + sum(vals[x] for x in (ab, bc) if x != u) - (vals[ac] if ac != u else 0)
                    vals[u] = (-known) % K if u != ac else known % K
                    stack.append(u)
        return True

    def search(vals: list[int]) -> list[int] | None:
        free = [i for i, x in enumerate(vals) if x < 0]
        if not free:
            return vals if all(residue(t, vals) == 0 for t in range(len(tris))) else None
        e = free[0]
        for j in range(K):
            trial = list(vals)
            trial[e] = j
            if propagate(trial, [e]):
                found = search(trial)
                if found is not None:
                    return found
        return None

    start = list(value)
    if not propagate(start, [i for i, x in enumerate(start) if x >= 0]):
        return None
    found = search(start)
    if found is None:
        return None
    return {e: found[i] for e, i in edge_id.items()}


def oracle_lift(pb: PrincipalBundleData, exponents: Mapping[tuple, int], K: int) -> dict[tuple, complex]:
    return {e: np.exp(2j * np.pi * j / K) for e, j in exponents.items()}


# ---------------------------------------------------------------------------
# a bundle with a nontrivial lifting obstruction


def mod2_cocycle(K: OrientedSimplicialComplex) -> np.ndarray | None:
    """A 1-cocycle mod 2 on K that is not a coboundary, or None."""
    d1 = K.boundary(2).T  # edges -> triangles
    kernel = _linalg.SparseEliminator(d1, modulus=2).kernel() if K.count(2) else [
        [int(i == j) for i in range(K.count(1))] for j in range(K.count(1))
    ]
    d0 = K.boundary(1).T
    for vec in kernel:
        vec = [int(x) % 2 for x in vec]
        if _linalg.SparseEliminator(d0, rhs=vec, modulus=2).solution() is None:
            return np.array(vec, dtype=np.int64)
    return None


@dataclass
class LiftingExample:
    cover: CoverNerve
    extension: CentralExtension
    bundle: PrincipalBundleData


def heisenberg_example() -> LiftingExample:
    """A ``Z/2 x Z/2`` bundle over a space with nerve ``RP^2 x S^1``.

    The base is the barycentric subdivision of the product, covered by open
    vertex stars, so the nerve is the product itself. The transitions pair a
    non-trivial mod-2 class of the projective plane with the class of the
    circle; its Heisenberg lifting obstruction is the non-trivial torsion
    class in degree three.
    """
    from .meshes import barycentric_subdivision, circle, product, projective_plane

    rp2 = projective_plane()
    s1 = circle(3)
    nerve, labels = product(rp2, s1)
    x = mod2_cocycle(rp2)
    if x is None:
        raise InconsistentInput("projective plane has no non-trivial mod-2 class")
    x_edge = {e: int(v) for e, v in zip(rp2.simplices(1), x)}
    sd = barycentric_subdivision(nerve)
    cover = CoverNerve(sd.complex, sd.star_charts())
    if cover.nerve.count(1) != nerve.count(1):
        raise InconsistentInput("star cover nerve differs from the product")
    ext = CentralExtension.heisenberg()
    transitions = {}
    for (u, v) in nerve.simplices(1):
        (p, s), (q, t) = labels[u], labels[v]
        a = x_edge.get(tuple(sorted((p, q))), 0) if p != q else 0
        b = 1 if {s, t} == {2, 0} else 0  # the circle class: one crossing edge
        transitions[(u, v)] = 2 * a + b
    return LiftingExample(cover, ext, PrincipalBundleData(cover, ext, transitions))


__all__ = [
    "CentralExtension",
    "Clutching",
    "GerbePresentation",
    "LiftResult",
    "LiftingExample",
    "PrincipalBundleData",
    "brute_force_lift",
    "corrected_lift_residual",
    "dd_cocycle",
    "gerbe_product",
    "heisenberg_example",
    "intersection_cover",
    "lift_exists",
    "lifting_obstruction",
    "mod2_cocycle",
    "obstruction_values",
    "oracle_lift",
    "pullback",
    "trivialize",
]
