"""Surface holonomy of Deligne data, the WZW action and the ball identity.

Holonomy uses the local flag formula. For every face t of the surface
(coefficient z_t, chart a_t), every edge e_i = t minus its i-th vertex (chart
a_e) and every vertex v_ij = e_i minus its j-th vertex (chart a_v):

    log hol = Σ_t z_t [ ∫_t f_{a_t}
                        + Σ_i (-1)^i ( ∫_{e_i} A_{a_t a_e}
                                       - Σ_j (-1)^j log g_{a_t a_e a_v}(v_ij) ) ]

Edge and vertex charts are read off the lowest-indexed face containing them.
The result is unchanged by Deligne gauge transformations and by the choice of
charts, because every change telescopes into ``2πi`` times an integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .cech import CxValue
from .complex import (
    Chain,
    OrientedSimplicialComplex,
    fill_boundary,
    fillings_kernel,
    orient,
    pushforward,
)
from .connection import CurvatureForm, DeligneData, check_deligne, curvature_three_form
from .errors import (
    DeligneInvalid,
    InconsistentInput,
    NonIntegralAmbiguity,
    SubordinationInvalid,
)

HOLONOMY_TOL = 1e-8


@dataclass(eq=False)
class SurfaceInBase:
    """A closed oriented triangulated surface mapped simplicially into the base.

    Attributes:
        surface: 2-dimensional complex.
        vertex_map: surface vertex -> base vertex.
        coefficients: integer 2-cycle on the surface (the fundamental cycle for
            a closed oriented surface; any integer 2-cycle is accepted).
        subordination: surface face (ascending tuple) -> chart index, or None
            to pick the lowest chart containing each image.
    """

    surface: OrientedSimplicialComplex
    vertex_map: Mapping[Hashable, Hashable]
    coefficients: np.ndarray | None = None
    subordination: dict[tuple, int] | None = field(default=None)

    def __post_init__(self):
        S = self.surface
        if S.dim != 2:
            raise InconsistentInput("surface must be 2-dimensional")
        missing = [v for v in S.vertices if v not in self.vertex_map]
        if missing:
            raise InconsistentInput(f"vertex map misses {missing[:5]}")
        if self.coefficients is None:
            z = Chain.fundamental(S)
        else:
            z = Chain(S, 2, np.asarray(self.coefficients, dtype=np.int64))
        if not z.is_cycle():
            raise InconsistentInput("surface coefficients do not form a closed 2-cycle")
        self.coefficients = z.coefficients
        self.vertex_map = dict(self.vertex_map)

    @classmethod
    def from_cycle(cls, z: Chain, subordination: Mapping[tuple, int] | None = None) -> "SurfaceInBase":
        """Treat an integer 2-cycle of the base as a surface (identity map)."""
        if z.degree != 2:
            raise InconsistentInput("expected a 2-chain")
        if z.is_exact:
            if any(c.denominator != 1 for c in z.coefficients):
                raise InconsistentInput("surface cycles need integer coefficients")
        terms = z.terms()
        if not terms:
            raise InconsistentInput("empty surface")
        S = OrientedSimplicialComplex(terms.keys())
        coeffs = np.array([int(terms[s]) for s in S.simplices(2)], dtype=np.int64)
        vmap = {v: v for v in S.vertices}
        return cls(S, vmap, coeffs, dict(subordination) if subordination else None)

    def chain(self) -> Chain:
        return Chain(self.surface, 2, self.coefficients)

    def pushforward(self, base: OrientedSimplicialComplex) -> Chain:
        return pushforward(self.chain(), base, self.vertex_map)

    def reversed(self) -> "SurfaceInBase":
        return SurfaceInBase(self.surface, self.vertex_map, -self.coefficients, self.subordination)

    def resolve_subordination(self, d: DeligneData) -> dict[tuple, int]:
        """Complete and validate the chart of every face."""
        cover = d.cover
        base = cover.base
        out = {}
        given = self.subordination or {}
        for t in self.surface.simplices(2):
            image = [base.vertex_index[self.vertex_map[v]] for v in t]
            if t in given:
                a = given[t]
                if not 0 <= a < cover.n_charts or not cover.masks[a, image].all():
                    raise SubordinationInvalid(f"face {t} does not map into chart {a}")
            else:
                inside = np.nonzero(cover.masks[:, image].all(axis=1))[0]
                if len(inside) == 0:
                    raise SubordinationInvalid(f"image of face {t} lies in no chart")
                a = int(inside[0])
            out[t] = a
        return out

    def valid_charts(self, d: DeligneData, t: tuple) -> list[int]:
        image = [d.cover.base.vertex_index[self.vertex_map[v]] for v in t]
        return np.nonzero(d.cover.masks[:, image].all(axis=1))[0].tolist()


def _base_value(base: OrientedSimplicialComplex, values: np.ndarray, image: Sequence) -> complex:
    sign, ordered = orient(image)
    if sign == 0:
        return 0j
    return sign * values[base._index[len(image) - 1][ordered]]


def holonomy_log(d: DeligneData, sigma: SurfaceInBase) -> complex:
    """Logarithm of the holonomy (defined modulo 2πi)."""
    base = d.cover.base
    charts = sigma.resolve_subordination(d)
    vmap = {v: base.vertex_index[sigma.vertex_map[v]] for v in sigma.surface.vertices}
    faces = sigma.surface.simplices(2)
    edge_chart: dict[tuple, int] = {}
    vertex_chart: dict[Hashable, int] = {}
    for t in faces:
        a = charts[t]
        for i in range(3):
            e = t[:i] + t[i + 1:]
            edge_chart.setdefault(e, a)
        for v in t:
            vertex_chart.setdefault(v, a)
    g_cache: dict[tuple, np.ndarray] = {}
    a_cache: dict[tuple, np.ndarray] = {}

    def g_log(a: int, b: int, c: int, v: int) -> complex:
        if len({a, b, c}) < 3:
            return 0j
        if (a, b, c) not in g_cache:
            g_cache[(a, b, c)] = d.g.log((a, b, c))
        return g_cache[(a, b, c)][v]

    total = 0j
    for t, z in zip(faces, sigma.coefficients):
        if not z:
            continue
        a = charts[t]
        image_t = [vmap[v] for v in t]
        term = _base_value(base, d.f[a], image_t)
        for i in range(3):
            e = t[:i] + t[i + 1:]
            b = edge_chart[e]
            image_e = [vmap[v] for v in e]
            if (a, b) not in a_cache:
                a_cache[(a, b)] = d.connection(a, b)
            edge_term = _base_value(base, a_cache[(a, b)], image_e)
            for j in range(2):
                v = e[1 - j]
                edge_term -= (-1) ** j * g_log(a, b, vertex_chart[v], vmap[v])
            term += (-1) ** i * edge_term
        total += int(z) * term
    return complex(total)


def surface_holonomy(d: DeligneData, sigma: SurfaceInBase, validate: bool = True) -> CxValue:
    """Holonomy of the gerbe connection around a closed surface.

    Raises:
        DeligneInvalid: the data fail the Deligne identities.
        SubordinationInvalid: a face is assigned to a chart missing its image.
    """
    if validate:
        report = check_deligne(d)
        if not report.passed:
            raise DeligneInvalid(f"Deligne identities fail (worst residual {report.worst:.3g})")
    return CxValue.from_log(holonomy_log(d, sigma))


def cycle_holonomy(d: DeligneData, z: Chain, subordination: Mapping[tuple, int] | None = None) -> CxValue:
    """Holonomy around an integer 2-cycle of the base."""
    return surface_holonomy(d, SurfaceInBase.from_cycle(z, subordination))


@dataclass
class BallReport:
    holonomy: CxValue
    volume: CxValue
    ratio: CxValue

    @property
    def error(self) -> float:
        return self.ratio.distance_to_one()

    def passed(self, tol: float = HOLONOMY_TOL) -> bool:
        return self.error < tol

    def as_dict(self) -> dict:
        return {
            "holonomy": [self.holonomy.log_modulus, self.holonomy.angle],
            "exp_integral": [self.volume.log_modulus, self.volume.angle],
            "ratio": [self.ratio.log_modulus, self.ratio.angle],
            "error": self.error,
        }


def ball_boundary_check(d: DeligneData, B: Chain, omega: CurvatureForm | None = None) -> BallReport:
    """Compare the holonomy around ``∂B`` with ``exp(∫_B omega)``."""
    if B.degree != 3:
        raise InconsistentInput("ball must be a 3-chain")
    omega = omega or curvature_three_form(d)
    lhs = CxValue(0.0, 0.0)
    boundary = B.boundary()
    if any(boundary.coefficients):
        lhs = cycle_holonomy(d, boundary)
    rhs = CxValue.from_log(omega.integrate(B))
    return BallReport(lhs, rhs, lhs / rhs)


def wzw(sigma: SurfaceInBase | Chain, omega: CurvatureForm, tol: float = HOLONOMY_TOL) -> CxValue:
    """``exp(∫_B omega)`` for a 3-chain B bounding the surface.

    Every extra filling (B plus a 3-cycle) is compared against the first.

    Raises:
        NotNullHomologous: the surface does not bound.
        NonIntegralAmbiguity: two fillings disagree, so omega/2πi is not
            integral.
    """
    base = omega.complex
    z = sigma.pushforward(base) if isinstance(sigma, SurfaceInBase) else sigma
    if z.degree != 2:
        raise InconsistentInput("wzw needs a 2-cycle")
    B = fill_boundary(z)
    log_value = omega.integrate(B) if B.degree == 3 else 0j
    for cycle in fillings_kernel(base, 2):
        extra = omega.integrate(cycle)
        drift = abs(CxValue.from_log(extra).log)
        if drift > tol:
            raise NonIntegralAmbiguity(
                f"fillings differing by a 3-cycle disagree by {drift:.3g}; omega/2πi is not integral"
            )
    return CxValue.from_log(log_value)


def wzw_pair(first: SurfaceInBase | Chain, second: SurfaceInBase | Chain, omega: CurvatureForm) -> CxValue:
    """WZW action of the sphere glued from two surfaces with common boundary."""
    base = omega.complex
    z1 = first.pushforward(base) if isinstance(first, SurfaceInBase) else first
    z2 = second.pushforward(base) if isinstance(second, SurfaceInBase) else second
    return wzw(z1 - z2, omega)


__all__ = [
    "HOLONOMY_TOL",
    "BallReport",
    "SurfaceInBase",
    "ball_boundary_check",
    "cycle_holonomy",
    "holonomy_log",
    "surface_holonomy",
    "wzw",
    "wzw_pair",
]
