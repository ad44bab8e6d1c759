"""Gerbe connections and curvings as Deligne 2-cocycles.

Data on a cover ``{U_a}`` of a base complex M:

* ``g[a,b,c]``: ℂ×-valued Čech 2-cocycle (a :class:`CxCochain`),
* ``A[a,b]``: complex 1-cochain on the double overlap ``U_ab``,
* ``f[a]``: complex 2-cochain on the chart ``U_a``.

Conventions (all Čech coboundaries alternate over omitted indices, the first
index being omitted with a plus sign):

* ``A_bc - A_ac + A_ab = dlog g_abc`` on triple overlaps,
* ``dA_ab = SPLIT_SIGN * (f_b - f_a)`` on double overlaps,
* curvature ``omega = df_a`` on each chart.

``dlog g`` on an edge is the wrapped difference of principal logarithms, which
is the edge increment of the continuous branch whenever the overlap is good.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from . import _linalg
from .cech import (
    SOLVER_TOL,
    CoverNerve,
    CxCochain,
    IntegerClass,
    check_cocycle,
    cech_coboundary,
    resolve_partition,
    wrap_angle,
)
from .complex import Chain, Cochain, OrientedSimplicialComplex, orient
from .errors import (
    BranchAmbiguity,
    ChartUnknown,
    GlueMismatch,
    InconsistentInput,
    NotAnIntegerCocycle,
)

# sign in dA_ab = SPLIT_SIGN * (f_b - f_a); +1 makes the curvature split read
# "second projection minus first projection"
SPLIT_SIGN = 1


def _oriented(store: Mapping[tuple, np.ndarray], sigma: Sequence[int], size: int) -> np.ndarray:
    sign, ordered = orient(sigma)
    if sign == 0:
        return np.zeros(size, dtype=complex)
    return sign * store[ordered]


def dlog(c: CxCochain) -> dict[tuple, np.ndarray]:
    """Edge-wise logarithmic derivative of every component of a Čech cochain.

    Returns complex arrays over base edges (zero off the overlap).

    Raises:
        BranchAmbiguity: the wrapped increments fail to be closed on some
            overlap triangle, so no continuous branch of log exists.
    """
    base = c.cover.base
    edges = base.face_array(1)
    out = {}
    for sigma, logs in c.logs.items():
        emask = base.induced_mask(c.cover.overlap_mask(sigma), 1)
        a, b = logs[edges[:, 0]], logs[edges[:, 1]]
        inc = (b.real - a.real) + 1j * wrap_angle(b.imag - a.imag)
        inc = np.where(emask, inc, 0)
        if base.dim >= 2:
            tmask = base.induced_mask(c.cover.overlap_mask(sigma), 2)
            curl = base.boundary(2).T @ inc
            if tmask.any() and np.abs(curl[tmask]).max() > 1e-6:
                raise BranchAmbiguity(f"phase winds around a triangle of overlap {sigma}")
        out[sigma] = inc
    return out


@dataclass(eq=False)
class DeligneData:
    """A Deligne 2-cocycle ``(f, A, g)`` on a cover.

    ``A`` is keyed by ascending chart pairs and ``f`` is indexed by chart;
    arrays run over all base edges/triangles and vanish off their domain.
    """

    cover: CoverNerve
    g: CxCochain
    A: dict[tuple, np.ndarray]
    f: list[np.ndarray]

    def __post_init__(self):
        base = self.cover.base
        n1, n2 = base.count(1), base.count(2)
        A = {}
        for s in self.cover.nerve.simplices(1):
            A[s] = np.asarray(self.A.get(s, np.zeros(n1)), dtype=complex)
            if A[s].shape != (n1,):
                raise InconsistentInput(f"A{s} has the wrong length")
        for key in self.A:
            if tuple(sorted(key)) not in A or tuple(key) != tuple(sorted(key)):
                raise InconsistentInput(f"A is keyed by ascending nerve edges, got {key}")
        self.A = A
        if len(self.f) != self.cover.n_charts:
            raise InconsistentInput("f needs one 2-cochain per chart")
        self.f = [np.asarray(v, dtype=complex) for v in self.f]
        if any(v.shape != (n2,) for v in self.f):
            raise InconsistentInput("f values have the wrong length")

    @classmethod
    def trivial(cls, cover: CoverNerve) -> "DeligneData":
        base = cover.base
        return cls(cover, CxCochain.constant(cover, 2), {}, [np.zeros(base.count(2), dtype=complex)] * cover.n_charts)

    def connection(self, a: int, b: int) -> np.ndarray:
        return _oriented(self.A, (a, b), self.cover.base.count(1))

    def edge_mask(self, sigma: Sequence[int]) -> np.ndarray:
        return self.cover.base.induced_mask(self.cover.overlap_mask(sigma), 1)

    def face_mask(self, sigma: Sequence[int]) -> np.ndarray:
        return self.cover.base.induced_mask(self.cover.overlap_mask(sigma), 2)


# ---------------------------------------------------------------------------
# verification


@dataclass
class DeligneReport:
    cocycle_residual: float
    triple: dict[tuple, float]
    double: dict[tuple, float]
    tolerance: float = SOLVER_TOL

    @property
    def worst(self) -> float:
        return max([self.cocycle_residual, *self.triple.values(), *self.double.values()], default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst < self.tolerance

    def failures(self) -> dict[str, list[tuple]]:
        return {
            "triple": [s for s, r in self.triple.items() if r >= self.tolerance],
            "double": [s for s, r in self.double.items() if r >= self.tolerance],
        }

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "cocycle_residual": self.cocycle_residual,
            "triple_overlap_residuals": {str(list(s)): r for s, r in self.triple.items()},
            "double_overlap_residuals": {str(list(s)): r for s, r in self.double.items()},
        }

    def __str__(self) -> str:
        lines = [f"deligne check: {'pass' if self.passed else 'FAIL'} (tolerance {self.tolerance:g})"]
        lines.append(f"  cocycle residual       {self.cocycle_residual:.3e}")
        lines.append(f"  worst triple overlap   {max(self.triple.values(), default=0.0):.3e}")
        lines.append(f"  worst double overlap   {max(self.double.values(), default=0.0):.3e}")
        for kind, bad in self.failures().items():
            for s in bad:
                lines.append(f"  failing {kind} overlap {list(s)}")
        return "\n".join(lines)


def check_deligne(d: DeligneData, tol: float = SOLVER_TOL) -> DeligneReport:
    """Residuals of both Deligne identities on every overlap."""
    cover, base = d.cover, d.cover.base
    nerve = cover.nerve
    cocycle = cech_coboundary(d.g).distance_to_one() if nerve.dim >= 3 else 0.0
    try:
        D = dlog(d.g)
    except BranchAmbiguity:
        D = None
    triple = {}
    for sigma in nerve.simplices(2):
        a, b, c = sigma
        mask = d.edge_mask(sigma)
        if D is None:
            triple[sigma] = math.inf
            continue
        res = d.A[(b, c)] - d.A[(a, c)] + d.A[(a, b)] - D[sigma]
        triple[sigma] = float(np.abs(res[mask]).max()) if mask.any() else 0.0
    double = {}
    if base.dim >= 2:
        B2T = base.boundary(2).T
        for sigma in nerve.simplices(1):
            a, b = sigma
            mask = d.face_mask(sigma)
            res = B2T @ d.A[sigma] - SPLIT_SIGN * (d.f[b] - d.f[a])
            double[sigma] = float(np.abs(res[mask]).max()) if mask.any() else 0.0
    return DeligneReport(cocycle, triple, double, tol)


# ---------------------------------------------------------------------------
# construction


def _cup_lead(psi_row: np.ndarray, base: OrientedSimplicialComplex, k: int, values: np.ndarray) -> np.ndarray:
    return psi_row[base.face_array(k)[:, 0]] * values


def build_connection(
    g: CxCochain,
    partition="hat",
    curving: str = "partition",
) -> DeligneData:
    """Connection and curving for a Čech 2-cocycle by partition of unity.

    ``A_ab = Σ_c ψ_c ∪ dlog g_cab`` and ``f_a = SPLIT_SIGN Σ_b ψ_b ∪ dA_ba``.
    With ``curving="least_norm"`` the curving is instead the pointwise
    least-norm solution of ``dA_ab = SPLIT_SIGN (f_b - f_a)``.

    Raises:
        NotACocycle, PartitionInvalid, BranchAmbiguity
    """
    cover, base = g.cover, g.cover.base
    check_cocycle(g)
    psi = resolve_partition(cover, partition)
    D = dlog(g)
    n1, n2 = base.count(1), base.count(2)
    charts = range(cover.n_charts)
    A = {}
    for a, b in cover.nerve.simplices(1):
        total = np.zeros(n1, dtype=complex)
        for c in charts:
            if c in (a, b) or not cover.nerve.contains(tuple(sorted((a, b, c)))):
                continue
            total += _cup_lead(psi[c], base, 1, _oriented(D, (c, a, b), n1))
        A[(a, b)] = np.where(base.induced_mask(cover.overlap_mask((a, b)), 1), total, 0)
    if base.dim < 2:
        return DeligneData(cover, g, A, [np.zeros(n2, dtype=complex) for _ in charts])
    B2T = base.boundary(2).T
    dA = {s: np.where(base.induced_mask(cover.overlap_mask(s), 2), B2T @ v, 0) for s, v in A.items()}
    if curving == "partition":
        f = []
        for a in charts:
            total = np.zeros(n2, dtype=complex)
            for b in charts:
                if b == a or not cover.nerve.contains(tuple(sorted((a, b)))):
                    continue
                total += _cup_lead(psi[b], base, 2, _oriented(dA, (b, a), n2))
            f.append(SPLIT_SIGN * np.where(base.induced_mask(cover.masks[a], 2), total, 0))
    elif curving == "least_norm":
        f = _pointwise_primitive(cover, 2, {s: SPLIT_SIGN * v for s, v in dA.items()})
    else:
        raise InconsistentInput(f"unknown curving normalization {curving!r}")
    return DeligneData(cover, g, A, f)


def _delta0_pinv(r: int) -> np.ndarray:
    pairs = list(combinations(range(r), 2))
    D = np.zeros((len(pairs), r))
    for p, (i, j) in enumerate(pairs):
        D[p, j] += 1
        D[p, i] -= 1
    return np.linalg.pinv(D)


def _pointwise_primitive(cover: CoverNerve, k: int, diff: Mapping[tuple, np.ndarray]) -> list[np.ndarray]:
    """Least-norm ``x_a`` (k-cochains per chart) with ``x_b - x_a = diff_ab``, per simplex."""
    base = cover.base
    n = base.count(k)
    member = np.vstack([base.induced_mask(m, k) for m in cover.masks])
    out = [np.zeros(n, dtype=complex) for _ in range(cover.n_charts)]
    groups: dict[tuple, list[int]] = {}
    for i in range(n):
        groups.setdefault(tuple(np.nonzero(member[:, i])[0].tolist()), []).append(i)
    for charts, idx in groups.items():
        idx = np.array(idx)
        if len(charts) == 1:
            continue
        rhs = np.array([diff[(charts[i], charts[j])][idx] for i, j in combinations(range(len(charts)), 2)])
        sol = _delta0_pinv(len(charts)) @ rhs
        for i, a in enumerate(charts):
            out[a][idx] = sol[i]
    return out


def difference_potential(first: DeligneData, second: DeligneData) -> tuple[list[np.ndarray], float]:
    """1-cochains ``mu_a`` on each chart with ``mu_b - mu_a = A'_ab - A_ab``.

    Two connections on the same gerbe differ by such a family; returns the
    family and the largest residual.
    """
    cover = first.cover
    diff = {s: second.A[s] - first.A[s] for s in cover.nerve.simplices(1)}
    mu = _pointwise_primitive(cover, 1, diff)
    worst = 0.0
    for (a, b), v in diff.items():
        mask = first.edge_mask((a, b))
        if mask.any():
            worst = max(worst, float(np.abs((mu[b] - mu[a] - v)[mask]).max()))
    return mu, worst


def gauge_transform(
    d: DeligneData,
    rho: CxCochain | None = None,
    eta: Sequence[np.ndarray] | None = None,
) -> DeligneData:
    """Act on Deligne data by a Deligne coboundary.

    ``rho`` (level-1 cochain) sends ``g -> g δrho`` and ``A_ab -> A_ab + dlog rho_ab``;
    ``eta`` (a 1-cochain per chart) sends ``A_ab -> A_ab + SPLIT_SIGN (eta_b - eta_a)``
    and ``f_a -> f_a + d eta_a``.
    """
    cover, base = d.cover, d.cover.base
    g, A, f = d.g, dict(d.A), list(d.f)
    if rho is not None:
        g = g * cech_coboundary(rho)
        D = dlog(rho)
        A = {s: A[s] + D[s] for s in A}
    if eta is not None:
        if len(eta) != cover.n_charts:
            raise InconsistentInput("eta needs one 1-cochain per chart")
        eta = [np.where(base.induced_mask(cover.masks[a], 1), np.asarray(e, dtype=complex), 0) for a, e in enumerate(eta)]
        for (a, b) in A:
            A[(a, b)] = A[(a, b)] + SPLIT_SIGN * np.where(d.edge_mask((a, b)), eta[b] - eta[a], 0)
        if base.dim >= 2:
            B2T = base.boundary(2).T
            f = [
                fa + np.where(base.induced_mask(cover.masks[a], 2), B2T @ eta[a], 0)
                for a, fa in enumerate(f)
            ]
    return DeligneData(cover, g, A, f)


# ---------------------------------------------------------------------------
# curvature


@dataclass(eq=False)
class CurvatureForm:
    """Complex 3-cochain on the base (an empty vector when dim M < 3)."""

    complex: OrientedSimplicialComplex
    values: np.ndarray = field(repr=False)

    @property
    def cochain(self) -> Cochain:
        return Cochain(self.complex, 3, self.values)

    def integrate(self, z: Chain) -> complex:
        if z.degree != 3:
            raise InconsistentInput("curvature integrates over 3-chains")
        return complex(np.dot(z.as_float(), self.values))

    def closedness(self) -> float:
        if self.complex.dim < 4:
            return 0.0
        return float(np.abs(self.complex.boundary(4).T @ self.values).max(initial=0.0))


def curvature_three_form(d: DeligneData, tol: float = SOLVER_TOL) -> CurvatureForm:
    """Glue ``omega = df_a`` across charts after checking they agree."""
    cover, base = d.cover, d.cover.base
    if base.dim < 3:
        return CurvatureForm(base, np.zeros(0, dtype=complex))
    B3T = base.boundary(3).T
    n3 = base.count(3)
    omega = np.zeros(n3, dtype=complex)
    assigned = np.zeros(n3, dtype=bool)
    for a in range(cover.n_charts):
        mask = base.induced_mask(cover.masks[a], 3)
        local = B3T @ d.f[a]
        both = mask & assigned
        if both.any():
            gap = np.abs(local[both] - omega[both]).max()
            if gap > tol:
                raise GlueMismatch(f"df disagrees between charts by {gap:.3g} on chart {a}")
        fresh = mask & ~assigned
        omega[fresh] = local[fresh]
        assigned |= mask
    return CurvatureForm(base, omega)


def curving_from_chart(d: DeligneData, chart: int, A_local) -> np.ndarray:
    """Chart-local curving ``K = dA_local - f_chart`` (zero off the chart)."""
    cover, base = d.cover, d.cover.base
    if not 0 <= chart < cover.n_charts:
        raise ChartUnknown(f"no chart {chart}")
    A_local = A_local.values if isinstance(A_local, Cochain) else np.asarray(A_local, dtype=complex)
    if A_local.shape != (base.count(1),):
        raise InconsistentInput("local connection must be a 1-cochain on the base")
    mask = base.induced_mask(cover.masks[chart], 2)
    emask = base.induced_mask(cover.masks[chart], 1)
    K = base.boundary(2).T @ np.where(emask, A_local, 0) - d.f[chart]
    return np.where(mask, K, 0)


# ---------------------------------------------------------------------------
# prescribed classes


def build_from_integer_class(cover: CoverNerve, n, partition="hat") -> CxCochain:
    """Čech 2-cocycle ``g_abc = exp(2πi Σ_d ψ_d n_dabc)`` realizing an integer class.

    ``n`` is an :class:`IntegerClass` or a vector over ``nerve.simplices(3)``.

    Raises:
        NotAnIntegerCocycle: ``δn != 0``.
    """
    nerve = cover.nerve
    if isinstance(n, IntegerClass):
        cocycle = n.cocycle
    else:
        cocycle = np.asarray(n)
        if cocycle.shape != (nerve.count(3),) or not np.all(np.equal(np.mod(cocycle, 1), 0)):
            raise NotAnIntegerCocycle("expected an integer value per nerve 3-simplex")
        cocycle = cocycle.astype(np.int64)
    cls = IntegerClass(nerve, 3, cocycle)
    if cls.coboundary().any():
        raise NotAnIntegerCocycle("integer cochain has nonzero coboundary")
    psi = resolve_partition(cover, partition)
    table = {s: int(v) for s, v in zip(nerve.simplices(3), cocycle)}
    n0 = cover.base.count(0)
    logs = {}
    for sigma in nerve.simplices(2):
        h = np.zeros(n0)
        for d_ in range(cover.n_charts):
            sign, key = orient((d_,) + sigma)
            if sign and table.get(key):
                h += psi[d_] * sign * table[key]
        logs[sigma] = 2j * math.pi * h
    return CxCochain(cover, 2, logs)


def generator_class(nerve: OrientedSimplicialComplex, k: int = 1) -> IntegerClass:
    """An integer 3-cocycle pairing to k with the first free generator of H_3.

    On a 3-dimensional nerve this is k times the dual of one simplex of the
    fundamental cycle; otherwise an integer solution of ``δn = 0``,
    ``<n, z> = k`` is found by Smith normal form.
    """
    z = nerve.homology(3).cycles[0]
    if nerve.dim == 3:
        i = int(np.nonzero(z.coefficients)[0][0])
        cocycle = np.zeros(nerve.count(3), dtype=np.int64)
        cocycle[i] = k * int(z.coefficients[i])
        return IntegerClass.from_cocycle(nerve, cocycle)
    delta = nerve.boundary(4).T.toarray()
    system = np.vstack([delta, np.asarray(z.coefficients, dtype=np.int64)[None, :]])
    rhs = [0] * delta.shape[0] + [k]
    solution = _linalg.solve_integer(system, rhs)
    if solution is None:
        raise NotAnIntegerCocycle(f"no integer cocycle pairs to {k} with the generator")
    return IntegerClass.from_cocycle(nerve, np.array(solution, dtype=np.int64))


def class_pairing(omega: CurvatureForm, z: Chain) -> complex:
    """``(1/2πi) ∫_z omega``."""
    return omega.integrate(z) / (2j * math.pi)


__all__ = [
    "SPLIT_SIGN",
    "CurvatureForm",
    "DeligneData",
    "DeligneReport",
    "build_connection",
    "build_from_integer_class",
    "check_deligne",
    "class_pairing",
    "curvature_three_form",
    "curving_from_chart",
    "difference_potential",
    "dlog",
    "gauge_transform",
    "generator_class",
]
