"""Cochains on fibered powers of a finite covering and the fiber differential.

A covering ``Y -> M`` with k sheets is given on a cover of M by permutations
``tau[a, b]`` sending sheet labels of chart a to sheet labels of chart b. Over
any simplex s of M the p-fold fibered power is ``s x S^p`` (S the k sheets), so a
cochain of arity p and degree q stores an array of shape ``(k,)*p`` per
q-simplex. Labels over s are read in the frame of its *home* chart, the
lowest chart containing s.

The fiber differential alternates over omitted sheet coordinates, omitting the
first coordinate with a plus sign:

    (δu)(s_1..s_p) = Σ_i (-1)^(i-1) u(s_1..ŝ_i..s_p)

At arity 1 this is the pullback along the covering map, and on arity 1
``δw(s1, s2) = w(s2) - w(s1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Mapping, Sequence

import numpy as np

from .cech import SOLVER_TOL, CoverNerve, resolve_partition
from .complex import Cochain
from .errors import ArityOutOfRange, InconsistentInput, NotClosed

MAX_ARITY = 6


class FiniteCovering:
    """A k-sheeted covering presented by constant transition permutations.

    Args:
        cover: cover of the base.
        sheets: number of sheets k.
        transitions: ``{(a, b): perm}`` for nerve edges a < b, where
            ``perm[i]`` is the b-label of the sheet with a-label i. Missing
            pairs default to the identity.
    """

    def __init__(self, cover: CoverNerve, sheets: int, transitions: Mapping[tuple, Sequence[int]] | None = None):
        if sheets < 1:
            raise InconsistentInput("a covering needs at least one sheet")
        self.cover = cover
        self.sheets = sheets
        self.base = cover.base
        ident = np.arange(sheets)
        tau: dict[tuple, np.ndarray] = {}
        for a in range(cover.n_charts):
            tau[(a, a)] = ident
        given = dict(transitions or {})
        for (a, b) in cover.nerve.simplices(1):
            perm = given.pop((a, b), None)
            if perm is None and (b, a) in given:
                perm = np.argsort(given.pop((b, a)))
            perm = ident if perm is None else np.asarray(perm, dtype=np.int64)
            if sorted(perm.tolist()) != list(range(sheets)):
                raise InconsistentInput(f"transition {(a, b)} is not a permutation of {sheets} sheets")
            tau[(a, b)] = perm
            tau[(b, a)] = np.argsort(perm)
        if given:
            raise InconsistentInput(f"transitions given on non-overlapping charts {sorted(given)}")
        for (a, b, c) in cover.nerve.simplices(2):
            if not np.array_equal(tau[(b, c)][tau[(a, b)]], tau[(a, c)]):
                raise InconsistentInput(f"transitions violate the cocycle condition on {(a, b, c)}")
        self.tau = tau
        self._homes: dict[int, np.ndarray] = {}

    @property
    def total_fiber_size(self) -> int:
        return self.sheets

    def home(self, q: int) -> np.ndarray:
        """Home chart (lowest chart containing it) of every q-simplex."""
        if q not in self._homes:
            member = np.vstack([self.base.induced_mask(m, q) for m in self.cover.masks])
            self._homes[q] = np.argmax(member, axis=0)
        return self._homes[q]

    def member(self, q: int) -> np.ndarray:
        return np.vstack([self.base.induced_mask(m, q) for m in self.cover.masks])

    @classmethod
    def trivial(cls, cover: CoverNerve, sheets: int) -> "FiniteCovering":
        return cls(cover, sheets)

    @classmethod
    def gauged(cls, cover: CoverNerve, sheets: int, rng: np.random.Generator) -> "FiniteCovering":
        """A trivial covering written in random chart frames."""
        frames = [rng.permutation(sheets) for _ in range(cover.n_charts)]
        tau = {(a, b): frames[b][np.argsort(frames[a])] for a, b in cover.nerve.simplices(1)}
        return cls(cover, sheets, tau)


def _reindex(values: np.ndarray, perm: np.ndarray, p: int) -> np.ndarray:
    """Values in frame F from values in frame G, given ``perm``: F-label -> G-label.

    ``values`` has shape ``(n,) + (k,)*p``.
    """
    out = values
    for axis in range(1, p + 1):
        out = np.take(out, perm, axis=axis)
    return out


@dataclass(eq=False)
class FiberedCochain:
    """Degree-q cochain on the p-fold fibered power of a covering.

    ``values[i]`` has shape ``(k,)*p`` and is read in the home frame of the
    i-th q-simplex. Arity 0 is an ordinary cochain on the base.
    """

    covering: FiniteCovering
    p: int
    q: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.p < 0 or self.p > MAX_ARITY:
            raise ArityOutOfRange(f"arity {self.p} outside 0..{MAX_ARITY}")
        base = self.covering.base
        if self.q < 0 or self.q > base.dim:
            raise InconsistentInput(f"degree {self.q} outside 0..{base.dim}")
        shape = (base.count(self.q),) + (self.covering.sheets,) * self.p
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != shape:
            raise InconsistentInput(f"values have shape {vals.shape}, expected {shape}")
        self.values = vals

    @classmethod
    def zero(cls, covering: FiniteCovering, p: int, q: int) -> "FiberedCochain":
        shape = (covering.base.count(q),) + (covering.sheets,) * p
        return cls(covering, p, q, np.zeros(shape, dtype=complex))

    @classmethod
    def random(cls, covering: FiniteCovering, p: int, q: int, rng: np.random.Generator) -> "FiberedCochain":
        shape = (covering.base.count(q),) + (covering.sheets,) * p
        return cls(covering, p, q, rng.normal(size=shape) + 1j * rng.normal(size=shape))

    @classmethod
    def from_base(cls, covering: FiniteCovering, c: Cochain) -> "FiberedCochain":
        return cls(covering, 0, c.degree, c.values)

    def to_base(self) -> Cochain:
        if self.p != 0:
            raise ArityOutOfRange("only arity-0 cochains live on the base")
        return Cochain(self.covering.base, self.q, self.values)

    def in_chart(self, chart: int) -> tuple[np.ndarray, np.ndarray]:
        """Values re-labelled in the frame of ``chart``, with the simplex mask."""
        cov = self.covering
        mask = cov.member(self.q)[chart]
        homes = cov.home(self.q)
        out = np.zeros_like(self.values)
        for h in np.unique(homes[mask]):
            idx = mask & (homes == h)
            # chart label -> home label
            out[idx] = _reindex(self.values[idx], cov.tau[(chart, h)], self.p)
        return out, mask

    def antisymmetrized(self) -> "FiberedCochain":
        """Average of ``sign(pi) * w(s_pi)`` over permutations of the sheet axes."""
        if self.p < 2:
            return self
        total = np.zeros_like(self.values)
        perms = list(permutations(range(self.p)))
        for perm in perms:
            sign = _perm_sign(perm)
            total += sign * np.transpose(self.values, (0,) + tuple(i + 1 for i in perm))
        return FiberedCochain(self.covering, self.p, self.q, total / len(perms))

    def transpose(self, i: int, j: int) -> "FiberedCochain":
        axes = list(range(self.p + 1))
        axes[i + 1], axes[j + 1] = axes[j + 1], axes[i + 1]
        return FiberedCochain(self.covering, self.p, self.q, np.transpose(self.values, axes))

    def norm(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))

    def __add__(self, other: "FiberedCochain") -> "FiberedCochain":
        self._check(other)
        return FiberedCochain(self.covering, self.p, self.q, self.values + other.values)

    def __sub__(self, other: "FiberedCochain") -> "FiberedCochain":
        self._check(other)
        return FiberedCochain(self.covering, self.p, self.q, self.values - other.values)

    def __neg__(self) -> "FiberedCochain":
        return FiberedCochain(self.covering, self.p, self.q, -self.values)

    def __rmul__(self, scalar) -> "FiberedCochain":
        return FiberedCochain(self.covering, self.p, self.q, scalar * self.values)

    def _check(self, other: "FiberedCochain") -> None:
        if other.covering is not self.covering or (other.p, other.q) != (self.p, self.q):
            raise InconsistentInput("fibered cochains differ in covering, arity or degree")


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def delta(w: FiberedCochain) -> FiberedCochain:
    """Fiber differential from arity p-1 to arity p."""
    p = w.p + 1
    if p > MAX_ARITY:
        raise ArityOutOfRange(f"arity {p} exceeds {MAX_ARITY}")
    k = w.covering.sheets
    n = w.values.shape[0]
    out = np.zeros((n,) + (k,) * p, dtype=complex)
    for i in range(p):
        # insert a broadcast axis at position i: the omitted coordinate
        out += (-1) ** i * np.expand_dims(w.values, axis=i + 1)
    return FiberedCochain(w.covering, p, w.q, out)


def d_base(w: FiberedCochain) -> FiberedCochain:
    """Coboundary along the base, commuting with the fiber differential."""
    cov, base = w.covering, w.covering.base
    q = w.q
    if q >= base.dim:
        raise InconsistentInput(f"no base coboundary out of top degree {q}")
    n = base.count(q + 1)
    out = np.zeros((n,) + (cov.sheets,) * w.p, dtype=complex)
    faces = base.face_array(q + 1)
    homes_hi = cov.home(q + 1)
    homes_lo = cov.home(q)
    index = base._index[q]
    for i in range(q + 2):
        sub = np.delete(faces, i, axis=1)
        face_idx = np.fromiter((index[tuple(r)] for r in sub.tolist()), dtype=np.int64, count=n)
        vals = w.values[face_idx]
        for h_hi in np.unique(homes_hi):
            for h_lo in np.unique(homes_lo[face_idx]):
                sel = (homes_hi == h_hi) & (homes_lo[face_idx] == h_lo)
                if sel.any():
                    # home(s) label -> home(face) label
                    out[sel] += (-1) ** i * _reindex(vals[sel], cov.tau[(h_hi, h_lo)], w.p)
    return FiberedCochain(cov, w.p, q + 1, out)


def closedness(w: FiberedCochain) -> float:
    return delta(w).norm() if w.p < MAX_ARITY else 0.0


def contract(w: FiberedCochain, basepoint_sheet: Mapping[int, int] | None = None, tol: float = SOLVER_TOL) -> FiberedCochain:
    """Fill the last sheet slot with a basepoint: ``rho(..) = w(.., b)``.

    The basepoint over a simplex is ``basepoint_sheet[home]`` in its home
    chart frame (default: sheet 0 of every chart). For closed w of arity p the
    result satisfies ``δrho = (-1)^(p+1) w``.

    Raises:
        NotClosed
    """
    if w.p < 1:
        raise ArityOutOfRange("contraction needs arity at least 1")
    scale = max(1.0, w.norm())
    if closedness(w) > tol * scale:
        raise NotClosed(f"δw has size {closedness(w):.3g}")
    cov = w.covering
    chosen = basepoint_sheet or {}
    homes = cov.home(w.q)
    base_sheet = np.array([chosen.get(int(h), 0) for h in homes], dtype=np.int64)
    if (base_sheet < 0).any() or (base_sheet >= cov.sheets).any():
        raise InconsistentInput("basepoint sheet out of range")
    moved = np.moveaxis(w.values, -1, 1)  # last sheet axis right after the simplex axis
    rho = moved[np.arange(len(homes)), base_sheet]
    return FiberedCochain(cov, w.p - 1, w.q, rho)


def patch_primitive(w: FiberedCochain, partition="hat", tol: float = SOLVER_TOL) -> FiberedCochain:
    """A global primitive ``rho`` with ``δrho = w`` by partition of unity.

    Each chart contracts w with its own basepoint sheet (sheet 0 in its frame),
    giving ``rho_a`` with ``δrho_a = (-1)^(p+1) w`` over the chart. The cup
    products ``ψ_a ∪ rho_a`` then sum to a primitive of w.

    Raises:
        NotClosed, PartitionInvalid
    """
    if w.p < 1:
        raise ArityOutOfRange("a primitive needs arity at least 1")
    scale = max(1.0, w.norm())
    if closedness(w) > tol * scale:
        raise NotClosed(f"δw has size {closedness(w):.3g}")
    cov, base = w.covering, w.covering.base
    psi = resolve_partition(cov.cover, partition)
    lead = base.face_array(w.q)[:, 0]
    sign = (-1) ** (w.p + 1)
    homes = cov.home(w.q)
    total = np.zeros((base.count(w.q),) + (cov.sheets,) * (w.p - 1), dtype=complex)
    for a in range(cov.cover.n_charts):
        weight = psi[a][lead]
        active = weight != 0
        if not active.any():
            continue
        local, mask = w.in_chart(a)
        if (active & ~mask).any():
            raise InconsistentInput("partition weight on a simplex outside its chart")
        rho_a = np.take(local, 0, axis=-1)
        # back to home frames: home label -> chart label
        for h in np.unique(homes[active]):
            sel = active & (homes == h)
            conv = _reindex(rho_a[sel], cov.tau[(h, a)], w.p - 1)
            total[sel] += sign * weight[sel].reshape((-1,) + (1,) * (w.p - 1)) * conv
    return FiberedCochain(cov, w.p - 1, w.q, total)


__all__ = [
    "FiberedCochain",
    "FiniteCovering",
    "closedness",
    "contract",
    "d_base",
    "delta",
    "patch_primitive",
]
