"""Oriented simplicial complexes, chains, cochains and integer homology.

Simplices are stored as ascending vertex tuples, which fixes the positive
orientation. Face signs come from alternating deletion, so the boundary of
``(v0, ..., vk)`` is ``sum_i (-1)^i (v0, ..., vi-hat, ..., vk)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _linalg
from .errors import (
    DegreeMismatch,
    DegreeOutOfRange,
    DuplicateVertexInSimplex,
    InconsistentInput,
    NotACycle,
    NotNullHomologous,
)

# dense Smith normal form is used below this many matrix entries
DENSE_SNF_LIMIT = 250_000


def permutation_sign(seq: Sequence) -> int:
    """Sign of the permutation sorting ``seq`` (which must have distinct entries)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def orient(simplex: Sequence) -> tuple[int, tuple]:
    """Return ``(sign, ascending tuple)``; sign is 0 when a vertex repeats."""
    ordered = tuple(sorted(simplex))
    if len(set(ordered)) != len(ordered):
        return 0, ordered
    return permutation_sign(simplex), ordered


class OrientedSimplicialComplex:
    """A finite abstract simplicial complex with integer boundary matrices.

    Args:
        simplices: maximal (or any) simplices as vertex sequences. The face
            closure is computed. Vertex labels must be mutually comparable.
        check: verify that consecutive boundary maps compose to zero.
    """

    def __init__(self, simplices: Iterable[Sequence[Hashable]], check: bool = True):
        tops = []
        for s in simplices:
            s = tuple(s)
            if len(s) == 0:
                raise InconsistentInput("empty simplex")
            if len(set(s)) != len(s):
                raise DuplicateVertexInSimplex(f"repeated vertex in {s}")
            try:
                tops.append(tuple(sorted(s)))
            except TypeError as exc:
                raise InconsistentInput(f"vertex labels are not comparable: {s}") from exc
        if not tops:
            raise InconsistentInput("a complex needs at least one simplex")
        labels = sorted({v for s in tops for v in s})
        self.vertices: tuple = tuple(labels)
        self.vertex_index: dict = {v: i for i, v in enumerate(labels)}
        dim = max(len(s) for s in tops) - 1
        self.dim: int = dim

        by_dim: list[set[tuple[int, ...]]] = [set() for _ in range(dim + 1)]
        for s in tops:
            pos = tuple(self.vertex_index[v] for v in s)
            by_dim[len(pos) - 1].add(pos)
        # face closure, top down
        for k in range(dim, 0, -1):
            for s in by_dim[k]:
                for i in range(k + 1):
                    by_dim[k - 1].add(s[:i] + s[i + 1:])

        self._faces: list[np.ndarray] = []
        self._index: list[dict[tuple[int, ...], int]] = []
        for k in range(dim + 1):
            arr = np.array(sorted(by_dim[k]), dtype=np.int64).reshape(-1, k + 1)
            self._faces.append(arr)
            self._index.append({tuple(row): i for i, row in enumerate(arr.tolist())})

        self._boundary: list[sp.csr_matrix] = [sp.csr_matrix((0, len(self._faces[0])), dtype=np.int64)]
        for k in range(1, dim + 1):
            arr = self._faces[k]
            n = len(arr)
            rows, cols, vals = [], [], []
            for i in range(k + 1):
                sub = np.delete(arr, i, axis=1)
                idx = self._lookup(k - 1, sub)
                rows.append(idx)
                cols.append(np.arange(n))
                vals.append(np.full(n, (-1) ** i, dtype=np.int64))
            B = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(len(self._faces[k - 1]), n),
                dtype=np.int64,
            )
            self._boundary.append(B)
        if check:
            for k in range(2, dim + 1):
                if (self._boundary[k - 1] @ self._boundary[k]).count_nonzero():
                    raise InconsistentInput("boundary of boundary is nonzero")
        self._homology_cache: dict[int, Homology] = {}

    # -- lookup -------------------------------------------------------------
    def _lookup(self, k: int, positions: np.ndarray) -> np.ndarray:
        index = self._index[k]
        return np.fromiter((index[tuple(r)] for r in positions.tolist()), dtype=np.int64, count=len(positions))

    def count(self, k: int) -> int:
        if k < 0 or k > self.dim:
            return 0
        return len(self._faces[k])

    def face_array(self, k: int) -> np.ndarray:
        """Vertex positions of every k-simplex, shape ``(count(k), k+1)``."""
        return self._faces[k]

    def simplices(self, k: int) -> list[tuple]:
        if k < 0 or k > self.dim:
            return []
        verts = self.vertices
        return [tuple(verts[i] for i in row) for row in self._faces[k].tolist()]

    def index(self, simplex: Sequence[Hashable]) -> tuple[int, int]:
        """Return ``(sign, position)`` of a simplex given in any vertex order.

        Raises ``KeyError`` if the simplex is not in the complex.
        """
        try:
            pos = [self.vertex_index[v] for v in simplex]
        except KeyError as exc:
            raise KeyError(tuple(simplex)) from exc
        sign, ordered = orient(pos)
        if sign == 0:
            raise DuplicateVertexInSimplex(f"repeated vertex in {tuple(simplex)}")
        if len(pos) > len(self._index):
            raise KeyError(tuple(simplex))
        return sign, self._index[len(pos) - 1][ordered]

    def contains(self, simplex: Sequence[Hashable]) -> bool:
        try:
            self.index(simplex)
        except KeyError:
            return False
        return True

    def boundary(self, k: int) -> sp.csr_matrix:
        """Integer matrix of the boundary map C_k -> C_{k-1}."""
        if k < 1 or k > self.dim:
            return sp.csr_matrix((self.count(k - 1), self.count(k)), dtype=np.int64)
        return self._boundary[k]

    def edge_graph(self) -> sp.csr_matrix:
        """Symmetric adjacency matrix on vertex positions."""
        n = self.count(0)
        if self.dim < 1:
            return sp.csr_matrix((n, n), dtype=np.int8)
        e = self._faces[1]
        data = np.ones(2 * len(e), dtype=np.int8)
        return sp.csr_matrix((data, (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n))

    def induced_mask(self, vertex_mask: np.ndarray, k: int) -> np.ndarray:
        """Mask of k-simplices whose vertices all lie in ``vertex_mask``."""
        if k < 0 or k > self.dim:
            return np.zeros(0, dtype=bool)
        return np.all(vertex_mask[self._faces[k]], axis=1)

    def full_subcomplex(self, vertex_mask: np.ndarray) -> "OrientedSimplicialComplex | None":
        """The full subcomplex on the given vertices, or None when empty."""
        tops = []
        for k in range(self.dim, -1, -1):
            m = self.induced_mask(vertex_mask, k)
            tops.extend(tuple(self.vertices[i] for i in row) for row in self._faces[k][m].tolist())
        if not tops:
            return None
        return OrientedSimplicialComplex(tops, check=False)

    def __repr__(self) -> str:
        counts = ", ".join(str(self.count(k)) for k in range(self.dim + 1))
        return f"OrientedSimplicialComplex(dim={self.dim}, counts=[{counts}])"

    # -- homology -----------------------------------------------------------
    def homology(self, k: int) -> "Homology":
        if k < 0 or k > self.dim:
            raise DegreeOutOfRange(f"degree {k} outside 0..{self.dim}")
        if k not in self._homology_cache:
            self._homology_cache[k] = _compute_homology(self, k)
        return self._homology_cache[k]

    def betti(self, k: int) -> int:
        return self.homology(k).betti


def build_complex(simplex_list: Iterable[Sequence[Hashable]]) -> OrientedSimplicialComplex:
    return OrientedSimplicialComplex(simplex_list)


# ---------------------------------------------------------------------------
# chains and cochains


@dataclass(frozen=True, eq=False)
class Chain:
    """Integer or rational coefficients on the k-simplices of a complex."""

    complex: OrientedSimplicialComplex
    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        if self.degree < 0 or self.degree > self.complex.dim:
            raise DegreeOutOfRange(f"chain degree {self.degree} outside 0..{self.complex.dim}")
        if len(self.coefficients) != self.complex.count(self.degree):
            raise InconsistentInput("coefficient vector has the wrong length")

    @classmethod
    def zero(cls, K: OrientedSimplicialComplex, k: int) -> "Chain":
        return cls(K, k, np.zeros(K.count(k), dtype=np.int64))

    @classmethod
    def from_dict(cls, K: OrientedSimplicialComplex, k: int, terms: Mapping[Sequence, object]) -> "Chain":
        exact = any(isinstance(c, Fraction) for c in terms.values())
        coeffs = np.zeros(K.count(k), dtype=object if exact else np.int64)
        if exact:
            coeffs[:] = Fraction(0)
        for s, c in terms.items():
            if len(s) != k + 1:
                raise DegreeMismatch(f"simplex {tuple(s)} is not of dimension {k}")
            try:
                sign, i = K.index(s)
            except KeyError as exc:
                raise InconsistentInput(f"simplex {tuple(s)} not in complex") from exc
            coeffs[i] += sign * c
        return cls(K, k, coeffs)

    @classmethod
    def simplex(cls, K: OrientedSimplicialComplex, s: Sequence) -> "Chain":
        return cls.from_dict(K, len(s) - 1, {tuple(s): 1})

    @classmethod
    def fundamental(cls, K: OrientedSimplicialComplex) -> "Chain":
        """Generator of top homology of a closed orientable pseudomanifold.

        Sign normalized so that the first top simplex has coefficient +1.
        """
        h = K.homology(K.dim)
        if h.betti != 1:
            raise InconsistentInput(f"top homology has rank {h.betti}, expected 1")
        return h.cycles[0]

    @property
    def is_exact(self) -> bool:
        return self.coefficients.dtype == object

    def boundary(self) -> "Chain":
        k = self.degree
        if k == 0:
            return Chain(self.complex, 0, np.zeros(self.complex.count(0), dtype=self.coefficients.dtype))
        faces = self.complex.face_array(k)
        out = np.zeros(self.complex.count(k - 1), dtype=self.coefficients.dtype)
        if self.is_exact:
            out[:] = Fraction(0)
        index = self.complex._index[k - 1]
        nz = np.nonzero(self.coefficients)[0] if not self.is_exact else [i for i, c in enumerate(self.coefficients) if c]
        for j in nz:
            row = faces[j].tolist()
            c = self.coefficients[j]
            for i in range(k + 1):
                f = index[tuple(row[:i] + row[i + 1:])]
                out[f] += c if i % 2 == 0 else -c
        return Chain(self.complex, k - 1, out)

    def is_cycle(self) -> bool:
        return not any(self.boundary().coefficients)

    def support(self) -> list[tuple]:
        simplices = self.complex.simplices(self.degree)
        return [simplices[i] for i, c in enumerate(self.coefficients) if c]

    def terms(self) -> dict[tuple, object]:
        simplices = self.complex.simplices(self.degree)
        return {simplices[i]: c for i, c in enumerate(self.coefficients) if c}

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coefficients]) if self.is_exact else self.coefficients.astype(float)

    def _combine(self, other: "Chain", sign: int) -> "Chain":
        if other.complex is not self.complex or other.degree != self.degree:
            raise DegreeMismatch("chains live on different complexes or degrees")
        return Chain(self.complex, self.degree, self.coefficients + sign * other.coefficients)

    def __add__(self, other: "Chain") -> "Chain":
        return self._combine(other, 1)

    def __sub__(self, other: "Chain") -> "Chain":
        return self._combine(other, -1)

    def __neg__(self) -> "Chain":
        return Chain(self.complex, self.degree, -self.coefficients)

    def __rmul__(self, scalar) -> "Chain":
        return Chain(self.complex, self.degree, scalar * self.coefficients)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return (
            other.complex is self.complex
            and other.degree == self.degree
            and all(a == b for a, b in zip(self.coefficients, other.coefficients))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Cochain:
    """Complex value per positively oriented p-simplex."""

    complex: OrientedSimplicialComplex
    degree: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.degree < 0 or self.degree > self.complex.dim:
            raise DegreeOutOfRange(f"cochain degree {self.degree} outside 0..{self.complex.dim}")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.complex.count(self.degree),):
            raise InconsistentInput("value vector has the wrong length")
        if not np.all(np.isfinite(vals)):
            raise InconsistentInput("cochain values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, K: OrientedSimplicialComplex, p: int) -> "Cochain":
        return cls(K, p, np.zeros(K.count(p), dtype=complex))

    @classmethod
    def from_dict(cls, K: OrientedSimplicialComplex, p: int, values: Mapping[Sequence, complex]) -> "Cochain":
        out = np.zeros(K.count(p), dtype=complex)
        for s, v in values.items():
            if len(s) != p + 1:
                raise DegreeMismatch(f"simplex {tuple(s)} is not of dimension {p}")
            try:
                sign, i = K.index(s)
            except KeyError as exc:
                raise InconsistentInput(f"simplex {tuple(s)} not in complex") from exc
            out[i] = sign * v
        return cls(K, p, out)

    def __call__(self, simplex: Sequence) -> complex:
        sign, i = self.complex.index(simplex)
        return sign * self.values[i]

    def _check(self, other: "Cochain") -> None:
        if other.complex is not self.complex or other.degree != self.degree:
            raise DegreeMismatch("cochains live on different complexes or degrees")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return Cochain(self.complex, self.degree, self.values + other.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return Cochain(self.complex, self.degree, self.values - other.values)

    def __neg__(self) -> "Cochain":
        return Cochain(self.complex, self.degree, -self.values)

    def __rmul__(self, scalar) -> "Cochain":
        return Cochain(self.complex, self.degree, scalar * self.values)

    def norm(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))


def coboundary(c: Cochain) -> Cochain:
    """The simplicial coboundary ``(dc)(s) = c(ds)``."""
    if c.degree >= c.complex.dim:
        raise DegreeOutOfRange(f"no coboundary out of top degree {c.degree}")
    B = c.complex.boundary(c.degree + 1)
    return Cochain(c.complex, c.degree + 1, B.T @ c.values)


def coboundary_values(K: OrientedSimplicialComplex, p: int, values: np.ndarray) -> np.ndarray:
    """Coboundary on raw value arrays; works with a trailing batch axis."""
    return K.boundary(p + 1).T @ values


def integrate(c: Cochain, z: Chain) -> complex:
    """Pairing of a cochain with a chain."""
    if c.complex is not z.complex:
        raise InconsistentInput("cochain and chain live on different complexes")
    if c.degree != z.degree:
        raise DegreeMismatch(f"cannot integrate a {c.degree}-cochain over a {z.degree}-chain")
    if z.is_exact:
        total = 0j
        for i, coef in enumerate(z.coefficients):
            if coef:
                total += float(coef) * c.values[i]
        return complex(total)
    return complex(np.dot(z.coefficients.astype(float), c.values))


def cup_function(psi: np.ndarray, K: OrientedSimplicialComplex, p: int, values: np.ndarray) -> np.ndarray:
    """Cup product of a 0-cochain (vertex function) with a p-cochain.

    ``(psi ∪ c)(v0..vp) = psi(v0) * c(v0..vp)``. ``values`` may carry extra
    trailing axes.
    """
    lead = psi[K.face_array(p)[:, 0]]
    return lead.reshape(lead.shape + (1,) * (values.ndim - 1)) * values


def pullback_values(
    source: OrientedSimplicialComplex,
    target: OrientedSimplicialComplex,
    vertex_map: Mapping,
    p: int,
    values: np.ndarray,
) -> np.ndarray:
    """Pull a p-cochain on ``target`` back along a simplicial vertex map.

    Simplices collapsed by the map receive zero.
    """
    out = np.zeros((source.count(p),) + values.shape[1:], dtype=values.dtype)
    for i, s in enumerate(source.simplices(p)):
        image = [vertex_map[v] for v in s]
        if len(set(image)) < len(image):
            continue
        try:
            sign, j = target.index(image)
        except KeyError as exc:
            raise InconsistentInput(f"map is not simplicial on {s}") from exc
        out[i] = sign * values[j]
    return out


def pushforward(z: Chain, target: OrientedSimplicialComplex, vertex_map: Mapping) -> Chain:
    """Image of a chain under a simplicial map; collapsed simplices drop out."""
    exact = z.is_exact
    coeffs = np.zeros(target.count(z.degree), dtype=object if exact else np.int64)
    if exact:
        coeffs[:] = Fraction(0)
    for s, c in z.terms().items():
        image = [vertex_map[v] for v in s]
        if len(set(image)) < len(image):
            continue
        try:
            sign, j = target.index(image)
        except KeyError as exc:
            raise InconsistentInput(f"map is not simplicial on {s}") from exc
        coeffs[j] += sign * c
    return Chain(target, z.degree, coeffs)


# ---------------------------------------------------------------------------
# homology and filling


@dataclass(frozen=True)
class Homology:
    betti: int
    torsion: list[int]
    cycles: list[Chain]


def _normalize_sign(vec: list[int]) -> list[int]:
    for x in vec:
        if x:
            return vec if x > 0 else [-y for y in vec]
    return vec


def _compute_homology(K: OrientedSimplicialComplex, k: int) -> Homology:
    n_k = K.count(k)
    Bk = K.boundary(k)
    Bk1 = K.boundary(k + 1)
    size = Bk.shape[0] * Bk.shape[1] + Bk1.shape[0] * Bk1.shape[1]
    if size <= DENSE_SNF_LIMIT:
        return _homology_snf(K, k)
    if k == K.dim:
        # top degree: homology is the (free) kernel of the boundary
        basis = _linalg.rational_kernel(Bk) if Bk.shape[0] else [
            [Fraction(int(i == j)) for i in range(n_k)] for j in range(n_k)
        ]
        cycles = []
        for vec in basis:
            denom = 1
            for x in vec:
                denom = denom * x.denominator // np.gcd(denom, x.denominator)
            ints = [int(x * denom) for x in vec]
            g = int(np.gcd.reduce(np.array([abs(x) for x in ints if x], dtype=object))) if any(ints) else 1
            ints = _normalize_sign([x // g for x in ints])
            cycles.append(Chain(K, k, np.array(ints, dtype=np.int64)))
        return Homology(len(cycles), [], cycles)
    if k == 0:
        n_comp, labels = connected_components(K.edge_graph(), directed=False)
        cycles = []
        for c in range(n_comp):
            vec = np.zeros(n_k, dtype=np.int64)
            vec[np.argmax(labels == c)] = 1
            cycles.append(Chain(K, 0, vec))
        return Homology(n_comp, [], cycles)
    # large complexes below the top degree: ranks only
    rank_k = _linalg.sparse_rank(Bk) if k > 0 else 0
    rank_k1 = _linalg.sparse_rank(Bk1)
    betti = n_k - rank_k - rank_k1
    if betti:
        raise NotImplementedError("representative cycles below top degree need a smaller complex")
    return Homology(0, [], [])


def _homology_snf(K: OrientedSimplicialComplex, k: int) -> Homology:
    n_k = K.count(k)
    if k > 0:
        s1 = _linalg.smith_normal_form(K.boundary(k).toarray())
        r1 = s1.rank
        Z = [row[r1:] for row in s1.Q]  # columns span the cycles
        Zinv = s1.Qinv[r1:]
    else:
        Z = [[int(i == j) for j in range(n_k)] for i in range(n_k)]
        Zinv = Z
    z = len(Z[0]) if Z else 0
    if z == 0:
        return Homology(0, [], [])
    if k < K.dim:
        C = _linalg.matmul(Zinv, K.boundary(k + 1).toarray().tolist())
    else:
        C = [[] for _ in range(z)]
    if C and C[0]:
        s2 = _linalg.smith_normal_form(C)
        diag = s2.diagonal
        basis_change = s2.Pinv
    else:
        diag = []
        basis_change = [[int(i == j) for j in range(z)] for i in range(z)]
    r2 = len(diag)
    gens = _linalg.matmul(Z, basis_change)  # columns are new cycle basis
    torsion = [d for d in diag if d > 1]
    cycles = []
    for j in range(r2, z):
        vec = _normalize_sign([gens[i][j] for i in range(n_k)])
        cycles.append(Chain(K, k, np.array(vec, dtype=np.int64)))
    return Homology(z - r2, torsion, cycles)


def fill_boundary(z: Chain) -> Chain:
    """A (k+1)-chain whose boundary is the k-cycle ``z``.

    Integer coefficients whenever an integer filling exists and the complex is
    small enough for dense Smith normal form; rational otherwise.

    Raises:
        NotACycle: ``z`` has nonzero boundary.
        NotNullHomologous: ``z`` is a cycle but does not bound.
    """
    K, k = z.complex, z.degree
    if not z.is_cycle():
        raise NotACycle("chain has nonzero boundary")
    if k >= K.dim:
        if any(z.coefficients):
            raise NotNullHomologous("no higher simplices to fill with")
        return Chain(K, k, np.zeros(K.count(k), dtype=np.int64))
    if not any(z.coefficients):
        return Chain.zero(K, k + 1)
    sol = _linalg.solve_rational(K.boundary(k + 1), list(z.coefficients))
    if sol is None:
        raise NotNullHomologous("cycle represents a nonzero homology class")
    if all(x.denominator == 1 for x in sol):
        return Chain(K, k + 1, np.array([int(x) for x in sol], dtype=np.int64))
    if K.count(k) * K.count(k + 1) <= DENSE_SNF_LIMIT:
        integral = _linalg.solve_integer(K.boundary(k + 1), [int(c) for c in z.coefficients])
        if integral is not None:
            return Chain(K, k + 1, np.array(integral, dtype=np.int64))
    arr = np.empty(len(sol), dtype=object)
    arr[:] = sol
    return Chain(K, k + 1, arr)


def fillings_kernel(K: OrientedSimplicialComplex, k: int) -> list[Chain]:
    """Basis of (k+1)-cycles: the ambiguity of :func:`fill_boundary` on k-cycles."""
    if k + 1 > K.dim:
        return []
    return K.homology(k + 1).cycles if k + 1 == K.dim else [
        Chain(K, k + 1, np.array(v, dtype=object)) for v in _linalg.rational_kernel(K.boundary(k + 1))
    ]
