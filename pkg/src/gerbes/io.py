"""JSON documents for complexes, cochains, covers, gerbes and scenarios.

Simplex keys are written as JSON arrays inside strings, e.g. ``"[0,1,2]"``.
Complex numbers are ``[re, im]``; ℂ× values are ``[log_modulus, angle]``.
Scenario files may use generator shortcuts instead of literal data, e.g.
``{"complex": {"generator": "s3", "level": 12}}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .cech import CoverNerve, CxCochain, CxValue, cech_coboundary, random_smooth_cochain
from .complex import Chain, Cochain, OrientedSimplicialComplex
from .connection import DeligneData, build_from_integer_class, generator_class
from .errors import InconsistentInput
from .fibered import FiberedCochain, FiniteCovering
from .gerbe import CentralExtension, GerbePresentation, PrincipalBundleData, heisenberg_example
from .holonomy import SurfaceInBase
from .meshes import (
    LatticeMesh,
    barycentric_subdivision,
    boundary_simplex,
    circle,
    maximal_simplices,
    projective_plane,
    s2_mesh,
    s3_mesh,
    six_cycle_charts,
)

SCENARIO_VERSION = 1
DIGITS = 12


def key_of(simplex) -> str:
    return json.dumps([_plain(v) for v in simplex], separators=(",", ":"))


def parse_key(key: str) -> tuple:
    try:
        value = json.loads(key)
    except json.JSONDecodeError as err:
        raise InconsistentInput(f"bad simplex key {key!r}") from err
    if not isinstance(value, list):
        raise InconsistentInput(f"simplex key {key!r} is not an array")
    return tuple(value)


def _plain(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def rounded(x: float) -> float:
    """Float rounded to a fixed number of significant digits for stable output."""
    x = float(x)
    if x == 0 or not np.isfinite(x):
        return 0.0 if x == 0 else x
    return float(f"{x:.{DIGITS}g}")


def complex_pair(z: complex) -> list[float]:
    return [rounded(z.real), rounded(z.imag)]


def parse_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise InconsistentInput(f"expected a number or [re, im], got {value!r}")


# complexes, chains, cochains


def complex_to_json(K: OrientedSimplicialComplex) -> dict:
    return {"simplices": [[_plain(v) for v in s] for s in maximal_simplices(K)]}


def complex_from_json(doc: Mapping) -> OrientedSimplicialComplex:
    if "generator" in doc:
        return _generated_complex(doc)[0]
    if "simplices" not in doc:
        raise InconsistentInput("complex document needs 'simplices'")
    return OrientedSimplicialComplex([tuple(s) for s in doc["simplices"]])


def cochain_to_json(c: Cochain) -> dict:
    values = {key_of(s): complex_pair(v) for s, v in zip(c.complex.simplices(c.degree), c.values) if v != 0}
    return {"degree": c.degree, "values": values}


def cochain_from_json(K: OrientedSimplicialComplex, doc: Mapping) -> Cochain:
    return Cochain.from_dict(K, int(doc["degree"]), {parse_key(k): parse_complex(v) for k, v in doc.get("values", {}).items()})


def chain_to_json(z: Chain) -> dict:
    return {"degree": z.degree, "values": {key_of(s): [int(c), 0] if not z.is_exact else str(c) for s, c in z.terms().items()}}


def chain_from_json(K: OrientedSimplicialComplex, doc: Mapping) -> Chain:
    terms = {}
    for k, v in doc.get("values", {}).items():
        c = parse_complex(v)
        if c.imag or c.real != int(c.real):
            raise InconsistentInput("chain coefficients must be integers")
        terms[parse_key(k)] = int(c.real)
    return Chain.from_dict(K, int(doc["degree"]), terms)


# covers and Čech cochains


def cover_to_json(cover: CoverNerve) -> dict:
    return {"charts": [[_plain(v) for v in chart] for chart in cover.charts]}


def cxcochain_to_json(g: CxCochain) -> dict:
    base = g.cover.base
    values = {}
    for sigma in g.cover.nerve.simplices(g.level):
        log = g.logs[sigma]
        values[key_of(sigma)] = {
            str(_plain(base.vertices[v])): [rounded(log[v].real), rounded(log[v].imag)] for v in g.cover.overlap_vertices(sigma)
        }
    return {"level": g.level, "values": values}


def cxcochain_from_json(cover: CoverNerve, doc: Mapping) -> CxCochain:
    base = cover.base
    labels = {str(v): v for v in base.vertices}
    values = {}
    for key, table in doc.get("values", {}).items():
        entry = {}
        for v, pair in table.items():
            if v not in labels:
                raise InconsistentInput(f"unknown vertex {v!r} in cochain")
            entry[labels[v]] = CxValue(float(pair[0]), float(pair[1]))
        values[parse_key(key)] = entry
    return CxCochain.from_values(cover, int(doc["level"]), values)


def integer_cocycle_from_json(nerve: OrientedSimplicialComplex, doc) -> np.ndarray:
    cocycle = np.zeros(nerve.count(3), dtype=np.int64)
    for key, value in doc.items():
        sign, i = nerve.index(parse_key(key))
        cocycle[i] += sign * int(value)
    return cocycle


def deligne_to_json(d: DeligneData) -> dict:
    base = d.cover.base
    return {
        "g": cxcochain_to_json(d.g),
        "A": {key_of(e): cochain_to_json(Cochain(base, 1, d.A[e])) for e in d.cover.nerve.simplices(1)},
        "f": {str(a): cochain_to_json(Cochain(base, 2, d.f[a])) for a in range(d.cover.n_charts)},
    }


def deligne_from_json(cover: CoverNerve, doc: Mapping) -> DeligneData:
    base = cover.base
    g = cxcochain_from_json(cover, doc["g"])
    A = {}
    for e in cover.nerve.simplices(1):
        A[e] = cochain_from_json(base, doc["A"][key_of(e)]).values if key_of(e) in doc.get("A", {}) else np.zeros(base.count(1), dtype=complex)
    f = [
        cochain_from_json(base, doc["f"][str(a)]).values if str(a) in doc.get("f", {}) else np.zeros(base.count(2), dtype=complex)
        for a in range(cover.n_charts)
    ]
    return DeligneData(cover, g, A, f)


# coverings and fibered cochains


def covering_from_json(cover: CoverNerve, doc: Mapping) -> FiniteCovering:
    transitions = {parse_key(k): v for k, v in doc.get("transitions", {}).items()}
    return FiniteCovering(cover, int(doc["sheets"]), transitions)


def fibered_to_json(w: FiberedCochain) -> dict:
    base = w.covering.base
    values = {}
    for s, block in zip(base.simplices(w.q), w.values):
        entries = {key_of(idx): complex_pair(block[idx]) for idx in np.ndindex(block.shape) if block[idx] != 0}
        if entries:
            values[key_of(s)] = entries
    return {"arity": w.p, "degree": w.q, "values": values}


def fibered_from_json(covering: FiniteCovering, doc: Mapping) -> FiberedCochain:
    p, q = int(doc["arity"]), int(doc["degree"])
    w = FiberedCochain.zero(covering, p, q)
    base = covering.base
    for key, entries in doc.get("values", {}).items():
        sign, i = base.index(parse_key(key))
        for sheets, value in entries.items():
            w.values[(i,) + tuple(parse_key(sheets))] += sign * parse_complex(value)
    return w


# surfaces


def surface_from_json(doc: Mapping, base: OrientedSimplicialComplex) -> SurfaceInBase:
    """A surface document, or ``{"boundary_of": [[v0..v3], ...]}`` naming 3-simplices."""
    if "boundary_of" in doc:
        B = Chain.from_dict(base, 3, {tuple(t): 1 for t in doc["boundary_of"]})
        return SurfaceInBase.from_cycle(B.boundary())
    surface = complex_from_json(doc["surface"])
    labels = {str(v): v for v in surface.vertices}
    base_labels = {str(v): v for v in base.vertices}
    raw_map = doc.get("vertex_map")
    try:
        vmap = {v: v for v in surface.vertices} if raw_map is None else {labels[str(k)]: base_labels[str(v)] for k, v in raw_map.items()}
    except KeyError as err:
        raise InconsistentInput(f"vertex map names unknown vertex {err}") from err
    sub = {tuple(sorted(parse_key(k))): int(a) for k, a in doc.get("subordination", {}).items()} or None
    return SurfaceInBase(surface, vmap, subordination=sub)


# scenarios


def _generated_complex(doc: Mapping) -> tuple[OrientedSimplicialComplex, list | None, LatticeMesh | None]:
    """A complex from a generator shortcut, with its natural charts and mesh."""
    name = doc["generator"]
    if name in ("s3", "s2"):
        mesh = s3_mesh(int(doc.get("level", 12))) if name == "s3" else s2_mesh(int(doc.get("level", 4)))
        return mesh.complex, mesh.coordinate_charts(), mesh
    if name == "boundary_simplex":
        return boundary_simplex(int(doc.get("dim", 3))), None, None
    if name == "circle":
        return circle(int(doc.get("n", 6))), None, None
    if name == "six_cycle":
        K, charts = six_cycle_charts()
        return K, charts, None
    if name == "projective_plane":
        return projective_plane(), None, None
    if name == "heisenberg":
        cover = heisenberg_example().cover
        return cover.base, [list(c) for c in cover.charts], None
    if name == "barycentric":
        sd = barycentric_subdivision(complex_from_json(doc["of"]))
        return sd.complex, sd.star_charts(), None
    raise InconsistentInput(f"unknown complex generator {name!r}")


@dataclass
class Scenario:
    """A parsed scenario document with lazily built payloads."""

    doc: dict
    complex: OrientedSimplicialComplex
    natural_charts: list | None
    mesh: LatticeMesh | None = None
    options: dict = field(default_factory=dict)
    _cover: CoverNerve | None = None

    @property
    def seed(self) -> int:
        return int(self.options.get("seed", 0))

    @property
    def partition(self) -> str:
        return str(self.options.get("partition", "hat"))

    @property
    def cover(self) -> CoverNerve:
        if self._cover is None:
            doc = self.doc.get("cover", {"generator": "natural"})
            if "charts" in doc:
                charts = doc["charts"]
            elif doc.get("generator") == "natural" and self.natural_charts is not None:
                charts = self.natural_charts
            elif doc.get("generator") == "single":
                charts = [list(self.complex.vertices)]
            else:
                raise InconsistentInput("scenario needs a cover")
            self._cover = CoverNerve(self.complex, charts)
        return self._cover

    def gerbe(self) -> GerbePresentation:
        cover = self.cover
        doc = self.doc.get("gerbe", {"trivial": True})
        if "g" in doc:
            g = cxcochain_from_json(cover, doc["g"])
        elif "integer_class" in doc:
            spec = doc["integer_class"]
            if "generator" in spec:
                n = generator_class(cover.nerve, int(spec["generator"])).cocycle
            else:
                n = integer_cocycle_from_json(cover.nerve, spec.get("cocycle", {}))
            g = build_from_integer_class(cover, n, self.partition)
        elif doc.get("trivial"):
            g = CxCochain.constant(cover, 2)
        else:
            raise InconsistentInput("gerbe payload needs 'g', 'integer_class' or 'trivial'")
        if doc.get("gauge"):
            rho = random_smooth_cochain(cover, 1, np.random.default_rng(self.seed))
            g = g * cech_coboundary(rho)
        return GerbePresentation(cover, g)

    def deligne(self) -> DeligneData | None:
        if "deligne" not in self.doc:
            return None
        return deligne_from_json(self.cover, self.doc["deligne"])

    def extension(self) -> CentralExtension:
        doc = self.doc.get("extension")
        if doc is None:
            raise InconsistentInput("scenario has no extension")
        if doc.get("generator") == "heisenberg":
            return CentralExtension.heisenberg()
        table = doc["table"]
        if "cocycle" in doc:
            cocycle = [[parse_complex(v) for v in row] for row in doc["cocycle"]]
            return CentralExtension(table, cocycle)
        return CentralExtension.split(table)

    def bundle(self, ext: CentralExtension) -> PrincipalBundleData:
        doc = self.doc.get("transitions", {})
        if doc.get("generator") == "heisenberg":
            example = heisenberg_example()
            transitions = {e: x for e, x in example.bundle.transitions.items() if e[0] < e[1]}
        else:
            transitions = {parse_key(k): int(v) for k, v in doc.items()}
        return PrincipalBundleData(self.cover, ext, transitions)

    def ball(self) -> Chain | None:
        """The 3-chain named by ``{"surface": {"coarse_cells": [...]}}`` on a mesh."""
        doc = self.doc.get("surface", {})
        if "coarse_cells" not in doc:
            return None
        if self.mesh is None:
            raise InconsistentInput("coarse cells need a generated mesh")
        fundamental = Chain.fundamental(self.complex)
        total = Chain.zero(self.complex, 3)
        for cell in doc["coarse_cells"]:
            total = total + self.mesh.cell_chain(cell, fundamental)
        return total

    def surface(self) -> SurfaceInBase:
        ball = self.ball()
        if ball is not None:
            return SurfaceInBase.from_cycle(ball.boundary())
        if "surface" not in self.doc:
            raise InconsistentInput("scenario has no surface")
        return surface_from_json(self.doc["surface"], self.complex)

    def lift_choice(self):
        doc = self.doc.get("lift")
        if doc is None:
            return None
        return {parse_key(k): parse_complex(v) for k, v in doc.items()}


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file.

    Raises:
        OSError: unreadable file.
        InconsistentInput: malformed content.
    """
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise InconsistentInput(f"scenario is not valid JSON: {err}") from err
    return scenario_from_doc(doc)


def scenario_from_doc(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise InconsistentInput("scenario must be a JSON object")
    if "version" not in doc:
        raise InconsistentInput("scenario lacks a 'version' field")
    if int(doc["version"]) != SCENARIO_VERSION:
        raise InconsistentInput(f"unsupported scenario version {doc['version']}")
    cdoc = doc.get("complex")
    if cdoc is None:
        raise InconsistentInput("scenario lacks a 'complex'")
    try:
        if "generator" in cdoc:
            K, charts, mesh = _generated_complex(cdoc)
        else:
            K, charts, mesh = complex_from_json(cdoc), None, None
    except (KeyError, TypeError, ValueError) as err:
        raise InconsistentInput(f"malformed complex: {err}") from err
    return Scenario(doc, K, charts, mesh, dict(doc.get("options", {})))


def dumps(doc: Any) -> str:
    """Deterministic JSON text."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


__all__ = [
    "SCENARIO_VERSION",
    "Scenario",
    "chain_from_json",
    "chain_to_json",
    "cochain_from_json",
    "cochain_to_json",
    "complex_from_json",
    "complex_to_json",
    "cover_to_json",
    "covering_from_json",
    "cxcochain_from_json",
    "cxcochain_to_json",
    "deligne_from_json",
    "deligne_to_json",
    "dumps",
    "fibered_from_json",
    "fibered_to_json",
    "load_scenario",
    "scenario_from_doc",
    "surface_from_json",
]

