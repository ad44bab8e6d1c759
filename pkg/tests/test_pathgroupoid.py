import math

import numpy as np
import pytest

from gerbes.cech import CxValue
from gerbes.complex import Cochain, build_complex
from gerbes.errors import (
    EndpointMismatch,
    InconsistentInput,
    NonIntegralForm,
    NotConnected,
    NotSimplyConnected,
)
from gerbes.meshes import boundary_simplex, circle, product, projective_plane, s2_mesh, simplex
from gerbes.pathgroupoid import PathGroupoid


def _zero(K):
    return Cochain.zero(K, 2)


def test_triangle_transport():
    K = simplex(2)
    c = 0.3 + 0.7j
    G = PathGroupoid(K, Cochain(K, 2, np.array([c])))
    z = CxValue.from_complex(2.0)
    a = G.element([0, 1, 2], z)
    # the detour around the face picks up exp(∫ f)
    assert G.equal(a, G.element([0, 2], z / CxValue.from_log(c)))
    assert not G.equal(a, G.element([0, 2], z))
    assert abs(G.transport(a.path, G.path([0, 2])) - c) < 1e-15


def test_topological_requirements():
    with pytest.raises(NotConnected):
        K = build_complex([(0, 1, 2), (3, 4, 5)])
        PathGroupoid(K, _zero(K))
    T, _ = product(circle(3), circle(3))
    with pytest.raises(NotSimplyConnected):
        PathGroupoid(T, _zero(T))
    P = projective_plane()
    with pytest.raises(NotSimplyConnected, match="torsion"):
        PathGroupoid(P, _zero(P))


def test_integrality_on_the_sphere():
    K = boundary_simplex(3)
    with pytest.raises(NonIntegralForm):
        PathGroupoid(K, Cochain(K, 2, np.array([0.1, 0, 0, 0])))
    G = PathGroupoid(K, Cochain(K, 2, np.array([2j * math.pi, 0, 0, 0])))
    assert len(G.periods) == 1 and abs(abs(G.periods[0]) - 1) < 1e-12
    a, b = G.element([0, 1, 2]), G.element([0, 2])
    # the two fillings of the loop differ by the whole sphere
    assert (G.ratio(a, b) / G.ratio(a, b, extra_cycle=0)).distance_to_one() < 1e-12


def test_input_validation():
    K = simplex(3)
    with pytest.raises(InconsistentInput):
        PathGroupoid(K, _zero(simplex(3)))
    with pytest.raises(InconsistentInput):
        PathGroupoid(K, Cochain.zero(K, 1))
    with pytest.raises(InconsistentInput, match="closed"):
        PathGroupoid(K, Cochain(K, 2, np.array([1.0, 0, 0, 0])))
    G = PathGroupoid(K, _zero(K))
    with pytest.raises(InconsistentInput):
        G.path([])
    with pytest.raises(InconsistentInput):
        G.path([0, 9])
    with pytest.raises(InconsistentInput):
        G.path([0, 0])
    with pytest.raises(InconsistentInput):
        G.trivialize_at(9)


def test_endpoint_mismatch():
    K = simplex(2)
    G = PathGroupoid(K, _zero(K))
    a, b = G.element([0, 1]), G.element([2, 0])
    with pytest.raises(EndpointMismatch):
        G.product(a, b)
    with pytest.raises(EndpointMismatch):
        G.ratio(a, b)
    assert G.product(b, a).path.vertices == (2, 0, 1)


def test_geodesic_is_lexicographic():
    K = build_complex([(0, 1, 2), (0, 2, 3)])
    G = PathGroupoid(K, _zero(K))
    assert G.geodesic(1, 3).vertices == (1, 0, 3)
    assert G.geodesic(2, 2).vertices == (2,)
    assert len(G.geodesic(1, 3)) == 2


def test_axioms_and_canonical_form():
    rng = np.random.default_rng(4)
    m = s2_mesh(2)
    K = m.complex
    values = rng.normal(size=K.count(2)) + 1j * rng.normal(size=K.count(2))
    # make the total over the sphere a whole turn
    z = K.homology(2).cycles[0].as_float()
    values += (2j * math.pi - np.dot(z, values)) * z / np.dot(z, z)
    G = PathGroupoid(K, Cochain(K, 2, values))
    vs = K.vertices
    a = G.element(G.geodesic(vs[0], vs[5]).vertices, 1.5j)
    b = G.element(G.geodesic(vs[5], vs[9]).vertices, -0.5)
    c = G.element(G.geodesic(vs[9], vs[2]).vertices, 3.0)
    assert G.equal(G.product(G.product(a, b), c), G.product(a, G.product(b, c)))
    assert G.equal(G.product(G.identity_at(a.source), a), a)
    assert G.equal(G.product(a, G.inverse(a)), G.identity_at(a.source))
    ab = G.product(a, b)
    canon = G.canonical(ab)
    assert canon.path == G.geodesic(ab.source, ab.target)
    assert G.equal(ab, canon)


def test_basepoint_trivialization():
    rng = np.random.default_rng(6)
    K = simplex(3)
    # an exact form d(alpha) is closed on the solid tetrahedron
    alpha = rng.normal(size=K.count(1))
    f = Cochain(K, 2, K.boundary(2).T @ alpha)
    G = PathGroupoid(K, f)
    T = G.trivialize_at(3)
    a = G.element([0, 1, 2], CxValue(0.2, 1.0))
    y, z, scalar = T.decompose(a)
    assert (y, z) == (0, 2)
    assert G.equal(T.compose(y, z, scalar), a)
    assert T.section(3).path.vertices == (3,)
