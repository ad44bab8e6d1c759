from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gerbes import _linalg
from gerbes.complex import (
    Chain,
    Cochain,
    OrientedSimplicialComplex,
    build_complex,
    coboundary,
    cup_function,
    fill_boundary,
    fillings_kernel,
    integrate,
    orient,
    permutation_sign,
    pullback_values,
    pushforward,
)
from gerbes.errors import (
    DegreeMismatch,
    DegreeOutOfRange,
    DuplicateVertexInSimplex,
    InconsistentInput,
    NotACycle,
    NotNullHomologous,
)
from gerbes.meshes import (
    barycentric_subdivision,
    boundary_simplex,
    circle,
    edgewise_subdivision,
    product,
    projective_plane,
    s2_mesh,
    simplex,
)


def test_face_closure_and_counts():
    K = build_complex([(0, 1, 2), (1, 2, 3)])
    assert [K.count(k) for k in range(3)] == [4, 5, 2]
    assert K.contains((2, 1))
    assert not K.contains((0, 3))
    assert not K.contains((0, 1, 2, 3))


def test_construction_errors():
    with pytest.raises(DuplicateVertexInSimplex):
        build_complex([(0, 0, 1)])
    with pytest.raises(InconsistentInput):
        build_complex([])
    with pytest.raises(InconsistentInput):
        build_complex([(0, "a")])


def test_orientation_signs():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert orient((2, 0, 1)) == (1, (0, 1, 2))
    assert orient((0, 0))[0] == 0
    K = boundary_simplex(3)
    assert K.index((1, 0, 2))[0] == -K.index((0, 1, 2))[0]


@pytest.mark.parametrize(
    "K, bettis, torsion",
    [
        (circle(5), [1, 1], {}),
        (boundary_simplex(3), [1, 0, 1], {}),
        (boundary_simplex(4), [1, 0, 0, 1], {}),
        (simplex(3), [1, 0, 0, 0], {}),
        (projective_plane(), [1, 0, 0], {1: [2]}),
    ],
)
def test_homology_of_standard_spaces(K, bettis, torsion):
    for k, b in enumerate(bettis):
        h = K.homology(k)
        assert h.betti == b
        assert h.torsion == torsion.get(k, [])
        assert all(z.is_cycle() for z in h.cycles)


def test_torus_homology():
    T, _ = product(circle(3), circle(3))
    assert [T.homology(k).betti for k in range(3)] == [1, 2, 1]


def test_boundary_squares_to_zero():
    K = s2_mesh(3).complex
    assert (K.boundary(1) @ K.boundary(2)).count_nonzero() == 0


def test_subdivisions_preserve_homology():
    m = edgewise_subdivision(boundary_simplex(3), 3)
    assert [m.complex.homology(k).betti for k in range(3)] == [1, 0, 1]
    sd = barycentric_subdivision(projective_plane())
    assert sd.complex.homology(1).torsion == [2]


def test_s3_mesh_shape(s3):
    assert s3.complex.count(0) == 1490
    assert s3.complex.dim == 3
    assert s3.fundamental.is_cycle()


def test_cell_chain_covers_fundamental(s3):
    total = Chain.zero(s3.complex, 3)
    for cell in boundary_simplex(4).simplices(3):
        total = total + s3.mesh.cell_chain(cell, s3.fundamental)
    assert total == s3.fundamental


small_ints = st.lists(st.lists(st.integers(-5, 5), min_size=4, max_size=4), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(small_ints)
def test_smith_normal_form_properties(rows):
    A = np.array(rows, dtype=np.int64)
    s = _linalg.smith_normal_form(A)
    PAQ = np.array(s.P) @ A @ np.array(s.Q)
    assert (PAQ == np.array(s.D)).all()
    assert (np.array(s.P) @ np.array(s.Pinv) == np.eye(len(rows), dtype=np.int64)).all()
    d = s.diagonal
    assert all(x > 0 for x in d)
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
    assert s.rank == np.linalg.matrix_rank(A)


@settings(max_examples=60, deadline=None)
@given(small_ints, st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_solve_integer_recovers_image(rows, x):
    A = np.array(rows, dtype=np.int64)
    b = (A @ np.array(x)).tolist()
    sol = _linalg.solve_integer(A, b)
    assert sol is not None
    assert (A @ np.array(sol) == np.array(b)).all()


def test_solve_integer_detects_fractional():
    assert _linalg.solve_integer([[2, 0], [0, 2]], [1, 0]) is None
    assert _linalg.solve_rational([[2, 0], [0, 2]], [1, 0]) == [Fraction(1, 2), Fraction(0)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_stokes_on_sphere(seed):
    rng = np.random.default_rng(seed)
    K = s2_mesh(2).complex
    c = Cochain(K, 1, rng.normal(size=K.count(1)) + 1j * rng.normal(size=K.count(1)))
    z = Chain(K, 2, rng.integers(-3, 4, size=K.count(2)))
    assert abs(integrate(coboundary(c), z) - integrate(c, z.boundary())) < 1e-9


def test_cochain_validation():
    K = boundary_simplex(3)
    with pytest.raises(DegreeOutOfRange):
        Cochain.zero(K, 3)
    with pytest.raises(InconsistentInput):
        Cochain(K, 1, np.zeros(2))
    with pytest.raises(DegreeMismatch):
        integrate(Cochain.zero(K, 1), Chain.zero(K, 2))
    with pytest.raises(DegreeOutOfRange):
        coboundary(Cochain.zero(K, 2))
    f = Cochain.from_dict(K, 1, {(1, 0): 2.0})
    assert f((0, 1)) == -2.0


def test_fill_boundary_integer_and_errors():
    K = boundary_simplex(3)
    loop = Chain.from_dict(K, 1, {(0, 1): 1, (1, 2): 1, (2, 0): 1})
    D = fill_boundary(loop)
    assert not D.is_exact
    assert D.boundary() == loop
    with pytest.raises(NotACycle):
        fill_boundary(Chain.from_dict(K, 1, {(0, 1): 1}))
    with pytest.raises(NotNullHomologous):
        fill_boundary(Chain.from_dict(circle(4), 1, {(0, 1): 1, (1, 2): 1, (2, 3): 1, (0, 3): -1}))
    assert len(fillings_kernel(K, 1)) == 1


def _torsion_cycle(K):
    for vec in _linalg.rational_kernel(K.boundary(1)):
        scale = np.lcm.reduce([Fraction(x).denominator for x in vec])
        z = Chain(K, 1, np.array([int(x * scale) for x in vec], dtype=np.int64))
        if fill_boundary(z).is_exact:
            return z
    raise AssertionError("no torsion cycle found")


def test_fill_prefers_integer_coefficients():
    # the core circle of the projective plane bounds only rationally, its double integrally
    K = projective_plane()
    z = _torsion_cycle(K)
    half = fill_boundary(z)
    assert any(c.denominator == 2 for c in half.coefficients)
    D = fill_boundary(2 * z)
    assert not D.is_exact
    assert D.boundary() == 2 * z


def test_cup_with_constant_is_identity():
    K = boundary_simplex(3)
    values = np.arange(K.count(2), dtype=complex)
    assert np.allclose(cup_function(np.ones(K.count(0)), K, 2, values), values)


def test_pullback_and_pushforward_are_adjoint():
    rng = np.random.default_rng(1)
    target = boundary_simplex(3)
    source = boundary_simplex(3)
    vmap = {0: 1, 1: 2, 2: 0, 3: 3}
    c = Cochain(target, 2, rng.normal(size=4))
    z = Chain.fundamental(source)
    pulled = Cochain(source, 2, pullback_values(source, target, vmap, 2, c.values))
    assert abs(integrate(pulled, z) - integrate(c, pushforward(z, target, vmap))) < 1e-12
    collapse = {0: 0, 1: 0, 2: 1, 3: 2}
    assert not any(pushforward(z, target, collapse).coefficients)


def test_pushforward_rejects_non_simplicial_maps():
    K = circle(4)
    with pytest.raises(InconsistentInput):
        pushforward(Chain.simplex(K, (0, 1)), K, {0: 0, 1: 2, 2: 1, 3: 3})


def test_custom_labels():
    K = OrientedSimplicialComplex([("a", "b", "c")])
    assert K.vertices == ("a", "b", "c")
    assert K.homology(0).betti == 1
