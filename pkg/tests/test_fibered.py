import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gerbes.cech import CoverNerve
from gerbes.complex import Cochain
from gerbes.errors import ArityOutOfRange, InconsistentInput, NotClosed
from gerbes.fibered import (
    MAX_ARITY,
    FiberedCochain,
    FiniteCovering,
    closedness,
    contract,
    d_base,
    delta,
    patch_primitive,
)
from gerbes.meshes import circle, s2_mesh, six_cycle_charts


@pytest.fixture(scope="module")
def sphere_cover():
    m = s2_mesh(4)
    return CoverNerve(m.complex, m.coordinate_charts())


@pytest.fixture(scope="module")
def ring_cover():
    K, arcs = six_cycle_charts()
    return CoverNerve(K, arcs)


def _coverings(sphere_cover, ring_cover, rng):
    return [
        FiniteCovering.gauged(sphere_cover, 3, rng),
        FiniteCovering(ring_cover, 2, {(0, 2): [1, 0]}),
        FiniteCovering(ring_cover, 3, {(0, 1): [1, 2, 0]}),
    ]


def test_covering_validation(ring_cover, sphere_cover):
    with pytest.raises(InconsistentInput):
        FiniteCovering(ring_cover, 2, {(0, 1): [0, 0]})
    with pytest.raises(InconsistentInput):
        FiniteCovering(ring_cover, 0)
    with pytest.raises(InconsistentInput):
        FiniteCovering(ring_cover, 2, {(0, 5): [1, 0]})
    with pytest.raises(InconsistentInput):
        FiniteCovering(sphere_cover, 2, {(0, 1): [1, 0]})


def test_transition_inverse_is_stored(ring_cover):
    Y = FiniteCovering(ring_cover, 3, {(2, 0): [1, 2, 0]})
    assert Y.tau[(2, 0)].tolist() == [1, 2, 0]
    assert Y.tau[(0, 2)][Y.tau[(2, 0)]].tolist() == [0, 1, 2]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 4), st.integers(0, 1))
def test_delta_squares_to_zero(seed, arity, degree):
    rng = np.random.default_rng(seed)
    m = s2_mesh(3)
    Y = FiniteCovering.gauged(CoverNerve(m.complex, m.coordinate_charts()), 2, rng)
    w = FiberedCochain.random(Y, arity, degree, rng)
    assert delta(delta(w)).norm() < 1e-12


def test_primitive_and_contraction(sphere_cover, ring_cover, rng):
    for Y in _coverings(sphere_cover, ring_cover, rng):
        for p in range(1, 4):
            w = delta(FiberedCochain.random(Y, p - 1, 1, rng))
            assert closedness(w) < 1e-12
            rho = contract(w)
            assert (delta(rho) - (-1) ** (p + 1) * w).norm() < 1e-12
            for partition in ("hat", "flat"):
                assert (delta(patch_primitive(w, partition)) - w).norm() < 1e-9


def test_contraction_basepoint_choice(ring_cover, rng):
    Y = FiniteCovering(ring_cover, 2, {(0, 2): [1, 0]})
    w = delta(FiberedCochain.random(Y, 1, 0, rng))
    other = contract(w, {0: 1, 1: 1, 2: 0})
    assert (delta(other) + w).norm() < 1e-12
    with pytest.raises(InconsistentInput):
        contract(w, {0: 5})


def test_base_differential_commutes(sphere_cover, rng):
    Y = FiniteCovering.gauged(sphere_cover, 2, rng)
    for p in range(3):
        u = FiberedCochain.random(Y, p, 0, rng)
        assert (d_base(delta(u)) - delta(d_base(u))).norm() < 1e-12
        assert d_base(d_base(u)).norm() < 1e-12
    with pytest.raises(InconsistentInput):
        d_base(FiberedCochain.random(Y, 1, 2, rng))


def test_arity_zero_is_base(ring_cover, rng):
    Y = FiniteCovering.trivial(ring_cover, 2)
    c = Cochain(ring_cover.base, 1, rng.normal(size=6))
    lifted = delta(FiberedCochain.from_base(Y, c))
    # the pullback to the covering is constant along the sheet
    assert np.allclose(lifted.values[:, 0], c.values)
    assert np.allclose(lifted.values[:, 1], c.values)
    assert np.array_equal(FiberedCochain.from_base(Y, c).to_base().values, c.values)
    with pytest.raises(ArityOutOfRange):
        lifted.to_base()


def test_not_closed_is_rejected(ring_cover, rng):
    Y = FiniteCovering(ring_cover, 2, {(0, 2): [1, 0]})
    w = FiberedCochain.random(Y, 2, 0, rng)
    with pytest.raises(NotClosed):
        patch_primitive(w)
    with pytest.raises(NotClosed):
        contract(w)
    with pytest.raises(ArityOutOfRange):
        patch_primitive(FiberedCochain.random(Y, 0, 0, rng))


def test_arity_bound(ring_cover, rng):
    Y = FiniteCovering.trivial(ring_cover, 2)
    top = FiberedCochain.random(Y, MAX_ARITY, 0, rng)
    with pytest.raises(ArityOutOfRange):
        delta(top)
    assert closedness(top) == 0.0


def test_reframing_is_consistent(sphere_cover, rng):
    Y = FiniteCovering.gauged(sphere_cover, 3, rng)
    w = FiberedCochain.random(Y, 2, 1, rng)
    for a in range(sphere_cover.n_charts):
        values, mask = w.in_chart(a)
        homes = Y.home(1)
        same = mask & (homes == a)
        assert np.array_equal(values[same], w.values[same])
    # sheet relabelling commutes with the fiber differential
    u = FiberedCochain.random(Y, 1, 0, rng)
    chart_view = delta(u).in_chart(1)[0]
    view_then_delta = delta(FiberedCochain(Y, 1, 0, u.in_chart(1)[0])).values
    mask = Y.member(0)[1]
    assert np.allclose(chart_view[mask], view_then_delta[mask])


def test_antisymmetrize_and_transpose(ring_cover, rng):
    Y = FiniteCovering.trivial(ring_cover, 2)
    w = FiberedCochain.random(Y, 3, 0, rng)
    a = w.antisymmetrized()
    assert (a.transpose(0, 1) + a).norm() < 1e-12
    assert (a.antisymmetrized() - a).norm() < 1e-12
    assert (w.transpose(0, 2).transpose(0, 2) - w).norm() == 0


def test_algebra_checks(ring_cover, rng):
    Y = FiniteCovering.trivial(ring_cover, 2)
    other = FiniteCovering.trivial(CoverNerve(circle(6), [[0, 1, 2, 3], [2, 3, 4, 5], [4, 5, 0, 1]]), 2)
    w = FiberedCochain.random(Y, 1, 0, rng)
    assert (w + (-w)).norm() == 0
    assert (2 * w - w - w).norm() < 1e-15
    with pytest.raises(InconsistentInput):
        w + FiberedCochain.random(other, 1, 0, rng)
