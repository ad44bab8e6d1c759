import numpy as np
import pytest

from gerbes.cech import CoverNerve, cech_coboundary, random_smooth_cochain
from gerbes.connection import (
    DeligneData,
    build_connection,
    build_from_integer_class,
    check_deligne,
    class_pairing,
    curvature_three_form,
    curving_from_chart,
    difference_potential,
    dlog,
    gauge_transform,
    generator_class,
)
from gerbes.errors import ChartUnknown, GlueMismatch, InconsistentInput, NotAnIntegerCocycle
from gerbes.meshes import s2_mesh, six_cycle_charts


@pytest.fixture(scope="module")
def gauged(s3):
    rng = np.random.default_rng(5)
    return s3.class_gerbe(1).g * cech_coboundary(random_smooth_cochain(s3.cover, 1, rng, max_edge_jump=0.3))


@pytest.mark.parametrize("partition, curving", [("hat", "partition"), ("flat", "partition"), ("hat", "least_norm")])
def test_build_connection_is_deligne(s3, gauged, partition, curving):
    d = build_connection(gauged, partition, curving=curving)
    report = check_deligne(d)
    assert report.passed and report.worst < 1e-9
    assert set(report.as_dict()) >= {"passed", "cocycle_residual"}
    omega = curvature_three_form(d)
    assert abs(class_pairing(omega, s3.fundamental) - 1) < 1e-8


def test_unknown_curving(gauged):
    with pytest.raises(InconsistentInput):
        build_connection(gauged, curving="sideways")


def test_broken_connection_is_reported(s3):
    d = build_connection(s3.class_gerbe(1).g)
    edge = next(iter(d.A))
    A = dict(d.A)
    A[edge] = A[edge] + 0.1 * d.edge_mask(edge)
    report = check_deligne(DeligneData(d.cover, d.g, A, d.f))
    assert not report.passed
    assert report.failures()["triple"]


def test_gauge_transform_stays_deligne(s3, rng):
    d = build_connection(s3.class_gerbe(1).g)
    rho = random_smooth_cochain(s3.cover, 1, rng, max_edge_jump=0.3)
    eta = [0.3 * rng.normal(size=s3.complex.count(1)) for _ in range(s3.cover.n_charts)]
    moved = gauge_transform(d, rho, eta)
    assert check_deligne(moved).worst < 1e-9
    # the curvature is gauge invariant
    assert np.abs(curvature_three_form(moved).values - curvature_three_form(d).values).max() < 1e-9
    with pytest.raises(InconsistentInput):
        gauge_transform(d, eta=eta[:2])


def test_difference_potential(s3):
    g = s3.class_gerbe(1).g
    mu, worst = difference_potential(build_connection(g, "hat"), build_connection(g, "flat"))
    assert worst < 1e-9
    assert len(mu) == s3.cover.n_charts


def test_dlog_is_the_edge_difference_of_a_branch(s3, rng):
    rho = random_smooth_cochain(s3.cover, 1, rng)
    D = dlog(rho)
    B1T = s3.complex.boundary(1).T
    for sigma, v in D.items():
        mask = s3.complex.induced_mask(s3.cover.overlap_mask(sigma), 1)
        step = B1T @ rho.log(sigma)
        # agrees with the naive difference up to whole turns
        turns = (step - v)[mask].imag / (2 * np.pi)
        assert np.abs(turns - np.round(turns)).max() < 1e-12
        assert np.abs(v[mask].imag).max() < np.pi


def test_curvature_glue_mismatch(s3):
    d = build_connection(s3.class_gerbe(1).g)
    f = list(d.f)
    noise = np.random.default_rng(0).normal(size=s3.complex.count(2))
    f[0] = f[0] + 0.5 * noise * d.face_mask((0,))
    with pytest.raises(GlueMismatch):
        curvature_three_form(DeligneData(d.cover, d.g, d.A, f))


def test_curvature_is_closed_and_integral(s3):
    omega = curvature_three_form(build_connection(s3.class_gerbe(2).g))
    assert omega.closedness() == 0.0
    assert abs(class_pairing(omega, s3.fundamental) - 2) < 1e-8
    with pytest.raises(InconsistentInput):
        omega.integrate(s3.fundamental.boundary())


def test_low_dimensional_curvature_is_empty():
    K, arcs = six_cycle_charts()
    d = DeligneData.trivial(CoverNerve(K, arcs))
    assert check_deligne(d).passed
    assert curvature_three_form(d).values.size == 0


def test_curving_from_chart():
    m = s2_mesh(3)
    cover = CoverNerve(m.complex, m.coordinate_charts())
    d = DeligneData.trivial(cover)
    K = m.complex
    A_local = np.arange(K.count(1), dtype=float)
    curving = curving_from_chart(d, 0, A_local)
    inside = K.induced_mask(cover.masks[0], 2)
    assert not curving[~inside].any()
    assert np.allclose(curving[inside], (K.boundary(2).T @ np.where(K.induced_mask(cover.masks[0], 1), A_local, 0))[inside])
    with pytest.raises(ChartUnknown):
        curving_from_chart(d, cover.n_charts, A_local)
    with pytest.raises(InconsistentInput):
        curving_from_chart(d, 0, A_local[:-1])


def test_deligne_data_validation(s3):
    d = DeligneData.trivial(s3.cover)
    n1 = s3.complex.count(1)
    with pytest.raises(InconsistentInput):
        DeligneData(s3.cover, d.g, {(0, 1): np.zeros(3)}, d.f)
    with pytest.raises(InconsistentInput):
        DeligneData(s3.cover, d.g, {(1, 0): np.zeros(n1)}, d.f)
    with pytest.raises(InconsistentInput):
        DeligneData(s3.cover, d.g, {}, d.f[:2])
    with pytest.raises(InconsistentInput):
        DeligneData(s3.cover, d.g, {}, [np.zeros(4)] * s3.cover.n_charts)
    # reversing a pair negates the connection
    A = {(0, 1): np.arange(n1, dtype=float)}
    e = DeligneData(s3.cover, d.g, A, d.f)
    assert np.array_equal(e.connection(1, 0), -e.connection(0, 1))


def test_build_from_integer_class_errors(s3):
    with pytest.raises(NotAnIntegerCocycle):
        build_from_integer_class(s3.cover, np.zeros(3))
    with pytest.raises(NotAnIntegerCocycle):
        build_from_integer_class(s3.cover, np.full(5, 0.5))
    refined = s3.refining_cover()
    n = np.zeros(refined.nerve.count(3), dtype=np.int64)
    n[0] = 1
    with pytest.raises(NotAnIntegerCocycle, match="coboundary"):
        build_from_integer_class(refined, n)


def test_generator_class_on_a_four_dimensional_nerve(s3):
    refined = s3.refining_cover()
    cls = generator_class(refined.nerve, 2)
    assert not cls.coboundary().any()
    z = refined.nerve.homology(3).cycles[0]
    assert int(np.dot(cls.cocycle, z.coefficients)) == 2
