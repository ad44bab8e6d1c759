import json

import numpy as np
import pytest

from gerbes import io
from gerbes.cech import CoverNerve, random_smooth_cochain
from gerbes.complex import Chain, Cochain
from gerbes.connection import DeligneData, check_deligne, gauge_transform
from gerbes.errors import InconsistentInput
from gerbes.fibered import FiberedCochain, FiniteCovering
from gerbes.meshes import boundary_simplex, s2_mesh


@pytest.fixture(scope="module")
def sphere():
    m = s2_mesh(3)
    return m, CoverNerve(m.complex, m.coordinate_charts())


def _through_text(doc):
    return json.loads(io.dumps(doc))


def test_keys():
    assert io.key_of((0, 1, 2)) == "[0,1,2]"
    assert io.key_of((np.int64(3), "a")) == '[3,"a"]'
    assert io.parse_key("[0,1,2]") == (0, 1, 2)
    with pytest.raises(InconsistentInput):
        io.parse_key("0,1")
    with pytest.raises(InconsistentInput):
        io.parse_key("{}")


def test_complex_numbers():
    assert io.parse_complex(2) == 2
    assert io.parse_complex([1.5, -2]) == 1.5 - 2j
    with pytest.raises(InconsistentInput):
        io.parse_complex("1+2j")
    assert io.rounded(1 / 3) == float(f"{1 / 3:.12g}")


def test_complex_round_trip(sphere):
    m, _ = sphere
    K = io.complex_from_json(_through_text(io.complex_to_json(m.complex)))
    assert K.vertices == m.complex.vertices
    assert [K.count(k) for k in range(3)] == [m.complex.count(k) for k in range(3)]
    assert io.complex_from_json({"generator": "circle", "n": 5}).count(1) == 5
    with pytest.raises(InconsistentInput):
        io.complex_from_json({})


def test_chain_and_cochain_round_trip(sphere, rng):
    m, _ = sphere
    K = m.complex
    c = Cochain(K, 1, rng.normal(size=K.count(1)) + 1j * rng.normal(size=K.count(1)))
    back = io.cochain_from_json(K, _through_text(io.cochain_to_json(c)))
    assert np.abs(back.values - c.values).max() < 1e-11
    z = Chain(K, 2, rng.integers(-3, 4, size=K.count(2)))
    assert io.chain_from_json(K, _through_text(io.chain_to_json(z))) == z
    with pytest.raises(InconsistentInput):
        io.chain_from_json(K, {"degree": 1, "values": {io.key_of(K.simplices(1)[0]): [0.5, 0]}})


def test_cech_and_deligne_round_trip(sphere, rng):
    _, cover = sphere
    rho = random_smooth_cochain(cover, 1, rng)
    back = io.cxcochain_from_json(cover, _through_text(io.cxcochain_to_json(rho)))
    assert back.distance(rho) < 1e-10
    eta = [rng.normal(size=cover.base.count(1)) for _ in range(cover.n_charts)]
    d = gauge_transform(DeligneData.trivial(cover), rho, eta)
    e = io.deligne_from_json(cover, _through_text(io.deligne_to_json(d)))
    assert check_deligne(e).worst < 1e-9
    assert max(np.abs(e.A[s] - d.A[s]).max() for s in d.A) < 1e-10
    with pytest.raises(InconsistentInput):
        io.cxcochain_from_json(cover, {"level": 1, "values": {"[0,1]": {"nowhere": [0, 0]}}})


def test_fibered_round_trip(sphere, rng):
    _, cover = sphere
    Y = FiniteCovering.gauged(cover, 2, rng)
    w = FiberedCochain.random(Y, 2, 1, rng)
    back = io.fibered_from_json(Y, _through_text(io.fibered_to_json(w)))
    assert (back - w).norm() < 1e-10
    Z = io.covering_from_json(cover, {"sheets": 3})
    assert Z.sheets == 3


def test_integer_cocycle_orientation():
    nerve = boundary_simplex(4)
    sign, i = nerve.index((0, 1, 2, 3))
    assert io.integer_cocycle_from_json(nerve, {"[1,0,2,3]": 2})[i] == -2 * sign
    assert io.integer_cocycle_from_json(nerve, {"[0,1,2,3]": 2, "[1,0,2,3]": 2}).sum() == 0


def test_surface_documents(sphere):
    m, _ = sphere
    K = m.complex
    t = K.simplices(2)[0]
    doc = {
        "surface": {"simplices": [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]},
        "vertex_map": {"0": t[0], "1": t[1], "2": t[2], "3": t[2]},
    }
    sigma = io.surface_from_json(doc, K)
    assert sigma.vertex_map[3] == t[2]
    doc["vertex_map"]["3"] = "nowhere"
    with pytest.raises(InconsistentInput):
        io.surface_from_json(doc, K)


@pytest.mark.parametrize(
    "doc, match",
    [
        ([], "object"),
        ({"complex": {}}, "version"),
        ({"version": 2, "complex": {}}, "version"),
        ({"version": 1}, "complex"),
        ({"version": 1, "complex": {"generator": "klein"}}, "generator"),
        ({"version": 1, "complex": {"generator": "circle", "n": "many"}}, "malformed"),
    ],
)
def test_scenario_errors(doc, match):
    with pytest.raises(InconsistentInput, match=match):
        io.scenario_from_doc(doc)


def test_scenario_payload_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(InconsistentInput):
        io.load_scenario(path)
    with pytest.raises(OSError):
        io.load_scenario(tmp_path / "missing.json")
    s = io.scenario_from_doc({"version": 1, "complex": {"generator": "circle"}})
    with pytest.raises(InconsistentInput, match="cover"):
        s.cover
    s = io.scenario_from_doc({"version": 1, "complex": {"generator": "six_cycle"}, "gerbe": {}})
    with pytest.raises(InconsistentInput, match="gerbe"):
        s.gerbe()
    with pytest.raises(InconsistentInput, match="extension"):
        s.extension()
    with pytest.raises(InconsistentInput, match="surface"):
        s.surface()
    assert s.deligne() is None and s.lift_choice() is None
    s = io.scenario_from_doc(
        {"version": 1, "complex": {"generator": "boundary_simplex"}, "surface": {"coarse_cells": [[0, 1, 2, 3]]}}
    )
    with pytest.raises(InconsistentInput, match="mesh"):
        s.surface()


def test_scenario_options_and_cover():
    s = io.scenario_from_doc(
        {
            "version": 1,
            "complex": {"generator": "circle", "n": 6},
            "cover": {"charts": [[0, 1, 2, 3], [2, 3, 4, 5], [4, 5, 0, 1]]},
            "options": {"seed": 4},
        }
    )
    assert s.seed == 4 and s.partition == "hat"
    assert s.cover.n_charts == 3
    assert s.gerbe().g.level == 2
