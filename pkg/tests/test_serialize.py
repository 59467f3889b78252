import json
import math

import numpy as np
import pytest

from pumc import models, serialize
from pumc.core import (
    Multigraph,
    StochasticMatrix,
    build_generic_space,
    build_modular_space,
    build_multigraph_space,
    builtin_family,
    edge_total_table,
    num_dyads,
)
from pumc.ermgm import from_factorization
from pumc.expfam import ParameterMap
from pumc.netstat import DyadicFactorization, factor_dyadditive
from pumc.puniform import Trajectory


def test_dumps_float_precision_round_trips():
    vals = [0.1, 1 / 3, 2**-52, 1e300, -0.0, math.pi]
    text = serialize.dumps(vals)
    back = json.loads(text)
    for a, b in zip(vals, back):
        assert a == b  # bit-exact through 17 significant digits


def test_dumps_special_tokens_and_types():
    assert serialize.dumps(float("nan")) == "NaN"
    assert serialize.dumps(float("inf")) == "Infinity"
    assert serialize.dumps(float("-inf")) == "-Infinity"
    assert serialize.dumps({"a": [1, True, None]}) == '{"a":[1,true,null]}'
    assert serialize.dumps(np.array([1.5])) == "[1.5]"
    assert serialize.dumps(np.int64(7)) == "7"
    with pytest.raises(TypeError):
        serialize.dumps(object())


def test_dumps_indent_layout():
    text = serialize.dumps({"a": [1, 2]}, indent=2)
    assert text == '{\n  "a": [\n    1,\n    2\n  ]\n}'
    assert serialize.dumps({}) == "{}"
    assert serialize.dumps([]) == "[]"


def test_space_round_trip_all_kinds():
    for space in (
        build_multigraph_space(3, 2),
        build_modular_space(5),
        build_generic_space(("x", "y", "z")),
    ):
        again = serialize.space_from_dict(serialize.space_to_dict(space))
        assert again == space
    with pytest.raises(ValueError):
        serialize.space_from_dict({"kind": "nope"})


def test_multigraph_round_trip_and_validation():
    space = build_multigraph_space(4, 2)
    g = space.decode(137)
    d = serialize.multigraph_to_dict(g)
    assert all(u > v for u, v, _ in d["dyads"])  # 1-based, row-major order
    assert serialize.multigraph_from_dict(d) == g

    shuffled = dict(d, dyads=list(reversed(d["dyads"])))
    assert serialize.multigraph_from_dict(shuffled) == g

    flipped = dict(d, dyads=[[v, u, m] for u, v, m in d["dyads"]])
    assert serialize.multigraph_from_dict(flipped) == g

    with pytest.raises(ValueError):
        serialize.multigraph_from_dict(dict(d, dyads=d["dyads"][:-1]))
    with pytest.raises(ValueError):
        serialize.multigraph_from_dict(dict(d, dyads=d["dyads"] + [d["dyads"][0]]))
    with pytest.raises(ValueError):
        serialize.multigraph_from_dict(dict(d, dyads=[[9, 1, 0]] + d["dyads"][1:]))


def test_family_round_trip():
    fam = builtin_family(build_multigraph_space(3, 1), "stability")
    again = serialize.family_from_dict(serialize.family_to_dict(fam))
    assert np.array_equal(again.sigma, fam.sigma)
    assert again.tag == "stability"


def test_matrix_csv_and_json(tmp_path):
    P = models.density_chain(3, 0.3).matrix()
    csv_path = str(tmp_path / "m.csv")
    json_path = str(tmp_path / "m.json")
    serialize.save_matrix(csv_path, P)
    serialize.save_matrix(json_path, P)
    assert np.array_equal(serialize.load_matrix(csv_path).P, P.P)
    assert np.array_equal(serialize.load_matrix(json_path).P, P.P)

    bare = str(tmp_path / "bare.json")
    with open(bare, "w") as fp:
        json.dump(P.P.tolist(), fp)
    assert np.array_equal(serialize.load_matrix(bare).P, P.P)


def test_eta_round_trip_all_kinds():
    maps = [
        ParameterMap("natural", l=2),
        ParameterMap("scalar_log"),
        ParameterMap("density_logit", n=4),
        ParameterMap("table", l=1, thetas=(0.5, 1.0, 2.0), etas=((0.1,), (0.2,), (0.3,))),
    ]
    for pm in maps:
        again = serialize.eta_from_dict(serialize.eta_to_dict(pm))
        assert again.kind == pm.kind
        assert again.l == pm.l
        for theta in (pm.thetas or (1.0,)) if pm.kind != "density_logit" else (0.3,):
            probe = theta if pm.kind != "natural" else np.zeros(pm.l)
            assert np.allclose(again.evaluate(probe), pm.evaluate(probe))
    with pytest.raises(ValueError):
        serialize.eta_from_dict({"kind": "mystery"})


def test_cef_and_expfam_round_trip():
    cef = models.gani_cef()
    again = serialize.cef_from_dict(serialize.cef_to_dict(cef))
    assert again.space == cef.space
    assert np.array_equal(again.tau, cef.tau)
    assert np.array_equal(again.kappa, cef.kappa)

    fam = models.er_family(3)
    back = serialize.expfam_from_dict(serialize.expfam_to_dict(fam))
    assert back.space == fam.space
    assert np.array_equal(back.tau, fam.tau)
    assert back.eta.kind == "density_logit"


def test_factorization_round_trip():
    space = build_multigraph_space(3, 1)
    fact = factor_dyadditive(space, edge_total_table(space).astype(float)[:, None]).factorization
    d = serialize.factorization_to_dict(fact)
    again = serialize.factorization_from_dict(d)
    assert again.n == fact.n and again.t == fact.t
    assert np.allclose(again.tau_f, fact.tau_f)

    kappa_only = DyadicFactorization(n=3, t=1, kappa_f=np.ones((3, 2)))
    back = serialize.factorization_from_dict(serialize.factorization_to_dict(kappa_only))
    assert back.tau_f is None and np.allclose(back.kappa_f, 1.0)


def test_ermgm_round_trip_with_default_kappa():
    space = build_multigraph_space(3, 1)
    fact = factor_dyadditive(space, edge_total_table(space).astype(float)[:, None]).factorization
    model = from_factorization(fact, ParameterMap("natural", l=1))
    d = serialize.ermgm_to_dict(model)
    again = serialize.ermgm_from_dict(d)
    assert np.allclose(again.tau_f, model.tau_f)
    assert np.allclose(again.kappa_f, model.kappa_f)

    d.pop("kappa_f")
    filled = serialize.ermgm_from_dict(d)
    assert np.array_equal(filled.kappa_f, np.ones((num_dyads(3), 2)))


def test_states_jsonl_round_trip(tmp_path):
    space = build_multigraph_space(3, 1)
    states = np.array([0, 7, 3, 5])
    path = str(tmp_path / "t.jsonl")
    serialize.write_states_jsonl(path, space, states)
    kind, space2, back = serialize.read_states_jsonl(path)
    assert kind == "trajectory" and space2 == space
    assert np.array_equal(back, states)

    lines = open(path).read().splitlines()
    assert json.loads(lines[0])["kind"] == "trajectory"
    assert [json.loads(l)["i"] for l in lines[1:]] == [0, 1, 2, 3]


def test_states_jsonl_expand_dyads(tmp_path):
    space = build_multigraph_space(3, 2)
    path = str(tmp_path / "e.jsonl")
    serialize.write_states_jsonl(path, space, [11], expand=True)
    rec = json.loads(open(path).read().splitlines()[1])
    g = space.decode(11)
    assert serialize.multigraph_from_dict({"n": 3, "t": 2, "dyads": rec["dyads"]}) == g

    with pytest.raises(ValueError):
        serialize.write_states_jsonl(
            str(tmp_path / "bad.jsonl"), build_modular_space(3), [0], expand=True
        )


def test_states_jsonl_rejects_out_of_range(tmp_path):
    space = build_multigraph_space(3, 1)
    path = str(tmp_path / "r.jsonl")
    serialize.write_states_jsonl(path, space, [0, 99])
    with pytest.raises(ValueError):
        serialize.read_states_jsonl(path)


def test_trajectory_kind_check(tmp_path):
    space = build_multigraph_space(3, 1)
    traj = Trajectory(space=space, states=np.array([0, 1, 5]))
    path = str(tmp_path / "traj.jsonl")
    serialize.write_trajectory(path, traj)
    again = serialize.read_trajectory(path)
    assert np.array_equal(again.states, traj.states)

    other = str(tmp_path / "draws.jsonl")
    serialize.write_states_jsonl(other, space, [0, 1], kind="draws")
    with pytest.raises(ValueError):
        serialize.read_trajectory(other)
