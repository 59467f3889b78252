import numpy as np
import pytest

from pumc import models, oracle
from pumc.core import (
    Pmf,
    StochasticMatrix,
    build_modular_space,
    build_multigraph_space,
    builtin_family,
    edge_total_table,
)
from pumc.errors import EnumerationCapError
from pumc.ermgm import from_factorization, union_log_probability
from pumc.expfam import ParameterMap, log_partition
from pumc.netstat import factor_dyadditive


def er_edge_model(n):
    space = build_multigraph_space(n, 1)
    table = edge_total_table(space).astype(float)[:, None]
    fact = factor_dyadditive(space, table).factorization
    return from_factorization(fact, ParameterMap("natural", l=1))


def test_exact_law_validation_and_lookup():
    law = oracle.ExactLaw(outcomes=((0,), (1,)), mass=np.array([0.25, 0.75]))
    assert law.prob((1,)) == 0.75
    assert law.prob((2,)) == 0.0
    assert law.as_dict() == {(0,): 0.25, (1,): 0.75}
    with pytest.raises(ValueError):
        oracle.ExactLaw(outcomes=((0,),), mass=np.array([0.5]))
    with pytest.raises(ValueError):
        oracle.ExactLaw(outcomes=((0,),), mass=np.array([0.5, 0.5]))


def test_trajectory_law_two_state_hand_case():
    P = StochasticMatrix(np.array([[0.2, 0.8], [0.6, 0.4]]))
    law = oracle.enumerate_trajectory_law(P, 0, 2)
    assert law.prob((1, 0)) == pytest.approx(0.8 * 0.6, abs=1e-15)
    assert law.prob((0, 0)) == pytest.approx(0.04, abs=1e-15)
    assert abs(law.mass.sum() - 1.0) <= 1e-12


def test_trajectory_law_argument_checks():
    P = StochasticMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        oracle.enumerate_trajectory_law(P, 2, 1)
    with pytest.raises(ValueError):
        oracle.enumerate_trajectory_law(P, 0, 0)


def test_enumeration_cap_enforced():
    P = StochasticMatrix(np.full((4, 4), 0.25))
    with pytest.raises(EnumerationCapError):
        oracle.enumerate_trajectory_law(P, 0, 11)


def test_pushforward_matches_product_on_puniform_chain():
    cm = models.density_chain(3, 0.3)
    zlaw = oracle.pushforward_z_law(cm.matrix(), cm.family, 0, 2)
    plaw = oracle.product_law(cm.mu, 2)
    assert zlaw.outcomes == plaw.outcomes
    assert np.abs(zlaw.mass - plaw.mass).max() <= 1e-12


def test_pushforward_depends_on_start_for_generic_chain():
    rng = np.random.default_rng(0)
    raw = rng.uniform(0.1, 1.0, size=(4, 4))
    P = StochasticMatrix(raw / raw.sum(axis=1, keepdims=True))
    fam = builtin_family(build_modular_space(4), "modular")
    a = oracle.pushforward_z_law(P, fam, 0, 2)
    b = oracle.pushforward_z_law(P, fam, 1, 2)
    assert np.abs(a.mass - b.mass).max() > 1e-3


def test_product_law_masses():
    mu = Pmf(np.array([0.2, 0.8]))
    law = oracle.product_law(mu, 3)
    assert law.prob((1, 0, 1)) == pytest.approx(0.8 * 0.2 * 0.8, abs=1e-15)
    assert len(law.outcomes) == 8


def test_max_product_deviation_zero_on_product():
    mu = Pmf(np.array([0.3, 0.7]))
    law = oracle.product_law(mu, 2)
    assert oracle.max_product_deviation(law, 2, 2) <= 1e-15


def test_max_product_deviation_negative_control():
    # normalized [[1,2],[3,4]]: pair law is visibly non-product
    P = StochasticMatrix(np.array([[1 / 3, 2 / 3], [3 / 7, 4 / 7]]))
    fam = builtin_family(build_multigraph_space(2, 1), "identity")
    law = oracle.pushforward_z_law(P, fam, 0, 2)
    dev = oracle.max_product_deviation(law, 2, 2)
    assert dev == pytest.approx(4 / 189, rel=1e-12)
    assert dev > 1e-2


def test_brute_partition_matches_fast_path():
    fam = models.er_family(3)
    for p in (0.2, 0.5, 0.8):
        lhs = oracle.brute_partition(fam, p)
        rhs = log_partition(fam, p)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_brute_partition_skips_zero_carrier():
    fam = models.er_family(3)
    kappa = fam.kappa.copy()
    kappa[0] = 0.0
    trimmed = type(fam)(space=fam.space, tau=fam.tau, kappa=kappa, eta=fam.eta)
    full = oracle.brute_partition(fam, 0.5)
    part = oracle.brute_partition(trimmed, 0.5)
    assert part < full


def test_union_fibres_cover_sequences():
    model = er_edge_model(3)
    gamma = np.log(0.4 / 0.6)
    fibres = oracle.brute_union_fibres(model, gamma, 3)
    assert len(fibres) == 64
    total = sum(mass.size for mass, _ in fibres.values())
    assert total == 8**3
    # masses inside a fibre agree: z-sequences sharing a union are
    # equally likely under the simple-graph pmf family
    for mass, logm in fibres.values():
        assert mass.max() - mass.min() <= 1e-12
        assert np.allclose(np.log(mass), logm, atol=1e-12)


def test_brute_union_law_matches_closed_form():
    model = er_edge_model(3)
    gamma = np.log(0.4 / 0.6)
    law = oracle.brute_union_law(model, gamma, 2)
    assert abs(law.mass.sum() - 1.0) <= 1e-12
    union_space = build_multigraph_space(3, 2)
    for w_idx in range(union_space.size):
        w = union_space.decode(w_idx)
        expect = union_log_probability(model, gamma, 2, w)
        got = law.mass[w_idx]
        if np.isfinite(expect):
            assert np.log(got) == pytest.approx(expect, abs=1e-12)
        else:
            assert got == 0.0


def test_sum_product_identity():
    ok, lhs, rhs = oracle.sum_product_identity_check(
        [np.array([1.0, 2.0]), np.array([0.5, 0.25, 0.25]), np.array([3.0, 4.0])]
    )
    assert ok
    assert lhs == pytest.approx(rhs, rel=1e-12)
    with pytest.raises(ValueError):
        oracle.sum_product_identity_check([])
