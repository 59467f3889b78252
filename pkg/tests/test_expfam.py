import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pumc import models, oracle
from pumc.core import (
    Pmf,
    StochasticMatrix,
    build_generic_space,
    build_multigraph_space,
    builtin_family,
    edge_total_table,
    identity_family,
    num_dyads,
)
from pumc.errors import NotAnMefError, TheoremViolationError
from pumc.expfam import (
    CefSpec,
    ExpFamilySpec,
    MefSpec,
    ParameterMap,
    affinely_independent_entries,
    as_mef,
    cef_transition_matrix,
    default_probes,
    expfam_to_mef,
    gani_row_value_sets,
    grad_log_partition_fd,
    joint_log_pmf_from_counts,
    kappa_tau_puniformity,
    log_partition,
    mean_parameter,
    mean_statistic,
    mef_check,
    mef_joint_log_pmf,
    pmf,
    puniform_cef_to_expfam,
    row_log_partitions,
    transition_counts,
    validate_cef,
)
from pumc.puniform import Trajectory


# ------------------------------------------------------------ parameter maps

def test_parameter_map_kinds():
    assert ParameterMap("natural", l=2).evaluate([1.0, -2.0]).tolist() == [1.0, -2.0]
    assert np.isclose(ParameterMap("scalar_log").evaluate(2.0)[0], np.log(2.0))
    pm = ParameterMap("density_logit", n=4)
    assert np.isclose(pm.evaluate(0.3)[0], 3 * np.log(0.3 / 0.7))
    tab = ParameterMap("table", thetas=(0.5,), etas=((1.0, 2.0),), l=2)
    assert tab.evaluate(0.5).tolist() == [1.0, 2.0]
    with pytest.raises(ValueError):
        tab.evaluate(0.6)


def test_parameter_map_domain_checks():
    with pytest.raises(ValueError):
        ParameterMap("scalar_log").evaluate(-1.0)
    with pytest.raises(ValueError):
        ParameterMap("density_logit", n=3).evaluate(1.0)
    with pytest.raises(ValueError):
        ParameterMap("unknown_kind")


def test_parameter_map_jacobians():
    assert np.array_equal(ParameterMap("natural", l=3).jacobian(None), np.eye(3))
    assert np.isclose(ParameterMap("scalar_log").jacobian(2.0)[0, 0], 0.5)
    pm = ParameterMap("density_logit", n=4)
    assert np.isclose(pm.jacobian(0.3)[0, 0], 3 / (0.3 * 0.7))
    with pytest.raises(ValueError):
        ParameterMap("table", thetas=(0.5,), etas=(1.0,)).jacobian(0.5)


def test_jacobian_matches_finite_differences():
    h = 1e-7
    for pm, theta in ((ParameterMap("scalar_log"), 1.7), (ParameterMap("density_logit", n=5), 0.42)):
        fd = (pm.evaluate(theta + h) - pm.evaluate(theta - h)) / (2 * h)
        assert np.abs(pm.jacobian(theta)[:, 0] - fd).max() < 1e-6


def test_default_probes_cover_domains():
    assert default_probes(ParameterMap("scalar_log")) == [0.25, 0.5, 1.0, 2.0, 4.0]
    assert default_probes(ParameterMap("density_logit", n=3)) == [0.1, 0.3, 0.5, 0.7, 0.9]
    probes = default_probes(ParameterMap("natural", l=3))
    assert len(probes) >= 4


# ------------------------------------------------------- single-row families

def test_er_pmf_against_family_pmf():
    # two routes to the same law: direct p^k (1-p)^(N-k) vs the
    # exponential-family normalization
    for n, p in ((3, 0.3), (4, 0.55)):
        direct = models.er_pmf(n, p)
        through_family = pmf(models.er_family(n), p)
        assert np.abs(direct.p - through_family.p).max() <= 1e-14


def test_er_log_partition_closed_form():
    # psi(p) = N log(1 + exp(gamma / (n-1))) with gamma the logit map value
    for n, p in ((3, 0.3), (4, 0.7)):
        fam = models.er_family(n)
        gamma = fam.eta.evaluate(p)[0]
        expected = num_dyads(n) * np.log1p(np.exp(gamma / (n - 1)))
        assert abs(log_partition(fam, p) - expected) <= 1e-12


def test_log_partition_matches_brute_oracle():
    fam = models.er_family(4)
    for p in (0.1, 0.5, 0.9):
        fast = log_partition(fam, p)
        brute = oracle.brute_partition(fam, p)
        assert abs(fast - brute) <= 1e-10 * max(1.0, abs(brute))


def test_mean_statistic_er_closed_form():
    # E tau = p N / (n-1) for tau = |E| / (n-1)
    for n, p in ((3, 0.3), (4, 0.6)):
        fam = models.er_family(n)
        expected = p * num_dyads(n) / (n - 1)
        assert abs(mean_statistic(fam, p)[0] - expected) <= 1e-12


def test_fd_gradient_natural_only():
    space = build_multigraph_space(3, 1)
    nat = ExpFamilySpec(
        space=space,
        kappa=np.ones(8),
        tau=edge_total_table(space) / 2.0,
        eta=ParameterMap("natural", l=1),
    )
    for g in (-1.0, 0.0, 2.0):
        fd = grad_log_partition_fd(nat, (g,))
        assert np.abs(fd - mean_statistic(nat, (g,))).max() <= 1e-6
    with pytest.raises(ValueError):
        grad_log_partition_fd(models.er_family(3), 0.3)


def test_zero_carrier_states_get_zero_mass():
    space = build_generic_space(("a", "b", "c"))
    fam = ExpFamilySpec(
        space=space,
        kappa=np.array([1.0, 0.0, 2.0]),
        tau=np.array([0.0, 5.0, 1.0]),
        eta=ParameterMap("natural", l=1),
    )
    law = pmf(fam, (0.7,))
    assert law.p[1] == 0.0
    with pytest.raises(ValueError):
        ExpFamilySpec(
            space=space, kappa=np.zeros(3), tau=np.zeros(3), eta=ParameterMap("natural", l=1)
        )


# ---------------------------------------------------------------- CEF checks

# shared-normalizer values of the three-state fixture:
# rows 0-1 sum to 3 theta + theta^3, row 2 to 11 theta / 4 + 5 theta^3 / 4
GANI_SUMS = {
    0.5: (1.625, 1.625, 1.53125),
    1.0: (4.0, 4.0, 4.0),
    2.0: (14.0, 14.0, 15.5),
}


def test_gani_raw_sums_frozen():
    cef = models.gani_cef()
    for theta, expected in GANI_SUMS.items():
        report = validate_cef(cef, probes=(theta,))
        assert np.abs(report.raw_sums[0] - np.array(expected)).max() <= 1e-12


def test_gani_row_two_flagged_off_theta_one():
    cef = models.gani_cef()
    assert validate_cef(cef, probes=(2.0,)).mismatched_rows == (2,)
    assert validate_cef(cef, probes=(0.5,)).mismatched_rows == (2,)
    assert validate_cef(cef, probes=(1.0,)).mismatched_rows == ()


def test_gani_literal_rows_stochastic_under_shared_normalizer():
    for theta in (0.5, 1.0, 2.0):
        M = models.GANI_KAPPA * theta**models.GANI_TAU / (3 * theta + theta**3)
        assert np.abs(M[:2].sum(axis=1) - 1.0).max() <= 1e-12


def test_gani_value_sets():
    sets, all_equal = gani_row_value_sets(models.gani_cef())
    assert all_equal
    for s in sets:
        assert np.allclose(s, [1.0, 3.0])


def test_mef_check_rejects_gani_full():
    res = mef_check(models.gani_cef())
    assert not res.ok and res.row == 2
    with pytest.raises(NotAnMefError):
        as_mef(models.gani_cef())


def test_two_row_fixture_is_mef():
    mef = models.gani_two_row_mef()
    assert mef.verified_mef
    assert np.array_equal(mef.kappa[2], mef.kappa[1])
    # rows 0 and 1 keep the original tables
    assert np.array_equal(mef.kappa[:2], models.GANI_KAPPA[:2])
    assert np.array_equal(mef.tau[:2, :, 0], models.GANI_TAU[:2])


def test_two_row_mean_parameter_closed_form():
    mef = models.gani_two_row_mef()
    for theta in (0.5, 1.0, 2.0):
        expected = (3 * theta + 3 * theta**3) / (3 * theta + theta**3)
        mp = mean_parameter(mef, theta)
        assert abs(mp.value[0] - expected) <= 1e-12
        assert np.abs(mp.per_row - expected).max() <= 1e-12


def test_cef_transition_matrix_normalizes_all_rows():
    P = cef_transition_matrix(models.gani_cef(), 2.0)
    assert np.abs(P.P.sum(axis=1) - 1.0).max() <= 1e-12
    # row 2 renormalized by its own sum, so it differs from the literal row
    literal = models.GANI_KAPPA[2] * 2.0 ** models.GANI_TAU[2] / 14.0
    assert np.abs(P.P[2] - literal).max() > 0.01


def test_row_log_partitions_chunking_invariant():
    cef = models.density_mef(3)
    full = row_log_partitions(cef, 0.3, chunk=1024)
    small = row_log_partitions(cef, 0.3, chunk=3)
    assert np.array_equal(full, small)


def test_density_and_stability_mefs_verify():
    for mef in (models.density_mef(3), models.stability_mef(3)):
        assert mef.verified_mef
        assert mef_check(mef).ok


def test_mean_parameter_density_closed_form():
    mef = models.density_mef(3)
    for p in (0.3, 0.5):
        mp = mean_parameter(mef, p)
        assert abs(mp.value[0] - p * 3 / 2) <= 1e-12


# ----------------------------------------------------------- joint path laws

def test_transition_counts():
    space = build_multigraph_space(3, 1)
    x = Trajectory(space=space, states=np.array([0, 1, 0, 1, 1]))
    N = transition_counts(x)
    assert N[0, 1] == 2 and N[1, 0] == 1 and N[1, 1] == 1
    assert N.sum() == 4


def test_joint_log_pmf_from_counts_hand_value():
    P = StochasticMatrix(np.array([[0.25, 0.75], [0.5, 0.5]]))
    N = np.array([[2, 1], [0, 3]])
    res = joint_log_pmf_from_counts(P, N)
    assert not res.impossible
    expected = 2 * np.log(0.25) + np.log(0.75) + 3 * np.log(0.5)
    assert abs(res.value - expected) <= 1e-15


def test_joint_log_pmf_impossible_path():
    P = StochasticMatrix(np.array([[1.0, 0.0], [0.5, 0.5]]))
    res = joint_log_pmf_from_counts(P, np.array([[0, 1], [0, 0]]))
    assert res.impossible and res.value == -np.inf


def test_mef_joint_log_pmf_requires_verification():
    cef = models.gani_cef()
    fake = MefSpec(space=cef.space, kappa=cef.kappa, tau=cef.tau, eta=cef.eta)
    x = Trajectory(space=cef.space, states=np.array([0, 1]))
    with pytest.raises(NotAnMefError):
        mef_joint_log_pmf(fake, 1.0, x)


def test_mef_joint_matches_counts_on_samples():
    mef = models.density_mef(3)
    P = cef_transition_matrix(mef, 0.3)
    rng = np.random.default_rng(0)
    for _ in range(50):
        states = rng.integers(0, 8, size=rng.integers(1, 8))
        x = Trajectory(space=mef.space, states=states)
        a = mef_joint_log_pmf(mef, 0.3, x)
        b = joint_log_pmf_from_counts(P, transition_counts(x))
        assert a.impossible == b.impossible
        if not a.impossible:
            assert abs(a.value - b.value) <= 1e-12


def test_empty_transition_path_has_log_one():
    mef = models.density_mef(3)
    x = Trajectory(space=mef.space, states=np.array([5]))
    assert mef_joint_log_pmf(mef, 0.3, x).value == 0.0


# --------------------------------------------------- family transformations

def test_puniform_cef_to_expfam_recovers_er():
    mef = models.density_mef(3)
    fam = identity_family(8)
    back = puniform_cef_to_expfam(mef, fam)
    er = models.er_family(3)
    assert np.abs(back.kappa - er.kappa).max() <= 1e-12
    assert np.abs(back.tau - er.tau).max() <= 1e-12


def test_puniform_cef_to_expfam_stability_round_trip():
    space = build_multigraph_space(3, 1)
    fam = builtin_family(space, "stability")
    mef = models.stability_mef(3)
    back = puniform_cef_to_expfam(mef, fam)
    for p in (0.2, 0.6):
        assert np.abs(pmf(back, p).p - models.er_pmf(3, p).p).max() <= 1e-12


def test_puniform_cef_to_expfam_rejects_wrong_family():
    mef = models.stability_mef(3)
    with pytest.raises(ValueError):
        puniform_cef_to_expfam(mef, identity_family(8))


def test_expfam_to_mef_shares_partition():
    space = build_multigraph_space(3, 1)
    mef = expfam_to_mef(models.er_family(3), builtin_family(space, "symdiff"))
    assert mef.verified_mef
    psi = row_log_partitions(mef, 0.4)
    assert np.abs(psi - log_partition(models.er_family(3), 0.4)).max() <= 1e-12


def test_kappa_tau_puniformity_positive_case():
    space = build_multigraph_space(3, 1)
    fam = builtin_family(space, "stability")
    rep = kappa_tau_puniformity(models.stability_mef(3), fam)
    assert rep.kappa_puniform and all(rep.tau_puniform) and all(rep.matrix_puniform)
    assert rep.kappa_positive and rep.eta_affinely_independent


def test_kappa_tau_puniformity_negative_case():
    rep = kappa_tau_puniformity(models.transitivity_cef(4), identity_family(64), probes=(2.0,))
    assert not all(rep.tau_puniform)
    assert not all(rep.matrix_puniform)


def test_affine_independence_basics():
    assert affinely_independent_entries(np.array([[0.0], [1.0]]))
    assert not affinely_independent_entries(np.array([[1.0]]))  # too few samples
    assert affinely_independent_entries(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    # constant second coordinate: eta_2 is affinely dependent on nothing
    assert not affinely_independent_entries(np.array([[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]))


@given(st.integers(2, 5))
@settings(max_examples=20, deadline=None)
def test_pmf_normalizes_property(n):
    law = pmf(models.er_family(n) if n <= 4 else models.er_family(4), 0.37)
    assert abs(law.p.sum() - 1.0) <= 1e-12


def test_mean_parameter_requires_verified_mef():
    cef = models.gani_cef()
    fake = MefSpec(space=cef.space, kappa=cef.kappa, tau=cef.tau, eta=cef.eta)
    with pytest.raises(NotAnMefError):
        mean_parameter(fake, 1.0)
