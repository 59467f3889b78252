"""Exponential families on states and conditional families on transitions.

An iid family assigns mass kappa(b) exp(eta(theta) . tau(b) - psi(theta)) to
each state b. A conditional family (CEF) does the same per row with tables
kappa(a, b), tau(a, b); it is Markovian (MEF) when the row log-partitions
psi(a, theta) agree across rows for all theta, in which case the joint law
of a path depends on the path only through the summed transition statistic
and the visited carrier values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .core import Pmf, PermutationFamily, StateSpace, StochasticMatrix, invert_family
from .errors import NotAnMefError, TheoremViolationError
from .puniform import Trajectory, check_puniform

MEF_REL_TOL = 1e-9
ROW_CONSISTENCY_TOL = 1e-10
AFFINE_RANK_TOL = 1e-10
FD_STEP = 1e-5
FD_TOL = 1e-6

NATURAL = "natural"
SCALAR_LOG = "scalar_log"
DENSITY_LOGIT = "density_logit"
TABLE = "table"


@dataclass(frozen=True)
class ParameterMap:
    """Parameter function theta -> eta(theta) in R^l.

    Kinds: "natural" (identity on R^l), "scalar_log" (log theta on theta > 0),
    "density_logit" ((n-1) log(p/(1-p)) on 0 < p < 1, needs n), and "table"
    (finite list of sampled (theta, eta) pairs, exact lookup only).
    """

    kind: str
    l: int = 1
    n: int = 0
    thetas: tuple = ()
    etas: tuple = ()

    def __post_init__(self):
        if self.kind not in (NATURAL, SCALAR_LOG, DENSITY_LOGIT, TABLE):
            raise ValueError(f"unknown parameter map kind '{self.kind}'")
        if self.l < 1:
            raise ValueError("eta dimension must be >= 1")
        if self.kind in (SCALAR_LOG, DENSITY_LOGIT) and self.l != 1:
            raise ValueError("scalar parameter maps have l = 1")
        if self.kind == DENSITY_LOGIT and self.n < 2:
            raise ValueError("density_logit needs n >= 2")
        if self.kind == TABLE:
            if len(self.thetas) != len(self.etas) or not self.thetas:
                raise ValueError("table map needs matching nonempty samples")

    def evaluate(self, theta) -> np.ndarray:
        if self.kind == NATURAL:
            eta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
            if eta.shape != (self.l,):
                raise ValueError(f"natural parameter must have shape ({self.l},)")
            return eta
        if self.kind == TABLE:
            for th, eta in zip(self.thetas, self.etas):
                if np.allclose(th, theta, rtol=0, atol=1e-12):
                    return np.atleast_1d(np.asarray(eta, dtype=np.float64))
            raise ValueError("table map evaluated off its sample points")
        theta = float(theta)
        if self.kind == SCALAR_LOG:
            if theta <= 0:
                raise ValueError("scalar_log needs theta > 0")
            return np.array([np.log(theta)])
        if not 0 < theta < 1:
            raise ValueError("density_logit needs 0 < p < 1")
        return np.array([(self.n - 1) * np.log(theta / (1.0 - theta))])

    def jacobian(self, theta) -> np.ndarray:
        """d eta / d theta as an (l, d) matrix for the differentiable kinds."""
        if self.kind == NATURAL:
            return np.eye(self.l)
        if self.kind == SCALAR_LOG:
            return np.array([[1.0 / float(theta)]])
        if self.kind == DENSITY_LOGIT:
            p = float(theta)
            return np.array([[(self.n - 1) / (p * (1.0 - p))]])
        raise ValueError("table maps have no Jacobian")


def default_probes(pm: ParameterMap) -> list:
    """Five (or l+2 if larger) parameter values spread over the domain."""
    if pm.kind == SCALAR_LOG:
        return [0.25, 0.5, 1.0, 2.0, 4.0]
    if pm.kind == DENSITY_LOGIT:
        return [0.1, 0.3, 0.5, 0.7, 0.9]
    if pm.kind == TABLE:
        return list(pm.thetas)
    if pm.l == 1:
        return [-2.0, -1.0, 0.0, 1.0, 2.0]
    probes = [np.zeros(pm.l)]
    probes.extend(np.eye(pm.l))
    probes.append(-np.ones(pm.l))
    k = 2.0
    while len(probes) < 5:
        probes.append(k * np.eye(pm.l)[0])
        k += 1.0
    return probes


def _logsumexp_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp; rows of all -inf give -inf without warnings."""
    m = logits.max(axis=-1)
    finite = np.isfinite(m)
    out = np.full(m.shape, -np.inf)
    if np.any(finite):
        shifted = logits[finite] - m[finite][..., None]
        out[finite] = m[finite] + np.log(np.exp(shifted).sum(axis=-1))
    return out


def _log_weights(kappa: np.ndarray, tau: np.ndarray, eta: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return tau @ eta + np.log(kappa)


@dataclass(frozen=True)
class ExpFamilySpec:
    """Exponential family over the states of one space."""

    space: StateSpace
    kappa: np.ndarray
    tau: np.ndarray
    eta: ParameterMap

    def __post_init__(self):
        kappa = np.ascontiguousarray(self.kappa, dtype=np.float64)
        tau = np.ascontiguousarray(self.tau, dtype=np.float64)
        if tau.ndim == 1:
            tau = tau[:, None]
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "tau", tau)
        size = self.space.size
        if kappa.shape != (size,):
            raise ValueError("kappa must have one entry per state")
        if kappa.min() < 0 or kappa.max() == 0:
            raise ValueError("kappa must be nonnegative and not identically zero")
        if tau.shape != (size, self.eta.l):
            raise ValueError("tau must be (size, l)")


def log_partition(fam: ExpFamilySpec, theta) -> float:
    """psi(theta) = log sum_b kappa(b) exp(eta . tau(b)), max-shifted."""
    eta = fam.eta.evaluate(theta)
    return float(_logsumexp_rows(_log_weights(fam.kappa, fam.tau, eta)[None, :])[0])


def pmf(fam: ExpFamilySpec, theta) -> Pmf:
    eta = fam.eta.evaluate(theta)
    logits = _log_weights(fam.kappa, fam.tau, eta)
    psi = _logsumexp_rows(logits[None, :])[0]
    return Pmf(np.exp(logits - psi))


def mean_statistic(fam: ExpFamilySpec, theta) -> np.ndarray:
    """E_theta[tau(X)] under the family's pmf."""
    return pmf(fam, theta).p @ fam.tau


def grad_log_partition_fd(fam: ExpFamilySpec, theta, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of psi in the natural parameter."""
    if fam.eta.kind != NATURAL:
        raise ValueError("finite-difference gradient is defined for the natural kind")
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    grad = np.empty(fam.eta.l)
    for j in range(fam.eta.l):
        hi = theta.copy()
        lo = theta.copy()
        hi[j] += step
        lo[j] -= step
        grad[j] = (log_partition(fam, hi) - log_partition(fam, lo)) / (2 * step)
    return grad


@dataclass(frozen=True)
class CefSpec:
    """Conditional exponential family: one exponential family per row."""

    space: StateSpace
    kappa: np.ndarray
    tau: np.ndarray
    eta: ParameterMap

    def __post_init__(self):
        kappa = np.ascontiguousarray(self.kappa, dtype=np.float64)
        tau = np.ascontiguousarray(self.tau, dtype=np.float64)
        if tau.ndim == 2:
            tau = tau[:, :, None]
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "tau", tau)
        size = self.space.size
        if kappa.shape != (size, size):
            raise ValueError("kappa must be a (size, size) table")
        if kappa.min() < 0:
            raise ValueError("kappa must be nonnegative")
        if tau.shape != (size, size, self.eta.l):
            raise ValueError("tau must be (size, size, l)")


@dataclass(frozen=True)
class MefSpec(CefSpec):
    """CEF whose rows share one log-partition; see mef_check / as_mef."""

    verified_mef: bool = False


def row_log_partitions(cef: CefSpec, theta, chunk: int = 512) -> np.ndarray:
    """psi(a, theta) for every row a, computed in row chunks."""
    eta = cef.eta.evaluate(theta)
    size = cef.space.size
    out = np.empty(size)
    for start in range(0, size, chunk):
        stop = min(start + chunk, size)
        logits = _log_weights(cef.kappa[start:stop], cef.tau[start:stop], eta)
        out[start:stop] = _logsumexp_rows(logits)
    return out


def cef_transition_matrix(cef: CefSpec, theta, chunk: int = 512) -> StochasticMatrix:
    """Realize the transition matrix P_theta(a, b) by row-wise normalization."""
    eta = cef.eta.evaluate(theta)
    size = cef.space.size
    P = np.empty((size, size))
    for start in range(0, size, chunk):
        stop = min(start + chunk, size)
        logits = _log_weights(cef.kappa[start:stop], cef.tau[start:stop], eta)
        psi = _logsumexp_rows(logits)
        if not np.all(np.isfinite(psi)):
            bad = start + int(np.argmin(np.isfinite(psi)))
            raise ValueError(f"row {bad} has no mass (kappa identically zero)")
        P[start:stop] = np.exp(logits - psi[:, None])
    return StochasticMatrix(P=P)


@dataclass(frozen=True)
class CefValidation:
    """Raw per-row normalizer survey across parameter probes."""

    probes: tuple
    raw_sums: np.ndarray            # (num_probes, size), exp(psi(a, theta))
    zero_rows: np.ndarray           # rows whose kappa vanishes identically
    shared_normalizer: np.ndarray   # per probe: rows agree within rel tol
    worst_rel_spread: float
    mismatched_rows: tuple          # rows deviating from row 0 at some probe


def validate_cef(cef: CefSpec, probes=None, rel_tol: float = MEF_REL_TOL) -> CefValidation:
    """Survey row normalizers; flags rows that break the shared-psi property.

    Rows with identically zero kappa are reported rather than raised, since
    a CEF stays well defined on the remaining rows.
    """
    if probes is None:
        probes = default_probes(cef.eta)
    zero_rows = np.where(cef.kappa.max(axis=1) == 0)[0]
    raw = np.empty((len(probes), cef.space.size))
    shared = np.empty(len(probes), dtype=bool)
    mismatched: set[int] = set()
    worst = 0.0
    for i, theta in enumerate(probes):
        psi = row_log_partitions(cef, theta)
        raw[i] = np.exp(psi)
        ref = raw[i, 0]
        rel = np.abs(raw[i] - ref) / max(1.0, abs(ref))
        worst = max(worst, float(rel.max()))
        bad = np.where(rel > rel_tol)[0]
        shared[i] = bad.size == 0
        mismatched.update(int(b) for b in bad)
    return CefValidation(
        probes=tuple(probes),
        raw_sums=raw,
        zero_rows=zero_rows,
        shared_normalizer=shared,
        worst_rel_spread=worst,
        mismatched_rows=tuple(sorted(mismatched)),
    )


class MefCheckResult(NamedTuple):
    ok: bool
    worst_rel_dev: float
    probe: object
    row: int


def mef_check(cef: CefSpec, probes=None, rel_tol: float = MEF_REL_TOL) -> MefCheckResult:
    """Do all row log-partitions agree (relative tolerance) at every probe?"""
    if probes is None:
        probes = default_probes(cef.eta)
    worst, worst_probe, worst_row = 0.0, None, 0
    for theta in probes:
        psi = row_log_partitions(cef, theta)
        rel = np.abs(psi - psi[0]) / max(1.0, abs(psi[0]))
        r = int(np.argmax(rel))
        if rel[r] > worst:
            worst, worst_probe, worst_row = float(rel[r]), theta, r
    return MefCheckResult(ok=worst <= rel_tol, worst_rel_dev=worst, probe=worst_probe, row=worst_row)


def as_mef(cef: CefSpec, probes=None, rel_tol: float = MEF_REL_TOL) -> MefSpec:
    """Promote a CEF to a verified MEF, or raise with the offending row."""
    res = mef_check(cef, probes, rel_tol)
    if not res.ok:
        raise NotAnMefError(
            f"row {res.row} log-partition deviates by {res.worst_rel_dev:.3e} "
            f"(relative) at theta = {res.probe!r}"
        )
    return MefSpec(space=cef.space, kappa=cef.kappa, tau=cef.tau, eta=cef.eta, verified_mef=True)


def gani_row_value_sets(cef: CefSpec, tol: float = MEF_REL_TOL):
    """Per-row sets of scalar statistic values, and whether all rows agree.

    A scalar MEF with some nonzero eta value needs every row of tau to take
    the same set of values, so unequal sets certify non-MEF for l = 1.
    Values within tol collapse to one representative.
    """
    if cef.eta.l != 1:
        raise ValueError("row value sets are defined for scalar statistics")
    sets = []
    for a in range(cef.space.size):
        vals = np.sort(cef.tau[a, :, 0])
        keep = [vals[0]]
        for v in vals[1:]:
            if v - keep[-1] > tol:
                keep.append(v)
        sets.append(np.array(keep))
    equal = all(
        s.size == sets[0].size and np.abs(s - sets[0]).max() <= tol for s in sets[1:]
    )
    return sets, equal


def transition_counts(x: Trajectory) -> np.ndarray:
    """Matrix N with N[a, b] = number of a -> b steps in the path."""
    size = x.space.size
    N = np.zeros((size, size), dtype=np.int64)
    np.add.at(N, (x.states[:-1], x.states[1:]), 1)
    return N


class JointLogPmf(NamedTuple):
    value: float
    impossible: bool


def joint_log_pmf_from_counts(P: StochasticMatrix, N: np.ndarray) -> JointLogPmf:
    """sum_{a,b} N(a,b) log P(a,b) with the 0 log 0 := 0 convention.

    A positive count on a zero transition probability marks the path
    impossible and returns the -inf sentinel instead of raising.
    """
    N = np.asarray(N)
    mask = N > 0
    probs = P.P[mask]
    if np.any(probs == 0):
        return JointLogPmf(value=-np.inf, impossible=True)
    return JointLogPmf(value=float((N[mask] * np.log(probs)).sum()), impossible=False)


def mef_joint_log_pmf(mef: MefSpec, theta, x: Trajectory) -> JointLogPmf:
    """Joint log law of a path under a verified MEF.

    eta . (summed transition statistic) - T psi + summed log carrier, with
    psi the shared row log-partition. Zero carrier on a visited transition
    returns the -inf sentinel with the impossible flag.
    """
    if not mef.verified_mef:
        raise NotAnMefError("run mef_check / as_mef before evaluating joint laws")
    eta = mef.eta.evaluate(theta)
    a, b = x.states[:-1], x.states[1:]
    kap = mef.kappa[a, b]
    if np.any(kap == 0):
        return JointLogPmf(value=-np.inf, impossible=True)
    stat = mef.tau[a, b].sum(axis=0) if a.size else np.zeros(mef.eta.l)
    psi = float(row_log_partitions(mef, theta)[0])
    value = float(eta @ stat - x.transitions * psi + np.log(kap).sum())
    return JointLogPmf(value=value, impossible=False)


@dataclass(frozen=True)
class MeanParameter:
    value: np.ndarray     # shared row expectation of tau
    per_row: np.ndarray   # (size, l) table of row expectations
    fd_gradient: np.ndarray | None = None


def mean_parameter(mef: MefSpec, theta, row_tol: float = ROW_CONSISTENCY_TOL) -> MeanParameter:
    """E[tau(X_i, X_{i+1})], identical across source states for an MEF.

    For the natural parameter kind the value is cross-checked against the
    finite-difference gradient of the shared log-partition; a mismatch is an
    internal failure, not a data condition.
    """
    if not mef.verified_mef:
        raise NotAnMefError("run mef_check / as_mef before taking mean parameters")
    P = cef_transition_matrix(mef, theta).P
    per_row = np.einsum("ab,abl->al", P, mef.tau)
    spread = np.abs(per_row - per_row[0]).max()
    scale = max(1.0, float(np.abs(per_row[0]).max()))
    if spread > row_tol * scale:
        raise NotAnMefError(f"row expectations spread {spread:.3e}, not an MEF")
    value = per_row[0].copy()
    fd = None
    if mef.eta.kind == NATURAL:
        fam = ExpFamilySpec(
            space=mef.space, kappa=mef.kappa[0], tau=mef.tau[0], eta=mef.eta
        )
        fd = grad_log_partition_fd(fam, theta)
        if np.abs(fd - value).max() > FD_TOL:
            raise TheoremViolationError(
                "finite-difference gradient disagrees with the mean parameter"
            )
    return MeanParameter(value=value, per_row=per_row, fd_gradient=fd)


def puniform_cef_to_expfam(
    cef: CefSpec, fam: PermutationFamily, probes=None, tol: float = ROW_CONSISTENCY_TOL
) -> ExpFamilySpec:
    """Collapse a p-uniform CEF to the iid family of its relabelled targets.

    kappa'(c) = kappa(a, sigma_a^-1(c)) and likewise for tau, which must not
    depend on a; rows 0 and 1 are compared to catch inconsistent inputs, and
    the realized matrix is required to pass check_puniform at each probe.
    """
    if probes is None:
        probes = default_probes(cef.eta)
    for theta in probes:
        ok, triple = check_puniform(cef_transition_matrix(cef, theta), fam)
        if not ok:
            raise ValueError(f"realized matrix is not p-uniform at theta={theta!r}: {triple}")
    inv = invert_family(fam).sigma
    kappa = cef.kappa[0, inv[0]]
    tau = cef.tau[0, inv[0]]
    if cef.space.size > 1:
        kappa1 = cef.kappa[1, inv[1]]
        tau1 = cef.tau[1, inv[1]]
        if np.abs(kappa - kappa1).max() > tol or np.abs(tau - tau1).max() > tol:
            raise ValueError("rows disagree after relabelling; tables are not p-uniform")
    return ExpFamilySpec(space=cef.space, kappa=kappa.copy(), tau=tau.copy(), eta=cef.eta)


def expfam_to_mef(fam: ExpFamilySpec, perm: PermutationFamily) -> MefSpec:
    """Spread an iid family along a permutation family into an MEF.

    kappa'(a, b) = kappa(sigma_a(b)) and likewise for tau; every row then
    shares the iid family's partition function, which mef_check re-verifies.
    """
    if perm.size != fam.space.size:
        raise ValueError("permutation family does not match the state space")
    kappa = fam.kappa[perm.sigma]
    tau = fam.tau[perm.sigma]
    return as_mef(CefSpec(space=fam.space, kappa=kappa, tau=tau, eta=fam.eta))


def affinely_independent_entries(eta_samples: np.ndarray, rank_tol: float = AFFINE_RANK_TOL) -> bool:
    """Are the coordinates of eta affinely independent over these samples?

    Tests whether delta . eta = h can hold with (delta, h) != 0 by ranking
    the differences v_i - v_0; needs at least l+1 samples to certify.
    """
    samples = np.atleast_2d(np.asarray(eta_samples, dtype=np.float64))
    k, l = samples.shape
    if k < l + 1:
        return False
    diffs = samples[1:] - samples[0]
    s = np.linalg.svd(diffs, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return l == 0
    return int((s > rank_tol * s[0]).sum()) == l


@dataclass(frozen=True)
class PuniformityReport:
    kappa_puniform: bool
    tau_puniform: tuple
    matrix_puniform: tuple
    kappa_positive: bool
    eta_affinely_independent: bool
    kappa_violation: tuple | None = None


def kappa_tau_puniformity(cef: CefSpec, perm: PermutationFamily, probes=None) -> PuniformityReport:
    """Check p-uniformity of the ingredient tables and the realized matrices.

    When kappa and every tau coordinate are p-uniform under `perm`, every
    realized matrix must be too; that implication failing raises.
    """
    if probes is None:
        probes = default_probes(cef.eta)
    kappa_ok, kappa_bad = check_puniform(cef.kappa, perm)
    tau_ok = tuple(
        check_puniform(cef.tau[:, :, j], perm)[0] for j in range(cef.eta.l)
    )
    matrix_ok = tuple(
        check_puniform(cef_transition_matrix(cef, theta), perm)[0] for theta in probes
    )
    if kappa_ok and all(tau_ok) and not all(matrix_ok):
        raise TheoremViolationError(
            "p-uniform kappa and tau must realize p-uniform matrices"
        )
    eta_samples = np.array([cef.eta.evaluate(theta) for theta in probes])
    return PuniformityReport(
        kappa_puniform=kappa_ok,
        tau_puniform=tau_ok,
        matrix_puniform=matrix_ok,
        kappa_positive=bool(cef.kappa.min() > 0),
        eta_affinely_independent=affinely_independent_entries(eta_samples),
        kappa_violation=kappa_bad,
    )
