"""Dyadically independent exponential-family multigraph models.

A model assigns each dyad f an exponential family over multiplicities
0..t with statistic table tau_f and carrier kappa_f, sharing one parameter
function eta. Dyadic independence makes the partition function a product of
per-dyad sums (N(t+1) terms instead of (t+1)^N), sampling a per-dyad
inverse-CDF draw, and unions of iid simple-graph draws again a model of the
same kind.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np

from .core import (
    Multigraph,
    Pmf,
    StateSpace,
    build_multigraph_space,
    dyad_count_table,
    num_dyads,
)
from .expfam import ExpFamilySpec, ParameterMap, affinely_independent_entries, default_probes
from .netstat import DyadicFactorization
from .puniform import Trajectory
from .rng import stream

LOG_PARTITION_REL_TOL = 1e-10


@dataclass(frozen=True)
class ErmgmModel:
    """Dyadically independent model on G(n, t)."""

    n: int
    t: int
    tau_f: np.ndarray    # (num_dyads, t+1, l)
    kappa_f: np.ndarray  # (num_dyads, t+1)
    eta: ParameterMap

    def __post_init__(self):
        nd = num_dyads(self.n)
        tau_f = np.ascontiguousarray(self.tau_f, dtype=np.float64)
        if tau_f.ndim == 2:
            tau_f = tau_f[:, :, None]
        kappa_f = np.ascontiguousarray(self.kappa_f, dtype=np.float64)
        object.__setattr__(self, "tau_f", tau_f)
        object.__setattr__(self, "kappa_f", kappa_f)
        if tau_f.shape != (nd, self.t + 1, self.eta.l):
            raise ValueError("tau_f must be (num_dyads, t+1, l)")
        if kappa_f.shape != (nd, self.t + 1):
            raise ValueError("kappa_f must be (num_dyads, t+1)")
        if kappa_f.min() < 0 or (kappa_f.max(axis=1) == 0).any():
            raise ValueError("each dyad needs nonnegative, not identically zero carrier")

    @property
    def num_dyads(self) -> int:
        return num_dyads(self.n)

    def space(self) -> StateSpace:
        return build_multigraph_space(self.n, self.t)


def from_factorization(fact: DyadicFactorization, eta: ParameterMap) -> ErmgmModel:
    """Assemble a model from factored tables; missing carrier defaults to 1."""
    if fact.tau_f is None:
        raise ValueError("factorization must carry statistic tables")
    kappa_f = fact.kappa_f
    if kappa_f is None:
        kappa_f = np.ones((num_dyads(fact.n), fact.t + 1))
    return ErmgmModel(n=fact.n, t=fact.t, tau_f=fact.tau_f, kappa_f=kappa_f, eta=eta)


def _dyad_log_weights(model: ErmgmModel, theta) -> np.ndarray:
    """(num_dyads, t+1) table of log kappa_f(m) + eta . tau_f(m)."""
    eta = model.eta.evaluate(theta)
    with np.errstate(divide="ignore"):
        return model.tau_f @ eta + np.log(model.kappa_f)


def dyad_pmf(model: ErmgmModel, theta, f: int) -> Pmf:
    """Law of the multiplicity of dyad f."""
    if not 0 <= f < model.num_dyads:
        raise ValueError("dyad index out of range")
    logw = _dyad_log_weights(model, theta)[f]
    m = logw.max()
    w = np.exp(logw - m)
    return Pmf(w / w.sum())


def _dyad_pmf_table(model: ErmgmModel, theta) -> np.ndarray:
    logw = _dyad_log_weights(model, theta)
    m = logw.max(axis=1, keepdims=True)
    w = np.exp(logw - m)
    return w / w.sum(axis=1, keepdims=True)


class InstrumentedLogPartition(NamedTuple):
    value: float
    terms: int


def fast_log_partition_instrumented(model: ErmgmModel, theta) -> InstrumentedLogPartition:
    """Product-form log partition; counts the summands it touches."""
    logw = _dyad_log_weights(model, theta)
    m = logw.max(axis=1)
    value = float((m + np.log(np.exp(logw - m[:, None]).sum(axis=1))).sum())
    return InstrumentedLogPartition(value=value, terms=logw.size)


def fast_log_partition(model: ErmgmModel, theta) -> float:
    """log of the partition function, summing t+1 terms per dyad."""
    return fast_log_partition_instrumented(model, theta).value


def to_expfam(model: ErmgmModel) -> ExpFamilySpec:
    """Materialize the model as a per-state family over the whole space."""
    space = model.space()
    digits = dyad_count_table(space)
    rows = np.arange(model.num_dyads)[None, :]
    tau = model.tau_f[rows, digits].sum(axis=1)
    kappa = model.kappa_f[rows, digits].prod(axis=1)
    return ExpFamilySpec(space=space, kappa=kappa, tau=tau, eta=model.eta)


def multigraph_log_pmf(model: ErmgmModel, theta, w: Multigraph) -> float:
    """Log mass of one multigraph; -inf when it hits a zero-carrier count."""
    if w.n != model.n or w.t != model.t:
        raise ValueError("multigraph does not belong to this model's space")
    probs = _dyad_pmf_table(model, theta)[np.arange(model.num_dyads), w.counts]
    if np.any(probs == 0):
        return float("-inf")
    return float(np.log(probs).sum())


def sample_multigraphs(model: ErmgmModel, theta, count: int, seed: int) -> np.ndarray:
    """Draw `count` multigraphs as a (count, num_dyads) multiplicity array.

    Dyad f consumes draws from the (seed, f) stream, one step per sample, so
    any dyad subset can be regenerated independently.
    """
    probs = _dyad_pmf_table(model, theta)
    out = np.empty((count, model.num_dyads), dtype=np.int64)
    for f in range(model.num_dyads):
        cum = np.cumsum(probs[f])
        u = stream(seed, f).random(count)
        out[:, f] = np.minimum(np.searchsorted(cum, u, side="right"), model.t)
    return out


def sample_multigraph(model: ErmgmModel, theta, seed: int) -> Multigraph:
    """Single draw; step 0 of every dyad stream."""
    counts = sample_multigraphs(model, theta, 1, seed)[0]
    return Multigraph(n=model.n, t=model.t, counts=counts)


def union_log_probability(model: ErmgmModel, theta, t: int, w: Multigraph) -> float:
    """Log mass of w as a union of t iid simple-graph draws from the model.

    Pr(W = w) = Pr(Z = z) * prod_f C(t, w(f)) for any fixed z with union w;
    the canonical z puts the first w(f) coordinates of dyad f on. Requires a
    simple-graph model (t = 1).
    """
    if model.t != 1:
        raise ValueError("union law needs a simple-graph model")
    if t < 1:
        raise ValueError("need at least one draw")
    if w.n != model.n or w.t != t:
        raise ValueError(f"w must live in G({model.n}, {t})")
    probs = _dyad_pmf_table(model, theta)
    wc = w.counts
    total = 0.0
    for f in range(model.num_dyads):
        p0, p1 = probs[f, 0], probs[f, 1]
        on, off = int(wc[f]), t - int(wc[f])
        if (on and p1 == 0) or (off and p0 == 0):
            return float("-inf")
        total += np.log(comb(t, on))
        if on:
            total += on * np.log(p1)
        if off:
            total += off * np.log(p0)
    return float(total)


@dataclass(frozen=True)
class UnionFamily:
    """Exponential family of the t-fold union, with the eta hypothesis flag."""

    family: ExpFamilySpec
    eta_affinely_independent: bool


def union_expfam(model: ErmgmModel, t: int, probes=None) -> UnionFamily:
    """Exponential family of W = Z_1 + .. + Z_t on G(n, t).

    Same parameter function as the part model; sufficient statistic
    sum_f [tau_f(1) W(f) + tau_f(0) (t - W(f))] and carrier
    prod_f C(t, W(f)) kappa_f(1)^W(f) kappa_f(0)^(t - W(f)). Whether eta's
    entries look affinely independent over the probes is recorded, not
    enforced.
    """
    if model.t != 1:
        raise ValueError("union family needs a simple-graph model")
    if t < 1:
        raise ValueError("need at least one draw")
    space = build_multigraph_space(model.n, t)
    digits = dyad_count_table(space).astype(np.float64)
    tau1 = model.tau_f[:, 1, :]
    tau0 = model.tau_f[:, 0, :]
    tau = digits @ tau1 + (t - digits) @ tau0
    comb_table = np.array([[comb(t, m) for m in range(t + 1)]], dtype=np.float64)
    k1 = model.kappa_f[:, 1][None, :]
    k0 = model.kappa_f[:, 0][None, :]
    kappa = (
        comb_table[0][digits.astype(np.int64)].prod(axis=1)
        * np.power(k1, digits).prod(axis=1)
        * np.power(k0, t - digits).prod(axis=1)
    )
    fam = ExpFamilySpec(space=space, kappa=kappa, tau=tau, eta=model.eta)
    if probes is None:
        probes = default_probes(model.eta)
    samples = np.array([model.eta.evaluate(th) for th in probes])
    return UnionFamily(family=fam, eta_affinely_independent=affinely_independent_entries(samples))


@dataclass(frozen=True)
class MleEstimate:
    p_hat: float
    boundary: bool
    transitions: int
    stat_sum: float


def mle_density_stability(x: Trajectory, kind: str) -> MleEstimate:
    """Closed-form MLE of p from a density or stability chain path.

    p_hat = (n-1) / (T N) * sum_i tau(x_i, x_{i+1}), the on-fraction of the
    T*N per-step dyad draws. Boundary estimates (0 or 1) are flagged, since
    the logit parameter diverges there; the estimate is not clamped.
    """
    space = x.space
    if space.kind != "multigraph" or space.t != 1 or space.n < 2:
        raise ValueError("the closed-form MLE needs a simple-graph chain with n >= 2")
    if x.transitions < 1:
        raise ValueError("need at least one transition")
    edges = dyad_count_table(space).sum(axis=1)
    src, dst = x.states[:-1], x.states[1:]
    if kind == "density":
        per_step = edges[dst]
    elif kind == "stability":
        per_step = num_dyads(space.n) - edges[src ^ dst]
    else:
        raise ValueError("kind must be 'density' or 'stability'")
    stat_sum = float(per_step.sum()) / (space.n - 1)
    p_hat = (space.n - 1) * stat_sum / (x.transitions * num_dyads(space.n))
    return MleEstimate(
        p_hat=p_hat,
        boundary=p_hat in (0.0, 1.0),
        transitions=x.transitions,
        stat_sum=stat_sum,
    )


def eta_density(p: float, n: int) -> float:
    """Natural parameter of the density family: (n-1) log(p / (1-p))."""
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    if n < 2:
        raise ValueError("need n >= 2")
    return (n - 1) * float(np.log(p / (1.0 - p)))
