"""Network statistics, dyadic structure, and exchangeability machinery.

Transition statistics take a source graph a and target graph b; several of
them ignore a. Dyadditive statistics split into one table per dyad, and
dyadically multiplicative carriers factor the same way in the product sense;
both factorizations use the empty graph as base point, splitting its value
evenly across dyads so the components reassemble exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from math import comb

import numpy as np

from .core import (
    MULTIGRAPH,
    Multigraph,
    PermutationFamily,
    Pmf,
    StateSpace,
    StochasticMatrix,
    canonical_dyads,
    dyad_count_table,
    dyad_index,
    invert_family,
    num_dyads,
)
from .errors import TheoremViolationError
from .puniform import check_puniform
from .rng import stream

RECONSTRUCTION_TOL = 1e-10
EXCHANGE_TOL = 1e-12
ISO_MAX_N = 8
DEFAULT_PROBE_BUDGET = 1000


def _require_simple(g: Multigraph, name: str):
    if g.t != 1:
        raise ValueError(f"{name} is defined on simple graphs (t = 1)")


def stat_density(a: Multigraph, b: Multigraph) -> float:
    """Edge count of the target over n - 1; ignores the source."""
    _require_simple(b, "density")
    if b.n < 2:
        raise ValueError("density needs n >= 2")
    return b.total_multiplicity() / (b.n - 1)


def stat_stability(a: Multigraph, b: Multigraph) -> float:
    """Edges of complement(a xor b) over n - 1: dyads where b agrees with a."""
    _require_simple(a, "stability")
    _require_simple(b, "stability")
    if a.n != b.n or a.n < 2:
        raise ValueError("stability needs matching n >= 2")
    agree = int((a.counts == b.counts).sum())
    return agree / (a.n - 1)


def stat_reciprocity(a: np.ndarray, b: np.ndarray) -> float:
    """n * (reciprocated weight of b against a) / (arc count of a), 0/0 -> 0.

    Inputs are 0/1 adjacency matrices of directed graphs, shape (n, n).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need two square adjacency matrices of equal size")
    n = a.shape[0]
    denom = int(a.sum())
    if denom == 0:
        return 0.0
    return n * float((b.T * a).sum()) / denom


def stat_transitivity(a: Multigraph, b: Multigraph) -> float:
    """Closed two-paths of a in b over two-paths of a, scaled by n; 0/0 -> 0.

    Two-paths run i - j - k over vertex triples i < j < k with j the middle
    vertex; the closing edge is {i, k}.
    """
    _require_simple(a, "transitivity")
    _require_simple(b, "transitivity")
    n = a.n
    if a.n != b.n or n < 3:
        raise ValueError("transitivity needs matching n >= 3")
    num = 0
    den = 0
    ac, bc = a.counts, b.counts
    for i, j, k in itertools.combinations(range(n), 3):
        path = ac[dyad_index(i, j)] * ac[dyad_index(j, k)]
        den += path
        num += path * bc[dyad_index(i, k)]
    if den == 0:
        return 0.0
    return n * num / den


def degree_sequence(g: Multigraph) -> np.ndarray:
    """Multiplicity-weighted degree of each vertex."""
    deg = np.zeros(g.n, dtype=np.int64)
    for f, (u, v) in enumerate(canonical_dyads(g.n)):
        deg[u] += g.counts[f]
        deg[v] += g.counts[f]
    return deg


def sorted_degree_sequence(g: Multigraph) -> tuple:
    return tuple(sorted(degree_sequence(g).tolist()))


def density_stat_table(space: StateSpace) -> np.ndarray:
    """Transition table of the density statistic: rows constant in the source."""
    if space.kind != MULTIGRAPH or space.t != 1 or space.n < 2:
        raise ValueError("density table needs a simple-graph space with n >= 2")
    edges = dyad_count_table(space).sum(axis=1) / (space.n - 1)
    return np.broadcast_to(edges, (space.size, space.size)).copy()


def stability_stat_table(space: StateSpace) -> np.ndarray:
    """Transition table of the stability statistic via index XOR popcounts."""
    if space.kind != MULTIGRAPH or space.t != 1 or space.n < 2:
        raise ValueError("stability table needs a simple-graph space with n >= 2")
    idx = np.arange(space.size, dtype=np.int64)
    diff = idx[:, None] ^ idx[None, :]
    nd = num_dyads(space.n)
    dis = np.zeros(diff.shape, dtype=np.int64)
    for f in range(nd):
        dis += (diff >> f) & 1
    return (nd - dis) / (space.n - 1)


@dataclass(frozen=True)
class DyadicFactorization:
    """Per-dyad tables; tau_f is (N, t+1, l), kappa_f is (N, t+1)."""

    n: int
    t: int
    tau_f: np.ndarray | None = None
    kappa_f: np.ndarray | None = None

    def __post_init__(self):
        nd = num_dyads(self.n)
        if self.tau_f is not None:
            tau_f = np.ascontiguousarray(self.tau_f, dtype=np.float64)
            if tau_f.ndim == 2:
                tau_f = tau_f[:, :, None]
            if tau_f.shape[:2] != (nd, self.t + 1):
                raise ValueError("tau_f must be (num_dyads, t+1, l)")
            object.__setattr__(self, "tau_f", tau_f)
        if self.kappa_f is not None:
            kappa_f = np.ascontiguousarray(self.kappa_f, dtype=np.float64)
            if kappa_f.shape != (nd, self.t + 1):
                raise ValueError("kappa_f must be (num_dyads, t+1)")
            if kappa_f.min() < 0:
                raise ValueError("kappa_f must be nonnegative")
            object.__setattr__(self, "kappa_f", kappa_f)

    def reconstruct_tau(self, g: Multigraph) -> np.ndarray:
        return self.tau_f[np.arange(self.tau_f.shape[0]), g.counts].sum(axis=0)

    def reconstruct_kappa(self, g: Multigraph) -> float:
        return float(self.kappa_f[np.arange(self.kappa_f.shape[0]), g.counts].prod())


@dataclass(frozen=True)
class FactorResult:
    """Outcome of a factorization attempt: tables or a counterexample."""

    factorization: DyadicFactorization | None
    witness: Multigraph | None

    @property
    def ok(self) -> bool:
        return self.factorization is not None


def _as_stat_vector(space: StateSpace, tau) -> np.ndarray:
    if callable(tau):
        vals = np.array([np.atleast_1d(tau(g)) for g in space.states()], dtype=np.float64)
    else:
        vals = np.asarray(tau, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
    if vals.shape[0] != space.size:
        raise ValueError("statistic must cover every state")
    return vals


def _probe_states(space: StateSpace, probes, seed) -> np.ndarray:
    if probes is None:
        if space.size > 4 * DEFAULT_PROBE_BUDGET:
            raise ValueError("space too large for exhaustive verification; pass a probe budget")
        return np.arange(space.size)
    if seed is None:
        raise ValueError("probe budget needs a seed")
    return stream(seed).integers(0, space.size, size=int(probes))


def factor_dyadditive(space: StateSpace, tau, probes=None, seed=None) -> FactorResult:
    """Split a per-state statistic into per-dyad summands, if possible.

    Component tables come from single-dyad states: tau_f(m) is the value of
    the graph with dyad f at multiplicity m, shifted so the empty graph's
    value spreads evenly. Verification is exhaustive by default, or over a
    seeded random probe budget; the first failing state is the witness.
    """
    if space.kind != MULTIGRAPH:
        raise ValueError("dyadic factorization needs a multigraph space")
    vals = _as_stat_vector(space, tau)
    nd = num_dyads(space.n)
    base = vals[0]  # empty graph is state 0
    l = vals.shape[1]
    tau_f = np.empty((nd, space.t + 1, l))
    tau_f[:, 0] = base / nd
    power = 1
    for f in range(nd):
        for m in range(1, space.t + 1):
            tau_f[f, m] = vals[m * power] - base + base / nd
        power *= space.t + 1
    fact = DyadicFactorization(n=space.n, t=space.t, tau_f=tau_f)
    digits = dyad_count_table(space)
    rebuilt = tau_f[np.arange(nd)[None, :], digits].sum(axis=1)
    check = _probe_states(space, probes, seed)
    dev = np.abs(rebuilt[check] - vals[check]).max(axis=1)
    if dev.max() > RECONSTRUCTION_TOL:
        bad = int(check[int(np.argmax(dev))])
        return FactorResult(factorization=None, witness=space.decode(bad))
    return FactorResult(factorization=fact, witness=None)


def factor_dyadically_multiplicative(space: StateSpace, kappa, probes=None, seed=None) -> FactorResult:
    """Split a per-state carrier into per-dyad factors, if possible.

    The candidate anchors at the empty graph when its carrier is positive,
    otherwise at a maximal-carrier reference state; zeros at probe states
    survive into the candidate tables and the exhaustive (or budgeted)
    verification decides.
    """
    if space.kind != MULTIGRAPH:
        raise ValueError("dyadic factorization needs a multigraph space")
    if callable(kappa):
        vals = np.array([float(kappa(g)) for g in space.states()], dtype=np.float64)
    else:
        vals = np.asarray(kappa, dtype=np.float64).reshape(-1)
    if vals.shape != (space.size,):
        raise ValueError("carrier must cover every state")
    if vals.min() < 0:
        raise ValueError("carrier values must be nonnegative")
    nd = num_dyads(space.n)
    digits = dyad_count_table(space)
    ref = 0 if vals[0] > 0 else int(np.argmax(vals))
    ref_val = vals[ref]
    if ref_val == 0:
        return FactorResult(factorization=None, witness=space.decode(int(np.argmax(vals > 0))))
    ref_digits = digits[ref]
    kappa_f = np.empty((nd, space.t + 1))
    scale = ref_val ** ((nd - 1) / nd) if nd else 1.0
    power = 1
    for f in range(nd):
        for m in range(space.t + 1):
            probe_idx = ref + (m - ref_digits[f]) * power
            kappa_f[f, m] = vals[probe_idx] / scale
        power *= space.t + 1
    fact = DyadicFactorization(n=space.n, t=space.t, kappa_f=kappa_f)
    rebuilt = kappa_f[np.arange(nd)[None, :], digits].prod(axis=1)
    check = _probe_states(space, probes, seed)
    scale_ref = max(1.0, float(np.abs(vals[check]).max()))
    dev = np.abs(rebuilt[check] - vals[check])
    if dev.max() > RECONSTRUCTION_TOL * scale_ref:
        bad = int(check[int(np.argmax(dev))])
        return FactorResult(factorization=None, witness=space.decode(bad))
    return FactorResult(factorization=fact, witness=None)


def multigraph_union(zs) -> Multigraph:
    """Dyad-wise sum of multigraphs sharing (n, s); the result lives in G(n, s*len)."""
    zs = list(zs)
    if not zs:
        raise ValueError("union of zero multigraphs is undefined")
    n, s = zs[0].n, zs[0].t
    if any(z.n != n or z.t != s for z in zs):
        raise ValueError("all parts must share n and dyad cap")
    total = np.sum([z.counts for z in zs], axis=0)
    return Multigraph(n=n, t=s * len(zs), counts=total)


@dataclass(frozen=True)
class IsoClasses:
    """Partition of a multigraph space into isomorphism classes."""

    space: StateSpace
    class_id: np.ndarray       # (size,) class index per state
    representatives: np.ndarray  # canonical (minimal) state index per class
    classes: tuple              # tuple of index arrays


def iso_classes(space: StateSpace) -> IsoClasses:
    """Brute-force isomorphism classes over all vertex bijections.

    b ~ c when some relabelling of the vertices carries b to c. Canonical
    representative is the minimal state index in the orbit. The sorted degree
    sequence is checked as an invariant on every orbit.
    """
    if space.kind != MULTIGRAPH:
        raise ValueError("isomorphism classes need a multigraph space")
    if space.n > ISO_MAX_N:
        raise ValueError(f"brute-force isomorphism is capped at n = {ISO_MAX_N}")
    digits = dyad_count_table(space)
    nd = num_dyads(space.n)
    powers = (space.t + 1) ** np.arange(nd, dtype=np.int64)
    dyads = canonical_dyads(space.n)
    canon = np.full(space.size, np.iinfo(np.int64).max, dtype=np.int64)
    for perm in itertools.permutations(range(space.n)):
        dmap = np.array([dyad_index(perm[u], perm[v]) for u, v in dyads], dtype=np.int64)
        relabelled = np.empty_like(digits)
        relabelled[:, dmap] = digits
        np.minimum(canon, relabelled @ powers, out=canon)
    reps, class_id = np.unique(canon, return_inverse=True)
    classes = tuple(np.where(class_id == c)[0] for c in range(reps.size))
    # Degree sequences are isomorphism invariants; any split orbit is a bug.
    for members in classes:
        seqs = {sorted_degree_sequence(space.decode(int(i))) for i in members}
        if len(seqs) != 1:
            raise TheoremViolationError("orbit mixes degree sequences")
    return IsoClasses(space=space, class_id=class_id, representatives=reps, classes=classes)


def is_finitely_exchangeable(h, classes: IsoClasses, tol: float = EXCHANGE_TOL):
    """Is h constant on every isomorphism class?

    h is a vector indexed by state. Returns (True, None) or (False, (b, c))
    with b the class representative and c the first deviating member.
    """
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if h.shape != (classes.space.size,):
        raise ValueError("h must assign a value to every state")
    for members in classes.classes:
        ref = h[members[0]]
        dev = np.abs(h[members] - ref)
        if dev.max() > tol:
            bad = int(members[int(np.argmax(dev))])
            return False, (int(members[0]), bad)
    return True, None


def is_relation_invariant(perm: PermutationFamily, classes: IsoClasses):
    """Does every sigma_a map equivalent states to equivalent states?

    Returns (True, None) or (False, (a, b, c)) with b ~ c but
    sigma_a(b) !~ sigma_a(c).
    """
    if perm.size != classes.space.size:
        raise ValueError("family and classes must share a space")
    cid = classes.class_id
    for a in range(perm.size):
        mapped = cid[perm.sigma[a]]
        for members in classes.classes:
            vals = mapped[members]
            if (vals != vals[0]).any():
                bad = int(members[int(np.argmax(vals != vals[0]))])
                return False, (a, int(members[0]), bad)
    return True, None


@dataclass(frozen=True)
class ExchangeReport:
    mu_exchangeable: bool
    row_exchangeable: tuple
    mu_witness: tuple | None
    equivalence_holds: bool


def exchangeability_transfer(
    P: StochasticMatrix, perm: PermutationFamily, mu: Pmf, classes: IsoClasses
) -> ExchangeReport:
    """Exchangeability passes between mu and the rows of a p-uniform matrix.

    Requires (P, perm, mu) to be a consistent p-uniform triple and the
    relation to be invariant under the family and its inverse. Under those
    hypotheses mu is exchangeable iff every row is iff any row is; a
    numerical violation of that equivalence raises.
    """
    err = np.abs(P.P - mu.p[perm.sigma]).max()
    if err > RECONSTRUCTION_TOL:
        raise ValueError(f"(P, family, mu) is not a p-uniform triple, error {err:.3e}")
    ok, witness = is_relation_invariant(perm, classes)
    if not ok:
        raise ValueError(f"family does not preserve the relation: {witness}")
    ok_inv, witness_inv = is_relation_invariant(invert_family(perm), classes)
    if not ok_inv:
        raise ValueError(f"inverse family does not preserve the relation: {witness_inv}")
    mu_ok, mu_wit = is_finitely_exchangeable(mu.p, classes)
    rows = tuple(is_finitely_exchangeable(P.P[a], classes)[0] for a in range(P.size))
    equivalent = (all(rows) == mu_ok) and (any(rows) == mu_ok)
    if not equivalent:
        raise TheoremViolationError("exchangeability equivalence failed on consistent inputs")
    return ExchangeReport(
        mu_exchangeable=mu_ok,
        row_exchangeable=rows,
        mu_witness=mu_wit,
        equivalence_holds=equivalent,
    )
