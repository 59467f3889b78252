"""Ready-made model fixtures.

The scalar three-state family with hand-picked carrier and statistic tables
(the classic actuarial example, called "gani" here) ships verbatim: rows 0
and 1 share the normalizer 3 theta + theta^3 while row 2 does not, which is
exactly what validate_cef is for. The graph-chain builders cover the edge
density and stability models, the modular-increment chain, and the two
statistics (transitivity, reciprocity) whose conditional families are not
Markovian.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    Multigraph,
    PermutationFamily,
    Pmf,
    StateSpace,
    StochasticMatrix,
    build_generic_space,
    build_modular_space,
    build_multigraph_space,
    builtin_family,
    dyad_count_table,
    dyad_index,
    identity_family,
    num_dyads,
)
from .expfam import (
    NATURAL,
    SCALAR_LOG,
    DENSITY_LOGIT,
    CefSpec,
    ExpFamilySpec,
    MefSpec,
    ParameterMap,
    as_mef,
    expfam_to_mef,
)

GANI_TAU = np.array([[1.0, 1.0, 3.0], [3.0, 3.0, 1.0], [1.0, 3.0, 3.0]])
GANI_KAPPA = np.array([[2.0, 1.0, 1.0], [1.0 / 3.0, 2.0 / 3.0, 3.0], [2.75, 1.0, 0.25]])


def gani_space() -> StateSpace:
    return build_generic_space(("1", "2", "3"))


def gani_cef() -> CefSpec:
    """Three-state scalar CEF with one inconsistent row.

    Rows 0 and 1 normalize to 3 theta + theta^3, row 2 to
    11 theta / 4 + 5 theta^3 / 4; the two agree only at theta = 1.
    """
    return CefSpec(
        space=gani_space(),
        kappa=GANI_KAPPA.copy(),
        tau=GANI_TAU.copy(),
        eta=ParameterMap(kind=SCALAR_LOG),
    )


def gani_two_row_mef() -> MefSpec:
    """The consistent two rows, closed into a genuine MEF.

    Row 2 duplicates row 1 so that every row shares the rows-0/1 normalizer;
    trajectories whose sources stay in {0, 1} see the original tables only.
    """
    kappa = GANI_KAPPA.copy()
    tau = GANI_TAU.copy()
    kappa[2] = kappa[1]
    tau[2] = tau[1]
    cef = CefSpec(space=gani_space(), kappa=kappa, tau=tau, eta=ParameterMap(kind=SCALAR_LOG))
    return as_mef(cef)


def er_family(n: int) -> ExpFamilySpec:
    """Edge-density family on G(n, 1): kappa = 1, tau = |E| / (n-1).

    At parameter p its pmf is the Erdos-Renyi law with edge probability p.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    space = build_multigraph_space(n, 1)
    edges = dyad_count_table(space).sum(axis=1)
    return ExpFamilySpec(
        space=space,
        kappa=np.ones(space.size),
        tau=edges / (n - 1),
        eta=ParameterMap(kind=DENSITY_LOGIT, n=n),
    )


def er_pmf(n: int, p: float) -> Pmf:
    """Erdos-Renyi law on G(n, 1) computed directly from edge counts."""
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    space = build_multigraph_space(n, 1)
    edges = dyad_count_table(space).sum(axis=1)
    return Pmf(p ** edges * (1.0 - p) ** (num_dyads(n) - edges))


@dataclass(frozen=True)
class ChainModel:
    """A p-uniform chain presented as (space, family, mu)."""

    space: StateSpace
    family: PermutationFamily
    mu: Pmf

    def matrix(self) -> StochasticMatrix:
        return StochasticMatrix(P=self.mu.p[self.family.sigma])


def density_chain(n: int, p: float) -> ChainModel:
    """Targets drawn fresh from ER(p); the family is the identity."""
    space = build_multigraph_space(n, 1)
    return ChainModel(space=space, family=identity_family(space.size), mu=er_pmf(n, p))


def stability_chain(n: int, p: float) -> ChainModel:
    """Each dyad keeps its state with probability p, independently."""
    space = build_multigraph_space(n, 1)
    return ChainModel(space=space, family=builtin_family(space, "stability"), mu=er_pmf(n, p))


def modular_chain(n: int, mu=None) -> ChainModel:
    """Additive-increment walk on residues: X_{i+1} = X_i + Z_{i+1} mod n."""
    space = build_modular_space(n)
    if mu is None:
        weights = np.zeros(n)
        weights[: min(2, n)] = 1.0
        mu = Pmf(weights / weights.sum())
    elif not isinstance(mu, Pmf):
        mu = Pmf(np.asarray(mu, dtype=np.float64))
    if mu.size != n:
        raise ValueError("mu must have one mass per residue")
    return ChainModel(space=space, family=builtin_family(space, "modular"), mu=mu)


def density_mef(n: int) -> MefSpec:
    return expfam_to_mef(er_family(n), identity_family(2 ** num_dyads(n)))


def stability_mef(n: int) -> MefSpec:
    space = build_multigraph_space(n, 1)
    return expfam_to_mef(er_family(n), builtin_family(space, "stability"))


def transitivity_cef(n: int) -> CefSpec:
    """Closed-two-path CEF on G(n, 1) with unit carrier; not an MEF.

    tau(a, b) = n * (two-paths of a closed by b) / (two-paths of a), with
    0/0 -> 0; the natural scalar parameter multiplies it directly.
    """
    if n < 3:
        raise ValueError("transitivity needs n >= 3")
    space = build_multigraph_space(n, 1)
    digits = dyad_count_table(space)
    coeff = np.zeros((space.size, num_dyads(n)))
    denom = np.zeros(space.size)
    for i, j, k in itertools.combinations(range(n), 3):
        path = digits[:, dyad_index(i, j)] * digits[:, dyad_index(j, k)]
        coeff[:, dyad_index(i, k)] += path
        denom += path
    numer = coeff @ digits.T.astype(np.float64)
    tau = np.divide(
        n * numer, denom[:, None], out=np.zeros_like(numer), where=denom[:, None] > 0
    )
    return CefSpec(
        space=space,
        kappa=np.ones((space.size, space.size)),
        tau=tau,
        eta=ParameterMap(kind=NATURAL),
    )


def directed_pairs(n: int) -> list[tuple[int, int]]:
    """Ordered vertex pairs (i, j), i != j, in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def directed_pair_index(n: int) -> dict:
    return {pair: f for f, pair in enumerate(directed_pairs(n))}


def directed_space(n: int) -> StateSpace:
    """Loop-free directed graphs on n vertices as a generic labelled space.

    State index is the little-endian arc bitmask over directed_pairs(n);
    labels spell the bitmask most-significant-arc first.
    """
    m = n * (n - 1)
    if 2 ** m > 2 ** 24:
        raise ValueError("directed space too large to enumerate")
    labels = tuple(format(i, f"0{m}b") for i in range(2 ** m))
    return build_generic_space(labels)


def directed_index(n: int, arcs) -> int:
    """Encode a set of (i, j) arcs as a directed-space state index."""
    lookup = directed_pair_index(n)
    idx = 0
    for arc in arcs:
        idx |= 1 << lookup[tuple(arc)]
    return idx


def directed_adjacency(n: int, idx: int) -> np.ndarray:
    """Decode a state index to its (n, n) 0/1 adjacency matrix."""
    adj = np.zeros((n, n), dtype=np.int64)
    for f, (i, j) in enumerate(directed_pairs(n)):
        adj[i, j] = (idx >> f) & 1
    return adj


def reciprocity_cef(n: int) -> CefSpec:
    """Reciprocated-arc CEF over loop-free directed graphs; not an MEF.

    tau(a, b) = n * sum_{(i,j)} b(j,i) a(i,j) / (arc count of a), 0/0 -> 0.
    """
    if n < 2:
        raise ValueError("reciprocity needs n >= 2")
    pairs = directed_pairs(n)
    m = len(pairs)
    lookup = directed_pair_index(n)
    tp = np.array([lookup[(j, i)] for (i, j) in pairs], dtype=np.int64)
    space = directed_space(n)
    idx = np.arange(space.size, dtype=np.int64)
    bits = np.empty((space.size, m), dtype=np.float64)
    for f in range(m):
        bits[:, f] = (idx >> f) & 1
    numer = bits @ bits[:, tp].T
    arcs = bits.sum(axis=1)
    tau = np.divide(
        n * numer, arcs[:, None], out=np.zeros_like(numer), where=arcs[:, None] > 0
    )
    return CefSpec(
        space=space,
        kappa=np.ones((space.size, space.size)),
        tau=tau,
        eta=ParameterMap(kind=NATURAL),
    )
