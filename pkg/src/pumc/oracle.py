"""Exhaustive brute-force references.

Everything here enumerates outcomes directly with plain Python loops and
exactly-rounded accumulation (math.fsum), deliberately avoiding the fast
paths it exists to validate: trajectory laws multiply row entries step by
step, partition functions sum over whole state spaces, and union laws walk
every tuple of simple graphs. Budgets cap enumeration at 2^20 outcomes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import exp, fsum, log

import numpy as np

from .core import PermutationFamily, Pmf, StochasticMatrix, build_multigraph_space, dyad_count_table
from .errors import EnumerationCapError
from .expfam import ExpFamilySpec
from .ermgm import ErmgmModel, to_expfam

ENUM_CAP = 2 ** 20


@dataclass(frozen=True)
class ExactLaw:
    """Finite law as parallel outcome/mass sequences; masses fsum to 1."""

    outcomes: tuple
    mass: np.ndarray

    def __post_init__(self):
        mass = np.ascontiguousarray(self.mass, dtype=np.float64)
        object.__setattr__(self, "mass", mass)
        if len(self.outcomes) != mass.size:
            raise ValueError("outcomes and masses must align")
        if mass.size and abs(fsum(mass.tolist()) - 1.0) > 1e-12:
            raise ValueError("masses must sum to 1 within 1e-12")

    def prob(self, outcome) -> float:
        try:
            return float(self.mass[self.outcomes.index(outcome)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return {o: float(m) for o, m in zip(self.outcomes, self.mass)}


def _check_cap(count: int):
    if count > ENUM_CAP:
        raise EnumerationCapError(f"{count} outcomes exceed the cap of {ENUM_CAP}")


def enumerate_trajectory_law(P: StochasticMatrix, x0: int, steps: int) -> ExactLaw:
    """Exact law of (X_1, .., X_steps) given X_0 = x0, by full enumeration."""
    size = P.size
    if not 0 <= x0 < size:
        raise ValueError("x0 out of range")
    if steps < 1:
        raise ValueError("need at least one step")
    _check_cap(size ** steps)
    table = P.P
    outcomes = []
    masses = []
    for path in itertools.product(range(size), repeat=steps):
        prob = 1.0
        prev = x0
        for state in path:
            prob *= table[prev, state]
            prev = state
        outcomes.append(path)
        masses.append(prob)
    return ExactLaw(outcomes=tuple(outcomes), mass=np.array(masses))


def pushforward_z_law(P: StochasticMatrix, fam: PermutationFamily, x0: int, steps: int) -> ExactLaw:
    """Exact law of (Z_1, .., Z_steps) where Z_{i+1} = sigma_{X_i}(X_{i+1}).

    The relabelling is applied inline while walking every trajectory, and
    masses landing on the same z-tuple are combined with fsum.
    """
    size = P.size
    if not 0 <= x0 < size:
        raise ValueError("x0 out of range")
    if steps < 1:
        raise ValueError("need at least one step")
    _check_cap(size ** steps)
    table = P.P
    sigma = fam.sigma
    buckets: dict[tuple, list] = {}
    for path in itertools.product(range(size), repeat=steps):
        prob = 1.0
        prev = x0
        zs = []
        for state in path:
            prob *= table[prev, state]
            zs.append(int(sigma[prev, state]))
            prev = state
        buckets.setdefault(tuple(zs), []).append(prob)
    outcomes = tuple(sorted(buckets))
    masses = np.array([fsum(buckets[z]) for z in outcomes])
    return ExactLaw(outcomes=outcomes, mass=masses)


def product_law(mu: Pmf, steps: int) -> ExactLaw:
    """The iid law mu^(x)steps over tuples, enumerated directly."""
    if steps < 1:
        raise ValueError("need at least one step")
    _check_cap(mu.size ** steps)
    outcomes = []
    masses = []
    for tup in itertools.product(range(mu.size), repeat=steps):
        prob = 1.0
        for z in tup:
            prob *= mu.p[z]
        outcomes.append(tup)
        masses.append(prob)
    return ExactLaw(outcomes=tuple(outcomes), mass=np.array(masses))


def max_product_deviation(law: ExactLaw, steps: int, size: int) -> float:
    """Largest entrywise gap between a tuple law and its own marginal product.

    Zero exactly when the coordinates are independent; used as the
    factorization residual for negative controls.
    """
    marginals = np.zeros((steps, size))
    for tup, m in zip(law.outcomes, law.mass):
        for i, z in enumerate(tup):
            marginals[i, z] += m
    worst = 0.0
    for tup, m in zip(law.outcomes, law.mass):
        prod = 1.0
        for i, z in enumerate(tup):
            prod *= marginals[i, z]
        worst = max(worst, abs(float(m) - prod))
    return worst


def brute_partition(fam: ExpFamilySpec, theta) -> float:
    """log partition by direct max-shifted summation over every state."""
    eta = fam.eta.evaluate(theta)
    exponents = []
    for b in range(fam.space.size):
        k = float(fam.kappa[b])
        if k == 0:
            continue
        exponents.append(float(eta @ fam.tau[b]) + log(k))
    if not exponents:
        raise ValueError("family has no mass anywhere")
    m = max(exponents)
    return m + log(fsum(exp(e - m) for e in exponents))


def brute_union_fibres(model: ErmgmModel, theta, t: int) -> dict:
    """Per-union lists of sequence masses and log masses.

    Enumerates every t-tuple of simple graphs, scoring each by the fully
    materialized per-state pmf (no per-dyad shortcuts), and groups by the
    encoded union in G(n, t). Keys are union state indices; values are
    (masses, log_masses) arrays over the fibre.
    """
    if model.t != 1:
        raise ValueError("union law needs a simple-graph model")
    if t < 1:
        raise ValueError("need at least one draw")
    simple = to_expfam(model)
    size = simple.space.size
    _check_cap(size ** t)
    eta = model.eta.evaluate(theta)
    weights = []
    for b in range(size):
        k = float(simple.kappa[b])
        weights.append(float(eta @ simple.tau[b]) + log(k) if k > 0 else float("-inf"))
    m = max(weights)
    psi = m + log(fsum(exp(w - m) for w in weights if w > float("-inf")))
    log_mu = [w - psi for w in weights]
    digits = dyad_count_table(simple.space)
    union_space = build_multigraph_space(model.n, t)
    powers = (t + 1) ** np.arange(digits.shape[1], dtype=np.int64)
    buckets: dict[int, list] = {}
    for tup in itertools.product(range(size), repeat=t):
        logp = fsum(log_mu[z] for z in tup)
        u_idx = int((digits[list(tup)].sum(axis=0) * powers).sum())
        buckets.setdefault(u_idx, []).append(logp)
    assert union_space.size >= len(buckets)
    return {
        u: (np.exp(np.array(logs)), np.array(logs)) for u, logs in sorted(buckets.items())
    }


def brute_union_law(model: ErmgmModel, theta, t: int) -> ExactLaw:
    """Exact law of the t-fold union, indexed by union state in G(n, t)."""
    fibres = brute_union_fibres(model, theta, t)
    union_space = build_multigraph_space(model.n, t)
    outcomes = tuple(range(union_space.size))
    masses = np.zeros(union_space.size)
    for u, (mass, _) in fibres.items():
        masses[u] = fsum(mass.tolist())
    return ExactLaw(outcomes=outcomes, mass=masses)


def sum_product_identity_check(tables, rel_tol: float = 1e-10):
    """Compare prod_i sum_b f_i(b) against sum over tuples of prod_i f_i(y_i).

    Returns (ok, lhs, rhs). The exchange underlies every product-form
    partition function here, so this is the smallest version of the claim.
    """
    tables = [np.asarray(tab, dtype=np.float64).reshape(-1) for tab in tables]
    if not tables:
        raise ValueError("need at least one table")
    count = 1
    for tab in tables:
        count *= tab.size
    _check_cap(count)
    lhs = 1.0
    for tab in tables:
        lhs *= fsum(tab.tolist())
    rhs = fsum(
        float(np.prod([tab[y] for tab, y in zip(tables, tup)]))
        for tup in itertools.product(*[range(tab.size) for tab in tables])
    )
    scale = max(1.0, abs(lhs), abs(rhs))
    return abs(lhs - rhs) <= rel_tol * scale, lhs, rhs
