"""Finite state spaces, multigraphs, permutation families, probability objects.

States are indexed 0..size-1 throughout. The heavier modules work on index
arrays and decode to concrete objects only at the edges. Multigraph spaces
use a base-(t+1) positional codec over the canonical dyad order with dyad 0
as the least significant digit, so for simple graphs (t = 1) the state index
is the edge bitmask and symmetric-difference families reduce to integer XOR.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SpaceTooLargeError

ENUMERATION_CAP = 2 ** 24
PMF_TOL = 1e-12

MULTIGRAPH = "multigraph"
MODULAR = "modular"
GENERIC = "generic"


def num_dyads(n: int) -> int:
    return n * (n - 1) // 2


def canonical_dyads(n: int) -> list[tuple[int, int]]:
    """Unordered dyads {u, v} with v < u, sorted by (u, v). Vertices 0-based."""
    return [(u, v) for u in range(1, n) for v in range(u)]


def dyad_index(u: int, v: int) -> int:
    """Position of dyad {u, v} in the canonical order."""
    if u == v:
        raise ValueError("a dyad joins two distinct vertices")
    if u < v:
        u, v = v, u
    return u * (u - 1) // 2 + v


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Multigraph on n vertices; counts[f] is the multiplicity of dyad f.

    Multiplicities live in 0..t and follow the canonical dyad order.
    """

    n: int
    t: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if self.n < 1 or self.t < 0:
            raise ValueError("need n >= 1 and t >= 0")
        if counts.shape != (num_dyads(self.n),):
            raise ValueError("counts must have one entry per dyad")
        if counts.size and (counts.min() < 0 or counts.max() > self.t):
            raise ValueError("multiplicities must lie in 0..t")

    def total_multiplicity(self) -> int:
        """Number of edges counted with multiplicity."""
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, Multigraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.t == other.t
            and np.array_equal(self.counts, other.counts)
        )

    def __hash__(self):
        return hash((self.n, self.t, self.counts.tobytes()))


@dataclass(frozen=True)
class StateSpace:
    """Enumerable state space with an integer codec.

    kind is one of "multigraph" (states are Multigraph objects), "modular"
    (states are residues 0..n-1) or "generic" (states are opaque labels).
    """

    kind: str
    size: int
    n: int = 0
    t: int = 0
    labels: tuple[str, ...] = ()

    def encode(self, state) -> int:
        if self.kind == MULTIGRAPH:
            if not isinstance(state, Multigraph) or state.n != self.n or state.t != self.t:
                raise ValueError("state does not belong to this space")
            base = self.t + 1
            idx = 0
            for digit in state.counts[::-1]:
                idx = idx * base + int(digit)
            return idx
        if self.kind == MODULAR:
            idx = int(state)
            if not 0 <= idx < self.size:
                raise ValueError("residue out of range")
            return idx
        return _label_index(self.labels)[state]

    def decode(self, idx: int):
        if not 0 <= idx < self.size:
            raise ValueError("state index out of range")
        if self.kind == MULTIGRAPH:
            return Multigraph(self.n, self.t, _digit_table(self.n, self.t)[idx].copy())
        if self.kind == MODULAR:
            return int(idx)
        return self.labels[idx]

    def states(self):
        """Iterate all states in index order."""
        return (self.decode(i) for i in range(self.size))


@lru_cache(maxsize=None)
def _label_index(labels: tuple[str, ...]) -> dict:
    return {lab: i for i, lab in enumerate(labels)}


@lru_cache(maxsize=32)
def _digit_table(n: int, t: int) -> np.ndarray:
    """All states of G(n, t) as a (size, num_dyads) digit matrix."""
    nd = num_dyads(n)
    size = (t + 1) ** nd
    if size * max(nd, 1) > ENUMERATION_CAP * 4:
        raise SpaceTooLargeError("digit table would exceed the enumeration budget")
    idx = np.arange(size, dtype=np.int64)
    table = np.empty((size, nd), dtype=np.int64)
    power = 1
    for f in range(nd):
        table[:, f] = (idx // power) % (t + 1)
        power *= t + 1
    table.setflags(write=False)
    return table


def dyad_count_table(space: StateSpace) -> np.ndarray:
    """Read-only (size, num_dyads) matrix of dyad multiplicities by state index."""
    if space.kind != MULTIGRAPH:
        raise ValueError("dyad counts exist only for multigraph spaces")
    return _digit_table(space.n, space.t)


def edge_total_table(space: StateSpace) -> np.ndarray:
    """Total edge multiplicity of every state, indexed by state."""
    return dyad_count_table(space).sum(axis=1)


def build_multigraph_space(n: int, t: int) -> StateSpace:
    """The space G(n, t) of multigraphs on n vertices with dyad caps t."""
    if n < 1 or t < 0:
        raise ValueError("need n >= 1 and t >= 0")
    nd = num_dyads(n)
    size = (t + 1) ** nd
    if size > ENUMERATION_CAP:
        raise SpaceTooLargeError(
            f"G({n},{t}) has {size} states, past the cap of {ENUMERATION_CAP}"
        )
    return StateSpace(kind=MULTIGRAPH, size=size, n=n, t=t)


def build_modular_space(n: int) -> StateSpace:
    """Residues modulo n."""
    if n < 1:
        raise ValueError("need n >= 1")
    return StateSpace(kind=MODULAR, size=n, n=n)


def build_generic_space(labels) -> StateSpace:
    """Opaque labelled states; labels must be distinct strings."""
    labels = tuple(labels)
    if not labels:
        raise ValueError("need at least one label")
    if len(set(labels)) != len(labels):
        raise ValueError("labels must be distinct")
    return StateSpace(kind=GENERIC, size=len(labels), labels=labels)


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over state indices."""

    p: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.p, dtype=np.float64)
        object.__setattr__(self, "p", p)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("pmf must be a nonempty vector")
        if p.min() < 0:
            raise ValueError("pmf entries must be nonnegative")
        if abs(p.sum() - 1.0) > PMF_TOL:
            raise ValueError("pmf must sum to 1 within 1e-12")

    @property
    def size(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic square matrix; rows sum to 1 within 1e-12."""

    P: np.ndarray

    def __post_init__(self):
        P = np.ascontiguousarray(self.P, dtype=np.float64)
        object.__setattr__(self, "P", P)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise ValueError("need a nonempty square matrix")
        if P.min() < 0:
            raise ValueError("entries must be nonnegative")
        err = np.abs(P.sum(axis=1) - 1.0).max()
        if err > PMF_TOL:
            raise ValueError(f"rows must sum to 1 within 1e-12, worst error {err:.3e}")

    @property
    def size(self) -> int:
        return self.P.shape[0]

    def row(self, a: int) -> Pmf:
        return Pmf(self.P[a])


@dataclass(frozen=True)
class PermutationFamily:
    """One permutation of the state indices per state: sigma[a, b] = sigma_a(b)."""

    sigma: np.ndarray
    tag: str = ""

    def __post_init__(self):
        sigma = np.ascontiguousarray(self.sigma, dtype=np.int64)
        object.__setattr__(self, "sigma", sigma)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] == 0:
            raise ValueError("need a nonempty square index matrix")
        size = sigma.shape[0]
        # Every row must hit each index exactly once.
        if not np.array_equal(np.sort(sigma, axis=1), np.broadcast_to(np.arange(size), sigma.shape)):
            raise ValueError("every row must be a permutation of 0..size-1")

    @property
    def size(self) -> int:
        return self.sigma.shape[0]


def invert_family(fam: PermutationFamily) -> PermutationFamily:
    """Family of row-wise inverse permutations."""
    size = fam.size
    inv = np.empty_like(fam.sigma)
    rows = np.arange(size)[:, None]
    inv[rows, fam.sigma] = np.broadcast_to(np.arange(size), fam.sigma.shape)
    tag = f"{fam.tag}^-1" if fam.tag else ""
    return PermutationFamily(sigma=inv, tag=tag)


def is_symmetric_family(fam: PermutationFamily):
    """Check sigma_a(b) == sigma_b(a) for all a, b.

    Returns (True, None) or (False, (a, b)) with the first counterexample in
    row-major order.
    """
    mismatch = fam.sigma != fam.sigma.T
    if not mismatch.any():
        return True, None
    a, b = np.argwhere(mismatch)[0]
    return False, (int(a), int(b))


def identity_family(size: int, tag: str = "identity") -> PermutationFamily:
    sigma = np.broadcast_to(np.arange(size, dtype=np.int64), (size, size)).copy()
    return PermutationFamily(sigma=sigma, tag=tag)


def builtin_family(space: StateSpace, name: str) -> PermutationFamily:
    """Construct a named permutation family on `space`.

    identity   sigma_a = id on any space
    symdiff    sigma_a(b) = a xor b, simple-graph spaces only
    stability  sigma_a(b) = complement(a xor b), simple-graph spaces only
    modular    sigma_i(j) = (j - i) mod n on modular spaces
    """
    if name == "identity":
        return identity_family(space.size)
    if name in ("symdiff", "stability"):
        if space.kind != MULTIGRAPH or space.t != 1:
            raise ValueError(f"family '{name}' needs a simple-graph space (t = 1)")
        idx = np.arange(space.size, dtype=np.int64)
        sigma = idx[:, None] ^ idx[None, :]
        if name == "stability":
            sigma ^= space.size - 1  # t = 1 makes indices bitmasks; this complements
        return PermutationFamily(sigma=sigma, tag=name)
    if name == "modular":
        if space.kind != MODULAR:
            raise ValueError("family 'modular' needs a modular space")
        idx = np.arange(space.size, dtype=np.int64)
        sigma = (idx[None, :] - idx[:, None]) % space.size
        return PermutationFamily(sigma=sigma, tag=name)
    raise ValueError(f"unknown builtin family '{name}'")
