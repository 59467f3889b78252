"""Chain sampling and long-run diagnostics.

Trajectories are generated sequentially (Markov dependence), one uniform per
step from the (seed, replicate) stream; p-uniform chains can instead draw
their iid coordinates up front and replay them through the inverse family,
which is the faster path and exercises the transformation in reverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Pmf,
    PermutationFamily,
    StateSpace,
    StochasticMatrix,
    build_multigraph_space,
    builtin_family,
    dyad_count_table,
    num_dyads,
)
from .errors import PowerIterationError, TheoremViolationError
from .puniform import Trajectory, check_puniform, iid_to_chain
from .rng import stream

STATIONARY_TOL = 1e-12
STATIONARY_MAX_ITER = 10 ** 6
TRACE_TOL = 1e-10
UNIFORM_ENTRY_TOL = 1e-14


def _draw_indices(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, cum.size - 1)


def sample_chain(
    space: StateSpace, P: StochasticMatrix, x0: int, steps: int, seed: int, replicate: int = 0
) -> Trajectory:
    """Walk the chain for `steps` transitions from x0."""
    if P.size != space.size:
        raise ValueError("matrix does not match the space")
    if not 0 <= x0 < space.size:
        raise ValueError("x0 out of range")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    cum = np.cumsum(P.P, axis=1)
    u = stream(seed, replicate).random(steps)
    states = np.empty(steps + 1, dtype=np.int64)
    states[0] = x0
    cur = int(x0)
    for i in range(steps):
        cur = int(_draw_indices(cum[cur], u[i : i + 1])[0])
        states[i + 1] = cur
    return Trajectory(space=space, states=states)


def sample_puniform_chain(
    space: StateSpace,
    mu: Pmf,
    fam: PermutationFamily,
    x0: int,
    steps: int,
    seed: int,
    replicate: int = 0,
) -> Trajectory:
    """Sample the iid coordinates from mu, then replay them through the family."""
    if mu.size != space.size or fam.size != space.size:
        raise ValueError("pmf and family must match the space")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    u = stream(seed, replicate).random(steps)
    z = _draw_indices(np.cumsum(mu.p), u)
    return iid_to_chain(x0, z, fam, space)


@dataclass(frozen=True)
class ConvergenceReport:
    """Time-average behaviour of a transition statistic along one path."""

    target: np.ndarray
    final_mean: np.ndarray
    abs_error: np.ndarray
    stderr: np.ndarray | None
    within_three_se: bool | None
    transitions: int
    running_mean: np.ndarray  # (transitions, l)


def convergence_report(
    x: Trajectory, stat_table: np.ndarray, target, fam: PermutationFamily | None = None
) -> ConvergenceReport:
    """Running time-average of a transition statistic against its target.

    stat_table is (size, size) or (size, size, l), indexed by (source,
    target) state. The iid standard error is only reported when a family is
    supplied and every statistic coordinate passes the p-uniformity check
    under it; without that certificate the column would be meaningless for
    a dependent sequence, so it stays None.
    """
    table = np.asarray(stat_table, dtype=np.float64)
    if table.ndim == 2:
        table = table[:, :, None]
    size = x.space.size
    if table.shape[:2] != (size, size):
        raise ValueError("stat table must be (size, size, l)")
    if x.transitions < 1:
        raise ValueError("need at least one transition")
    target = np.atleast_1d(np.asarray(target, dtype=np.float64))
    if target.shape != (table.shape[2],):
        raise ValueError("target dimension mismatch")
    series = table[x.states[:-1], x.states[1:]]
    running = np.cumsum(series, axis=0) / np.arange(1, x.transitions + 1)[:, None]
    final = running[-1]
    stderr = None
    within = None
    if fam is not None:
        for j in range(table.shape[2]):
            ok, triple = check_puniform(table[:, :, j], fam)
            if not ok:
                raise ValueError(
                    f"statistic coordinate {j} is not p-uniform under the family: {triple}"
                )
        stderr = series.std(axis=0, ddof=1) / np.sqrt(x.transitions)
        within = bool(np.all(np.abs(final - target) <= 3 * stderr))
    return ConvergenceReport(
        target=target,
        final_mean=final,
        abs_error=np.abs(final - target),
        stderr=stderr,
        within_three_se=within,
        transitions=x.transitions,
        running_mean=running,
    )


@dataclass(frozen=True)
class StationaryResult:
    pi: Pmf
    residual: float
    iterations: int
    second_start_converged: bool
    unique_hint: bool


def stationary_distribution(
    P: StochasticMatrix, tol: float = STATIONARY_TOL, max_iter: int = STATIONARY_MAX_ITER
) -> StationaryResult:
    """Power iteration pi <- pi P from the uniform start.

    Convergence is ||pi P - pi||_1 <= tol. A second run from a point mass on
    the last state probes uniqueness: disagreement (or non-convergence of
    the probe) clears the unique_hint flag but is not an error. Failure of
    the primary run raises, carrying the last iterate.
    """

    def _iterate(start: np.ndarray):
        pi = start
        for it in range(1, max_iter + 1):
            nxt = pi @ P.P
            resid = float(np.abs(nxt - pi).sum())
            pi = nxt / nxt.sum()  # renormalize against drift
            if resid <= tol:
                return True, pi, resid, it
        return False, pi, resid, max_iter

    size = P.size
    converged, pi, resid, iters = _iterate(np.full(size, 1.0 / size))
    if not converged:
        raise PowerIterationError(
            f"no convergence after {iters} iterations, residual {resid:.3e}",
            last_iterate=pi,
            iterations=iters,
        )
    start2 = np.zeros(size)
    start2[size - 1] = 1.0
    second_ok, pi2, _, _ = _iterate(start2)
    agrees = second_ok and float(np.abs(pi2 - pi).sum()) <= 1e-8
    return StationaryResult(
        pi=Pmf(pi),
        residual=resid,
        iterations=iters,
        second_start_converged=second_ok,
        unique_hint=bool(agrees),
    )


def stability_transition_matrix(n: int, p: float) -> StochasticMatrix:
    """Transition matrix of the stability chain on G(n, 1) at retention p."""
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    space = build_multigraph_space(n, 1)
    edges = dyad_count_table(space).sum(axis=1)
    nd = num_dyads(n)
    mu = p ** edges * (1.0 - p) ** (nd - edges)
    fam = builtin_family(space, "stability")
    return StochasticMatrix(P=mu[fam.sigma])


@dataclass(frozen=True)
class StabilityMatrixReport:
    n: int
    p: float
    trace: float
    trace_expected: float
    symmetric: bool
    diagonal_margin: float          # min over rows of diag - max off-diagonal
    uniform_entry_deviation: float  # max |entry - 2^-N|, meaningful at p = 1/2
    uniform_stationary_residual: float


def trace_and_limit_checks(n: int, p: float) -> StabilityMatrixReport:
    """Closed-form checks on the stability chain's transition matrix.

    The diagonal is constant p^N, so the trace is 2^N p^N; the matrix is
    symmetric, hence doubly stochastic, hence uniform-stationary; at
    p = 1/2 every entry is 2^-N; as p -> 1 the diagonal dominates. Trace or
    symmetry failing raises; at p = 1/2 so does a non-uniform entry; for
    p >= 0.9 so does a non-dominant diagonal.
    """
    P = stability_transition_matrix(n, p).P
    size = P.shape[0]
    nd = num_dyads(n)
    trace = float(np.trace(P))
    expected = size * p ** nd
    symmetric = bool(np.array_equal(P, P.T))
    # Off-diagonal row maxima: shove the diagonal below zero, then take max.
    margin = float((np.diag(P) - (P - 2 * np.diag(np.diag(P))).max(axis=1)).min())
    uniform_dev = float(np.abs(P - 1.0 / size).max())
    u = np.full(size, 1.0 / size)
    stationary_resid = float(np.abs(u @ P - u).sum())
    if abs(trace - expected) > TRACE_TOL:
        raise TheoremViolationError("trace must equal 2^N p^N for the stability chain")
    if not symmetric:
        raise TheoremViolationError("stability matrices are symmetric")
    if p == 0.5 and uniform_dev > UNIFORM_ENTRY_TOL:
        raise TheoremViolationError("at p = 1/2 every entry must be 2^-N")
    if p >= 0.9 and margin <= 0:
        raise TheoremViolationError("diagonal must dominate rows for p near 1")
    return StabilityMatrixReport(
        n=n,
        p=p,
        trace=trace,
        trace_expected=expected,
        symmetric=symmetric,
        diagonal_margin=margin,
        uniform_entry_deviation=uniform_dev,
        uniform_stationary_residual=stationary_resid,
    )
