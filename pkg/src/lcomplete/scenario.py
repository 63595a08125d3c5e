"""PAC certificate machinery for sampled-behaviour abstractions.

The sampled-constraint program has a closed-form solution: the indicator of
the witnessed l-sequences.  Its complexity (the minimum number of sampled
trajectories whose windows already yield the witnessed set) is a set-cover
minimum; we upper-bound it greedily.  The risk bound ``epsilon(k, n, beta)``
is the root of the wait-and-judge polynomial for scenario programs of
complexity ``k``, solved by bisection in log-space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.special import gammaln

from .core import LSeq, TraceSet, window

SOLVER_STRATEGY = "wait-and-judge"
SOLVER_REL_TOL = 1e-12


@dataclass(frozen=True)
class SolverInfo:
    strategy: str = SOLVER_STRATEGY
    tolerance: float = SOLVER_REL_TOL
    iterations: int = 0


@dataclass(frozen=True)
class Certificate:
    """PAC behavioural-inclusion guarantee for one sampling run.

    With confidence 1-beta over the n sampled trajectories, the probability
    that a fresh trajectory exhibits an unwitnessed l-sequence within the
    horizon is at most ``epsilon``.  ``gamma_bar``, when present, extends the
    bound to infinite horizon: gamma_bar = epsilon / phi_value.
    """

    n: int
    horizon: int
    l: int
    beta: float
    s_star: int
    epsilon: float
    gamma_bar: Optional[float] = None
    phi_value: Optional[float] = None
    solver: SolverInfo = field(default_factory=SolverInfo)

    def __post_init__(self) -> None:
        if self.gamma_bar is not None:
            if self.phi_value is None or not (0.0 < self.phi_value <= 1.0):
                raise ValueError("gamma_bar requires phi_value in (0, 1]")
            expected = self.epsilon / self.phi_value
            if abs(self.gamma_bar - expected) > 1e-12 * max(expected, 1e-300):
                raise ValueError("gamma_bar must equal epsilon / phi_value")

    def to_json_dict(self) -> dict:
        out = {
            "N": self.n,
            "H": self.horizon,
            "l": self.l,
            "beta": self.beta,
            "s_star": self.s_star,
            "epsilon": self.epsilon,
        }
        if self.gamma_bar is not None:
            out["gamma_bar"] = self.gamma_bar
        if self.phi_value is not None:
            out["phi"] = self.phi_value
        out["solver"] = {
            "strategy": self.solver.strategy,
            "tolerance": self.solver.tolerance,
            "iterations": self.solver.iterations,
        }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def _log_binom(m: np.ndarray, k: int) -> np.ndarray:
    return gammaln(m + 1.0) - gammaln(k + 1.0) - gammaln(m - k + 1.0)


def _risk_gap(eps: float, k: int, n: int, beta: float) -> float:
    """Sign of the defining polynomial at t = 1 - eps, in log space.

    The root in (0, 1) of

        beta/(n+1) * sum_{m=k}^{n} C(m, k) t^(m-k)  =  C(n, k) t^(n-k)

    gives epsilon = 1 - t.  We return log(lhs) - log(rhs): negative below
    the root (eps too small), positive above, monotone in eps.
    """
    t = 1.0 - eps
    m = np.arange(k, n + 1, dtype=float)
    terms = _log_binom(m, k) + (m - k) * np.log(t)
    lhs = np.log(beta) - np.log(n + 1.0) + float(np.logaddexp.reduce(terms))
    rhs = float(_log_binom(np.array([float(n)]), k)[0]) + (n - k) * np.log(t)
    return lhs - rhs


def _solve_epsilon(k: int, n: int, beta: float) -> tuple[float, int]:
    if not (0 <= k <= n):
        raise ValueError("complexity k must satisfy 0 <= k <= n")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    if k == n:
        return 1.0, 0
    lo, hi = 0.0, 1.0 - 1e-16
    # root bracketing: the polynomial changes sign between t -> 0+ and t = 1-
    assert _risk_gap(1e-300, k, n, beta) < 0.0 < _risk_gap(hi, k, n, beta), (
        "risk polynomial does not bracket a root in (0, 1)"
    )
    iterations = 0
    while hi - lo > SOLVER_REL_TOL * max(lo, 1e-300) and iterations < 200:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if _risk_gap(mid, k, n, beta) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), iterations


def epsilon(k: int, n: int, beta: float) -> float:
    """Scenario risk bound for complexity ``k`` out of ``n`` samples.

    Deterministic (pure bisection to relative tolerance 1e-12); equals 1
    at k = n.  Log-sum-exp over log-binomials keeps C(10^4, k) t^(n-k)
    finite where naive arithmetic overflows.
    """
    return _solve_epsilon(k, n, beta)[0]


def trace_window_sets(traces: TraceSet, l: int) -> list[frozenset[LSeq]]:
    """Per-trace sets of witnessed l-sequences (the covering sets)."""
    return [frozenset(window(t, l)) for t in traces]


def greedy_complexity(traces: TraceSet, l: int) -> int:
    """Greedy set-cover upper bound on the solution complexity.

    Universe: the witnessed l-sequences.  Sets: the per-trace window sets.
    Repeatedly pick the trace covering the most uncovered sequences, ties
    broken by lowest trace index.  The result upper-bounds the minimum
    number of trajectories reproducing the witnessed set.
    """
    if len(traces) == 0:
        raise ValueError("cannot compute complexity of an empty TraceSet")
    sets = trace_window_sets(traces, l)
    uncovered = set().union(*sets)
    chosen = 0
    active = list(enumerate(sets))
    while uncovered:
        best_i, best_gain = -1, -1
        for i, s in active:
            gain = len(s & uncovered)
            if gain > best_gain:
                best_i, best_gain = i, gain
        if best_gain <= 0:
            raise AssertionError("cover stalled with uncovered sequences")
        uncovered -= sets[best_i]
        active = [(i, s) for i, s in active if i != best_i]
        chosen += 1
    return chosen


def certify(traces: TraceSet, l: int, beta: float) -> Certificate:
    """Finite-horizon certificate: greedy complexity plus its risk bound."""
    s_star = greedy_complexity(traces, l)
    eps, iterations = _solve_epsilon(s_star, len(traces), beta)
    return Certificate(
        n=len(traces),
        horizon=traces.horizon,
        l=l,
        beta=beta,
        s_star=s_star,
        epsilon=eps,
        solver=SolverInfo(iterations=iterations),
    )


def empirical_violation(
    witnessed: Iterable[LSeq], fresh: TraceSet, l: int
) -> float:
    """Monte-Carlo estimate of the violation probability.

    Fraction of fresh traces exhibiting at least one l-window outside the
    witnessed set (use the pre-completion state set: completion only adds
    behaviours, so the post-completion violation rate is <= this one).
    """
    if len(fresh) == 0:
        raise ValueError("empirical validation needs at least one fresh trace")
    witnessed_set = set(witnessed)
    violations = 0
    for t in fresh:
        if any(w not in witnessed_set for w in window(t, l)):
            violations += 1
    return violations / len(fresh)
