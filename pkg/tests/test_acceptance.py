"""Acceptance suite: one test (group) per criterion, each at its stated
tolerance and time budget.  The terminal summary prints a line per
criterion.

Two sub-assertions of criterion 4 and one of criterion 8(b) contradict the
definitions the rest of the suite enforces (notes at the tests); they are
kept verbatim as strict xfails so the discrepancy stays visible, with
companion tests asserting the definition-derived values.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import pytest

from lcomplete.abstraction import (
    Slca,
    behaviors,
    build_slca,
    domino_complete,
    includes_trace,
    is_deterministic,
    is_non_blocking,
    verify_invariance,
    verify_reach_stay,
)
from lcomplete.core import Alphabet, Trace
from lcomplete.guarantees import (
    BisimExtension,
    PhiProfile,
    check_bisim_extension,
    gamma_bar,
    hybrid_pre_analysis,
    phi_affine,
)
from lcomplete.scenario import (
    certify,
    empirical_violation,
    epsilon,
    greedy_complexity,
)
from lcomplete.systems import policy_success_rate, sample_traces

from test_scenario import min_cover_bruteforce, random_traceset


@pytest.mark.acceptance(n=1, desc="phi formula reproduces the reported 4.57e-4")
def test_c1_phi_formula():
    value = phi_affine(PhiProfile(rho=3.0, k_bar=9), 2)
    assert abs(value - 4.57e-4) <= 1e-3 * 4.57e-4


@pytest.mark.acceptance(n=2, desc="gamma-bar arithmetic reproduces 1.62e-5 within 1%")
def test_c2_gamma_bar_arithmetic():
    value = gamma_bar(7.45e-9, 4.572e-4)
    assert abs(value - 1.62e-5) <= 0.01 * 1.62e-5


class TestC3EpsilonSolver:
    @pytest.mark.acceptance(n=3, desc="epsilon solver matches reported values")
    def test_reported_values(self):
        t0 = time.perf_counter()
        eps1 = epsilon(1, 10**4, 1e-12)
        assert abs(eps1 - 3.47e-3) <= 0.15 * 3.47e-3
        eps3 = epsilon(3, 10**4, 1e-12)
        assert 3.5e-3 <= eps3 <= 5.5e-3
        assert time.perf_counter() - t0 < 1.0

    @pytest.mark.acceptance(n=3, desc="epsilon monotone on a 50-point grid")
    def test_monotonicity_grid(self):
        ks = (0, 1, 3, 10, 25)
        ns = (50, 200, 1000, 5000, 10000)
        betas = (1e-12, 1e-3)
        grid = {
            (k, n, b): epsilon(k, n, b) for k in ks for n in ns for b in betas
        }
        assert len(grid) == 50
        for b in betas:
            for n in ns:
                vals = [grid[(k, n, b)] for k in ks]
                assert vals == sorted(vals)
            for k in ks:
                vals = [grid[(k, n, b)] for n in ns]
                assert vals == sorted(vals, reverse=True)
        for k in ks:
            for n in ns:
                assert grid[(k, n, 1e-12)] >= grid[(k, n, 1e-3)]

    @pytest.mark.acceptance(n=3, desc="reported 7.45e-9 is below any bound at N=1e4")
    def test_information_floor_excludes_reported_linear_epsilon(self):
        # even complexity 0 cannot go below ~ln(1/beta)/N, three orders of
        # magnitude above the reported figure; the value is excluded
        floor = epsilon(0, 10**4, 1e-12)
        assert floor > 100 * 7.45e-9
        assert floor == pytest.approx(math.log(1 / 1e-12) / 10**4, rel=0.25)


class TestC4HybridEndToEnd:
    def _pipeline(self, hybrid_env, seed):
        system, partition, dist = hybrid_env
        t0 = time.perf_counter()
        traces = sample_traces(system, partition, dist, 10_000, 9, seed=seed)
        slca = build_slca(traces, 2)
        s_star = greedy_complexity(traces, 2)
        elapsed = time.perf_counter() - t0
        return traces, slca, s_star, elapsed

    @pytest.mark.acceptance(n=4, desc="hybrid run: 6 states, s*=1, non-blocking")
    @pytest.mark.parametrize("seed", [11, 101, 202])
    def test_states_complexity_nonblocking(self, hybrid_env, seed):
        _, slca, s_star, elapsed = self._pipeline(hybrid_env, seed)
        names = {slca.alphabet.format_lseq(s, sep="") for s in slca.states}
        assert names == {"y1y2", "y2y3", "y3y4", "y4y5", "y5y5", "y5y1"}
        assert s_star == 1
        assert is_non_blocking(slca)
        assert elapsed < 5.0

    @pytest.mark.acceptance(n=4, desc="hybrid edge set is the full domino relation")
    def test_domino_edge_set(self, hybrid_slca):
        # The reachable dynamics use only the cycle plus the y5y5
        # self-loop (7 edges); the definitional edge relation additionally
        # contains y4y5 -> y5y1 (suffix y5 matches prefix y5), giving 8.
        fmt = lambda s: hybrid_slca.alphabet.format_lseq(s, sep="")
        edges = {(fmt(a), fmt(b)) for a, b in hybrid_slca.edges()}
        chain_and_loop = {
            ("y1y2", "y2y3"),
            ("y2y3", "y3y4"),
            ("y3y4", "y4y5"),
            ("y4y5", "y5y5"),
            ("y5y5", "y5y5"),
            ("y5y5", "y5y1"),
            ("y5y1", "y1y2"),
        }
        assert edges == chain_and_loop | {("y4y5", "y5y1")}
        assert hybrid_slca.n_edges == 8

    @pytest.mark.acceptance(n=4, desc="criterion text: exactly 7 edges (discrepancy)")
    @pytest.mark.xfail(
        strict=True,
        reason="the stated count omits the domino-mandated edge y4y5 -> y5y1; "
        "the edge relation is defined as all suffix/prefix compatible pairs, "
        "which yields 8 on these six states",
    )
    def test_exactly_seven_edges_as_stated(self, hybrid_slca):
        assert hybrid_slca.n_edges == 7

    @pytest.mark.acceptance(n=4, desc="criterion text: deterministic (discrepancy)")
    @pytest.mark.xfail(
        strict=True,
        reason="y5y5 has two successors (y5y5, y5y1), so the automaton cannot "
        "be deterministic",
    )
    def test_deterministic_as_stated(self, hybrid_slca):
        assert is_deterministic(hybrid_slca)


@pytest.mark.acceptance(n=5, desc="exact oracle: class probabilities and k-bar = 7")
def test_c5_exact_oracle():
    t0 = time.perf_counter()
    geometry = hybrid_pre_analysis(Fraction(1, 100), 2)
    a = geometry.alphabet
    name = lambda seq: a.format_lseq(seq, sep="")
    probs = {name(k): v for k, v in geometry.probabilities().items()}
    lam = Fraction(1, 100)
    assert probs["y1y2"] == Fraction(1, 2)
    assert probs["y2y3"] == Fraction(1, 4)
    assert probs["y3y4"] == Fraction(1, 8)
    assert probs["y4y5"] == Fraction(1, 16)
    assert probs["y5y5"] == Fraction(1, 16) - lam
    assert probs["y5y1"] == lam
    assert sum(geometry.probabilities().values()) == 1
    # all other 2-sequences carry zero mass
    others = [
        (i, j)
        for i in range(5)
        for j in range(5)
        if name((i, j)) not in probs or probs[name((i, j))] == 0
    ]
    assert all(geometry.probability(seq) == 0 for seq in others)
    assert geometry.k_bar_exact == 7
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.acceptance(n=6, desc="planar run: 160..210 states, inclusion, violation bound")
def test_c6_linear_experiment(linear_env, linear_traces_h4):
    t0 = time.perf_counter()
    system, partition, dist = linear_env
    slca = build_slca(linear_traces_h4, 2)
    assert 160 <= len(slca.states) <= 210  # 189 positive-mass sequences exist
    for t in linear_traces_h4:
        assert includes_trace(slca, t)
    cert = certify(linear_traces_h4, 2, 1e-12)
    fresh = sample_traces(system, partition, dist, 100_000, 4, seed=987_654)
    rate = empirical_violation(slca.states, fresh, 2)
    assert rate <= cert.epsilon
    assert time.perf_counter() - t0 < 30.0


class TestC7PathPlanning:
    @pytest.mark.acceptance(n=7, desc="policy success rate >= 95%")
    def test_policy_success(self, grid_env, grid_policy):
        grid, _, _ = grid_env
        assert policy_success_rate(grid, grid_policy, rollouts=10_000, seed=99) >= 0.95

    @pytest.mark.acceptance(n=7, desc="l=27 automaton verifies safety and reach-stay")
    def test_automaton_properties(self, grid_env, grid_traces_h40):
        t0 = time.perf_counter()
        _, partition, _ = grid_env
        a = partition.alphabet
        slca = build_slca(grid_traces_h40, 27)
        bad = {a.id("R"), a.dagger_id}
        assert verify_invariance(slca, bad).holds
        assert verify_reach_stay(slca, {a.id("G")}, bad).holds
        assert is_deterministic(slca) and is_non_blocking(slca)
        assert (
            check_bisim_extension(slca, 40, 27, 3)
            is BisimExtension.EXTENDS_BY_DETERMINISM
        )
        assert time.perf_counter() - t0 < 60.0

    @pytest.mark.acceptance(n=7, desc="certificate: s* <= 10 and epsilon <= 1e-2")
    def test_certificate(self, grid_traces_h40):
        cert = certify(grid_traces_h40, 27, 1e-12)
        assert cert.s_star <= 10
        assert cert.epsilon <= 1e-2


class TestC8OracleEquivalence:
    def _random_slca(self, rng, max_states=6):
        m = rng.randint(2, 3)
        l = rng.randint(1, 3)
        universe = list(itertools.product(range(m), repeat=l))
        n_states = rng.randint(1, min(max_states, len(universe)))
        states = tuple(sorted(rng.sample(universe, n_states)))
        alphabet = Alphabet([f"y{i}" for i in range(m)])
        return Slca(l=l, alphabet=alphabet, states=states), m

    @pytest.mark.acceptance(n=8, desc="(a) membership equals enumerated behaviours")
    def test_a_membership_oracle(self):
        t0 = time.perf_counter()
        rng = random.Random(8001)
        for _ in range(200):
            slca, m = self._random_slca(rng)
            h = rng.randint(slca.l, 6)
            enumerated = behaviors(slca, h, cap=200_000)
            for word in itertools.product(range(m), repeat=h):
                t = Trace(word)
                assert includes_trace(slca, t) == (t in enumerated)
        assert time.perf_counter() - t0 < 60.0

    @pytest.mark.acceptance(n=8, desc="(b) greedy upper-bounds the exact minimum cover")
    def test_b_greedy_upper_bounds_minimum(self):
        rng = random.Random(8002)
        gaps = 0
        for _ in range(100):
            ts = random_traceset(rng, rng.randint(1, 12), rng.randint(2, 5))
            g = greedy_complexity(ts, 2)
            m = min_cover_bruteforce(ts.traces, 2)
            assert g >= m
            gaps += g > m
        # the gap instances below are why the stated equality cannot hold
        assert gaps > 0

    @pytest.mark.acceptance(n=8, desc="(b) criterion text: greedy equals minimum (discrepancy)")
    @pytest.mark.xfail(
        strict=True,
        reason="greedy set cover is an upper bound, not exact: instances with "
        "<= 12 traces exist (and occur among 100 random draws) where the "
        "greedy cover uses one more trajectory than the optimum",
    )
    def test_b_greedy_equals_minimum_as_stated(self):
        rng = random.Random(8002)
        for _ in range(100):
            ts = random_traceset(rng, rng.randint(1, 12), rng.randint(2, 5))
            assert greedy_complexity(ts, 2) == min_cover_bruteforce(ts.traces, 2)

    @pytest.mark.acceptance(n=8, desc="(c) edge relation equals the definitional predicate")
    def test_c_edge_predicate(self):
        rng = random.Random(8003)
        for _ in range(200):
            slca, _ = self._random_slca(rng, max_states=12)
            want = {
                (u, v)
                for u in slca.states
                for v in slca.states
                if u[1:] == v[: slca.l - 1]
            }
            assert set(slca.edges()) == want

    @pytest.mark.acceptance(n=8, desc="(d) completion: non-blocking, idempotent, monotone")
    def test_d_completion_fixpoint(self):
        rng = random.Random(8004)
        for _ in range(100):
            slca, m = self._random_slca(rng)
            done = domino_complete(slca)
            assert is_non_blocking(done)
            assert domino_complete(done) == done
            assert set(slca.states) <= set(done.states)
            assert len(done.states) <= len(slca.alphabet) ** slca.l
            for h in range(slca.l, slca.l + 2):
                assert behaviors(slca, h, cap=200_000) <= behaviors(done, h, cap=200_000)


@pytest.mark.acceptance(n=9, desc="withheld reset sequence shows up at rate lambda")
def test_c9_violation_calibration(hybrid_env):
    t0 = time.perf_counter()
    system, partition, dist = hybrid_env
    a = partition.alphabet
    witnessed = [
        (a.id("y1"), a.id("y2")),
        (a.id("y2"), a.id("y3")),
        (a.id("y3"), a.id("y4")),
        (a.id("y4"), a.id("y5")),
        (a.id("y5"), a.id("y5")),
    ]  # y5y1 deliberately withheld
    n = 100_000
    fresh = sample_traces(system, partition, dist, n, 2, seed=424_242)
    rate = empirical_violation(witnessed, fresh, 2)
    p = 0.01
    sigma = math.sqrt(p * (1 - p) / n)
    assert abs(rate - p) <= 3 * sigma
    assert time.perf_counter() - t0 < 10.0