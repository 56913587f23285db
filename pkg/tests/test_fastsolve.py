"""Fast local search, guided stochastic greedy, the combined driver, and
the guarantee-coefficient optimizer."""

import math

import numpy as np
import pytest

import submax.fastsolve as fs
from submax.config import (
    DEFAULT_FLIP_POINT,
    FROZEN_BOUND_P,
    FROZEN_BOUND_VALUE,
    SolverConfig,
    attempts_count,
    iteration_count,
    sample_rate,
)
from submax.errors import SolutionSizeError
from submax.objectives import (
    COVERAGE,
    CUT,
    Instance,
    gen_synthetic,
    make_handle,
    objective_value,
)
from submax.oracle import RngStream, Solution


def modular(weights, lam=0.0):
    return Instance(kind=COVERAGE, data=np.diag(np.array(weights, dtype=float)), lam=lam)


class TestHelpers:
    def test_repetition_counts(self):
        assert attempts_count(0.1) == 4
        assert attempts_count(0.5) == 1
        assert attempts_count(0.25) == 2

    def test_iteration_count_formula(self):
        assert iteration_count(10, 0.25) == math.ceil(160 / (0.25 * (1 - 1 / math.e)))

    def test_practical_sample_rate(self):
        assert sample_rate(100, 0.1, "practical") == pytest.approx(0.8)
        assert sample_rate(10, 0.1, "theoretical") == pytest.approx(
            8.0 / (10 * 0.01) * math.log(20.0), rel=1e-9
        )


class TestInitSolution:
    def test_padded_to_exactly_k(self):
        inst = gen_synthetic("graph-cut", 12, RngStream.from_seed(0), density=0.5)
        h = make_handle(inst, 4)
        sol = fs.init_solution(h, SolverConfig(k=4, eps=0.1, seed=1))
        assert len(sol) == 4

    def test_reproducible(self):
        inst = gen_synthetic("coverage-diversity", 12, RngStream.from_seed(1))
        cfg = SolverConfig(k=3, eps=0.1, seed=5)
        a = fs.init_solution(make_handle(inst, 3), cfg)
        b = fs.init_solution(make_handle(inst, 3), cfg)
        assert a.elements == b.elements


class TestCheckLocalOpt:
    def test_top_k_satisfied(self):
        inst = modular([5.0, 4.0, 1.0])
        h = make_handle(inst, 2)
        report = fs.check_local_opt_condition(h, Solution(2, [0, 1]), eps=0.0)
        assert report.satisfied
        assert report.f_value == pytest.approx(9.0)
        assert len(report.removal_losses) == 2
        assert len(report.add_gains) == h.ground.total - 2

    def test_bottom_k_violated_at_t1(self):
        inst = modular([5.0, 4.0, 1.0])
        h = make_handle(inst, 1)
        report = fs.check_local_opt_condition(h, Solution(1, [2]), eps=0.0)
        assert not report.satisfied
        assert report.worst_t == 1

    def test_t0_never_violates(self):
        inst = modular([5.0, 4.0, 1.0])
        h = make_handle(inst, 1)
        report = fs.check_local_opt_condition(h, Solution(1, [2]), eps=0.0)
        # margin at t = 0 is -eps * f(S) <= 0
        assert report.add_gains[0] > 0

    def test_all_zero_objective_passes_any_set(self):
        inst = Instance(kind=CUT, data=np.zeros((6, 6)))
        h = make_handle(inst, 2)
        report = fs.check_local_opt_condition(h, Solution(2, [0, 5]), eps=0.0)
        assert report.satisfied

    def test_size_mismatch_rejected(self):
        inst = modular([1.0, 2.0, 3.0])
        h = make_handle(inst, 2)
        with pytest.raises(SolutionSizeError):
            fs.check_local_opt_condition(h, Solution(2, [0]), eps=0.1)


class TestFastLocalSearch:
    def test_attempt_queries_match_budget_exactly(self):
        inst = gen_synthetic("graph-cut", 50, RngStream.from_seed(2), density=0.3)
        cfg = SolverConfig(k=5, eps=0.5, seed=3)  # single attempt
        h = make_handle(inst, 5)
        stats = {}
        fs.fast_local_search(h, cfg, stats=stats)
        budget = fs.attempt_query_budget(h.ground.total, 5, stats["L"])
        assert stats["attempt_queries"][0] == budget

    def test_l_override(self):
        inst = gen_synthetic("graph-cut", 30, RngStream.from_seed(3), density=0.3)
        cfg = SolverConfig(k=3, eps=0.5, seed=4, L_override=7)
        h = make_handle(inst, 3)
        stats = {}
        fs.fast_local_search(h, cfg, stats=stats)
        assert stats["L"] == 7

    def test_trajectory_monotone(self):
        inst = gen_synthetic("graph-cut", 60, RngStream.from_seed(4), density=0.3)
        h = make_handle(inst, 6)
        stats = {}
        fs.fast_local_search(h, SolverConfig(k=6, eps=0.25, seed=5), stats=stats)
        for traj in stats["trajectory_values"]:
            assert all(b >= a for a, b in zip(traj, traj[1:]))

    def test_success_certified_by_fresh_check(self):
        inst = gen_synthetic("graph-cut", 40, RngStream.from_seed(5), density=0.4)
        cfg = SolverConfig(k=4, eps=0.25, seed=6)
        sol = fs.fast_local_search(make_handle(inst, 4), cfg)
        assert sol is not None
        report = fs.check_local_opt_condition(make_handle(inst, 4), sol, cfg.eps)
        assert report.satisfied

    def test_output_size_is_k_with_dummies(self):
        inst = gen_synthetic("coverage-diversity", 20, RngStream.from_seed(6))
        sol = fs.fast_local_search(make_handle(inst, 5), SolverConfig(k=5, eps=0.25, seed=7))
        assert sol is not None and len(sol) == 5


class TestGuidedStochasticGreedy:
    def test_forced_argmax(self):
        inst = modular([3.0, 1.0, 2.0])
        h = make_handle(inst, 1)
        cfg = SolverConfig(k=1, eps=0.1, seed=0)
        sol = fs.guided_stochastic_greedy(h, Solution(1), cfg)
        assert sol.sorted_tuple() == (0,)

    def test_guide_excluded_with_full_flip(self):
        inst = modular([9.0, 1.0, 2.0, 3.0])
        cfg = SolverConfig(k=2, eps=0.1, t_s=1.0, seed=1)
        for seed in range(10):
            cfg = SolverConfig(k=2, eps=0.1, t_s=1.0, seed=seed)
            h = make_handle(inst, 2)
            sol = fs.guided_stochastic_greedy(h, Solution(1, [0]), cfg)
            assert 0 not in sol.elements

    def test_sample_sizes_follow_rate(self):
        n, k, eps = 1000, 100, 0.1
        inst = gen_synthetic("graph-cut", n, RngStream.from_seed(7), density=0.05)
        h = make_handle(inst, k)
        stats = {}
        cfg = SolverConfig(k=k, eps=eps, t_s=0.0, seed=2)
        fs.guided_stochastic_greedy(h, Solution(k), cfg, stats=stats)
        p = sample_rate(k, eps, "practical")
        assert p == pytest.approx(0.8)
        n_total = h.ground.total
        sizes = stats["sample_sizes"]
        # first pool is the whole ground set; later pools shrink by at most
        # one element per accepted pick
        assert sizes[0] == min(math.ceil(p * n_total), n_total)
        for i, size in enumerate(sizes):
            low = min(math.ceil(p * (n_total - i)), n_total - i)
            high = min(math.ceil(p * n_total), n_total)
            assert low <= size <= high

    def test_accepted_elements_nonnegative_marginal(self):
        rng = RngStream.from_seed(8)
        inst = gen_synthetic("coverage-diversity", 30, rng, lam=0.9)
        h = make_handle(inst, 6)
        cfg = SolverConfig(k=6, eps=0.2, seed=3)
        sol = fs.guided_stochastic_greedy(h, Solution(6), cfg)
        # replay: every prefix addition had nonnegative marginal
        partial = Solution(6)
        fresh = make_handle(inst, 6)
        for u in sol.elements:
            assert fresh.marginal(u, partial) >= -1e-12
            partial.add(u)

    def test_degenerate_pool_all_reals_guided(self):
        inst = modular([1.0, 2.0])
        h = make_handle(inst, 2)
        cfg = SolverConfig(k=2, eps=0.1, t_s=1.0, seed=4)
        guide = Solution(2, [0, 1])
        sol = fs.guided_stochastic_greedy(h, guide, cfg)  # only dummies available
        assert sol.strip_dummies(h.ground) == []


class TestSolveMain:
    def test_output_is_max_of_routes(self):
        inst = gen_synthetic("graph-cut", 25, RngStream.from_seed(9), density=0.4)
        h = make_handle(inst, 4)
        stats = {}
        sol = fs.solve_main(h, SolverConfig(k=4, eps=0.25, seed=8), stats=stats)
        val = objective_value(inst, sol.strip_dummies(h.ground))
        assert val >= max(stats["f_guide"], stats["f_improved"]) - 1e-12

    def test_failure_returns_empty(self, monkeypatch):
        inst = gen_synthetic("graph-cut", 10, RngStream.from_seed(10), density=0.5)
        h = make_handle(inst, 3)
        monkeypatch.setattr(fs, "fast_local_search", lambda *a, **k: None)
        stats = {}
        sol = fs.solve_main(h, SolverConfig(k=3, eps=0.25, seed=9), stats=stats)
        assert stats["failed"]
        assert len(sol) == 0
        assert objective_value(inst, sol.elements) >= 0.0

    def test_scaling_invariance(self):
        # doubling is exact in floating point, so trajectories must match
        base = gen_synthetic("graph-cut", 30, RngStream.from_seed(11), density=0.4)
        scaled = Instance(kind=CUT, data=base.data * 4.0)
        cfg = SolverConfig(k=4, eps=0.25, seed=10)
        for solver in (fs.solve_main, fs.fast_local_search):
            s1 = solver(make_handle(base, 4), cfg)
            s2 = solver(make_handle(scaled, 4), cfg)
            assert s1.elements == s2.elements

    def test_reproducible(self):
        inst = gen_synthetic("coverage-diversity", 20, RngStream.from_seed(12))
        cfg = SolverConfig(k=4, eps=0.2, seed=11)
        a = fs.solve_main(make_handle(inst, 4), cfg)
        b = fs.solve_main(make_handle(inst, 4), cfg)
        assert a.elements == b.elements


class TestBoundOptimizer:
    def test_exceeds_constant_at_tiny_eps(self):
        bp = fs.optimize_bound_params(10**6, 1e-6)
        assert bp.bound_value > 0.385

    def test_weights_on_simplex(self):
        bp = fs.optimize_bound_params(100, 0.01)
        assert bp.p1 >= 0 and bp.p2 >= -1e-12 and bp.p3 >= 0
        assert bp.p1 + bp.p2 + bp.p3 == pytest.approx(1.0, abs=1e-12)

    def test_bound_is_gain_coefficient_times_p3(self):
        bp = fs.optimize_bound_params(50, 1e-4)
        t = bp.t_s
        coef = (2.0 - t - math.exp(-t)) * math.exp(t - 1.0)
        assert bp.bound_value == pytest.approx(coef * bp.p3, rel=1e-12)
        # zeroing the greedy-route weight would zero the whole bound
        assert coef * 0.0 == 0.0

    def test_frozen_defaults_match_grid(self):
        bp = fs.optimize_bound_params(10**6, 1e-6)
        assert abs(bp.t_s - DEFAULT_FLIP_POINT) <= 1e-3
        assert bp.bound_value == pytest.approx(FROZEN_BOUND_VALUE, abs=1e-6)
        assert (bp.p1, bp.p2, bp.p3) == pytest.approx(FROZEN_BOUND_P, abs=1e-9)
