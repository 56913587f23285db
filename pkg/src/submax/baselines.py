"""Baseline solvers: the classical add/swap/delete local search, guided
random greedy, the two prior-art greedy baselines, and the warmup
combination of local search with guided random greedy."""

from __future__ import annotations

import math

import numpy as np

from .config import SolverConfig
from .fastsolve import best_initial_run, pick_better, stochastic_greedy_core, strip_solution
from .oracle import OracleHandle, RngStream, Solution


def _improves(new_val: float, f_sol: float, eps: float, k: int) -> bool:
    # A zero-value solution accepts any strictly positive move; otherwise the
    # move must beat the multiplicative threshold.
    if f_sol <= 0.0:
        return new_val > 0.0
    return new_val >= (1.0 + eps / k) * f_sol


def local_search(
    handle: OracleHandle,
    cfg: SolverConfig,
    rng: RngStream | None = None,
    stats: dict | None = None,
) -> Solution:
    """Classical local search: repeatedly apply the first add (when below
    capacity), swap (at capacity), or delete that improves the value by a
    factor of at least 1 + eps/k, starting from a constant-factor solution.

    Termination is guaranteed because every accepted move multiplies the
    value by at least that factor. Dummy moves never qualify (their delta
    is zero), so only real elements are scanned.
    """
    if rng is None:
        rng = RngStream.from_seed(cfg.seed)
    k, eps = cfg.k, cfg.eps
    n_real = handle.ground.n_real
    init, f_sol = best_initial_run(handle, cfg, rng)
    sol = strip_solution(init, handle)
    moves = 0
    while True:
        out_mask = np.ones(n_real, dtype=bool)
        if len(sol):
            members = [u for u in sol.elements if u < n_real]
            out_mask[members] = False
        outside = np.flatnonzero(out_mask)

        moved = False
        if len(sol) < k and len(outside):
            gains = handle.marginal_many(outside, sol)
            ok = np.flatnonzero([_improves(f_sol + g, f_sol, eps, k) for g in gains])
            if len(ok):
                u = int(outside[ok[0]])
                sol.add(u)
                f_sol = f_sol + float(gains[ok[0]])
                moved = True
        elif len(sol) == k:
            losses = handle.removal_losses(sol)
            order = np.argsort(sol.elements, kind="stable")
            for vi in order:
                v = sol.elements[vi]
                vals = handle.marginal_many(outside, sol, drop=v) + (f_sol - losses[vi])
                ok = np.flatnonzero([_improves(x, f_sol, eps, k) for x in vals])
                if len(ok):
                    u = int(outside[ok[0]])
                    sol.remove(v)
                    sol.add(u)
                    f_sol = float(vals[ok[0]])
                    moved = True
                    break
        if not moved and len(sol) > 0:
            losses = handle.removal_losses(sol)
            elems = np.array(sol.elements)
            order = np.argsort(elems, kind="stable")
            for vi in order:
                if _improves(f_sol - losses[vi], f_sol, eps, k):
                    v = int(elems[vi])
                    sol.remove(v)
                    f_sol = f_sol - float(losses[vi])
                    moved = True
                    break
        if not moved:
            if stats is not None:
                stats["moves"] = moves
            return sol
        moves += 1


def guided_random_greedy(
    handle: OracleHandle,
    guide: Solution,
    cfg: SolverConfig,
    rng: RngStream | None = None,
) -> Solution:
    """k rounds of uniform choice from the top-k marginal candidates; the
    first ceil(k * t_s) rounds exclude the elements of `guide` from the
    pool. Dummies keep the pool stocked with zero-marginal candidates, so
    negative additions are crowded out without an explicit clamp."""
    if rng is None:
        rng = RngStream.from_seed(cfg.seed)
    k = cfg.k
    n_total = handle.ground.total
    z_ids = list(set(guide.elements))
    t_flip = math.ceil(k * cfg.t_s)
    sol = Solution(k)
    mask = np.ones(n_total, dtype=bool)
    for i in range(1, k + 1):
        mask[:] = True
        if i <= t_flip and z_ids:
            mask[z_ids] = False
        if len(sol):
            mask[sol.elements] = False
        pool = np.flatnonzero(mask)
        if len(pool) == 0:
            continue
        gains = handle.marginal_many(pool, sol)
        order = np.lexsort((pool, -gains))
        top = order[: min(k, len(pool))]
        u = int(pool[top[int(rng.integers(len(top)))]])
        sol.add(u)
    return sol


def random_greedy(
    handle: OracleHandle, cfg: SolverConfig, rng: RngStream | None = None
) -> Solution:
    """Unguided special case: uniform pick from the top-k marginals."""
    if rng is None:
        rng = RngStream.from_seed(cfg.seed)
    return guided_random_greedy(handle, Solution(cfg.k), _with_ts_zero(cfg), rng)


def sample_greedy(
    handle: OracleHandle, cfg: SolverConfig, rng: RngStream | None = None
) -> Solution:
    """Linear-query stochastic greedy: the guided variant with an empty
    guide and no flip phase."""
    if rng is None:
        rng = RngStream.from_seed(cfg.seed)
    sol, _ = stochastic_greedy_core(
        handle, set(), cfg.k, cfg.eps, 0.0, cfg.p_mode, cfg.exclude_current, rng
    )
    return sol


def _with_ts_zero(cfg: SolverConfig) -> SolverConfig:
    return SolverConfig(
        k=cfg.k,
        eps=cfg.eps,
        t_s=0.0,
        p_mode=cfg.p_mode,
        seed=cfg.seed,
        L_override=cfg.L_override,
        exclude_current=cfg.exclude_current,
    )


def warmup_solve(
    handle: OracleHandle,
    cfg: SolverConfig,
    rng: RngStream | None = None,
    stats: dict | None = None,
) -> Solution:
    """Classical local search followed by guided random greedy; returns the
    better of the two sets."""
    if rng is None:
        rng = RngStream.from_seed(cfg.seed)
    guide = local_search(handle, cfg, rng, stats)
    improved = guided_random_greedy(handle, guide, cfg, rng)
    f_guide = handle.value(guide)
    f_improved = handle.value(improved)
    if stats is not None:
        stats["f_guide"] = f_guide
        stats["f_improved"] = f_improved
    return pick_better(
        strip_solution(guide, handle), f_guide, strip_solution(improved, handle), f_improved
    )
