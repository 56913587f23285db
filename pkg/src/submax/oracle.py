"""Ground set with dummy elements, evaluation surface, and query accounting.

Every solver in this package talks to the objective exclusively through an
OracleHandle. The handle strips dummy elements before the objective ever
sees a set, counts one query per value-or-marginal invocation (batched
calls count once per element), and answers swap-local variants of a set
(drop one element, add one element) without mutating evaluator state, so
the local-search inner loops stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count

import numpy as np

from .errors import ConstraintError, ElementError, SubmaxError


class RngStream:
    """Seeded random stream with reproducible child derivation.

    Identical seeds produce bit-identical draw sequences. Children spawned
    from a stream (or derived from a key) are independent and reproducible.
    """

    def __init__(self, seed_seq: np.random.SeedSequence):
        self._seq = seed_seq
        self.gen = np.random.Generator(np.random.PCG64(seed_seq))

    @classmethod
    def from_seed(cls, seed: int) -> "RngStream":
        return cls(np.random.SeedSequence(int(seed)))

    @classmethod
    def derived(cls, seed: int, *key: int) -> "RngStream":
        # Pure function of (seed, key): used by the harness so a single
        # experiment cell can be reproduced in isolation.
        return cls(np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in key)))

    def child(self) -> "RngStream":
        return RngStream(self._seq.spawn(1)[0])

    # Thin conveniences over the numpy generator.
    def integers(self, *args, **kwargs):
        return self.gen.integers(*args, **kwargs)

    def random(self, *args, **kwargs):
        return self.gen.random(*args, **kwargs)

    def choice(self, *args, **kwargs):
        return self.gen.choice(*args, **kwargs)


@dataclass(frozen=True)
class GroundSet:
    """Dense id space [0, n_real + n_dummy); dummies occupy the suffix."""

    n_real: int
    n_dummy: int

    @property
    def total(self) -> int:
        return self.n_real + self.n_dummy

    def is_dummy(self, u: int) -> bool:
        return u >= self.n_real

    def dummy_ids(self):
        return range(self.n_real, self.total)

    def check_id(self, u: int) -> None:
        if not 0 <= u < self.total:
            raise ElementError(f"element id {u} outside [0, {self.total})")


def make_ground_set(n_real: int, k: int) -> GroundSet:
    """Ground set for a cardinality bound k, with exactly 2k dummies appended."""
    if n_real < 1:
        raise ConstraintError(f"need at least one real element, got {n_real}")
    if k < 1 or k > n_real:
        raise ConstraintError(f"k={k} outside [1, {n_real}]")
    return GroundSet(n_real=n_real, n_dummy=2 * k)


class Solution:
    """Duplicate-free ordered subset of element ids with a capacity bound.

    Each instance carries a process-unique serial, and mutations bump a
    version counter, so oracle handles can detect "same set as the last
    query" in O(1) without being fooled by recycled object addresses.
    """

    __slots__ = ("capacity", "elements", "_members", "version", "serial")

    _serials = count()

    def __init__(self, capacity: int, elements=()):
        self.capacity = capacity
        self.elements: list[int] = []
        self._members: set[int] = set()
        self.version = 0
        self.serial = next(Solution._serials)
        for u in elements:
            self.add(u)

    def add(self, u: int) -> None:
        u = int(u)
        if u in self._members:
            raise SubmaxError(f"duplicate element {u}")
        if len(self.elements) >= self.capacity:
            raise SubmaxError(f"solution already at capacity {self.capacity}")
        self.elements.append(u)
        self._members.add(u)
        self.version += 1

    def remove(self, u: int) -> None:
        u = int(u)
        if u not in self._members:
            raise SubmaxError(f"element {u} not in solution")
        self.elements.remove(u)
        self._members.discard(u)
        self.version += 1

    def __contains__(self, u) -> bool:
        return u in self._members

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def copy(self) -> "Solution":
        out = Solution.__new__(Solution)
        out.capacity = self.capacity
        out.elements = list(self.elements)
        out._members = set(self._members)
        out.version = 0
        out.serial = next(Solution._serials)
        return out

    def strip_dummies(self, ground: GroundSet) -> list[int]:
        return [u for u in self.elements if u < ground.n_real]

    def sorted_tuple(self) -> tuple:
        return tuple(sorted(self.elements))


@dataclass
class QueryLedger:
    """Counts oracle invocations; one value-or-marginal call costs exactly 1."""

    queries: int = 0

    def charge(self, n: int = 1) -> None:
        self.queries += n

    def reset(self) -> None:
        self.queries = 0


class OracleHandle:
    """Evaluation surface over one objective, with query accounting.

    `evaluator` follows the incremental-state protocol implemented by the
    objective classes in :mod:`submax.objectives`:

    - ``reset(ids)``: rebuild state for the given real-element set
    - ``add(u)`` / ``remove(v)``: apply a one-element change
    - ``value()``: objective value of the synced set
    - ``gain_many(us, drop)``: vector of f(u | S - drop) for each u
      (``drop=None`` means plain marginals against the synced set; u may
      equal drop, which yields the removal loss f(v | S - v))

    One handle is owned by one run: evaluations are pure with respect to
    the instance data but mutate the ledger and the evaluator's synced set.
    """

    def __init__(self, evaluator, ground: GroundSet, ledger: QueryLedger | None = None):
        self.objective = evaluator
        self.ground = ground
        self.ledger = ledger if ledger is not None else QueryLedger()
        self._token = None  # (id(solution), version) of the synced set

    # -- internal sync ---------------------------------------------------

    def _sync(self, sol: Solution) -> None:
        token = (sol.serial, sol.version)
        if token == self._token:
            return
        n_real = self.ground.n_real
        new_ids = {u for u in sol.elements if u < n_real}
        cur = self.objective.members
        removed = cur - new_ids
        added = new_ids - cur
        if len(removed) + len(added) <= 4:
            for v in sorted(removed):
                self.objective.remove(v)
            for u in sorted(added):
                self.objective.add(u)
        else:
            self.objective.reset(new_ids)
        self._token = token

    def _check_ids(self, sol: Solution) -> None:
        n = self.ground.total
        for u in sol.elements:
            if not 0 <= u < n:
                raise ElementError(f"element id {u} outside [0, {n})")

    # -- public surface --------------------------------------------------

    def value(self, sol: Solution, drop: int | None = None, add: int | None = None) -> float:
        """f of the dummy-stripped set, optionally with one element dropped
        and/or one added. Costs one query."""
        self.ledger.charge(1)
        self._check_ids(sol)
        if add is not None:
            self.ground.check_id(add)
        if drop is not None:
            self.ground.check_id(drop)
        if add is not None and add == drop:
            add = drop = None
        self._sync(sol)
        val = self.objective.value()
        n_real = self.ground.n_real
        real_drop = drop if (drop is not None and drop < n_real and drop in sol) else None
        if real_drop is not None:
            val -= float(self.objective.gain_many(np.array([real_drop]), real_drop)[0])
        if add is not None and add < n_real and not (add in sol and add != real_drop):
            val += float(self.objective.gain_many(np.array([add]), real_drop)[0])
        return val

    def marginal(self, u: int, sol: Solution, drop: int | None = None) -> float:
        """f(u | S - drop) for the dummy-stripped S; exactly 0 when u is a
        dummy or already present. Costs one query."""
        self.ledger.charge(1)
        self.ground.check_id(u)
        self._check_ids(sol)
        if u >= self.ground.n_real:
            return 0.0
        n_real = self.ground.n_real
        real_drop = drop if (drop is not None and drop < n_real and drop in sol) else None
        if u in sol and u != real_drop:
            return 0.0
        self._sync(sol)
        return float(self.objective.gain_many(np.array([u]), real_drop)[0])

    def marginal_many(self, us, sol: Solution, drop: int | None = None) -> np.ndarray:
        """Vector of marginals f(u | S - drop); costs len(us) queries."""
        us = np.asarray(us, dtype=np.int64)
        self.ledger.charge(len(us))
        n = self.ground.total
        if len(us) and (us.min() < 0 or us.max() >= n):
            raise ElementError("element id outside ground set")
        self._check_ids(sol)
        self._sync(sol)
        n_real = self.ground.n_real
        real_drop = drop if (drop is not None and drop < n_real and drop in sol) else None
        out = np.zeros(len(us), dtype=np.float64)
        real = us < n_real
        if real.any():
            out[real] = self.objective.gain_many(us[real], real_drop)
        # Dummies and already-held elements have zero marginal by contract.
        if len(sol):
            member_arr = np.fromiter(sol._members, dtype=np.int64, count=len(sol))
            held = np.isin(us, member_arr)
            if drop is not None:
                held &= us != drop
            out[held] = 0.0
        return out

    def removal_losses(self, sol: Solution) -> np.ndarray:
        """f(v | S - v) for every v in the solution, in element order.

        Batch form of ``marginal(v, sol, drop=v)``; costs len(sol) queries.
        """
        self.ledger.charge(len(sol))
        self._check_ids(sol)
        self._sync(sol)
        n_real = self.ground.n_real
        out = np.zeros(len(sol), dtype=np.float64)
        ids = np.array([v for v in sol.elements if v < n_real], dtype=np.int64)
        if len(ids):
            losses = self.objective.loss_many(ids)
            pos = [i for i, v in enumerate(sol.elements) if v < n_real]
            out[pos] = losses
        return out


def submodularity_probe(handle: OracleHandle, trials: int, rng: RngStream) -> bool:
    """Sample random chains S subset of T and u outside T; true iff the
    diminishing-returns inequality held (within 1e-9) in every trial."""
    if trials < 1:
        raise SubmaxError(f"trials must be >= 1, got {trials}")
    n = handle.ground.n_real
    cap = handle.ground.total
    for _ in range(trials):
        size_t = int(rng.integers(0, n))  # |T| in [0, n-1] so some u remains
        perm = rng.gen.permutation(n)
        t_ids = perm[:size_t]
        u = int(perm[size_t])
        size_s = int(rng.integers(0, size_t + 1))
        s_ids = t_ids[:size_s]
        sol_t = Solution(cap, t_ids)
        sol_s = Solution(cap, s_ids)
        gain_t = handle.marginal(u, sol_t)
        gain_s = handle.marginal(u, sol_s)
        if gain_s < gain_t - 1e-9:
            return False
    return True
