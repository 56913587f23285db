"""Application objectives, synthetic instance generators, and the
brute-force optimum oracle.

Three objective families are supported over a shared Instance container:

- coverage-diversity: sum_{u in N} sum_{v in S} s_uv - lam * sum_{u,v in S} s_uv
- facility-diversity: sum_u max_{v in S} s_uv - (1/n) * sum_{u,v in S} s_uv
  (the max over an empty S is 0, which keeps f(0) = 0)
- graph-cut: total weight of edges crossing (S, V \\ S)

Each objective exists twice: as a plain formula evaluator (the functions
below, used as the independent reference in tests and for ledger-free
bookkeeping) and as an incremental state class used by OracleHandle, which
answers marginals from per-element running sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EnumerationGuardError, ObjectiveError
from .oracle import GroundSet, OracleHandle, QueryLedger, RngStream, Solution, make_ground_set

COVERAGE = "coverage-diversity"
FACILITY = "facility-diversity"
CUT = "graph-cut"
KINDS = (COVERAGE, FACILITY, CUT)

SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Instance:
    """One concrete objective: a kind plus the square matrix backing it.

    For similarity kinds `data` is the similarity matrix (entries >= 0);
    for graph-cut it is the symmetric weight matrix with zero diagonal.
    `lam` is only meaningful for coverage-diversity.
    """

    kind: str
    data: np.ndarray
    lam: float = 0.75

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown objective kind {self.kind!r}")
        d = self.data
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ConfigError(f"matrix must be square, got shape {d.shape}")
        if not (0.0 <= self.lam <= 1.0):
            raise ConfigError(f"lambda must lie in [0, 1], got {self.lam}")
        if d.min() < 0:
            raise ConfigError("matrix entries must be non-negative")
        if self.kind == CUT:
            if np.abs(d - d.T).max() > SYMMETRY_TOL:
                raise ConfigError("graph weights must be symmetric")
            if np.abs(np.diag(d)).max() > 0:
                raise ConfigError("graph must have a zero diagonal")

    @property
    def n_real(self) -> int:
        return self.data.shape[0]


# ---------------------------------------------------------------------------
# Plain formula evaluators (reference route, no incremental state)
# ---------------------------------------------------------------------------


def _ids(sel) -> list[int]:
    return [int(u) for u in sel]


def coverage_diversity_value(inst: Instance, sel) -> float:
    """Coverage minus lam-weighted pairwise similarity, by direct summation."""
    if inst.kind != COVERAGE:
        raise ObjectiveError(f"expected {COVERAGE} instance, got {inst.kind}")
    ids = _ids(sel)
    if not ids:
        return 0.0
    s = inst.data
    cover = float(s[:, ids].sum())
    pair = float(s[np.ix_(ids, ids)].sum())
    return cover - inst.lam * pair


def facility_diversity_value(inst: Instance, sel) -> float:
    """Facility-location coverage with a (1/n)-scaled diversity penalty."""
    if inst.kind != FACILITY:
        raise ObjectiveError(f"expected {FACILITY} instance, got {inst.kind}")
    ids = _ids(sel)
    if not ids:
        return 0.0
    s = inst.data
    cover = float(s[:, ids].max(axis=1).sum())
    pair = float(s[np.ix_(ids, ids)].sum())
    return cover - pair / s.shape[0]


def cut_value(inst: Instance, sel) -> float:
    """Total weight of edges with exactly one endpoint inside the set."""
    if inst.kind != CUT:
        raise ObjectiveError(f"expected {CUT} instance, got {inst.kind}")
    ids = _ids(sel)
    if not ids:
        return 0.0
    w = inst.data
    inside = float(w[np.ix_(ids, ids)].sum())
    return float(w[ids, :].sum()) - inside


def objective_value(inst: Instance, sel) -> float:
    if inst.kind == COVERAGE:
        return coverage_diversity_value(inst, sel)
    if inst.kind == FACILITY:
        return facility_diversity_value(inst, sel)
    return cut_value(inst, sel)


# ---------------------------------------------------------------------------
# Incremental evaluator states (oracle route)
# ---------------------------------------------------------------------------


class _BaseState:
    """Shared plumbing for the incremental objective states.

    Subclasses maintain per-element running sums so that `gain_many` (and
    the removal-loss variant) are answered without touching the whole set.
    """

    def __init__(self):
        self.members: set[int] = set()
        self.f = 0.0

    def value(self) -> float:
        return self.f

    def loss_many(self, vs: np.ndarray) -> np.ndarray:
        return np.array([self.gain_many(np.array([v]), int(v))[0] for v in vs])


class CoverageDiversityState(_BaseState):
    def __init__(self, inst: Instance):
        super().__init__()
        self.s = inst.data
        self.lam = inst.lam
        self.col = inst.data.sum(axis=0)
        self.diag = np.diag(inst.data).copy()
        self.in_row = np.zeros(inst.n_real)

    def reset(self, ids) -> None:
        arr = np.array(sorted(ids), dtype=np.int64)
        self.members = set(int(u) for u in arr)
        if len(arr) == 0:
            self.in_row = np.zeros(self.s.shape[0])
            self.f = 0.0
            return
        self.in_row = self.s[:, arr].sum(axis=1)
        self.f = float(self.col[arr].sum()) - self.lam * float(self.s[np.ix_(arr, arr)].sum())

    def gain_many(self, us: np.ndarray, drop: int | None = None) -> np.ndarray:
        base = self.in_row[us]
        if drop is not None:
            base = base - self.s[drop, us]
        return self.col[us] - self.lam * (2.0 * base + self.diag[us])

    def loss_many(self, vs: np.ndarray) -> np.ndarray:
        return self.col[vs] - self.lam * (2.0 * self.in_row[vs] - self.diag[vs])

    def add(self, u: int) -> None:
        self.f += float(self.gain_many(np.array([u]))[0])
        self.in_row += self.s[u]
        self.members.add(u)

    def remove(self, v: int) -> None:
        self.f -= float(self.loss_many(np.array([v]))[0])
        self.in_row -= self.s[v]
        self.members.discard(v)


class GraphCutState(_BaseState):
    def __init__(self, inst: Instance):
        super().__init__()
        self.w = inst.data
        self.total_row = inst.data.sum(axis=1)
        self.in_row = np.zeros(inst.n_real)

    def reset(self, ids) -> None:
        arr = np.array(sorted(ids), dtype=np.int64)
        self.members = set(int(u) for u in arr)
        if len(arr) == 0:
            self.in_row = np.zeros(self.w.shape[0])
            self.f = 0.0
            return
        self.in_row = self.w[:, arr].sum(axis=1)
        self.f = float(self.total_row[arr].sum()) - float(self.w[np.ix_(arr, arr)].sum())

    def gain_many(self, us: np.ndarray, drop: int | None = None) -> np.ndarray:
        base = self.in_row[us]
        if drop is not None:
            base = base - self.w[drop, us]
        return self.total_row[us] - 2.0 * base

    def loss_many(self, vs: np.ndarray) -> np.ndarray:
        return self.total_row[vs] - 2.0 * self.in_row[vs]

    def add(self, u: int) -> None:
        self.f += float(self.gain_many(np.array([u]))[0])
        self.in_row += self.w[u]
        self.members.add(u)

    def remove(self, v: int) -> None:
        self.f -= float(self.loss_many(np.array([v]))[0])
        self.in_row -= self.w[v]
        self.members.discard(v)


class FacilityDiversityState(_BaseState):
    """Keeps the two largest similarities per row so that removing the
    current best facility of a row falls back to the runner-up."""

    def __init__(self, inst: Instance):
        super().__init__()
        self.s = inst.data
        self.diag = np.diag(inst.data).copy()
        self.inv_n = 1.0 / inst.n_real
        n = inst.n_real
        self.in_row = np.zeros(n)
        self.max1 = np.zeros(n)
        self.max2 = np.zeros(n)
        self.amax = np.full(n, -1, dtype=np.int64)

    def reset(self, ids) -> None:
        arr = np.array(sorted(ids), dtype=np.int64)
        self.members = set(int(u) for u in arr)
        n = self.s.shape[0]
        if len(arr) == 0:
            self.in_row = np.zeros(n)
            self.max1 = np.zeros(n)
            self.max2 = np.zeros(n)
            self.amax = np.full(n, -1, dtype=np.int64)
            self.f = 0.0
            return
        self.in_row = self.s[:, arr].sum(axis=1)
        self._rebuild_max(arr)
        self.f = float(self.max1.sum()) - self.inv_n * float(self.s[np.ix_(arr, arr)].sum())

    def _rebuild_max(self, arr: np.ndarray) -> None:
        cols = self.s[:, arr]
        idx = cols.argmax(axis=1)
        rows = np.arange(cols.shape[0])
        self.max1 = cols[rows, idx].copy()
        self.amax = arr[idx]
        if len(arr) == 1:
            self.max2 = np.zeros(cols.shape[0])
        else:
            masked = cols.copy()
            masked[rows, idx] = -np.inf
            self.max2 = np.maximum(masked.max(axis=1), 0.0)

    def gain_many(self, us: np.ndarray, drop: int | None = None) -> np.ndarray:
        if drop is None:
            eff = self.max1
        else:
            eff = np.where(self.amax == drop, self.max2, self.max1)
        cover = np.maximum(self.s[:, us] - eff[:, None], 0.0).sum(axis=0)
        base = self.in_row[us]
        if drop is not None:
            base = base - self.s[drop, us]
        return cover - self.inv_n * (2.0 * base + self.diag[us])

    def add(self, u: int) -> None:
        self.f += float(self.gain_many(np.array([u]))[0])
        col = self.s[:, u]
        promote = col > self.max1
        self.max2 = np.where(promote, self.max1, np.maximum(self.max2, col))
        self.max1 = np.where(promote, col, self.max1)
        self.amax = np.where(promote, u, self.amax)
        self.in_row += self.s[u]
        self.members.add(u)

    def remove(self, v: int) -> None:
        self.f -= float(self.gain_many(np.array([v]), v)[0])
        self.members.discard(v)
        self.in_row -= self.s[v]
        arr = np.array(sorted(self.members), dtype=np.int64)
        if len(arr) == 0:
            n = self.s.shape[0]
            self.max1 = np.zeros(n)
            self.max2 = np.zeros(n)
            self.amax = np.full(n, -1, dtype=np.int64)
        else:
            self._rebuild_max(arr)


def make_evaluator(inst: Instance):
    if inst.kind == COVERAGE:
        return CoverageDiversityState(inst)
    if inst.kind == FACILITY:
        return FacilityDiversityState(inst)
    return GraphCutState(inst)


def make_handle(inst: Instance, k: int, ledger: QueryLedger | None = None) -> OracleHandle:
    """Fresh oracle handle over `inst` with a ground set sized for bound k."""
    ground = make_ground_set(inst.n_real, k)
    return OracleHandle(make_evaluator(inst), ground, ledger)


# ---------------------------------------------------------------------------
# Synthetic instances
# ---------------------------------------------------------------------------


def gen_synthetic(
    kind: str,
    n: int,
    rng: RngStream,
    density: float = 0.5,
    lam: float = 0.75,
    weight_range: tuple[float, float] = (0.0, 1.0),
    feature_dim: int = 25,
) -> Instance:
    """Random instance of the requested kind.

    Graph-cut draws Erdos-Renyi edges with uniform weights; the similarity
    kinds build the Gram matrix of random non-negative feature vectors
    (25-dimensional by default), which keeps all inner products >= 0.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown objective kind {kind!r}")
    if n < 2:
        raise ConfigError(f"need n >= 2, got {n}")
    lo, hi = weight_range
    if lo < 0 or hi < lo:
        raise ConfigError(f"bad weight range {weight_range}")
    if not (0.0 <= density <= 1.0):
        raise ConfigError(f"density must lie in [0, 1], got {density}")
    if kind == CUT:
        w = np.zeros((n, n))
        iu = np.triu_indices(n, k=1)
        present = rng.random(len(iu[0])) < density
        vals = lo + rng.random(len(iu[0])) * (hi - lo)
        vals[~present] = 0.0
        w[iu] = vals
        w = w + w.T
        return Instance(kind=CUT, data=w, lam=lam)
    feats = rng.random((n, feature_dim))
    gram = feats @ feats.T
    gram = (gram + gram.T) / 2.0
    return Instance(kind=kind, data=gram, lam=lam)


# ---------------------------------------------------------------------------
# Brute-force optimum
# ---------------------------------------------------------------------------

ENUMERATION_LIMIT = 24


@dataclass
class OptCertificate:
    """Exhaustively verified optimum over all subsets of size <= k."""

    opt_set: Solution
    opt_value: float
    enumerated: int


def brute_force_opt(handle: OracleHandle, k: int) -> OptCertificate:
    """Enumerate every subset of at most k real elements through `handle`.

    Ties are broken toward the lexicographically smallest sorted id tuple,
    so the certificate is deterministic.
    """
    from itertools import combinations

    n = handle.ground.n_real
    if n > ENUMERATION_LIMIT:
        raise EnumerationGuardError(f"n_real={n} exceeds enumeration limit {ENUMERATION_LIMIT}")
    if k < 0:
        raise ConfigError(f"k must be >= 0, got {k}")
    cap = max(k, 1)
    best_ids: tuple = ()
    best_val = handle.value(Solution(cap))
    count = 1
    for size in range(1, min(k, n) + 1):
        for ids in combinations(range(n), size):
            val = handle.value(Solution(cap, ids))
            count += 1
            if val > best_val or (val == best_val and ids < best_ids):
                best_val = val
                best_ids = ids
    return OptCertificate(
        opt_set=Solution(cap, best_ids),
        opt_value=float(best_val),
        enumerated=count,
    )
