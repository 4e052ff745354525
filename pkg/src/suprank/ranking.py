"""Ranking primitives: orderings, Kendall tau, majority tables and the ECC check.

Everything here is a pure function over immutable values. The brute-force
Kemeny solver is exponential and exists to verify the approximate
aggregators on small instances.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import math
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

CandidateId = Hashable

BRUTE_FORCE_CAP = 9


class RankingError(ValueError):
    """Raised for malformed rankings or mismatched candidate sets."""


@dataclass(frozen=True)
class Ranking:
    """An ordering of candidates, most preferred first.

    ``universe_size`` defaults to ``len(order)`` (a total ordering). A larger
    value marks the ranking as a partial, top-k list.
    """

    order: tuple
    universe_size: Optional[int] = None
    _pos: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        order = tuple(self.order)
        object.__setattr__(self, "order", order)
        pos = {c: i + 1 for i, c in enumerate(order)}
        if len(pos) != len(order):
            seen, dups = set(), []
            for c in order:
                if c in seen:
                    dups.append(c)
                seen.add(c)
            raise RankingError(f"duplicate candidates in ranking: {dups[:5]}")
        if self.universe_size is None:
            object.__setattr__(self, "universe_size", len(order))
        elif self.universe_size < len(order):
            raise RankingError(
                f"universe_size {self.universe_size} is smaller than the ranking length {len(order)}"
            )
        object.__setattr__(self, "_pos", pos)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def __getitem__(self, i):
        return self.order[i]

    def __contains__(self, c) -> bool:
        return c in self._pos

    @property
    def is_total(self) -> bool:
        return len(self.order) == self.universe_size

    @property
    def candidates(self) -> frozenset:
        return frozenset(self.order)

    def position(self, c) -> int:
        """1-based position of ``c``."""
        try:
            return self._pos[c]
        except KeyError:
            raise RankingError(f"candidate {c!r} is not in the ranking") from None

    def prefers(self, a, b) -> bool:
        return self.position(a) < self.position(b)

    def top(self, k: int) -> "Ranking":
        return Ranking(self.order[:k], self.universe_size)

    def restrict(self, keep: Iterable) -> "Ranking":
        """Sub-ranking over ``keep``, preserving relative order (a total ordering)."""
        keep = set(keep)
        return Ranking(tuple(c for c in self.order if c in keep))

    def reversed(self) -> "Ranking":
        return Ranking(self.order[::-1], self.universe_size)

    def to_line(self) -> str:
        return " ".join(str(c) for c in self.order)

    @classmethod
    def from_line(cls, line: str) -> "Ranking":
        return cls(tuple(line.split()))


def read_rankings(lines: Iterable[str], source: str = "<rankings>") -> list[Ranking]:
    """Parse the one-ranking-per-line format. Blank and ``#`` lines are skipped."""
    out = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(Ranking.from_line(line))
        except RankingError as exc:
            raise RankingError(f"{source}:{lineno}: {exc}") from None
    return out


def write_rankings(rankings: Iterable[Ranking]) -> str:
    return "".join(r.to_line() + "\n" for r in rankings)


def _check_same_candidates(a: Ranking, b: Ranking) -> None:
    if not (a.is_total and b.is_total):
        raise RankingError("Kendall tau needs total orderings")
    if a.candidates != b.candidates:
        diff = sorted(map(str, a.candidates ^ b.candidates))
        raise RankingError(f"rankings cover different candidates; symmetric difference: {diff[:10]}")


def _count_inversions(seq: list) -> int:
    # merge sort, O(m log m)
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inv = _count_inversions(left) + _count_inversions(right)
    i = j = 0
    merged = []
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            inv += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return inv


def kendall_tau(a: Ranking, b: Ranking) -> int:
    """Number of candidate pairs ordered oppositely by ``a`` and ``b``."""
    _check_same_candidates(a, b)
    return _count_inversions([b.position(c) for c in a.order])


def kendall_tau_concordant(a: Ranking, b: Ranking) -> int:
    """Number of candidate pairs ordered the same way by ``a`` and ``b``."""
    m = len(a)
    return m * (m - 1) // 2 - kendall_tau(a, b)


def mean_kendall(candidate: Ranking, inputs: Sequence[Ranking]) -> float:
    """Kemeny objective: mean Kendall tau distance of ``candidate`` to ``inputs``."""
    if not inputs:
        raise RankingError("mean_kendall needs at least one input ranking")
    return sum(kendall_tau(candidate, r) for r in inputs) / len(inputs)


@dataclass(frozen=True)
class MajorityTable:
    """Sparse pairwise accumulator: ``weights[(i, j)]`` is the ranker weight preferring i to j.

    Absent pairs count as 0. ``candidates`` holds every id that appeared in
    some top-k prefix.
    """

    weights: Mapping
    candidates: frozenset
    total_weight: float = 0.0

    def __getitem__(self, pair) -> float:
        return self.weights.get(pair, 0.0)

    def __len__(self) -> int:
        return len(self.weights)

    def margin(self, i, j) -> float:
        """Weighted preference of i over j minus that of j over i."""
        w = self.weights
        return w.get((i, j), 0.0) - w.get((j, i), 0.0)

    @property
    def tie_tolerance(self) -> float:
        # float sums of weights can miss exact ties by a few ulps; scale-free
        return 1e-12 * self.total_weight

    def compare(self, i, j) -> int:
        """Sign of the weighted majority margin: 1 if i wins, -1 if j wins, 0 for a tie."""
        d = self.margin(i, j)
        tol = self.tie_tolerance
        if d > tol:
            return 1
        if d < -tol:
            return -1
        return 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "weight"])
        for (i, j), w in sorted(self.weights.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
            writer.writerow([i, j, repr(float(w))])
        return buf.getvalue()


def build_majority_table(
    rankings: Sequence[Ranking],
    weights: Optional[Sequence[float]] = None,
    k: Optional[int] = None,
) -> MajorityTable:
    """Accumulate ranker weights over every ordered pair within each top-``k`` prefix."""
    if not rankings:
        raise RankingError("no rankings given")
    if weights is None:
        weights = [1] * len(rankings)
    if len(weights) != len(rankings):
        raise RankingError(f"{len(weights)} weights given for {len(rankings)} rankings")
    if any(w < 0 or not math.isfinite(w) for w in weights):
        raise RankingError(f"weights must be finite and nonnegative, got {list(weights)}")
    shortest = min(len(r) for r in rankings)
    if k is None:
        k = shortest
    if k < 1:
        raise RankingError(f"k must be positive, got {k}")
    if k > shortest:
        raise RankingError(f"k={k} exceeds the shortest ranking length {shortest}")

    table: dict = {}
    candidates = set()
    for ranking, w in zip(rankings, weights):
        prefix = ranking.order[:k]
        candidates.update(prefix)
        for a in range(k - 1):
            ca = prefix[a]
            for b in range(a + 1, k):
                key = (ca, prefix[b])
                table[key] = table.get(key, 0) + w
    return MajorityTable(table, frozenset(candidates), float(sum(weights)))


@dataclass(frozen=True)
class EccResult:
    """Outcome of :func:`ecc_check`. Truthy when the criterion holds.

    On violation, ``pair`` is ``(upper, lower)``: ``upper`` sits above
    ``lower`` in the aggregate although the weighted majority places
    ``lower``'s whole block first.
    """

    passed: bool
    pair: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return "pass"
        upper, lower = self.pair
        return f"violation: {lower!r} must precede {upper!r}"


def majority_blocks(table: MajorityTable, candidates: Sequence) -> list[list]:
    """Partition ``candidates`` into the ordered blocks of the weighted-majority relation.

    Two candidates share a block unless one side strictly wins the pairwise
    comparison against everything reachable from the other. Blocks are
    returned most-preferred first; every member of an earlier block strictly
    beats every member of a later one.
    """
    n = len(candidates)
    if n == 0:
        return []
    # edge u -> v unless v strictly beats u; semicomplete, so the condensation is a chain
    adj = np.zeros((n, n), dtype=bool)
    for a in range(n):
        for b in range(a + 1, n):
            s = table.compare(candidates[a], candidates[b])
            if s >= 0:
                adj[a, b] = True
            if s <= 0:
                adj[b, a] = True
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    reach = np.zeros((n_comp, n_comp), dtype=bool)
    src, dst = np.nonzero(adj)
    reach[labels[src], labels[dst]] = True
    np.fill_diagonal(reach, False)
    # in a chain of components the first one points at all others
    rank_of = np.argsort(np.argsort(-reach.sum(axis=1), kind="stable"), kind="stable")
    blocks: list[list] = [[] for _ in range(n_comp)]
    for idx, lab in enumerate(labels):
        blocks[rank_of[lab]].append(candidates[idx])
    return blocks


def ecc_check(aggregate: Ranking, table: MajorityTable) -> EccResult:
    """Check the Extended Condorcet Criterion for ``aggregate`` against ``table``.

    Only candidates covered by the table are constrained; the aggregate is
    restricted to them first.
    """
    cands = [c for c in aggregate.order if c in table.candidates]
    missing = table.candidates.difference(aggregate.order)
    if missing:
        raise RankingError(f"aggregate lacks table candidates: {sorted(map(str, missing))[:10]}")
    blocks = majority_blocks(table, cands)
    block_of = {c: b for b, members in enumerate(blocks) for c in members}
    worst_so_far = -1
    worst_cand = None
    for c in cands:
        b = block_of[c]
        if b < worst_so_far:
            return EccResult(False, (worst_cand, c))
        if b > worst_so_far:
            worst_so_far, worst_cand = b, c
    return EccResult(True)


@lru_cache(maxsize=None)
def _permutations(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.int8).reshape(-1, m)


def pairwise_counts(inputs: Sequence[Ranking], candidates: Sequence) -> np.ndarray:
    """``P[a, b]`` = number of inputs preferring ``candidates[a]`` to ``candidates[b]``."""
    m = len(candidates)
    P = np.zeros((m, m), dtype=np.int64)
    for r in inputs:
        pos = np.array([r.position(c) for c in candidates])
        P += pos[:, None] < pos[None, :]
    return P


def brute_force_kemeny(inputs: Sequence[Ranking], cap: int = BRUTE_FORCE_CAP) -> tuple[Ranking, float]:
    """Exact Kemeny aggregation by enumerating all m! orderings.

    Returns the optimal ranking and its mean Kendall distance. Among optima
    the lexicographically first permutation of the sorted candidate ids wins.
    """
    if not inputs:
        raise RankingError("no rankings given")
    first = inputs[0]
    for r in inputs[1:]:
        _check_same_candidates(first, r)
    if not first.is_total:
        raise RankingError("brute_force_kemeny needs total orderings")
    m = len(first)
    if m > cap:
        raise RankingError(f"brute force limited to m <= {cap} candidates, got m={m}")
    cands = sorted(first.order, key=lambda c: (str(type(c)), c))
    if m <= 1:
        return Ranking(tuple(cands)), 0.0
    P = pairwise_counts(inputs, cands)
    perms = _permutations(m)
    pos = np.empty_like(perms)
    rows = np.arange(len(perms))[:, None]
    pos[rows, perms] = np.arange(m, dtype=np.int8)
    cost = np.zeros(len(perms), dtype=np.int64)
    for a in range(m):
        for b in range(a + 1, m):
            cost += np.where(pos[:, a] < pos[:, b], P[b, a], P[a, b])
    best = int(np.argmin(cost))
    order = tuple(cands[i] for i in perms[best])
    return Ranking(order), float(cost[best]) / len(inputs)


@dataclass(frozen=True)
class GroundTruth:
    """Per-candidate target values and binary labels (True = positive)."""

    values: Mapping
    labels: Mapping
    threshold: float = math.nan

    @classmethod
    def from_values(cls, values: Mapping, threshold: float) -> "GroundTruth":
        if not math.isfinite(threshold):
            raise ValueError(f"threshold must be finite, got {threshold}")
        values = dict(values)
        labels = {c: v >= threshold for c, v in values.items()}
        return cls(values, labels, threshold)

    @classmethod
    def from_labels(cls, labels: Mapping) -> "GroundTruth":
        labels = {c: bool(v) for c, v in labels.items()}
        return cls({c: float(v) for c, v in labels.items()}, labels, 1.0)

    def __contains__(self, c) -> bool:
        return c in self.labels

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def ids(self) -> list:
        return list(self.labels)

    @property
    def positives(self) -> list:
        return [c for c, y in self.labels.items() if y]

    @property
    def negatives(self) -> list:
        return [c for c, y in self.labels.items() if not y]

    def label(self, c) -> bool:
        try:
            return self.labels[c]
        except KeyError:
            raise RankingError(f"candidate {c!r} has no label") from None

    def restrict(self, ids: Iterable) -> "GroundTruth":
        ids = list(ids)
        return GroundTruth(
            {c: self.values[c] for c in ids},
            {c: self.labels[c] for c in ids},
            self.threshold,
        )


def read_ground_truth(lines: Iterable[str], source: str = "<truth>") -> dict:
    """Parse ``candidate_id<TAB>value`` lines into a dict of floats."""
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2:
            raise ValueError(f"{source}:{lineno}: expected 'id<TAB>value', got {raw.rstrip()!r}")
        cid, val = parts[0].strip(), parts[1].strip()
        if cid in values:
            raise ValueError(f"{source}:{lineno}: duplicate candidate {cid!r}")
        try:
            values[cid] = float(val)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: value {val!r} is not a number") from None
    return values


def _tie_key(c, seed: int) -> bytes:
    return hashlib.blake2b(f"{seed}\x00{c!r}".encode(), digest_size=8).digest()


def rank_by_score(scores: Mapping, seed: int = 0) -> Ranking:
    """Order candidates by descending score; equal scores are shuffled with ``seed``.

    Each candidate's tie-break key depends only on ``(seed, candidate)``, so
    adding or removing other candidates never reorders a tied pair.
    """
    keyed = sorted(scores, key=lambda c: (-scores[c], _tie_key(c, seed)))
    return Ranking(tuple(keyed))
