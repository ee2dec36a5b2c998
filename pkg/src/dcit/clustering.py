"""k-means and Ward agglomerative clustering with silhouette-based selection."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from dcit.index_core import IndexScores, NormalizedMatrix

Method = Literal["kmeans", "agglomerative_ward"]
METHOD_ORDER: tuple[Method, ...] = ("kmeans", "agglomerative_ward")
MAX_ITER = 300


@dataclass(frozen=True)
class FeatureMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("feature matrix must be a non-empty 2-D array")
        if v.shape[0] != len(self.labels):
            raise ValueError("one label per row required")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature matrix contains non-finite values")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_normalized(
        cls, Z: NormalizedMatrix, year: int | None = 2023, average: bool = False
    ) -> "FeatureMatrix":
        """Reference-year cross-section, or per-country time averages."""
        if average:
            countries = Z.countries()
            rows = [
                Z.values[[k for k, (c, _) in enumerate(Z.rows) if c == cc]].mean(axis=0)
                for cc in countries
            ]
            return cls(tuple(countries), np.array(rows))
        countries, values = Z.slice_year(year)
        return cls(tuple(countries), values)


@dataclass
class ClusteringResult:
    method: Method
    K: int
    labels: tuple[str, ...]
    assignment: dict[str, int]
    centroids: np.ndarray
    silhouette: float | None
    inertia: float | None = None
    seed: int | None = None
    merges: list[tuple[int, int, float]] = field(default_factory=list)

    def members(self, cluster: int) -> list[str]:
        return sorted(c for c, k in self.assignment.items() if k == cluster)

    def sizes(self) -> list[int]:
        counts = Counter(self.assignment.values())
        return [counts[k] for k in range(self.K)]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "K": self.K,
            "assignment": dict(sorted(self.assignment.items())),
            "centroids": self.centroids.tolist(),
            "silhouette": self.silhouette,
            "inertia": self.inertia,
            "seed": self.seed,
        }

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["country", "cluster"])
            for c, k in sorted(self.assignment.items()):
                w.writerow([c, k])


def read_assignment_csv(path: str | Path) -> dict[str, int]:
    with Path(path).open(newline="") as fh:
        return {r["country"]: int(r["cluster"]) for r in csv.DictReader(fh)}


def canonical_labels(labels: Sequence[str], raw: np.ndarray) -> np.ndarray:
    """Renumber clusters by ascending ISO3 of each cluster's first member."""
    raw = np.asarray(raw)
    first = {}
    for lab, k in zip(labels, raw):
        if k not in first or lab < first[k]:
            first[k] = lab
    order = sorted(first, key=lambda k: first[k])
    remap = {k: i for i, k in enumerate(order)}
    return np.array([remap[k] for k in raw], dtype=int)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeans_pp_init(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # fewer distinct points than K: pick any unused row
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def lloyd(
    X: np.ndarray, centroids: np.ndarray, max_iter: int = MAX_ITER
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Lloyd iterations from ``centroids``; returns labels, centroids and
    the inertia after each assignment step."""
    C = np.array(centroids, dtype=float)
    K = C.shape[0]
    n = X.shape[0]
    labels = np.full(n, -1)
    history: list[float] = []
    for _ in range(max_iter):
        d = _sq_dists(X, C)
        new = d.argmin(axis=1)
        if labels[0] >= 0:
            # keep the current label on exact ties so duplicates don't oscillate
            keep = d[np.arange(n), labels] <= d[np.arange(n), new]
            new = np.where(keep, labels, new)
        cost = d[np.arange(n), new]
        for k in range(K):
            if not np.any(new == k):
                # reseed an empty cluster at the worst-fit point of a non-singleton
                sizes = np.bincount(new, minlength=K)
                steal = int(np.where(sizes[new] > 1, cost, -1.0).argmax())
                new[steal] = k
                cost[steal] = 0.0
        history.append(float(cost.sum()))
        if np.array_equal(new, labels):
            break
        labels = new
        C = np.array([X[labels == k].mean(axis=0) for k in range(K)])
    inertia = float(((X - C[labels]) ** 2).sum())
    history.append(inertia)
    return labels, C, history


def _check_k(X: FeatureMatrix, K: int) -> None:
    n = X.values.shape[0]
    if K < 2 and n >= 2:
        raise ValueError("K must be >= 2")
    if K > n:
        raise ValueError(f"K={K} exceeds number of rows {n}")


def _finalize(X: FeatureMatrix, raw: np.ndarray, method: Method, K: int, **kw) -> ClusteringResult:
    lab = canonical_labels(X.labels, raw)
    cents = np.array([X.values[lab == k].mean(axis=0) for k in range(K)])
    assignment = {c: int(k) for c, k in zip(X.labels, lab)}
    sil = silhouette(X, assignment) if K >= 2 else None
    return ClusteringResult(method, K, X.labels, assignment, cents, sil, **kw)


def kmeans(X: FeatureMatrix, K: int, seed: int = 0, restarts: int = 10) -> ClusteringResult:
    """k-means++ seeded Lloyd's algorithm, best of ``restarts`` by inertia."""
    _check_k(X, K)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    V = X.values
    n = V.shape[0]
    if K == n:
        return _finalize(X, np.arange(n), "kmeans", K, inertia=0.0, seed=seed)

    streams = np.random.SeedSequence(seed).spawn(restarts)
    best_labels, best_inertia = None, np.inf
    for ss in streams:
        rng = np.random.default_rng(ss)
        labels, _, history = lloyd(V, kmeans_pp_init(V, K, rng))
        # strict "<" keeps the lowest restart index on ties
        if history[-1] < best_inertia:
            best_labels, best_inertia = labels, history[-1]
    return _finalize(X, best_labels, "kmeans", K, inertia=best_inertia, seed=seed)


def ward_cost(a: np.ndarray, b: np.ndarray) -> float:
    """Increase in within-cluster sum of squares when merging point sets a and b."""
    na, nb = len(a), len(b)
    diff = a.mean(axis=0) - b.mean(axis=0)
    return na * nb / (na + nb) * float(diff @ diff)


def agglomerative_ward(X: FeatureMatrix, K: int) -> ClusteringResult:
    """Bottom-up Ward clustering using the Lance-Williams recurrence.

    The pairwise table holds the exact merge cost (sum-of-squares increase);
    ``merges`` records (i, j, cost) with i < j the surviving/absorbed
    cluster indices, where clusters are indexed by their lowest original row.
    """
    _check_k(X, K)
    V = X.values
    n = V.shape[0]
    D = 0.5 * _sq_dists(V, V)
    size = np.ones(n)
    active = list(range(n))
    groups = {i: [i] for i in range(n)}
    merges: list[tuple[int, int, float]] = []
    while len(active) > K:
        best = None
        for a_pos, i in enumerate(active):
            for j in active[a_pos + 1:]:
                if best is None or D[i, j] < best[2]:
                    best = (i, j, D[i, j])
        i, j, cost = best
        merges.append((i, j, float(cost)))
        for k in active:
            if k in (i, j):
                continue
            nk = size[k]
            D[i, k] = D[k, i] = (
                (size[i] + nk) * D[i, k] + (size[j] + nk) * D[j, k] - nk * D[i, j]
            ) / (size[i] + size[j] + nk)
        size[i] += size[j]
        groups[i].extend(groups.pop(j))
        active.remove(j)
    raw = np.empty(n, dtype=int)
    for k, root in enumerate(active):
        raw[groups[root]] = k
    return _finalize(X, raw, "agglomerative_ward", K, merges=merges)


def silhouette(X: FeatureMatrix, assignment: Mapping[str, int]) -> float:
    """Mean silhouette width under Euclidean distance; singletons score 0."""
    labels = np.array([assignment[c] for c in X.labels])
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ValueError("silhouette is undefined for a single cluster")
    V = X.values
    dist = np.sqrt(np.maximum(_sq_dists(V, V), 0.0))
    n = len(labels)
    s = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        if same.sum() == 1:
            continue
        a = dist[i, same].sum() / (same.sum() - 1)
        b = min(dist[i, labels == k].mean() for k in uniq if k != labels[i])
        m = max(a, b)
        s[i] = (b - a) / m if m > 0 else 0.0
    return float(np.clip(s.mean(), -1.0, 1.0))


def select_clustering(
    X: FeatureMatrix,
    k_range: Iterable[int],
    methods: Iterable[Method] = METHOD_ORDER,
    seed: int = 0,
    restarts: int = 10,
) -> tuple[ClusteringResult, list[ClusteringResult]]:
    """Fit every (method, K) candidate and keep the best silhouette.

    Ties go to the smaller K, then to k-means before Ward. Returns the winner
    and the full list of candidates in evaluation order.
    """
    ks = sorted(set(k_range))
    if not ks:
        raise ValueError("empty K range")
    n = X.values.shape[0]
    if ks[0] < 2 or ks[-1] > n:
        raise ValueError(f"K range must lie within [2, {n}]")
    methods = [m for m in METHOD_ORDER if m in set(methods)]
    if not methods:
        raise ValueError("no clustering methods selected")

    candidates = []
    for K in ks:
        for m in methods:
            if m == "kmeans":
                candidates.append(kmeans(X, K, seed=seed, restarts=restarts))
            else:
                candidates.append(agglomerative_ward(X, K))
    best = candidates[0]
    for cand in candidates[1:]:
        if cand.silhouette > best.silhouette + 1e-12:
            best = cand
    return best, candidates


@dataclass(frozen=True)
class ClusterProfile:
    cluster: int
    label: str
    year: int
    mean_dcit: float
    count: int
    share: float

    @property
    def share_pct(self) -> int:
        return round(100 * self.share)


def cluster_labels(
    assignment: Mapping[str, int], hints: Mapping[str, str | None] | None = None
) -> dict[int, str]:
    """Display label per cluster: the majority member ``cluster_hint`` when
    hints exist (ties to the smallest hint), else the cluster id."""
    out = {}
    for k in sorted(set(assignment.values())):
        votes = Counter(
            hints[c] for c, kk in assignment.items() if kk == k and hints and hints.get(c)
        )
        if votes:
            top = max(votes.values())
            out[k] = min(h for h, v in votes.items() if v == top)
        else:
            out[k] = str(k)
    return out


def cluster_profile(
    scores: IndexScores,
    assignment: Mapping[str, int] | ClusteringResult,
    year: int,
    labels: Mapping[int, str] | None = None,
) -> list[ClusterProfile]:
    """Per-cluster mean DCIT, member count and share of scored countries."""
    if isinstance(assignment, ClusteringResult):
        assignment = assignment.assignment
    cross = scores.cross_section(year)
    unassigned = sorted(set(cross) - set(assignment))
    if unassigned:
        raise KeyError(f"scored countries without a cluster: {unassigned}")
    total = len(cross)
    out = []
    for k in sorted(set(assignment.values())):
        vals = [cross[c] for c in sorted(cross) if assignment[c] == k]
        if not vals:
            continue
        label = (labels or {}).get(k, str(k))
        out.append(ClusterProfile(k, label, year, float(np.mean(vals)), len(vals), len(vals) / total))
    return out


def write_profiles_csv(profiles: Sequence[ClusterProfile], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster", "label", "year", "mean_dcit", "count", "share_pct"])
        for p in profiles:
            w.writerow([p.cluster, p.label, p.year, repr(p.mean_dcit), p.count, p.share_pct])


def read_profiles_csv(path: str | Path) -> list[ClusterProfile]:
    out = []
    with Path(path).open(newline="") as fh:
        for r in csv.DictReader(fh):
            share = float(r["share_pct"]) / 100 if r.get("share_pct") else 0.0
            out.append(
                ClusterProfile(
                    int(r["cluster"]),
                    r.get("label") or r["cluster"],
                    int(r["year"]) if r.get("year") else 2024,
                    float(r["mean_dcit"]),
                    int(r["count"]) if r.get("count") else 0,
                    share,
                )
            )
    return out
