"""Subject-tag clustering and temporal statistics over the corpus.

Tags are grouped bottom-up with Ward linkage over Euclidean distance,
stopping once the cheapest merge exceeds the distance threshold. The merge
sequence is deterministic: equal-cost merges resolve to the lowest pair
index, and a merged cluster keeps the lower of its parents' indices.

Temporal profiles normalize cluster mentions per 100 resolutions and adjust
for cluster size; heatmaps report per-subject tagging proportions and raw
counts across fixed-length year periods.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus.records import DocumentRecord
from .embedding import EmbeddingMatrix
from .errors import EmptyInputError

PERIOD_LENGTHS = (5, 10)


@dataclass(frozen=True)
class SubjectCluster:
    cluster_id: int
    members: tuple[str, ...]
    label: str | None = None  # human-assigned; never generated


@dataclass
class TemporalProfile:
    """Per-period resolution volume and size-adjusted cluster frequencies."""

    period_start: int
    period_length: int
    resolution_count: int
    normalized_freq: dict[int, float] = field(default_factory=dict)
    subject_counts: dict[str, int] = field(default_factory=dict)
    empty_period: bool = False


@dataclass
class SubjectHeatmap:
    """Per (subject, period) tagging proportions with raw counts overlaid."""

    subjects: tuple[str, ...]
    period_starts: list[int]
    period_length: int
    proportions: list[list[float]]  # rows follow subjects, columns periods
    counts: list[list[int]]
    period_totals: list[int]


def collect_subjects(records: list[DocumentRecord]) -> list[str]:
    """Deduplicated, sorted subject tags across the corpus."""
    tags = set()
    for record in records:
        tags.update(record.subjects)
    return sorted(tags)


def ward_merge_sequence(points: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """Greedy Ward merges (Lance-Williams updates) up to the threshold.

    Returns (a, b) pairs of cluster indices with a < b; the merged cluster
    lives on at index a, so an index equals the smallest original point
    index among its members.
    """
    n = len(points)
    diff = points[:, None, :] - points[None, :, :]
    distances = np.sqrt((diff**2).sum(axis=2))
    distances[np.tril_indices(n)] = np.inf
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    merges = []
    for _ in range(n - 1):
        flat = int(np.argmin(distances))  # row-major: lowest pair index wins ties
        a, b = divmod(flat, n)
        if not np.isfinite(distances[a, b]) or distances[a, b] > threshold:
            break
        merges.append((a, b))
        # Lance-Williams update of Ward distances against every other cluster
        na, nb = sizes[a], sizes[b]
        others = np.flatnonzero(active)
        others = others[(others != a) & (others != b)]
        if len(others):
            d_ak = np.where(others < a, distances[others, a], distances[a, others])
            d_bk = np.where(others < b, distances[others, b], distances[b, others])
            nk = sizes[others]
            updated = np.sqrt(
                ((na + nk) * d_ak**2 + (nb + nk) * d_bk**2 - nk * distances[a, b] ** 2)
                / (na + nb + nk)
            )
            lower = others[others < a]
            upper = others[others > a]
            distances[lower, a] = updated[others < a]
            distances[a, upper] = updated[others > a]
        active[b] = False
        sizes[a] = na + nb
        distances[b, :] = np.inf
        distances[:, b] = np.inf
    return merges


def cluster_subjects(tag_vectors: EmbeddingMatrix, distance_threshold: float) -> list[SubjectCluster]:
    """Partition the tags; clusters are ordered by their smallest tag index."""
    if len(tag_vectors) == 0:
        raise EmptyInputError("no tag vectors to cluster")
    tags = list(tag_vectors.row_keys)
    points = tag_vectors.rows.astype(np.float64)
    parent = list(range(len(tags)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in ward_merge_sequence(points, distance_threshold):
        parent[find(b)] = find(a)

    groups: dict[int, list[int]] = {}
    for i in range(len(tags)):
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for cluster_id, root in enumerate(sorted(groups)):
        members = tuple(tags[i] for i in groups[root])
        clusters.append(SubjectCluster(cluster_id=cluster_id, members=members))
    return clusters


def _periods(records: list[DocumentRecord], period_length: int) -> list[int]:
    if period_length not in PERIOD_LENGTHS:
        raise ValueError(f"period_length must be one of {PERIOD_LENGTHS}")
    if not records:
        return []
    years = [r.date.year for r in records]
    first = min(years) // period_length * period_length
    last = max(years) // period_length * period_length
    return list(range(first, last + 1, period_length))


def _check_partition(clusters: list[SubjectCluster]) -> None:
    seen: set[str] = set()
    for cluster in clusters:
        if not cluster.members:
            raise ValueError(f"cluster {cluster.cluster_id} has no members")
        overlap = seen.intersection(cluster.members)
        if overlap:
            raise ValueError(f"clusters overlap on {sorted(overlap)}")
        seen.update(cluster.members)


def cluster_temporal_profile(
    records: list[DocumentRecord],
    clusters: list[SubjectCluster],
    period_length: int,
) -> list[TemporalProfile]:
    """Normalized frequency per cluster and period:
    (mentions / resolutions) x 100 / cluster size."""
    _check_partition(clusters)
    profiles = []
    for start in _periods(records, period_length):
        in_period = [r for r in records if start <= r.date.year < start + period_length]
        subject_counts: dict[str, int] = {}
        for record in in_period:
            for tag in record.subjects:
                subject_counts[tag] = subject_counts.get(tag, 0) + 1
        resolution_count = len(in_period)
        freq = {}
        for cluster in clusters:
            mentions = sum(subject_counts.get(tag, 0) for tag in cluster.members)
            if resolution_count == 0:
                freq[cluster.cluster_id] = 0.0
            else:
                freq[cluster.cluster_id] = (
                    mentions / resolution_count * 100.0 / len(cluster.members)
                )
        profiles.append(
            TemporalProfile(
                period_start=start,
                period_length=period_length,
                resolution_count=resolution_count,
                normalized_freq=freq,
                subject_counts=subject_counts,
                empty_period=resolution_count == 0,
            )
        )
    return profiles


def subject_heatmap(
    cluster: SubjectCluster,
    records: list[DocumentRecord],
    period_length: int = 5,
) -> SubjectHeatmap:
    """Proportion of each period's resolutions tagged with each cluster subject."""
    if not cluster.members:
        raise EmptyInputError("cluster has no members")
    starts = _periods(records, period_length)
    totals, proportions, counts = [], [], []
    per_period_docs = []
    for start in starts:
        docs = [r for r in records if start <= r.date.year < start + period_length]
        per_period_docs.append(docs)
        totals.append(len(docs))
    for subject in cluster.members:
        row_counts, row_props = [], []
        for docs, total in zip(per_period_docs, totals):
            tagged = sum(1 for r in docs if subject in r.subjects)
            row_counts.append(tagged)
            row_props.append(tagged / total if total else 0.0)
        counts.append(row_counts)
        proportions.append(row_props)
    return SubjectHeatmap(
        subjects=cluster.members,
        period_starts=starts,
        period_length=period_length,
        proportions=proportions,
        counts=counts,
        period_totals=totals,
    )


def profile_csv(profiles: list[TemporalProfile]) -> str:
    lines = ["period_start,cluster_id,resolution_count,normalized_freq"]
    for profile in profiles:
        for cluster_id in sorted(profile.normalized_freq):
            lines.append(
                f"{profile.period_start},{cluster_id},"
                f"{profile.resolution_count},{profile.normalized_freq[cluster_id]:.6f}"
            )
    return "\n".join(lines) + "\n"
