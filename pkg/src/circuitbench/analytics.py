"""Performance measures and statistics over session event logs.

``derive_metrics`` turns one session's time-ordered event records into
per-task performance variables (solved, attempts, time in task, skip and
brute-force flags). The statistical helpers implement exactly the
procedures the analysis needs — correlation coefficients, z-scores,
Cronbach's alpha and Welch's ANOVA — from their textbook definitions, using
sample (n−1) variances throughout. p-values are deliberately out of scope:
Welch's ANOVA returns the F statistic and degrees of freedom for external
lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence


class AnalyticsError(Exception):
    pass


#: Mean inter-confirm gap below which a solve is treated as brute-forced.
BRUTE_FORCE_GAP_SECONDS = 10.0

#: Number of items on the prior-knowledge questionnaire scale.
PRIOR_KNOWLEDGE_ITEMS = 16


@dataclass(frozen=True)
class TaskMetrics:
    task_id: str
    solved: bool
    solved_first_attempt: bool
    brute_forced: bool
    skipped: bool
    time_in_task: float | None  # seconds; defined only when solved
    attempts: int

    def __post_init__(self):
        if self.solved and self.skipped:
            raise AnalyticsError(f"{self.task_id}: solved and skipped are exclusive")
        if self.time_in_task is not None and self.time_in_task < 0:
            raise AnalyticsError(f"{self.task_id}: negative time_in_task")


@dataclass(frozen=True)
class ParticipantRecord:
    pseudonym: str
    tasks: tuple[TaskMetrics, ...]
    processing_speed: float | None
    prior_knowledge: float | None
    qualification_attempts: int
    timed_out: bool


def brute_force_flag(confirm_times: Sequence[float]) -> bool:
    """True when the mean gap between confirm submissions is under 10 s.

    A single confirm has no rate and is never flagged.
    """
    if not confirm_times:
        raise AnalyticsError("need at least one confirm timestamp")
    n = len(confirm_times)
    if n < 2:
        return False
    return (confirm_times[-1] - confirm_times[0]) / (n - 1) < BRUTE_FORCE_GAP_SECONDS


def derive_metrics(records: Iterable[dict[str, Any]]) -> list[TaskMetrics]:
    """Per-task metrics for the experiment phase of one session log.

    Records must be time-ordered dicts with ``kind``, ``server_time``
    (milliseconds) and a ``payload``. A task left open at a timeout or
    session end counts as unsolved; a brute-forced task is reported
    unsolved even if a confirm succeeded.
    """
    order: list[str] = []
    first_view: dict[str, float] = {}
    confirms: dict[str, list[float]] = {}
    solved_at: dict[str, float] = {}
    skipped: set[str] = set()

    for record in records:
        kind = record.get("kind")
        payload = record.get("payload") or {}
        try:
            time_s = record["server_time"] / 1000.0
        except (KeyError, TypeError) as exc:
            raise AnalyticsError(f"malformed record: {record!r}") from exc
        if payload.get("phase") not in (None, "experiment"):
            continue
        task_id = payload.get("task_id")
        if kind == "task_shown" and payload.get("phase") == "experiment":
            if task_id not in first_view:
                order.append(task_id)
                first_view[task_id] = time_s
                confirms[task_id] = []
        elif kind == "confirm_submitted" and task_id in first_view:
            confirms[task_id].append(time_s)
            if payload.get("result") == "correct":
                solved_at[task_id] = time_s
        elif kind == "task_skipped" and task_id in first_view:
            skipped.add(task_id)

    metrics = []
    for task_id in order:
        times = confirms[task_id]
        brute = bool(times) and brute_force_flag(times)
        solved = task_id in solved_at and not brute and task_id not in skipped
        metrics.append(TaskMetrics(
            task_id=task_id,
            solved=solved,
            solved_first_attempt=solved and len(times) == 1,
            brute_forced=brute,
            skipped=task_id in skipped,
            time_in_task=(solved_at[task_id] - first_view[task_id]) if solved else None,
            attempts=len(times),
        ))
    return metrics


# --- statistics -------------------------------------------------------------

def _check_pair(x: Sequence[float], y: Sequence[float]) -> None:
    if len(x) != len(y):
        raise AnalyticsError("sequences must have equal length")
    if len(x) < 3:
        raise AnalyticsError("need at least 3 observations")


def _variance(x: Sequence[float]) -> float:
    m = math.fsum(x) / len(x)
    return math.fsum((v - m) ** 2 for v in x) / (len(x) - 1)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    _check_pair(x, y)
    mx = math.fsum(x) / len(x)
    my = math.fsum(y) / len(y)
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        raise AnalyticsError("correlation undefined for zero-variance input")
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


def _average_ranks(x: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the average of their rank positions."""
    indexed = sorted(range(len(x)), key=lambda i: x[i])
    ranks = [0.0] * len(x)
    i = 0
    while i < len(indexed):
        j = i
        while j + 1 < len(indexed) and x[indexed[j + 1]] == x[indexed[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[indexed[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Rank correlation: Pearson over average-ranked data."""
    _check_pair(x, y)
    return pearson(_average_ranks(x), _average_ranks(y))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Kendall's tau-b, tie-corrected, over all pairs."""
    _check_pair(x, y)
    concordant = discordant = ties_x = ties_y = 0
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx * dy > 0:
                concordant += 1
            else:
                discordant += 1
    pairs = n * (n - 1) // 2
    denom = math.sqrt((pairs - ties_x) * (pairs - ties_y))
    if denom == 0:
        raise AnalyticsError("correlation undefined for zero-variance input")
    return (concordant - discordant) / denom


def zscores(x: Sequence[float]) -> list[float]:
    """Standardize to mean 0 and sample (n−1) standard deviation 1."""
    if len(x) < 2:
        raise AnalyticsError("need at least 2 observations")
    var = _variance(x)
    if var == 0:
        raise AnalyticsError("z-scores undefined for zero variance")
    m = math.fsum(x) / len(x)
    sd = math.sqrt(var)
    return [(v - m) / sd for v in x]


def cronbach_alpha(items: Sequence[Sequence[float]]) -> float:
    """Internal-consistency alpha for a participants×items response matrix."""
    if len(items) < 2:
        raise AnalyticsError("need at least 2 participants")
    k = len(items[0])
    if k < 2 or any(len(row) != k for row in items):
        raise AnalyticsError("need a rectangular matrix with at least 2 items")
    item_vars = [_variance([row[j] for row in items]) for j in range(k)]
    total_var = _variance([math.fsum(row) for row in items])
    if total_var == 0:
        raise AnalyticsError("alpha undefined for zero total variance")
    return k / (k - 1) * (1 - math.fsum(item_vars) / total_var)


def welch_anova(groups: Sequence[Sequence[float]]) -> tuple[float, float, float]:
    """Welch's F with Welch–Satterthwaite degrees of freedom.

    Returns (F, df_between, df_within). No p-value is computed.
    """
    if len(groups) < 2:
        raise AnalyticsError("need at least 2 groups")
    k = len(groups)
    weights, means = [], []
    for g in groups:
        if len(g) < 2:
            raise AnalyticsError("each group needs at least 2 values")
        var = _variance(g)
        if var == 0:
            raise AnalyticsError("zero-variance group")
        weights.append(len(g) / var)
        means.append(math.fsum(g) / len(g))
    w_total = math.fsum(weights)
    grand = math.fsum(w * m for w, m in zip(weights, means)) / w_total
    between = math.fsum(w * (m - grand) ** 2 for w, m in zip(weights, means)) / (k - 1)
    lam = math.fsum((1 - w / w_total) ** 2 / (len(g) - 1)
                    for w, g in zip(weights, groups))
    lam *= 3 / (k * k - 1)
    f_stat = between / (1 + 2 * lam * (k - 2) / 3)
    df_between = float(k - 1)
    df_within = 1 / lam if lam > 0 else math.inf
    return f_stat, df_between, df_within


def prior_knowledge_score(responses: Sequence[float]) -> float:
    """Mean of the 16 prior-knowledge item responses, each on 0..5."""
    if len(responses) != PRIOR_KNOWLEDGE_ITEMS:
        raise AnalyticsError(f"expected {PRIOR_KNOWLEDGE_ITEMS} responses, got {len(responses)}")
    if any(not 0 <= r <= 5 for r in responses):
        raise AnalyticsError("responses must be in 0..5")
    return math.fsum(responses) / len(responses)
