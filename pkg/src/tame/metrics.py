"""Evaluation metrics: rank-based AUROC, per-task forgetting, sequence
summaries and the cross-mode comparison table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass
class TaskRecord:
    """Everything observed when one lifelong task was learned: the chosen
    expert, similarity scores, training losses, and the accuracy of every
    task seen so far, evaluated right after this step."""

    sequence_id: str
    step: int  # 1-based position in the sequence
    task_id: str
    mode: str
    metric: str
    chosen_expert: int
    scores: list[float]
    row_counts: dict[str, int]
    epoch_losses: list[float]
    eval_accuracies: dict[str, float]  # task_id -> accuracy at this step
    eval_aurocs: dict[str, float]
    auroc: float  # AUROC of this task at its own learning step

    def to_event(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "step": self.step,
            "task_id": self.task_id,
            "mode": self.mode,
            "metric": self.metric,
            "chosen_expert": self.chosen_expert,
            "scores": list(self.scores),
            "row_counts": dict(self.row_counts),
            "epoch_losses": list(self.epoch_losses),
            "eval_accuracies": dict(self.eval_accuracies),
            "eval_aurocs": dict(self.eval_aurocs),
            "auroc": self.auroc,
        }

    @classmethod
    def from_event(cls, event: dict) -> "TaskRecord":
        return cls(**{f: event[f] for f in (
            "sequence_id", "step", "task_id", "mode", "metric", "chosen_expert",
            "scores", "row_counts", "epoch_losses", "eval_accuracies", "eval_aurocs", "auroc",
        )})


@dataclass
class SequenceSummary:
    sequence_id: str
    average_forgetting: float
    average_auroc: float
    mode: str = ""
    metric: str = ""
    seed: int | None = None


def auroc(scores, labels) -> float:
    """Area under the ROC curve via the rank statistic; tied scores get
    half credit. Raises if only one class is present."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise InputError(f"scores {s.shape} and labels {y.shape} must be equal-length vectors")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise InputError("AUROC needs both classes present")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain non-finite values")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # mean of ranks i+1..j+1
        i = j + 1
    rank_sum = float(ranks[y == 1].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def forgetting(accuracy_history) -> float:
    """Best accuracy ever recorded for a task minus its latest accuracy."""
    h = list(accuracy_history)
    if not h:
        raise InputError("forgetting needs a non-empty accuracy history")
    return float(max(h) - h[-1])


def average_forgetting(accuracy_matrix: list[list[float]]) -> float:
    """Mean forgetting over all but the newest task.

    accuracy_matrix is lower-triangular: row t (0-based) holds the
    accuracies of tasks 1..t+1 measured after learning task t+1.
    """
    t = len(accuracy_matrix)
    if t < 2:
        raise InputError(f"average forgetting needs at least 2 tasks, got {t}")
    for step, row in enumerate(accuracy_matrix):
        if len(row) != step + 1:
            raise InputError(f"row {step} has {len(row)} entries, expected {step + 1}")
    total = 0.0
    for i in range(t - 1):  # exclude the current (newest) task
        history = [accuracy_matrix[step][i] for step in range(i, t)]
        total += forgetting(history)
    return total / (t - 1)


def average_auroc(values) -> float:
    """Arithmetic mean of per-task AUROC values."""
    vals = list(values)
    if not vals:
        raise InputError("average AUROC needs at least one task")
    return float(np.mean(vals))


def accuracy_matrix(records: list[TaskRecord]) -> list[list[float]]:
    """Lower-triangular accuracy matrix from a sequence's records."""
    task_ids = [r.task_id for r in records]
    return [[r.eval_accuracies[task_ids[i]] for i in range(r.step)] for r in records]


def summarize_sequence(records: list[TaskRecord], *, auroc_timing: str = "diagonal") -> SequenceSummary:
    """AF and A-AUROC for one completed sequence.

    auroc_timing "diagonal" averages each task's AUROC at its own learning
    step; "final" averages all tasks' AUROC measured after the last step.
    """
    if not records:
        raise InputError("cannot summarize an empty record list")
    if auroc_timing == "diagonal":
        aurocs = [r.auroc for r in records]
    elif auroc_timing == "final":
        final = records[-1]
        aurocs = [final.eval_aurocs[r.task_id] for r in records]
    else:
        raise InputError(f"unknown auroc_timing {auroc_timing!r}")
    return SequenceSummary(
        sequence_id=records[0].sequence_id,
        average_forgetting=average_forgetting(accuracy_matrix(records)),
        average_auroc=average_auroc(aurocs),
        mode=records[0].mode,
        metric=records[0].metric,
    )


@dataclass
class ComparisonTable:
    """One row per sequence, AF and A-AUROC per mode, best values flagged."""

    modes: list[str]
    rows: list[dict] = field(default_factory=list)

    def header(self) -> list[str]:
        cols = ["sequence_id"]
        for m in self.modes:
            cols += [f"{m}_af", f"{m}_a_auroc"]
        cols += ["best_af_mode", "best_a_auroc_mode"]
        return cols

    def to_csv(self) -> str:
        lines = [",".join(self.header())]
        for row in self.rows:
            cells = [row["sequence_id"]]
            for m in self.modes:
                cells += [repr(row[m]["af"]), repr(row[m]["a_auroc"])]
            cells += [row["best_af_mode"], row["best_a_auroc_mode"]]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def build_comparison(tables: dict[str, list[SequenceSummary]]) -> ComparisonTable:
    """Assemble per-mode sequence summaries into one comparison table.

    All modes must cover the same sequence ids, in any order. Best AF is
    the row minimum, best A-AUROC the row maximum (first mode wins ties).
    """
    if not tables:
        raise InputError("no summaries to compare")
    modes = list(tables)
    id_sets = {m: sorted(s.sequence_id for s in tables[m]) for m in modes}
    reference = id_sets[modes[0]]
    for m, ids in id_sets.items():
        if ids != reference:
            raise InputError(f"sequence ids for mode {m} ({ids}) do not match {reference}")
    by_mode = {m: {s.sequence_id: s for s in tables[m]} for m in modes}
    table = ComparisonTable(modes=modes)
    for sid in reference:
        row: dict = {"sequence_id": sid}
        for m in modes:
            s = by_mode[m][sid]
            row[m] = {"af": s.average_forgetting, "a_auroc": s.average_auroc}
        row["best_af_mode"] = min(modes, key=lambda m: row[m]["af"])
        row["best_a_auroc_mode"] = max(modes, key=lambda m: row[m]["a_auroc"])
        table.rows.append(row)
    return table
