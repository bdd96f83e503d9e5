"""Scoring against gold labels and strategy comparison tables.

Accuracy counts Undetermined as incorrect, so accuracy and coverage stay
independent axes. Exact localization requires the level and the full index
set to match; partial overlaps are errors.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from commentscope.config import Config
from commentscope.corpus import Comment, GoldLabel, SegmentedArticle
from commentscope.judge import Judge
from commentscope.labels import UNDETERMINED, LocationLevel
from commentscope.pipeline import ClassifiedComment, Strategy, run_pipeline
from commentscope.similarity import EmbeddingProvider


class EvaluationError(ValueError):
    pass


@dataclass
class EvalReport:
    strategy: str
    n: int
    semantic_accuracy: float
    exact_localization_accuracy: float
    semantic_coverage: float
    location_coverage: float
    avg_time_semantic: float
    avg_time_location: float
    confusion: dict[tuple[str, str], int]
    timing_note: str = ""


def _check_alignment(preds: Sequence[ClassifiedComment], golds: Mapping[str, GoldLabel]) -> None:
    pred_ids = [p.id for p in preds]
    if len(pred_ids) != len(set(pred_ids)):
        raise EvaluationError("duplicate prediction ids")
    if set(pred_ids) != set(golds):
        raise EvaluationError("prediction/gold id mismatch")


def semantic_accuracy(preds: Sequence[ClassifiedComment], golds: Mapping[str, GoldLabel]) -> float:
    """Fraction of gold-labeled comments classified correctly (Undetermined = wrong)."""
    _check_alignment(preds, golds)
    if not preds:
        raise EvaluationError("empty prediction set")
    correct = sum(1 for p in preds if p.semantic == golds[p.id].semantic)
    return correct / len(preds)


def location_matches(pred, gold: GoldLabel) -> bool:
    if pred == UNDETERMINED:
        return False
    level, indices = pred
    if level is not gold.level:
        return False
    if level is LocationLevel.GLOBAL:
        return True
    return frozenset(indices) == gold.indices


def exact_localization_accuracy(
    preds: Sequence[ClassifiedComment], golds: Mapping[str, GoldLabel]
) -> float:
    """Level and full index set must match exactly; partial overlap is an error."""
    _check_alignment(preds, golds)
    if not preds:
        raise EvaluationError("empty prediction set")
    correct = sum(1 for p in preds if location_matches(p.location, golds[p.id]))
    return correct / len(preds)


def coverage_rate(preds: Sequence[ClassifiedComment], axis: str = "semantic") -> float:
    """Percent of comments with a concrete (non-Undetermined) output on an axis."""
    if not preds:
        raise EvaluationError("empty prediction set")
    if axis == "semantic":
        undet = sum(1 for p in preds if p.semantic_undetermined)
    elif axis == "location":
        undet = sum(1 for p in preds if p.location_undetermined)
    else:
        raise EvaluationError(f"unknown axis: {axis}")
    return 100.0 * (len(preds) - undet) / len(preds)


def semantic_confusion(
    preds: Sequence[ClassifiedComment], golds: Mapping[str, GoldLabel]
) -> dict[tuple[str, str], int]:
    _check_alignment(preds, golds)
    counts: dict[tuple[str, str], int] = {}
    for p in preds:
        gold = golds[p.id].semantic.value
        pred = p.semantic if isinstance(p.semantic, str) else p.semantic.value
        counts[(gold, pred)] = counts.get((gold, pred), 0) + 1
    return counts


def build_report(
    strategy: str,
    preds: Sequence[ClassifiedComment],
    golds: Mapping[str, GoldLabel],
    timing_note: str = "",
) -> EvalReport:
    return EvalReport(
        strategy=strategy,
        n=len(preds),
        semantic_accuracy=semantic_accuracy(preds, golds),
        exact_localization_accuracy=exact_localization_accuracy(preds, golds),
        semantic_coverage=coverage_rate(preds, "semantic"),
        location_coverage=coverage_rate(preds, "location"),
        avg_time_semantic=sum(p.latency_semantic for p in preds) / len(preds),
        avg_time_location=sum(p.latency_location for p in preds) / len(preds),
        confusion=semantic_confusion(preds, golds),
        timing_note=timing_note,
    )


def gold_map(comments: Sequence[Comment]) -> dict[str, GoldLabel]:
    golds = {}
    for c in comments:
        if c.gold is None:
            raise EvaluationError(f"comment {c.id} has no gold label")
        golds[c.id] = c.gold
    return golds


def compare_strategies(
    article: SegmentedArticle,
    comments: Sequence[Comment],
    config: Config,
    embedder: Optional[EmbeddingProvider] = None,
    judge_factory=None,
) -> list[EvalReport]:
    """Run all three strategies on a gold-labeled corpus and score each.

    `judge_factory(strategy) -> Judge | None` lets callers supply replay
    judges; by default providers are built fresh from the config per strategy
    so call counters stay isolated.
    """
    golds = gold_map(comments)
    timing_note = "replay (not meaningful)" if config.chat_mode == "replay" else ""
    reports = []
    for strategy in (Strategy.RULE_ONLY, Strategy.LLM_ONLY, Strategy.HYBRID):
        judge = judge_factory(strategy) if judge_factory else None
        preds = run_pipeline(article, comments, config, strategy, embedder=embedder, judge=judge)
        note = "" if strategy is Strategy.RULE_ONLY else timing_note
        reports.append(build_report(strategy.value, preds, golds, timing_note=note))
    return reports


def render_table(reports: Sequence[EvalReport]) -> str:
    header = (
        f"{'Strategy':<12} {'N':>4} {'SemAcc':>7} {'LocAcc':>7} "
        f"{'SemCov%':>8} {'LocCov%':>8} {'SemTime(s)':>11} {'LocTime(s)':>11}"
    )
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(
            f"{r.strategy:<12} {r.n:>4} {r.semantic_accuracy:>7.3f} "
            f"{r.exact_localization_accuracy:>7.3f} {r.semantic_coverage:>8.1f} "
            f"{r.location_coverage:>8.1f} {r.avg_time_semantic:>11.4f} {r.avg_time_location:>11.4f}"
            + (f"  [{r.timing_note}]" if r.timing_note else "")
        )
    return "\n".join(lines) + "\n"


def reports_to_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        [
            "strategy", "n", "semantic_accuracy", "exact_localization_accuracy",
            "semantic_coverage_pct", "location_coverage_pct",
            "avg_time_semantic_s", "avg_time_location_s", "timing_note",
        ]
    )
    for r in reports:
        writer.writerow(
            [
                r.strategy, r.n, f"{r.semantic_accuracy:.6f}",
                f"{r.exact_localization_accuracy:.6f}", f"{r.semantic_coverage:.2f}",
                f"{r.location_coverage:.2f}", f"{r.avg_time_semantic:.6f}",
                f"{r.avg_time_location:.6f}", r.timing_note,
            ]
        )
    return buf.getvalue()


def confusion_to_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["strategy", "gold", "predicted", "count"])
    for r in reports:
        for (gold, pred), count in sorted(r.confusion.items()):
            writer.writerow([r.strategy, gold, pred, count])
    return buf.getvalue()
