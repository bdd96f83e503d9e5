import random

import pytest

from commentscope.corpus import GoldLabel, build_comment
from commentscope.evaluator import (
    EvaluationError,
    build_report,
    compare_strategies,
    confusion_to_csv,
    coverage_rate,
    exact_localization_accuracy,
    gold_map,
    location_matches,
    render_table,
    reports_to_csv,
    semantic_accuracy,
)
from commentscope.labels import UNDETERMINED, LocationLevel, SemanticLabel
from commentscope.pipeline import ClassifiedComment

LABELS = sorted(SemanticLabel, key=lambda l: l.value)
LEVELS = sorted(LocationLevel, key=lambda l: l.value)


def pred(cid, semantic, location):
    return ClassifiedComment(
        id=cid, semantic=semantic, location=location,
        gamma_semantic=0.9, gamma_location=0.9,
        provenance_semantic="llm_inferred", provenance_location="llm_inferred",
        latency_semantic=0.01, latency_location=0.02,
    )


def random_case(rng, n):
    """Random aligned pred/gold sets over a 12-sentence, 4-paragraph shape."""
    preds, golds = [], {}
    for i in range(n):
        cid = f"c{i}"
        gold_level = rng.choice(LEVELS)
        gold_indices = (
            frozenset()
            if gold_level is LocationLevel.GLOBAL
            else frozenset(rng.sample(range(1, 13), rng.randint(1, 3)))
        )
        golds[cid] = GoldLabel(
            semantic=rng.choice(LABELS), level=gold_level, indices=gold_indices
        )
        if rng.random() < 0.2:
            semantic = UNDETERMINED
        else:
            semantic = rng.choice(LABELS)
        if rng.random() < 0.2:
            location = UNDETERMINED
        else:
            level = rng.choice(LEVELS)
            indices = (
                frozenset()
                if level is LocationLevel.GLOBAL
                else frozenset(rng.sample(range(1, 13), rng.randint(1, 3)))
            )
            location = (level, indices)
        preds.append(pred(cid, semantic, location))
    return preds, golds


def oracle_metrics(preds, golds):
    """Independent brute-force comparator (item-by-item, no shared helpers)."""
    n = len(preds)
    sem_correct = loc_correct = sem_undet = loc_undet = 0
    for p in preds:
        g = golds[p.id]
        if p.semantic == UNDETERMINED:
            sem_undet += 1
        elif p.semantic == g.semantic:
            sem_correct += 1
        if p.location == UNDETERMINED:
            loc_undet += 1
        else:
            level, indices = p.location
            if level == g.level and (
                level == LocationLevel.GLOBAL or set(indices) == set(g.indices)
            ):
                loc_correct += 1
    return (
        sem_correct / n,
        loc_correct / n,
        100.0 * (n - sem_undet) / n,
        100.0 * (n - loc_undet) / n,
    )


class TestSemanticAccuracy:
    def test_nine_of_ten(self):
        golds = {f"c{i}": GoldLabel(SemanticLabel.STATEMENT, LocationLevel.GLOBAL, frozenset()) for i in range(10)}
        preds = [pred(f"c{i}", SemanticLabel.STATEMENT, UNDETERMINED) for i in range(9)]
        preds.append(pred("c9", SemanticLabel.QUESTION, UNDETERMINED))
        assert semantic_accuracy(preds, golds) == pytest.approx(0.9)

    def test_all_undetermined_is_zero(self):
        golds = {"c0": GoldLabel(SemanticLabel.QUESTION, LocationLevel.GLOBAL, frozenset())}
        assert semantic_accuracy([pred("c0", UNDETERMINED, UNDETERMINED)], golds) == 0.0

    def test_id_mismatch_rejected(self):
        golds = {"c0": GoldLabel(SemanticLabel.QUESTION, LocationLevel.GLOBAL, frozenset())}
        with pytest.raises(EvaluationError):
            semantic_accuracy([pred("cX", SemanticLabel.QUESTION, UNDETERMINED)], golds)

    def test_empty_rejected(self):
        with pytest.raises(EvaluationError):
            semantic_accuracy([], {})


class TestExactLocalization:
    GOLD_35 = GoldLabel(SemanticLabel.STATEMENT, LocationLevel.SENTENCE, frozenset({3, 5}))

    def test_order_free_index_sets(self):
        assert location_matches((LocationLevel.SENTENCE, frozenset({5, 3})), self.GOLD_35)

    def test_partial_overlap_is_error(self):
        assert not location_matches((LocationLevel.SENTENCE, frozenset({3})), self.GOLD_35)

    def test_global_level_only(self):
        gold = GoldLabel(SemanticLabel.STATEMENT, LocationLevel.GLOBAL, frozenset())
        assert location_matches((LocationLevel.GLOBAL, frozenset()), gold)

    def test_level_mismatch(self):
        assert not location_matches((LocationLevel.PARAGRAPH, frozenset({3, 5})), self.GOLD_35)

    def test_undetermined_is_error(self):
        assert not location_matches(UNDETERMINED, self.GOLD_35)


class TestCoverage:
    def test_half(self):
        preds = [
            pred("c0", SemanticLabel.QUESTION, UNDETERMINED),
            pred("c1", UNDETERMINED, UNDETERMINED),
            pred("c2", SemanticLabel.QUESTION, UNDETERMINED),
            pred("c3", UNDETERMINED, UNDETERMINED),
        ]
        assert coverage_rate(preds, "semantic") == 50.0

    def test_full(self):
        preds = [pred("c0", SemanticLabel.QUESTION, (LocationLevel.GLOBAL, frozenset()))]
        assert coverage_rate(preds, "semantic") == 100.0
        assert coverage_rate(preds, "location") == 100.0

    def test_unknown_axis(self):
        with pytest.raises(EvaluationError):
            coverage_rate([pred("c0", UNDETERMINED, UNDETERMINED)], "both")


class TestOracleEquivalence:
    def test_two_hundred_random_sets(self):
        rng = random.Random(20260824)
        for case in range(200):
            preds, golds = random_case(rng, rng.randint(1, 40))
            sem, loc, sem_cov, loc_cov = oracle_metrics(preds, golds)
            assert semantic_accuracy(preds, golds) == sem
            assert exact_localization_accuracy(preds, golds) == loc
            assert coverage_rate(preds, "semantic") == sem_cov
            assert coverage_rate(preds, "location") == loc_cov

    def test_permutation_invariance(self):
        rng = random.Random(7)
        preds, golds = random_case(rng, 25)
        shuffled = list(preds)
        rng.shuffle(shuffled)
        assert semantic_accuracy(preds, golds) == semantic_accuracy(shuffled, golds)
        assert exact_localization_accuracy(preds, golds) == exact_localization_accuracy(
            shuffled, golds
        )


class TestReports:
    def test_confusion_sums_to_n(self):
        rng = random.Random(11)
        preds, golds = random_case(rng, 30)
        report = build_report("test", preds, golds)
        assert sum(report.confusion.values()) == 30

    def test_compare_strategies_on_fixture(self, article, comments, replay_config):
        reports = compare_strategies(article, comments, replay_config)
        assert [r.strategy for r in reports] == ["rule-only", "llm-only", "hybrid"]
        rule, _, hybrid = reports
        assert hybrid.semantic_coverage >= rule.semantic_coverage
        assert hybrid.location_coverage >= rule.location_coverage
        assert hybrid.semantic_accuracy >= rule.semantic_accuracy
        assert rule.timing_note == ""
        assert hybrid.timing_note == "replay (not meaningful)"

    def test_single_comment_corpus(self, article, comments, replay_config):
        reports = compare_strategies(article, [comments[0]], replay_config)
        assert all(r.n == 1 for r in reports)
        render_table(reports)

    def test_repeat_runs_identical_except_timing(self, article, comments, replay_config):
        a = compare_strategies(article, comments, replay_config)
        b = compare_strategies(article, comments, replay_config)
        for ra, rb in zip(a, b):
            assert (ra.strategy, ra.n, ra.semantic_accuracy, ra.exact_localization_accuracy,
                    ra.semantic_coverage, ra.location_coverage, ra.confusion) == (
                rb.strategy, rb.n, rb.semantic_accuracy, rb.exact_localization_accuracy,
                rb.semantic_coverage, rb.location_coverage, rb.confusion)

    def test_missing_gold_rejected(self):
        with pytest.raises(EvaluationError, match="no gold label"):
            gold_map([build_comment("c1", "text")])

    def test_table_and_csv_render(self, article, comments, replay_config):
        reports = compare_strategies(article, comments, replay_config)
        table = render_table(reports)
        assert table.count("\n") == 5  # header + rule + 3 rows
        csv_text = reports_to_csv(reports)
        assert csv_text.splitlines()[0].startswith("strategy,")
        assert len(csv_text.splitlines()) == 4
        confusion = confusion_to_csv(reports)
        assert confusion.splitlines()[0] == "strategy,gold,predicted,count"
