"""Compliance classification, best-path selection, confusion scoring."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latsim.decision import (
    ComplianceRule,
    ComplianceVerdict,
    TieBreak,
    classify,
    confusion,
    ground_truth,
    select_best_path,
)
from latsim.sampling import SampleSet, collect_samples, empirical_fraction_below
from latsim.seeding import mix_seed, rng_for

RULE = ComplianceRule()  # 82 us, 99%


def _set(delays, pid="p"):
    return SampleSet(pid, tuple(float(d) for d in delays), seed=0)


# ---------------------------------------------------------------------------
# classify


def test_classify_all_below():
    v = classify(_set([70, 75, 80, 81, 81.9]), RULE)
    assert v.empirical_fraction == 1.0
    assert v.compliant


def test_classify_99_of_100_is_compliant():
    v = classify(_set([70.0] * 99 + [90.0]), RULE)
    assert v.empirical_fraction == 0.99
    assert v.compliant  # inclusive comparison at the boundary


def test_classify_98_of_100_is_not():
    v = classify(_set([70.0] * 98 + [90.0, 91.0]), RULE)
    assert v.empirical_fraction == 0.98
    assert not v.compliant


def test_rule_validation():
    with pytest.raises(ValueError):
        ComplianceRule(threshold_us=0.0)
    with pytest.raises(ValueError):
        ComplianceRule(required_fraction=1.0)


# ---------------------------------------------------------------------------
# ground truth


def test_ground_truth_calibrated_pair(blue_model, green_model):
    assert ground_truth(green_model, RULE) is True   # 0.9958 >= 0.99
    assert ground_truth(blue_model, RULE) is False   # 0.9380 <  0.99
    loose = ComplianceRule(threshold_us=82.0, required_fraction=1e-12)
    assert ground_truth(blue_model, loose) is True
    assert ground_truth(green_model, loose) is True


# ---------------------------------------------------------------------------
# select_best_path


def test_select_higher_fraction_wins():
    sets = [_set([80, 80, 90, 90, 90]), _set([70, 71, 72, 73, 74])]
    assert select_best_path(sets, RULE) == 1


def test_select_tie_lowest_mean():
    sets = [_set([60, 60, 60]), _set([70, 70, 70])]
    assert select_best_path(sets, RULE, TieBreak.LOWEST_MEAN) == 0


def test_select_tie_lowest_max():
    sets = [_set([10, 50, 81]), _set([60, 60, 79])]
    assert select_best_path(sets, RULE, TieBreak.LOWEST_MAX) == 1


def test_select_tie_first():
    sets = [_set([70, 70]), _set([60, 60])]
    assert select_best_path(sets, RULE, TieBreak.FIRST) == 0


def test_select_tie_random_is_seeded():
    sets = [_set([70, 70]), _set([60, 60])]
    with pytest.raises(ValueError):
        select_best_path(sets, RULE, TieBreak.RANDOM)
    picks_a = [select_best_path(sets, RULE, TieBreak.RANDOM,
                                rng=np.random.default_rng(i)) for i in range(40)]
    picks_b = [select_best_path(sets, RULE, TieBreak.RANDOM,
                                rng=np.random.default_rng(i)) for i in range(40)]
    assert picks_a == picks_b
    assert set(picks_a) == {0, 1}  # both sides show up under varying seeds


def test_select_relabel_invariance():
    a = _set([70, 90, 90])
    b = _set([70, 71, 90])
    c = _set([70, 71, 72])
    order1 = [a, b, c]
    order2 = [c, a, b]
    i1 = select_best_path(order1, RULE)
    i2 = select_best_path(order2, RULE)
    assert order1[i1] is order2[i2]


def test_adding_high_sample_preserves_fraction_ordering():
    rng = np.random.default_rng(8)
    for _ in range(20):
        sets = [
            _set(rng.uniform(40, 120, size=6)),
            _set(rng.uniform(40, 120, size=6)),
            _set(rng.uniform(40, 120, size=6)),
        ]
        grown = [_set(list(s.delays_us) + [500.0]) for s in sets]
        before = [empirical_fraction_below(s, RULE.threshold_us) for s in sets]
        after = [empirical_fraction_below(s, RULE.threshold_us) for s in grown]
        for i in range(3):
            for j in range(3):
                assert (before[i] < before[j]) == (after[i] < after[j])
                assert (before[i] == before[j]) == (after[i] == after[j])


def test_select_converges_to_truth(blue_model, green_model):
    # with n0 = 10^4 per set, the truly better path wins essentially always
    n0 = 10**4
    wins = 0
    trials = 2000
    for trial in range(trials):
        sets = [
            collect_samples(blue_model, n0, mix_seed(55, "conv", 0, trial)),
            collect_samples(green_model, n0, mix_seed(55, "conv", 1, trial)),
        ]
        if select_best_path(sets, RULE, TieBreak.LOWEST_MEAN) == 1:
            wins += 1
    assert wins / trials >= 0.999


# ---------------------------------------------------------------------------
# confusion


def _verdicts(decisions):
    return [ComplianceVerdict(f"pair{i}", 1.0 if d else 0.0, d)
            for i, d in enumerate(decisions)]


def test_confusion_mixed():
    report = confusion(_verdicts([True, True]), [False, True])
    assert (report.fp_count, report.fn_count, report.tp_count, report.tn_count) == (1, 0, 1, 0)
    assert report.records[0].error_class == "FP"
    assert report.records[1].error_class == "TP"


def test_confusion_perfect():
    report = confusion(_verdicts([True, False, True]), [True, False, True])
    assert report.fp_count == 0 and report.fn_count == 0


def test_confusion_all_misses():
    report = confusion(_verdicts([False] * 5), [True] * 5)
    assert report.fn_count == 5


def test_confusion_length_mismatch():
    with pytest.raises(ValueError):
        confusion(_verdicts([True]), [True, False])


@settings(max_examples=100)
@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40))
def test_confusion_counts_sum_to_total(pairs):
    decisions = [d for d, _ in pairs]
    truths = [t for _, t in pairs]
    report = confusion(_verdicts(decisions), truths)
    total = report.fp_count + report.fn_count + report.tp_count + report.tn_count
    assert total == len(pairs)


def test_confusion_serialization():
    from latsim.decision import confusion_summary_line, confusion_to_csv

    report = confusion(_verdicts([True, False, True]), [False, False, True])
    lines = confusion_to_csv(report).strip().splitlines()
    assert lines[0] == "pair_id,truth,decision,class"
    assert lines[1] == "pair0,false,true,FP"
    assert lines[2] == "pair1,false,false,TN"
    assert lines[3] == "pair2,true,true,TP"
    assert confusion_summary_line(report) == "fp=1 fn=0 tp=1 tn=1"
