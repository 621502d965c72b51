"""Evaluation metrics walkthrough: character error rate, character n-gram
F-score, detection ROC, and temporal-overlap F1.

Run: python demos/06_evaluation_metrics.py
"""

import numpy as np

from signscribe.metrics import (
    LabeledScore,
    TimedSpan,
    cer,
    chrf,
    op_point,
    roc_auc,
    temporal_f1,
)

print("character error rate (edit distance / truth length):")
for truth, hyp in [
    ("PLEASANT", "PLESANT"),
    ("29 OLD MOUNT PLEASANT", "29 OLD MOUNT PLESANT"),
    ("ABC", "ABC"),
]:
    print(f"  {truth!r} vs {hyp!r}: {cer(truth, hyp):.4f}")

print("\ncharacter n-gram F-score:")
for ref, hyp in [
    ("TOMORROW STORE TRAVEL I", "TOMORROW I TRAVEL STORE"),
    ("BANANA COMMERCIAL SHOW EXAMPLE", "BANANA THOSE BUSINESS MAKE EXAMPLE"),
    ("SAME LINE", "SAME LINE"),
]:
    print(f"  chrf={chrf(ref, hyp):.3f}  {ref!r} vs {hyp!r}")

print("\ndetection scores (true words high, decoys low):")
rng = np.random.default_rng(0)
samples = [LabeledScore(float(s), True) for s in rng.uniform(0.6, 1.0, 40)]
samples += [LabeledScore(float(s), False) for s in rng.uniform(0.0, 0.45, 40)]
precision, recall, f1 = op_point(samples, 0.3)
print(f"  AUC {roc_auc(samples):.3f}; at threshold 0.3: "
      f"precision {precision:.3f}, recall {recall:.3f}, F1 {f1:.3f}")

print("\ntemporal overlap F1 (greedy one-to-one matching):")
pred = [TimedSpan("p1", 10, 25), TimedSpan("p2", 40, 55), TimedSpan("p3", 80, 90)]
truth = [TimedSpan("t1", 12, 30), TimedSpan("t2", 50, 60)]
precision, recall, f1 = temporal_f1(pred, truth)
print(f"  precision {precision:.3f}, recall {recall:.3f}, F1 {f1:.3f}")
