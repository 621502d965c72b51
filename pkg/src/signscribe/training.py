"""Shared training plumbing: stratified splits and epoch logging."""

from __future__ import annotations

from typing import Sequence

import numpy as np


class CorpusError(ValueError):
    pass


def stratified_split(
    samples: Sequence,
    rng: np.random.Generator,
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15),
    signer_of=lambda s: s.signer_id,
) -> tuple[list, list, list]:
    """Split samples train/val/test with every signer represented in each split.

    Each signer's samples are shuffled and cut at the requested fractions,
    so splits are proportional per signer. Raises :class:`CorpusError` when
    any signer has too few samples to land one in every split.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise CorpusError("split fractions must sum to 1")
    by_signer: dict[str, list] = {}
    for s in samples:
        by_signer.setdefault(signer_of(s), []).append(s)
    if not by_signer:
        raise CorpusError("empty corpus")
    train: list = []
    val: list = []
    test: list = []
    for signer in sorted(by_signer):
        group = by_signer[signer]
        if len(group) < 3:
            raise CorpusError(
                f"signer {signer!r} has {len(group)} samples; need >= 3 to stratify"
            )
        order = rng.permutation(len(group))
        n_train = max(1, round(fractions[0] * len(group)))
        n_val = max(1, round(fractions[1] * len(group)))
        n_train = min(n_train, len(group) - 2)
        n_val = min(n_val, len(group) - n_train - 1)
        for pos, idx in enumerate(order):
            if pos < n_train:
                train.append(group[idx])
            elif pos < n_train + n_val:
                val.append(group[idx])
            else:
                test.append(group[idx])
    return train, val, test
