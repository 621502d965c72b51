"""Fingerspelling recognizer: per-frame character scores over dominant-hand
features, greedy recognition, and word-level forced alignment.

The same model backs two uses: context-free recognition of pure
fingerspelling clips, and alignment of candidate words against mixed
signing video, where each word gets a mean character score and a frame
interval spanning its first to last letter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ctc as ctc_mod
from . import nn
from .ctc import Alphabet, FrameScores, aggregate_words, forced_align, greedy_decode
from .gloss import TokenizationError, to_ctc_tokens
from .pose import FINGERSPELLING_FEATURES, PoseSequence, build_features, prepare_sequence
from .training import CorpusError, stratified_split


@dataclass
class FingerspellingModel:
    tcn: nn.Tcn
    alphabet: Alphabet
    history: list = field(default_factory=list)

    @property
    def config(self) -> nn.TcnConfig:
        return self.tcn.config

    @property
    def fingerprint(self) -> str:
        return self.tcn.fingerprint


@dataclass(frozen=True)
class WordDetection:
    word: str
    score: float
    start_frame: int
    end_frame: int  # inclusive

    @property
    def fingerspelled_region(self) -> tuple[int, int]:
        """Interval from the first to the last letter detection."""
        return (self.start_frame, self.end_frame)


def frame_scores(model: FingerspellingModel, poses: PoseSequence) -> FrameScores:
    """Softmax character probabilities per frame for a pose sequence."""
    prepared, _ = prepare_sequence(poses, FINGERSPELLING_FEATURES)
    feats = build_features(prepared, FINGERSPELLING_FEATURES)
    logits = model.tcn.forward(feats.rows)
    return FrameScores(probs=nn.softmax(logits.data), kind="softmax", fps=poses.fps)


def recognize(model: FingerspellingModel, poses: PoseSequence) -> str:
    """Context-free greedy decode of a fingerspelling clip."""
    return greedy_decode(frame_scores(model, poses), model.alphabet)


def normalize_word(word: str, alphabet: Alphabet, on_unknown: str = "error") -> str:
    """Case-fold a word into the recognizer alphabet.

    ``on_unknown`` is "error" (raise TokenizationError) or "strip" (drop
    characters outside the alphabet).
    """
    out = []
    for ch in word.upper():
        try:
            alphabet.index(ch)
        except KeyError:
            if on_unknown == "strip":
                continue
            raise TokenizationError(ch, word) from None
        out.append(ch)
    return "".join(out)


def align_words_scores(
    scores: FrameScores, words: list[str], alphabet: Alphabet, on_unknown: str = "error"
) -> list[WordDetection]:
    """Force-align a word list against precomputed character scores."""
    norm = [normalize_word(w, alphabet, on_unknown) for w in words]
    if any(not w for w in norm):
        empty = words[norm.index("")]
        raise TokenizationError("", empty)
    tokens = to_ctc_tokens(norm, alphabet)
    chars = forced_align(scores, tokens, alphabet)
    word_units = aggregate_words(chars).units
    return [
        WordDetection(
            word=w,
            score=unit.score,
            start_frame=unit.start_frame,
            end_frame=unit.end_frame,
        )
        for w, unit in zip(norm, word_units)
    ]


def align_words(
    model: FingerspellingModel,
    poses: PoseSequence,
    words: list[str],
    on_unknown: str = "error",
) -> list[WordDetection]:
    """Detect and time-stamp candidate fingerspelled words in a video."""
    return align_words_scores(frame_scores(model, poses), words, model.alphabet, on_unknown)


# --- training ---------------------------------------------------------------


def _sample_features(sample) -> np.ndarray:
    prepared, _ = prepare_sequence(sample.poses, FINGERSPELLING_FEATURES)
    return build_features(prepared, FINGERSPELLING_FEATURES).rows


def _sample_target(sample, alphabet: Alphabet) -> list[int]:
    return to_ctc_tokens(list(sample.words), alphabet)


def per_character_loss(
    model: FingerspellingModel, sample, feats: np.ndarray | None = None
) -> float:
    """CTC loss normalized by the number of spelled characters."""
    if feats is None:
        feats = _sample_features(sample)
    target = _sample_target(sample, model.alphabet)
    scores = FrameScores(
        probs=nn.softmax(model.tcn.forward(feats).data), kind="softmax", fps=sample.poses.fps
    )
    loss, _ = ctc_mod.ctc_loss(scores, target)
    n_chars = sum(len(w) for w in sample.words)
    return loss / max(1, n_chars)


def filter_training_set(dataset: list, model: FingerspellingModel, drop_fraction: float = 0.05) -> list:
    """Second-pass data filter: drop the highest-loss fraction of samples.

    Samples are ranked by per-character CTC loss under the first-pass
    model; ties are broken by sample id so the result is deterministic.
    """
    if not 0.0 <= drop_fraction < 0.5:
        raise ValueError("drop_fraction must lie in [0, 0.5)")
    n_drop = int(drop_fraction * len(dataset))
    if n_drop == 0:
        return list(dataset)
    losses = {s.sample_id: per_character_loss(model, s) for s in dataset}
    ranked = sorted(dataset, key=lambda s: s.sample_id)
    ranked.sort(key=lambda s: losses[s.sample_id], reverse=True)
    dropped = {id(s) for s in ranked[:n_drop]}
    return [s for s in dataset if id(s) not in dropped]


def train_toy(
    corpus: list,
    alphabet: Alphabet,
    epochs: int = 40,
    seed: int = 0,
    channels: int = 48,
    lr: float = 7e-4,
    weight_decay: float = 1e-5,
    min_lr: float = 1e-6,
    patience: int = 10,
    grad_clip: float = 5.0,
) -> FingerspellingModel:
    """Train the character recognizer on a synthetic corpus.

    Uses a 70/15/15 train/val/test split stratified by signer, AdamW with
    cosine annealing, and early stopping on validation loss; returns the
    best-validation weights. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    train, val, _test = stratified_split(corpus, rng)
    if not train or not val:
        raise CorpusError("corpus too small to stratify")

    config = nn.fingerspelling_config(
        input_dim=2 * 21, output_classes=alphabet.size, channels=channels
    )
    tcn = nn.Tcn.init(config, rng)
    model = FingerspellingModel(tcn=tcn, alphabet=alphabet)
    opt = nn.AdamW(tcn.parameters(), lr=lr, weight_decay=weight_decay)

    feats = {s.sample_id: _sample_features(s) for s in corpus}
    targets = {s.sample_id: _sample_target(s, alphabet) for s in corpus}

    def eval_split(samples) -> float:
        losses = []
        for s in samples:
            probs = nn.softmax(tcn.forward(feats[s.sample_id]).data)
            loss, _ = ctc_mod.ctc_loss(
                FrameScores(probs=probs, kind="softmax"), targets[s.sample_id]
            )
            losses.append(loss / max(1, sum(len(w) for w in s.words)))
        return float(np.mean(losses))

    total_steps = max(1, epochs * len(train))
    step = 0
    best_val = np.inf
    best_state = {k: v.copy() for k, v in tcn.state_arrays().items()}
    best_epoch = -1
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        epoch_loss = 0.0
        for idx in order:
            s = train[idx]
            opt.lr = nn.cosine_lr(step, total_steps, lr, min_lr)
            logits = tcn.forward(feats[s.sample_id])
            probs = nn.softmax(logits.data)
            loss_val, grad = ctc_mod.ctc_loss(
                FrameScores(probs=probs, kind="softmax"), targets[s.sample_id]
            )
            loss = nn.external_loss(logits, loss_val, grad)
            opt.zero_grad()
            loss.backward()
            nn.clip_grad_norm(opt.params, grad_clip)
            opt.step()
            step += 1
            epoch_loss += loss_val
        val_loss = eval_split(val)
        model.history.append(
            {
                "epoch": epoch,
                "train_loss": epoch_loss / len(train),
                "val_loss": val_loss,
                "lr": opt.lr,
            }
        )
        if val_loss < best_val:
            best_val = val_loss
            best_state = {k: v.copy() for k, v in tcn.state_arrays().items()}
            best_epoch = epoch
        elif epoch - best_epoch >= patience:
            break
    model.tcn = nn.Tcn.from_arrays(config, best_state)
    return model


# --- persistence ------------------------------------------------------------


def save_fingerspelling_model(directory: str | Path, model: FingerspellingModel) -> None:
    weights = nn.ModelWeights.from_float64(
        model.config,
        model.tcn.state_arrays(),
        extra={"model_kind": "fingerspelling", "alphabet": model.alphabet.to_dict()},
    )
    nn.save_weights(directory, weights)


def load_fingerspelling_model(directory: str | Path) -> FingerspellingModel:
    weights = nn.load_weights(directory)
    if weights.extra.get("model_kind") != "fingerspelling":
        raise nn.WeightsError(f"{directory} does not hold a fingerspelling model")
    alphabet = Alphabet.from_dict(weights.extra["alphabet"])
    tcn = nn.Tcn.from_arrays(weights.config, weights.as_float64())
    return FingerspellingModel(tcn=tcn, alphabet=alphabet)
