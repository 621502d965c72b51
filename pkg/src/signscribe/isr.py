"""Isolated sign recognizer: per-frame multi-label sign scores plus ANY and
NULL auxiliary classes, whole-clip classification, and in-context gloss
alignment between fingerspelling anchors.

The model runs two branches over different channel groups (body + both
hands, and body + dominant hand only) and merges them with an elementwise
max over logits, which suppresses spurious cross-hand correlations on
one-handed signs. Inputs are mirrored upstream so the dominant hand is
always presented as the right hand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .ctc import FrameScores
from .fingerspelling import WordDetection
from .gloss import GlossSequence, GlossToken, TokenKind
from .pose import (
    ISR_ONE_HAND_FEATURES,
    ISR_TWO_HAND_FEATURES,
    PoseSequence,
    build_features,
    prepare_sequence,
)
from .stemming import stem_fixpoint
from .training import CorpusError, stratified_split

ANY_CLASS = "ANY"
NULL_CLASS = "NULL"
_TRACK_EPS = 1e-12


@dataclass(frozen=True)
class SignVocabulary:
    """Ordered gloss names plus the reserved ANY and NULL classes.

    Lookup is case-insensitive and applies the same Porter stemming used
    for annotation normalization, so DAYS resolves to a DAY entry.
    """

    glosses: tuple[str, ...]

    def __post_init__(self):
        upper = [g.upper() for g in self.glosses]
        if len(set(upper)) != len(upper):
            raise ValueError("vocabulary glosses must be unique")
        if ANY_CLASS in upper or NULL_CLASS in upper:
            raise ValueError("ANY and NULL are reserved class names")
        stems: dict[str, int] = {}
        for i, g in enumerate(upper):
            stems.setdefault(stem_fixpoint(g.lower()), i)
        object.__setattr__(self, "_stems", stems)

    @property
    def size(self) -> int:
        """Model head width: glosses plus ANY and NULL."""
        return len(self.glosses) + 2

    @property
    def any_index(self) -> int:
        return len(self.glosses)

    @property
    def null_index(self) -> int:
        return len(self.glosses) + 1

    def class_index(self, gloss_text: str) -> int | None:
        return self._stems.get(stem_fixpoint(gloss_text.lower()))

    def name(self, index: int) -> str:
        if index == self.any_index:
            return ANY_CLASS
        if index == self.null_index:
            return NULL_CLASS
        return self.glosses[index]


def save_vocabulary(path: str | Path, vocab: SignVocabulary) -> None:
    Path(path).write_text(json.dumps(list(vocab.glosses), indent=2), encoding="utf-8")


def load_vocabulary(path: str | Path) -> SignVocabulary:
    return SignVocabulary(glosses=tuple(json.loads(Path(path).read_text(encoding="utf-8"))))


@dataclass
class IsrModel:
    vocabulary: SignVocabulary
    two_hand: nn.Tcn  # body + dominant + non-dominant
    one_hand: nn.Tcn  # body + dominant
    history: list = field(default_factory=list)

    @property
    def fingerprints(self) -> dict[str, str]:
        return {"two_hand": self.two_hand.fingerprint, "one_hand": self.one_hand.fingerprint}


def _branch_logits(model: IsrModel, prepared: PoseSequence) -> tuple[nn.Tensor, nn.Tensor]:
    two = build_features(prepared, ISR_TWO_HAND_FEATURES)
    one = build_features(prepared, ISR_ONE_HAND_FEATURES)
    return model.two_hand.forward(two.rows), model.one_hand.forward(one.rows)


def isr_scores(model: IsrModel, poses: PoseSequence) -> FrameScores:
    """Per-frame sigmoid scores over the vocabulary plus ANY and NULL.

    The two branches' logits are merged with an elementwise max before the
    sigmoid; left-dominant input is mirrored first, so a video and its
    mirrored twin produce identical scores.
    """
    prepared, _ = prepare_sequence(poses, ISR_TWO_HAND_FEATURES)
    logits_two, logits_one = _branch_logits(model, prepared)
    merged = np.maximum(logits_two.data, logits_one.data)
    return FrameScores(probs=nn.sigmoid(merged), kind="sigmoid", fps=poses.fps)


def classify(model: IsrModel, poses: PoseSequence) -> str:
    """Max-pool scores across time and return the best gloss class.

    ANY and NULL are excluded: ANY is not a sign and classification must
    always answer with a vocabulary gloss.
    """
    scores = isr_scores(model, poses)
    pooled = scores.probs.max(axis=0)
    best = int(np.argmax(pooled[: len(model.vocabulary.glosses)]))
    return model.vocabulary.glosses[best]


# --- gloss alignment between fingerspelling anchors -------------------------


@dataclass(frozen=True)
class GlossDetection:
    gloss: str
    in_vocabulary: bool
    score: float
    frame: int  # peak frame
    interval: tuple[int, int]  # inclusive


@dataclass(frozen=True)
class AlignEntry:
    """One token awaiting alignment; ``force_any`` scores it on the ANY track
    regardless of vocabulary membership (used for demoted fingerspelling)."""

    token_index: int
    token: GlossToken
    force_any: bool = False


def _track_for(entry: AlignEntry, vocab: SignVocabulary) -> tuple[int, bool]:
    """Class track index and in-vocabulary flag for an alignment entry."""
    if entry.force_any or entry.token.kind is not TokenKind.GLOSS:
        return vocab.any_index, False
    idx = vocab.class_index(entry.token.text)
    if idx is None:
        return vocab.any_index, False
    return idx, True


def _segment_dp(
    tracks: np.ndarray, null_track: np.ndarray, min_dur: int
) -> tuple[float, list[tuple[int, int]]]:
    """Best ordered placement of m segments (rows of ``tracks``) over n frames.

    Frames inside segment i score log(tracks[i]); uncovered frames score
    log(null_track). Segments are contiguous, ordered, non-overlapping, and
    at least ``min_dur`` frames long; gaps may appear anywhere. Returns the
    optimum and each segment's [start, end) local frame interval.
    """
    m, n = tracks.shape[0], null_track.shape[0]
    log_tracks = np.log(np.maximum(tracks, _TRACK_EPS))
    log_null = np.log(np.maximum(null_track, _TRACK_EPS))
    null_prefix = np.concatenate(([0.0], np.cumsum(log_null)))
    if m == 0:
        return float(null_prefix[n]), []

    prefixes = np.concatenate(
        (np.zeros((m, 1)), np.cumsum(log_tracks, axis=1)), axis=1
    )
    NEG = -np.inf
    dp = np.full((m + 1, n + 1), NEG)
    dp[0] = null_prefix
    seg_start = np.full((m + 1, n + 1), -1, dtype=np.int64)
    for i in range(1, m + 1):
        pref = prefixes[i - 1]
        run_best = NEG
        run_arg = -1
        for t in range(1, n + 1):
            s = t - min_dur
            if s >= 0 and np.isfinite(dp[i - 1, s]):
                cand = dp[i - 1, s] - pref[s]
                if cand > run_best:
                    run_best = cand
                    run_arg = s
            gap = dp[i, t - 1] + log_null[t - 1] if np.isfinite(dp[i, t - 1]) else NEG
            seg = run_best + pref[t] if np.isfinite(run_best) else NEG
            if seg >= gap:
                dp[i, t] = seg
                seg_start[i, t] = run_arg
            else:
                dp[i, t] = gap
    if not np.isfinite(dp[m, n]):
        raise ValueError("no feasible segmentation")

    segments: list[tuple[int, int]] = []
    i, t = m, n
    while i > 0:
        while seg_start[i, t] < 0:
            t -= 1
        s = int(seg_start[i, t])
        segments.append((s, t))
        i, t = i - 1, s
    segments.reverse()
    return float(dp[m, n]), segments


class IntervalInfeasibleError(ValueError):
    pass


def align_glosses_scores(
    scores: FrameScores,
    vocabulary: SignVocabulary,
    entries: list[AlignEntry],
    anchors: list[tuple[int, WordDetection]],
    min_sign_frames: int = 3,
) -> tuple[dict[int, GlossDetection], list[str]]:
    """Monotone alignment of gloss tokens within inter-anchor intervals.

    ``entries`` are the non-anchor tokens in sequence order; ``anchors``
    are (token_index, detection) pairs, ordered in both sequence position
    and time. Each entry is aligned on its own class track when in
    vocabulary, otherwise on the ANY track, with NULL-scored gaps allowed
    around segments. Tokens in an infeasible interval (more tokens than
    frames) come back with score 0 and the interval is reported in the
    error list; other intervals are unaffected.
    """
    T = scores.num_frames
    bounds: list[tuple[int, int]] = []  # inclusive frame intervals per group
    starts = [0] + [det.end_frame + 1 for _, det in anchors]
    ends = [det.start_frame - 1 for _, det in anchors] + [T - 1]
    for s, e in zip(starts, ends):
        bounds.append((s, e))

    anchor_positions = [idx for idx, _ in anchors]
    groups: list[list[AlignEntry]] = [[] for _ in range(len(anchors) + 1)]
    for entry in entries:
        g = sum(1 for pos in anchor_positions if pos < entry.token_index)
        groups[g].append(entry)

    out: dict[int, GlossDetection] = {}
    errors: list[str] = []
    for g, group in enumerate(groups):
        if not group:
            continue
        lo, hi = bounds[g]
        n = hi - lo + 1
        m = len(group)
        if n < m:
            errors.append(
                f"interval [{lo}, {hi}] has {max(n, 0)} frames for {m} glosses"
            )
            lo_c = max(0, min(lo, T - 1))
            hi_c = max(lo_c, min(hi, T - 1))
            for entry in group:
                _, in_vocab = _track_for(entry, vocabulary)
                out[entry.token_index] = GlossDetection(
                    gloss=entry.token.text,
                    in_vocabulary=in_vocab,
                    score=0.0,
                    frame=lo_c,
                    interval=(lo_c, hi_c),
                )
            continue
        track_rows = []
        vocab_flags = []
        for entry in group:
            track_idx, in_vocab = _track_for(entry, vocabulary)
            track_rows.append(scores.probs[lo : hi + 1, track_idx])
            vocab_flags.append(in_vocab)
        tracks = np.stack(track_rows)
        null_track = scores.probs[lo : hi + 1, vocabulary.null_index]
        min_dur = max(1, min(min_sign_frames, n // m))
        _, segments = _segment_dp(tracks, null_track, min_dur)
        for entry, in_vocab, track, (s, e) in zip(group, vocab_flags, track_rows, segments):
            seg = track[s:e]
            peak = s + int(np.argmax(seg))
            out[entry.token_index] = GlossDetection(
                gloss=entry.token.text,
                in_vocabulary=in_vocab,
                score=float(seg.mean()),
                frame=lo + peak,
                interval=(lo + s, lo + e - 1),
            )
    return out, errors


def align_glosses(
    model: IsrModel,
    poses: PoseSequence,
    glosses: GlossSequence,
    anchors: list[tuple[int, WordDetection]],
    min_sign_frames: int = 3,
) -> tuple[list[GlossDetection], list[str]]:
    """Align the non-anchor tokens of a sequence against a video."""
    scores = isr_scores(model, poses)
    anchor_set = {idx for idx, _ in anchors}
    entries = [
        AlignEntry(token_index=i, token=tok)
        for i, tok in enumerate(glosses.tokens)
        if i not in anchor_set
    ]
    by_index, errors = align_glosses_scores(
        scores, model.vocabulary, entries, anchors, min_sign_frames
    )
    return [by_index[e.token_index] for e in entries], errors


# --- training ----------------------------------------------------------------


def _clip_features(sample) -> tuple[np.ndarray, np.ndarray]:
    prepared, _ = prepare_sequence(sample.poses, ISR_TWO_HAND_FEATURES)
    two = build_features(prepared, ISR_TWO_HAND_FEATURES).rows
    one = build_features(prepared, ISR_ONE_HAND_FEATURES).rows
    return two, one


def build_frame_targets(
    vocab: SignVocabulary, num_frames: int, class_index: int, span: tuple[int, int]
) -> np.ndarray:
    """Per-frame multi-label targets for one clip.

    Inside the sign span the sign class and ANY are positive; outside it
    only NULL is positive.
    """
    targets = np.zeros((num_frames, vocab.size))
    s, e = span
    targets[:, vocab.null_index] = 1.0
    targets[s : e + 1, vocab.null_index] = 0.0
    targets[s : e + 1, class_index] = 1.0
    targets[s : e + 1, vocab.any_index] = 1.0
    return targets


def _jitter_window(
    span: tuple[int, int], num_frames: int, rng: np.random.Generator, jitter: float
) -> tuple[int, int]:
    """Expand the extraction window by up to ``jitter`` of the span per side."""
    s, e = span
    length = e - s + 1
    lead = int(round(rng.uniform(0.0, jitter) * length))
    tail = int(round(rng.uniform(0.0, jitter) * length))
    return max(0, s - lead), min(num_frames - 1, e + tail)


def train_toy_isr(
    corpus: list,
    vocabulary: SignVocabulary,
    epochs: int = 40,
    seed: int = 0,
    channels: int = 48,
    lr: float = 1e-3,
    weight_decay: float = 1e-5,
    min_lr: float = 1e-6,
    patience: int = 10,
    batch_clips: int = 8,
    jitter: float = 0.25,
    grad_clip: float = 5.0,
) -> IsrModel:
    """Train the two-branch recognizer on synthetic isolated-sign clips.

    Per-frame, per-class binary cross-entropy with ANY/NULL targets; clip
    windows are jittered by up to 25% of the sign span per side and batches
    are concatenated in time. Same optimizer recipe as the fingerspelling
    trainer; deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    train, val, _test = stratified_split(corpus, rng)
    if not train or not val:
        raise CorpusError("corpus too small to stratify")
    for s in corpus:
        if vocabulary.class_index(s.gloss) is None:
            raise CorpusError(f"corpus gloss {s.gloss!r} is not in the vocabulary")

    two_cfg = nn.isr_config(
        input_dim=ISR_TWO_HAND_FEATURES.dim, output_classes=vocabulary.size, channels=channels
    )
    one_cfg = nn.isr_config(
        input_dim=ISR_ONE_HAND_FEATURES.dim, output_classes=vocabulary.size, channels=channels
    )
    two = nn.Tcn.init(two_cfg, rng)
    one = nn.Tcn.init(one_cfg, rng)
    params = two.parameters() + one.parameters()
    opt = nn.AdamW(params, lr=lr, weight_decay=weight_decay)

    feats = {s.sample_id: _clip_features(s) for s in corpus}
    class_of = {s.sample_id: vocabulary.class_index(s.gloss) for s in corpus}

    def batch_loss(samples, train_mode: bool) -> nn.Tensor | float:
        two_rows, one_rows, target_rows = [], [], []
        for s in samples:
            f2, f1 = feats[s.sample_id]
            if train_mode:
                lo, hi = _jitter_window(s.span, len(f2), rng, jitter)
            else:
                lo, hi = 0, len(f2) - 1
            span_local = (s.span[0] - lo, s.span[1] - lo)
            two_rows.append(f2[lo : hi + 1])
            one_rows.append(f1[lo : hi + 1])
            target_rows.append(
                build_frame_targets(
                    vocabulary, hi - lo + 1, class_of[s.sample_id], span_local
                )
            )
        x2 = np.concatenate(two_rows)
        x1 = np.concatenate(one_rows)
        targets = np.concatenate(target_rows)
        logits = nn.maximum(two.forward(x2), one.forward(x1))
        return nn.bce_with_logits(logits, targets)

    n_batches = (len(train) + batch_clips - 1) // batch_clips
    total_steps = max(1, epochs * n_batches)
    step = 0
    best_val = np.inf
    best_state = (
        {k: v.copy() for k, v in two.state_arrays().items()},
        {k: v.copy() for k, v in one.state_arrays().items()},
    )
    best_epoch = -1
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        epoch_loss = 0.0
        for b in range(n_batches):
            batch = [train[i] for i in order[b * batch_clips : (b + 1) * batch_clips]]
            opt.lr = nn.cosine_lr(step, total_steps, lr, min_lr)
            loss = batch_loss(batch, train_mode=True)
            opt.zero_grad()
            loss.backward()
            nn.clip_grad_norm(opt.params, grad_clip)
            opt.step()
            step += 1
            epoch_loss += loss.item()
        val_loss = float(
            np.mean([batch_loss([s], train_mode=False).item() for s in val])
        )
        history.append(
            {"epoch": epoch, "train_loss": epoch_loss / n_batches, "val_loss": val_loss, "lr": opt.lr}
        )
        if val_loss < best_val:
            best_val = val_loss
            best_state = (
                {k: v.copy() for k, v in two.state_arrays().items()},
                {k: v.copy() for k, v in one.state_arrays().items()},
            )
            best_epoch = epoch
        elif epoch - best_epoch >= patience:
            break
    return IsrModel(
        vocabulary=vocabulary,
        two_hand=nn.Tcn.from_arrays(two_cfg, best_state[0]),
        one_hand=nn.Tcn.from_arrays(one_cfg, best_state[1]),
        history=history,
    )


# --- persistence --------------------------------------------------------------

VOCAB_FILE = "vocabulary.json"


def save_isr_model(directory: str | Path, model: IsrModel) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    nn.save_weights(
        directory / "two_hand",
        nn.ModelWeights.from_float64(
            model.two_hand.config, model.two_hand.state_arrays(), extra={"model_kind": "isr_two_hand"}
        ),
    )
    nn.save_weights(
        directory / "one_hand",
        nn.ModelWeights.from_float64(
            model.one_hand.config, model.one_hand.state_arrays(), extra={"model_kind": "isr_one_hand"}
        ),
    )
    save_vocabulary(directory / VOCAB_FILE, model.vocabulary)


def load_isr_model(directory: str | Path) -> IsrModel:
    directory = Path(directory)
    vocab = load_vocabulary(directory / VOCAB_FILE)
    two_w = nn.load_weights(directory / "two_hand")
    one_w = nn.load_weights(directory / "one_hand")
    model = IsrModel(
        vocabulary=vocab,
        two_hand=nn.Tcn.from_arrays(two_w.config, two_w.as_float64()),
        one_hand=nn.Tcn.from_arrays(one_w.config, one_w.as_float64()),
    )
    if two_w.config.output_classes != vocab.size or one_w.config.output_classes != vocab.size:
        raise nn.WeightsError("model head width does not match the vocabulary size")
    return model
