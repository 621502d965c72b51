"""Precomputed 2-D keypoint ingestion and model input features.

Coordinates are image-normalized (x, y in [0, 1]). A frame carries up to
three channel groups: 21-joint left hand, 21-joint right hand, and a set
of named upper-body joints. Missing channels are ``None`` and are filled
from the temporally nearest valid frame before feature extraction.

Handedness is resolved per video from the fraction of valid frames per
hand; left-dominant videos are mirrored so the dominant hand always sits
in the right-hand slot.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

HAND_JOINTS = 21
STD_EPS = 1e-6

BODY_DEFAULT_JOINTS = (
    "nose",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
)

BELOW_HIP_JOINTS = frozenset(
    {
        "left_knee",
        "right_knee",
        "left_ankle",
        "right_ankle",
        "left_heel",
        "right_heel",
        "left_foot_index",
        "right_foot_index",
    }
)


class PoseError(ValueError):
    pass


class NoHandsError(PoseError):
    pass


class ChannelEmptyError(PoseError):
    def __init__(self, channel: str):
        self.channel = channel
        super().__init__(f"channel {channel!r} is absent in every frame")


class NoShouldersError(PoseError):
    pass


def _as_hand(arr) -> np.ndarray | None:
    if arr is None:
        return None
    a = np.asarray(arr, dtype=np.float64)
    if a.shape != (HAND_JOINTS, 2):
        raise PoseError(f"hand must be ({HAND_JOINTS}, 2), got {a.shape}")
    return a


@dataclass(frozen=True)
class PoseFrame:
    timestamp: float
    hand_left: np.ndarray | None = None
    hand_right: np.ndarray | None = None
    body: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "hand_left", _as_hand(self.hand_left))
        object.__setattr__(self, "hand_right", _as_hand(self.hand_right))
        if self.body is not None:
            clean = {}
            for name, xy in self.body.items():
                a = np.asarray(xy, dtype=np.float64).reshape(2)
                if not np.all(np.isfinite(a)):
                    raise PoseError(f"non-finite body joint {name!r}")
                clean[name] = a
            object.__setattr__(self, "body", clean)
        for hand in (self.hand_left, self.hand_right):
            if hand is not None and not np.all(np.isfinite(hand)):
                raise PoseError("non-finite hand coordinates")


@dataclass(frozen=True)
class PoseSequence:
    frames: tuple[PoseFrame, ...]
    fps: float
    video_id: str = ""

    def __post_init__(self):
        if self.fps <= 0:
            raise PoseError("fps must be positive")
        ts = [f.timestamp for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise PoseError("timestamps must be strictly increasing")
        object.__setattr__(self, "frames", tuple(self.frames))

    def __len__(self) -> int:
        return len(self.frames)


class Hand(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class HandednessReport:
    dominant: Hand
    valid_fraction_left: float
    valid_fraction_right: float
    flipped: bool


def hand_valid(hand: np.ndarray | None) -> bool:
    return hand is not None and bool(np.all(np.isfinite(hand)))


def select_dominant_hand(seq: PoseSequence) -> HandednessReport:
    """Pick the hand present in more frames; ties break to the right hand."""
    if not seq.frames:
        raise PoseError("empty sequence")
    n = len(seq.frames)
    left = sum(hand_valid(f.hand_left) for f in seq.frames) / n
    right = sum(hand_valid(f.hand_right) for f in seq.frames) / n
    if left == 0.0 and right == 0.0:
        raise NoHandsError("no hand present in any frame")
    dominant = Hand.LEFT if left > right else Hand.RIGHT
    return HandednessReport(
        dominant=dominant,
        valid_fraction_left=left,
        valid_fraction_right=right,
        flipped=dominant is Hand.LEFT,
    )


def _mirror_joint_name(name: str) -> str:
    if name.startswith("left_"):
        return "right_" + name[5:]
    if name.startswith("right_"):
        return "left_" + name[6:]
    return name


def _mirror_points(points: np.ndarray) -> np.ndarray:
    out = points.copy()
    out[..., 0] = 1.0 - out[..., 0]
    return out


def mirror_flip(seq: PoseSequence) -> PoseSequence:
    """Reflect x -> 1 - x and swap left/right hand slots and body joints."""
    frames = []
    for f in seq.frames:
        body = None
        if f.body is not None:
            body = {
                _mirror_joint_name(name): _mirror_points(xy)
                for name, xy in f.body.items()
            }
        frames.append(
            PoseFrame(
                timestamp=f.timestamp,
                hand_left=None if f.hand_right is None else _mirror_points(f.hand_right),
                hand_right=None if f.hand_left is None else _mirror_points(f.hand_left),
                body=body,
            )
        )
    return PoseSequence(frames=tuple(frames), fps=seq.fps, video_id=seq.video_id)


def _channel_names(seq: PoseSequence) -> list[str]:
    names = set()
    for f in seq.frames:
        if f.hand_left is not None:
            names.add("hand_left")
        if f.hand_right is not None:
            names.add("hand_right")
        if f.body:
            names.update("body:" + j for j in f.body)
    return sorted(names)


def _get_channel(frame: PoseFrame, channel: str) -> np.ndarray | None:
    if channel == "hand_left":
        return frame.hand_left
    if channel == "hand_right":
        return frame.hand_right
    if channel.startswith("body:"):
        joint = channel[5:]
        if frame.body is not None and joint in frame.body:
            return frame.body[joint]
    return None


def impute_missing(seq: PoseSequence, channels: list[str] | None = None) -> PoseSequence:
    """Copy each missing channel from the temporally nearest valid frame.

    Distance is measured on timestamps; ties prefer the earlier frame.
    Raises :class:`ChannelEmptyError` for a requested channel valid nowhere.
    """
    if channels is None:
        channels = _channel_names(seq)
    ts = np.array([f.timestamp for f in seq.frames])
    filled: dict[str, list[np.ndarray]] = {}
    for channel in channels:
        values = [_get_channel(f, channel) for f in seq.frames]
        valid = [i for i, v in enumerate(values) if v is not None]
        if not valid:
            raise ChannelEmptyError(channel)
        valid_ts = ts[valid]
        out = []
        for i, v in enumerate(values):
            if v is not None:
                out.append(v)
                continue
            dist = np.abs(valid_ts - ts[i])
            j = int(np.argmin(dist))  # argmin takes the first (earlier) tie
            out.append(values[valid[j]])
        filled[channel] = out

    frames = []
    for i, f in enumerate(seq.frames):
        hand_left = filled["hand_left"][i] if "hand_left" in filled else f.hand_left
        hand_right = filled["hand_right"][i] if "hand_right" in filled else f.hand_right
        body = dict(f.body) if f.body else {}
        for channel in channels:
            if channel.startswith("body:"):
                body[channel[5:]] = filled[channel][i]
        frames.append(
            PoseFrame(
                timestamp=f.timestamp,
                hand_left=hand_left,
                hand_right=hand_right,
                body=body or None,
            )
        )
    return PoseSequence(frames=tuple(frames), fps=seq.fps, video_id=seq.video_id)


def hand_joint_std(hands: list[np.ndarray]) -> np.ndarray:
    """Per-joint, per-axis deviation scale over a video.

    Computed on mean-centered hands (each frame re-centered on its own 2-D
    hand mean) so the statistic reflects articulation, not translation.
    Floored at STD_EPS to guard frozen joints.
    """
    stack = np.stack([h - h.mean(axis=0, keepdims=True) for h in hands])
    std = stack.std(axis=0)
    return np.maximum(std, STD_EPS)


def normalize_hand(hand: np.ndarray, std: np.ndarray | None = None) -> np.ndarray:
    """Center on the 2-D hand mean, scale per joint, flatten to 42 values."""
    centered = hand - hand.mean(axis=0, keepdims=True)
    if std is not None:
        centered = centered / std
    return centered.reshape(-1)


def normalize_body(
    body: dict[str, np.ndarray], joints: tuple[str, ...] = BODY_DEFAULT_JOINTS
) -> np.ndarray:
    """Center on the shoulder midpoint and scale by shoulder width.

    Joints below the hips are dropped from the output regardless of the
    requested joint list.
    """
    if "left_shoulder" not in body or "right_shoulder" not in body:
        raise NoShouldersError("both shoulders are required for body normalization")
    ls, rs = body["left_shoulder"], body["right_shoulder"]
    mid = (ls + rs) / 2.0
    width = max(float(np.linalg.norm(ls - rs)), STD_EPS)
    out = []
    for name in joints:
        if name in BELOW_HIP_JOINTS:
            continue
        if name not in body:
            raise PoseError(f"body joint {name!r} missing after imputation")
        out.append((body[name] - mid) / width)
    return np.concatenate(out)


@dataclass(frozen=True)
class FeatureSpec:
    """Channel groups concatenated per frame, in declaration order."""

    dominant_hand: bool = True
    non_dominant_hand: bool = False
    body: bool = False
    body_joints: tuple[str, ...] = BODY_DEFAULT_JOINTS

    @property
    def body_dim(self) -> int:
        visible = [j for j in self.body_joints if j not in BELOW_HIP_JOINTS]
        return 2 * len(visible)

    @property
    def dim(self) -> int:
        dim = 0
        if self.body:
            dim += self.body_dim
        if self.dominant_hand:
            dim += 2 * HAND_JOINTS
        if self.non_dominant_hand:
            dim += 2 * HAND_JOINTS
        return dim

    def channels(self) -> list[str]:
        names = []
        if self.body:
            names.extend("body:" + j for j in self.body_joints if j not in BELOW_HIP_JOINTS)
        if self.dominant_hand:
            names.append("hand_right")
        if self.non_dominant_hand:
            names.append("hand_left")
        return names


FINGERSPELLING_FEATURES = FeatureSpec(dominant_hand=True)
ISR_TWO_HAND_FEATURES = FeatureSpec(dominant_hand=True, non_dominant_hand=True, body=True)
ISR_ONE_HAND_FEATURES = FeatureSpec(dominant_hand=True, non_dominant_hand=False, body=True)


@dataclass
class FeatureMatrix:
    rows: np.ndarray  # (T, dim)
    channel_map: tuple[tuple[str, int], ...]
    fps: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.rows)):
            raise PoseError("non-finite feature values")
        if self.rows.shape[1] != sum(width for _, width in self.channel_map):
            raise PoseError("feature width does not match the channel map")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def build_features(seq: PoseSequence, spec: FeatureSpec) -> FeatureMatrix:
    """Per-frame feature rows for an imputed, handedness-resolved sequence.

    The dominant hand is read from the right-hand slot (sequences are
    mirrored upstream when the signer is left-dominant).
    """
    if not seq.frames:
        raise PoseError("empty sequence")
    for f in seq.frames:
        for channel in spec.channels():
            if _get_channel(f, channel) is None:
                raise ChannelEmptyError(channel)

    channel_map: list[tuple[str, int]] = []
    columns: list[np.ndarray] = []
    if spec.body:
        body_rows = np.stack(
            [normalize_body(f.body, spec.body_joints) for f in seq.frames]
        )
        channel_map.append(("body", body_rows.shape[1]))
        columns.append(body_rows)
    if spec.dominant_hand:
        hands = [f.hand_right for f in seq.frames]
        std = hand_joint_std(hands)
        channel_map.append(("dominant_hand", 2 * HAND_JOINTS))
        columns.append(np.stack([normalize_hand(h, std) for h in hands]))
    if spec.non_dominant_hand:
        hands = [f.hand_left for f in seq.frames]
        std = hand_joint_std(hands)
        channel_map.append(("non_dominant_hand", 2 * HAND_JOINTS))
        columns.append(np.stack([normalize_hand(h, std) for h in hands]))
    return FeatureMatrix(
        rows=np.concatenate(columns, axis=1),
        channel_map=tuple(channel_map),
        fps=seq.fps,
    )


def prepare_sequence(
    seq: PoseSequence, spec: FeatureSpec
) -> tuple[PoseSequence, HandednessReport]:
    """Resolve handedness, mirror if left-dominant, impute needed channels."""
    report = select_dominant_hand(seq)
    if report.flipped:
        seq = mirror_flip(seq)
    seq = impute_missing(seq, channels=spec.channels())
    return seq, report


# --- JSON Lines pose file format ------------------------------------------
#
# Line 1 (header): {"fps": <number>, "video_id": <string>}
# Lines 2..N:      {"t": <seconds>,
#                   "hand_left":  [[x, y] * 21] | null,
#                   "hand_right": [[x, y] * 21] | null,
#                   "body": {"<joint>": [x, y], ...} | null}


def write_pose_jsonl(path: str | Path, seq: PoseSequence) -> None:
    lines = [json.dumps({"fps": seq.fps, "video_id": seq.video_id})]
    for f in seq.frames:
        lines.append(
            json.dumps(
                {
                    "t": f.timestamp,
                    "hand_left": None if f.hand_left is None else f.hand_left.tolist(),
                    "hand_right": None if f.hand_right is None else f.hand_right.tolist(),
                    "body": None
                    if f.body is None
                    else {k: v.tolist() for k, v in sorted(f.body.items())},
                }
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pose_jsonl(path: str | Path) -> PoseSequence:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise PoseError(f"{path} is empty")
    header = json.loads(lines[0])
    frames = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        body = rec.get("body")
        frames.append(
            PoseFrame(
                timestamp=float(rec["t"]),
                hand_left=rec.get("hand_left"),
                hand_right=rec.get("hand_right"),
                body=None if body is None else {k: np.asarray(v) for k, v in body.items()},
            )
        )
    return PoseSequence(
        frames=tuple(frames),
        fps=float(header["fps"]),
        video_id=str(header.get("video_id", "")),
    )
