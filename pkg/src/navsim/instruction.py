"""Segmented navigation instructions and the soft dual-attention kernel.

An instruction is a token stream with binary classes (0 = landmark
description, 1 = directional instruction). Maximal runs of one class are
grouped into interleaving (landmark, direction) segment pairs; a soft
attention reference eta weights every pair j by exp(-|eta - j|), so both
the aimed landmark description and the directions leading to it are read
out with one pointer.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

DEFAULT_EMBED_DIM = 128

LANDMARK = 0
DIRECTION = 1

# Crude keyword rule for free-text demos only; dataset instructions carry
# ground-truth classes and never go through this.
_DIRECTION_WORDS = {
    "go", "walk", "head", "move", "turn", "continue", "follow", "proceed",
    "left", "right", "straight", "forward", "back", "backward", "around",
    "north", "south", "east", "west", "northeast", "northwest", "southeast",
    "southwest", "until", "then", "for", "blocks", "block", "meters", "m",
    "along", "toward", "towards", "past", "after", "before", "onto",
}


@dataclass(frozen=True)
class Token:
    text: str
    cls: int

    def __post_init__(self):
        if self.cls not in (LANDMARK, DIRECTION):
            raise ValueError(f"token class must be 0 or 1, got {self.cls}")


@dataclass(frozen=True)
class SegmentPair:
    landmark_tokens: tuple[Token, ...]
    direction_tokens: tuple[Token, ...]


@dataclass(frozen=True)
class SegmentedInstruction:
    pairs: tuple[SegmentPair, ...]
    raw_text: str = ""
    # Ground-truth correspondence: node id of the landmark each pair aims at.
    landmark_node_ids: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("instruction needs at least one segment pair")
        if self.landmark_node_ids and len(self.landmark_node_ids) != len(self.pairs):
            raise ValueError("landmark correspondence must match the pair count")

    @property
    def num_pairs(self) -> int:
        return len(self.pairs)

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        for p in self.pairs:
            out.extend(p.landmark_tokens)
            out.extend(p.direction_tokens)
        return out


@dataclass(frozen=True)
class SegmentFeature:
    """Embedded segment text plus routing metadata for oracle components.

    aimed_index is the 1-based pair the attention currently centers on;
    aimed_node_id is that pair's ground-truth landmark when known.
    """

    vector: np.ndarray
    aimed_index: int | None = None
    aimed_node_id: int | None = None


@dataclass(frozen=True)
class AttentionState:
    eta: float
    num_pairs: int

    def __post_init__(self):
        if not 1 <= self.eta <= self.num_pairs + 1:
            raise ValueError(f"eta {self.eta} outside [1, {self.num_pairs + 1}]")

    @property
    def exhausted(self) -> bool:
        return self.eta > self.num_pairs


def group_tokens(tokens: list[Token], raw_text: str = "",
                 landmark_node_ids: tuple[int, ...] = ()) -> SegmentedInstruction:
    """Groups maximal same-class runs into (landmark, direction) pairs.

    Runs pair up in order. A leading direction run gets an empty landmark
    partner; a trailing unpaired landmark run gets an empty direction
    partner. Token order inside runs is preserved.
    """
    if not tokens:
        raise ValueError("cannot segment an empty token list")
    runs: list[list[Token]] = [[tokens[0]]]
    for tok in tokens[1:]:
        if tok.cls == runs[-1][0].cls:
            runs[-1].append(tok)
        else:
            runs.append([tok])

    pairs: list[SegmentPair] = []
    pending_landmark: tuple[Token, ...] | None = None
    for run in runs:
        if run[0].cls == LANDMARK:
            if pending_landmark is not None:
                pairs.append(SegmentPair(pending_landmark, ()))
            pending_landmark = tuple(run)
        else:
            pairs.append(SegmentPair(pending_landmark or (), tuple(run)))
            pending_landmark = None
    if pending_landmark is not None:
        pairs.append(SegmentPair(pending_landmark, ()))
    text = raw_text or " ".join(t.text for t in tokens)
    return SegmentedInstruction(tuple(pairs), text, landmark_node_ids)


def embed_segment(tokens: tuple[Token, ...] | list[Token], dim: int = DEFAULT_EMBED_DIM) -> np.ndarray:
    """Hashed bag-of-words embedding, L2-normalized unless all-zero.

    Each word hashes to one signed coordinate, so the embedding is order
    independent and stable across runs and platforms.
    """
    vec = np.zeros(dim, dtype=np.float64)
    for tok in tokens:
        digest = hashlib.blake2b(tok.text.lower().encode(), digest_size=9).digest()
        idx = int.from_bytes(digest[:8], "big") % dim
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[idx] += sign
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def attention_weights(eta: float, num_pairs: int) -> np.ndarray:
    """Kernel weights exp(-|eta - j|) for j = 1..num_pairs, unnormalized."""
    if num_pairs < 1:
        raise ValueError("need at least one segment pair")
    j = np.arange(1, num_pairs + 1, dtype=np.float64)
    return np.exp(-np.abs(eta - j))


def embed_pairs(instr: SegmentedInstruction, dim: int = DEFAULT_EMBED_DIM
                ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-pair (landmark, direction) feature vectors, computed once."""
    return [
        (embed_segment(p.landmark_tokens, dim), embed_segment(p.direction_tokens, dim))
        for p in instr.pairs
    ]


def aimed_pair_index(eta: float, num_pairs: int) -> int:
    """The pair the kernel peaks at: round(eta), half-integers toward lower j."""
    return min(max(int(math.ceil(eta - 0.5)), 1), num_pairs)


def attend_features(features: list[tuple[np.ndarray, np.ndarray]], eta: float,
                    instr: SegmentedInstruction | None = None,
                    normalize: bool = False) -> tuple[SegmentFeature, SegmentFeature]:
    """Attention-weighted sums over precomputed pair features."""
    weights = attention_weights(eta, len(features))
    if normalize:
        weights = weights / weights.sum()
    lmk = sum(w * f[0] for w, f in zip(weights, features))
    dire = sum(w * f[1] for w, f in zip(weights, features))
    aimed = aimed_pair_index(eta, len(features))
    node = None
    if instr is not None and instr.landmark_node_ids:
        node = instr.landmark_node_ids[aimed - 1]
    return (
        SegmentFeature(lmk, aimed_index=aimed, aimed_node_id=node),
        SegmentFeature(dire, aimed_index=aimed, aimed_node_id=node),
    )


def attend(instr: SegmentedInstruction, eta: float, dim: int = DEFAULT_EMBED_DIM,
           normalize: bool = False) -> tuple[SegmentFeature, SegmentFeature]:
    """Embeds the instruction and applies the attention kernel at eta."""
    return attend_features(embed_pairs(instr, dim), eta, instr, normalize)


def advance(state: AttentionState, phi: int) -> AttentionState:
    """Moves the attention reference by phi (0 or 1)."""
    if phi not in (0, 1):
        raise ValueError(f"phi must be 0 or 1, got {phi}")
    if state.eta + phi > state.num_pairs + 1:
        raise ValueError("cannot advance attention past the final pair")
    return replace(state, eta=state.eta + phi)


def classify_tokens_stub(words: list[str]) -> list[Token]:
    """Keyword-rule classifier for free-text demos. No accuracy claim."""
    return [
        Token(w, DIRECTION if w.lower().strip(".,!?") in _DIRECTION_WORDS else LANDMARK)
        for w in words
    ]


def instruction_to_dict(instr: SegmentedInstruction) -> dict:
    tokens = instr.tokens()
    pairs = []
    idx = 0
    for p in instr.pairs:
        lmk = list(range(idx, idx + len(p.landmark_tokens)))
        idx += len(p.landmark_tokens)
        dire = list(range(idx, idx + len(p.direction_tokens)))
        idx += len(p.direction_tokens)
        pairs.append({"landmark": lmk, "direction": dire})
    return {
        "text": instr.raw_text,
        "tokens": [t.text for t in tokens],
        "classes": [t.cls for t in tokens],
        "pairs": pairs,
        "landmark_node_ids": list(instr.landmark_node_ids),
    }


def instruction_from_dict(raw: dict) -> SegmentedInstruction:
    tokens = [Token(text, cls) for text, cls in zip(raw["tokens"], raw["classes"])]
    pairs = tuple(
        SegmentPair(
            tuple(tokens[i] for i in p["landmark"]),
            tuple(tokens[i] for i in p["direction"]),
        )
        for p in raw["pairs"]
    )
    return SegmentedInstruction(pairs, raw.get("text", ""),
                                tuple(raw.get("landmark_node_ids", ())))
