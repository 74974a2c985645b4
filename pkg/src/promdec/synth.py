"""Synthetic conversational corpora with planted prominence levels and
planted error rates.

The generator builds desk-scale stand-ins for a two-speaker conversation
corpus: German-flavoured character distributions, per-word prominence
levels drawn from a configurable distribution, and controlled corruption
(level flips, word-count errors) used to plant known accuracy and
alignment rates that the evaluation pipeline must recover.
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import Corpus, ProminenceLevel, ProsodicWord, TaggingMode, Utterance
from .errors import HarnessError

# Rough German letter frequencies; enough texture for realistic words.
_ALPHABET = "enisratdhulcgmobwfkzvüpäößj"
_WEIGHTS = (
    174, 98, 76, 73, 70, 70, 65, 51, 48, 44, 34, 31, 30, 25, 25, 23, 19,
    17, 14, 12, 7, 7, 7, 6, 5, 3, 3,
)


def _conversation_id(index: int) -> str:
    return f"{2 * index + 1:03d}M{2 * index + 2:03d}F"


def random_word(rng: random.Random, min_len: int = 2, max_len: int = 7) -> str:
    length = rng.randint(min_len, max_len)
    return "".join(rng.choices(_ALPHABET, weights=_WEIGHTS, k=length))


def make_corpus(
    conversations: int,
    utterances_per_conversation: int,
    seed: int,
    min_words: int = 1,
    max_words: int = 5,
    level_weights: Sequence[float] = (0.55, 0.15, 0.30),
    multi_token_rate: float = 0.1,
) -> Corpus:
    """Generate a fully annotated corpus, deterministic in the seed."""
    if conversations < 1 or utterances_per_conversation < 1:
        raise HarnessError("need at least one conversation and one utterance")
    if len(level_weights) != 3:
        raise HarnessError("level_weights must give weights for PL0, PL1, PL2")
    rng = random.Random(seed)
    levels = (ProminenceLevel.PL0, ProminenceLevel.PL1, ProminenceLevel.PL2)
    utterances = []
    for c in range(conversations):
        conv = _conversation_id(c)
        for u in range(utterances_per_conversation):
            speaker = conv[:4] if u % 2 == 0 else conv[4:]
            n_words = rng.randint(min_words, max_words)
            words = []
            for _ in range(n_words):
                tokens = [random_word(rng)]
                if rng.random() < multi_token_rate:
                    tokens.append(random_word(rng))
                level = rng.choices(levels, weights=level_weights, k=1)[0]
                words.append(ProsodicWord(tokens=tuple(tokens), level=level))
            utterances.append(
                Utterance(
                    id=f"{conv}_{u:04d}",
                    conversation_id=conv,
                    speaker_id=speaker,
                    prosodic_words=tuple(words),
                )
            )
    return Corpus(tuple(utterances))


def utterance_seed(base_seed: int, utt_id: str) -> int:
    """Stable per-utterance RNG seed, independent of processing order."""
    return (base_seed * 2654435761 + zlib.crc32(utt_id.encode("utf-8"))) % 2**31


def _flip_level(
    level: ProminenceLevel, inventory: Sequence[ProminenceLevel], rng: random.Random
) -> ProminenceLevel:
    others = [lv for lv in inventory if lv != level]
    return rng.choice(others)


def corrupt_utterance(
    utt: Utterance,
    mode: TaggingMode,
    flip_rate: float,
    length_error_rate: float,
    rng: random.Random,
) -> Utterance:
    """The "spoken" variant an acoustic model would hear: each prosodic
    word's level flips with flip_rate (within the mode's level inventory),
    and with length_error_rate the utterance loses its last word or
    repeats it, breaking word-count alignment."""
    if mode.is_detector:
        inventory = sorted(mode.level_inventory)
    else:
        inventory = list(ProminenceLevel)
    words = []
    for word in utt.prosodic_words:
        level = word.level
        if level is not None and rng.random() < flip_rate:
            level = _flip_level(level, inventory, rng)
        words.append(ProsodicWord(tokens=word.tokens, level=level))
    if words and rng.random() < length_error_rate:
        if len(words) > 1 and rng.random() < 0.5:
            words.pop()
        else:
            words.append(words[-1])
    return Utterance(
        id=utt.id,
        conversation_id=utt.conversation_id,
        speaker_id=utt.speaker_id,
        prosodic_words=tuple(words),
        exclusion_flags=utt.exclusion_flags,
    )


def restrict_levels(corpus: Corpus, mode: TaggingMode) -> Corpus:
    """Clamp annotations to a two-level inventory by mapping PL1 to PL0.

    det02 references only admit PL0/PL2, and tag02 cannot express PL1
    (its words would stay untagged and extract as Unassigned), so both
    modes receive the collapsed corpus; other modes pass through."""
    if mode not in (TaggingMode.DET02, TaggingMode.TAG02):
        return corpus
    utterances = []
    for utt in corpus:
        words = tuple(
            ProsodicWord(
                tokens=w.tokens,
                level=ProminenceLevel.PL0 if w.level is ProminenceLevel.PL1 else w.level,
            )
            for w in utt.prosodic_words
        )
        utterances.append(
            Utterance(
                id=utt.id,
                conversation_id=utt.conversation_id,
                speaker_id=utt.speaker_id,
                prosodic_words=words,
                exclusion_flags=utt.exclusion_flags,
            )
        )
    return Corpus(tuple(utterances))
