"""Posology extraction: dose, frequency, duration and comment entities.

Runs the four posology matcher families over a sentence classified as
posology (or over the remainder of a combined drug+posology line) and
collects the surviving spans as entities.
"""

from __future__ import annotations

from dataclasses import dataclass

from .patterns import MatchSpan, PatternSet, find_all
from .textnorm import Sentence

POSOLOGY_KINDS = ("DOSE", "FREQUENCY", "DURATION", "COMMENT")


@dataclass(frozen=True)
class PosologyEntity:
    kind: str
    text: str
    span: MatchSpan
    sentence_line_id: str
    # character offsets of the span in the sentence's match_text
    char_start: int = 0
    char_end: int = 0


@dataclass(frozen=True)
class PosologyExtraction:
    line_id: str
    entities: tuple[PosologyEntity, ...]
    residual_text: str


def extract_posology(sentence: Sentence, patterns: PatternSet) -> PosologyExtraction:
    """Extract posology entities; deterministic for a fixed pattern set.

    Entities come back sorted by span start. ``residual_text`` joins the
    tokens not covered by any entity, preserving order.
    """
    spans = find_all(patterns, sentence, labels=POSOLOGY_KINDS)
    entities = tuple(
        PosologyEntity(
            kind=s.label,
            text=s.text,
            span=s,
            sentence_line_id=sentence.line_id,
            char_start=sentence.tokens[s.start_token].start,
            char_end=sentence.tokens[s.end_token - 1].end,
        )
        for s in spans
    )
    covered = set()
    for s in spans:
        covered.update(range(s.start_token, s.end_token))
    residual = " ".join(t.text for i, t in enumerate(sentence.tokens) if i not in covered)
    return PosologyExtraction(line_id=sentence.line_id, entities=entities, residual_text=residual)
