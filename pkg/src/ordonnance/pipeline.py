"""End-to-end extraction pipeline.

ingest -> normalize -> classify -> (drug link | posology extract) ->
geometric link -> record. Also provides the sentence-level annotation used
by the evaluation harness, with predicted spans projected back into the raw
text's character space so they are directly comparable to gold spans.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .classify import ClassifierModel, predict
from .druglink import (
    DEFAULT_THRESHOLD,
    DrugLexicon,
    default_equivalence_markers,
    detect_drug,
    mention_token_window,
    split_combined_line,
    starts_with_equivalence_marker,
)
from .linking import ClassifiedLine, LinkConfig, PrescriptionRecord, link
from .ocr import OcrDocument
from .patterns import PatternSet
from .posology import extract_posology
from .textnorm import Sentence, make_sentence, normalize_text, sentence_from_text

# (kind, char_start, char_end) in the coordinates of the text that was annotated
Span = tuple[str, int, int]


@dataclass
class Runtime:
    """Loaded artifacts the pipeline needs: model, lexicon, patterns, stopwords."""

    model: ClassifierModel
    lexicon: DrugLexicon
    patterns: PatternSet
    stopwords: frozenset[str] = frozenset()
    threshold: float = DEFAULT_THRESHOLD
    link_config: LinkConfig = field(default_factory=LinkConfig)
    dedup_equivalents: bool = True


def _annotate_sentence(sentence: Sentence, runtime: Runtime) -> list[Span]:
    """Predicted spans over the sentence's match_text."""
    label = predict(runtime.model, sentence).label
    spans: list[Span] = []
    if label == "DRUG":
        mention = detect_drug(sentence, runtime.lexicon, runtime.threshold)
        if mention is not None:
            w0, w1 = mention_token_window(sentence, mention)
            tokens = sentence.tokens
            spans.append(("DRUG", tokens[w0].start, tokens[w1 - 1].end))
            remainder = split_combined_line(sentence, mention)
            if remainder.tokens:
                base = tokens[w1].start
                extraction = extract_posology(remainder, runtime.patterns)
                spans.extend(
                    (e.kind, base + e.char_start, base + e.char_end) for e in extraction.entities
                )
    elif label == "POSOLOGY":
        extraction = extract_posology(sentence, runtime.patterns)
        spans.extend((e.kind, e.char_start, e.char_end) for e in extraction.entities)
    return spans


def annotate_text(raw_text: str, runtime: Runtime) -> list[Span]:
    """Classify and annotate bare text; spans come back in raw-text coordinates."""
    sentence = sentence_from_text(raw_text, runtime.stopwords)
    if sentence is None:
        return []
    norm = normalize_text(raw_text)
    out: list[Span] = []
    for kind, start, end in _annotate_sentence(sentence, runtime):
        raw_start, raw_end = norm.to_raw_span(start, end)
        out.append((kind, raw_start, raw_end))
    return out


def classify_lines(doc: OcrDocument, runtime: Runtime) -> list[ClassifiedLine]:
    """Per-line classification and extraction, before geometric linking."""
    classified: list[ClassifiedLine] = []
    sentences: list[Sentence] = []
    for line in doc.lines:
        sentence = make_sentence(line, runtime.stopwords)
        if sentence is None:
            continue  # single-character OCR debris
        label = predict(runtime.model, sentence).label
        mention = None
        extraction = None
        if label == "DRUG":
            mention = detect_drug(sentence, runtime.lexicon, runtime.threshold)
            if mention is not None:
                remainder = split_combined_line(sentence, mention)
                if remainder.tokens:
                    combined = extract_posology(remainder, runtime.patterns)
                    if combined.entities:
                        extraction = combined
        elif label == "POSOLOGY":
            extraction = extract_posology(sentence, runtime.patterns)
        classified.append(
            ClassifiedLine(
                line_id=line.line_id,
                page=line.page,
                bbox=line.bbox,
                label=label,
                mention=mention,
                extraction=extraction,
            )
        )
        sentences.append(sentence)

    if runtime.dedup_equivalents:
        markers = default_equivalence_markers()
        for i in range(1, len(classified)):
            cur, prev = classified[i], classified[i - 1]
            if (
                cur.label == "DRUG"
                and cur.mention is not None
                and prev.label == "DRUG"
                and prev.mention is not None
                and cur.mention.drug_id != prev.mention.drug_id
                and starts_with_equivalence_marker(sentences[i], markers)
            ):
                # substitute drug ("ou ...") on the line below: keep the first only
                classified[i] = ClassifiedLine(
                    line_id=cur.line_id,
                    page=cur.page,
                    bbox=cur.bbox,
                    label="EQUIVALENT",
                )
    return classified


def extract_document(doc: OcrDocument, runtime: Runtime) -> PrescriptionRecord:
    """Full pipeline for one parsed OCR document."""
    return link(doc.doc_id, classify_lines(doc, runtime), runtime.link_config)
