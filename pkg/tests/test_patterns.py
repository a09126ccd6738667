import random

import pytest

from ordonnance.errors import PatternError
from ordonnance.patterns import (
    MAX_REPS,
    PatternSet,
    TokenPattern,
    TokenSpec,
    default_patterns,
    find_all,
    find_matches,
    match_token,
    parse_patterns,
)
from ordonnance.ocr import BoundingBox
from ordonnance.textnorm import Sentence, sentence_from_text, tokenize


def sent(text):
    return sentence_from_text(text)


def raw_sent(text):
    """Sentence over the exact token stream of ``text``, no normalization."""
    return Sentence(
        line_id="raw",
        match_text=text,
        feature_text=text,
        tokens=tuple(tokenize(text)),
        bbox=BoundingBox(0.0, 0.0, 1.0, 0.02),
        page=1,
    )


def pattern(pid, label, *specs):
    return parse_patterns([{"id": pid, "label": label, "specs": [dict(s) for s in specs]}]).patterns[0]


class TestMatchToken:
    def tok(self, text):
        return sent(text).tokens[0]

    def test_lower_set_membership(self):
        p = pattern("x", "DOSE", {"lower": ["cp", "comprime"]})
        assert match_token(p.specs[0], self.tok("cp"))
        assert not match_token(p.specs[0], self.tok("gelule"))

    def test_is_digit_rejects_decimal(self):
        p = pattern("x", "DOSE", {"is_digit": True})
        assert not match_token(p.specs[0], self.tok("1.5"))
        assert match_token(p.specs[0], self.tok("15"))

    def test_like_num_accepts_decimal(self):
        p = pattern("x", "DOSE", {"like_num": True})
        assert match_token(p.specs[0], self.tok("1.5"))

    def test_constraints_are_conjunctive(self):
        p = pattern("x", "DOSE", {"regex": "[0-9]+", "is_digit": False})
        assert not match_token(p.specs[0], self.tok("12"))

    def test_negative_boolean_constraint(self):
        p = pattern("x", "DOSE", {"like_num": False})
        assert match_token(p.specs[0], self.tok("matin"))
        assert not match_token(p.specs[0], self.tok("12"))


class TestFindMatches:
    def test_simple_sequence(self):
        p = pattern("x", "DOSE", {"like_num": True}, {"lower": ["cp"]})
        spans = find_matches(p, sent("prendre 1 cp matin"))
        assert len(spans) == 1
        assert spans[0].text == "1 cp"
        assert (spans[0].start_token, spans[0].end_token) == (1, 3)

    def test_greedy_plus_takes_longest(self):
        p = pattern("x", "DOSE", {"like_num": True, "op": "+"})
        spans = find_matches(p, raw_sent("1 2 3 fin"))
        assert len(spans) == 1
        assert spans[0].text == "1 2 3"

    def test_duration_example_matches_brute_force(self):
        p = pattern(
            "x",
            "DURATION",
            {"lower": ["pendant"]},
            {"like_num": True},
            {"regex": "jours?|semaines?|mois"},
        )
        s = sent("pendant 10 jours")
        spans = find_matches(p, s)
        assert [(sp.start_token, sp.end_token) for sp in spans] == brute_force_spans(p, s)
        assert spans[0].text == "pendant 10 jours"

    def test_backtracking_lets_later_specs_match(self):
        p = pattern("x", "DOSE", {"like_num": True, "op": "+"}, {"is_digit": True})
        spans = find_matches(p, raw_sent("1 2 3"))
        assert len(spans) == 1
        assert (spans[0].start_token, spans[0].end_token) == (0, 3)

    def test_matches_do_not_overlap_and_resume_after_end(self):
        p = pattern("x", "DOSE", {"like_num": True}, {"lower": ["cp"]})
        spans = find_matches(p, sent("1 cp puis 2 cp"))
        assert [sp.text for sp in spans] == ["1 cp", "2 cp"]

    def test_optional_spec(self):
        p = pattern("x", "FREQUENCY", {"lower": ["matin"]}, {"lower": [","], "op": "?"}, {"lower": ["midi"]})
        assert find_matches(p, sent("matin midi"))[0].text == "matin midi"
        assert find_matches(p, sent("matin , midi"))[0].text == "matin , midi"

    def test_star_bounded(self):
        p = pattern("x", "DOSE", {"like_num": True}, {"lower": ["x"], "op": "*"})
        text = "1 " + " ".join(["x"] * (MAX_REPS + 3))
        spans = find_matches(p, sent(text))
        assert spans[0].end_token == 1 + MAX_REPS

    def test_spans_disjoint_sorted(self):
        p = pattern("x", "DOSE", {"like_num": True})
        spans = find_matches(p, raw_sent("1 a 2 b 3"))
        starts = [sp.start_token for sp in spans]
        assert starts == sorted(starts)
        for s1, s2 in zip(spans, spans[1:]):
            assert s1.end_token <= s2.start_token


def brute_force_reach(p: TokenPattern, sentence, start: int) -> set[int]:
    """All end positions reachable from ``start`` over every quantifier expansion."""
    bounds = {"1": (1, 1), "?": (0, 1), "+": (1, MAX_REPS), "*": (0, MAX_REPS)}
    tokens = sentence.tokens

    def ends(si, pos):
        if si == len(p.specs):
            return {pos}
        lo, hi = bounds[p.specs[si].op]
        out = set()
        for k in range(lo, hi + 1):
            if pos + k > len(tokens):
                break
            if not all(match_token(p.specs[si], tokens[pos + x]) for x in range(k)):
                break  # a longer run cannot match if this prefix does not
            out |= ends(si + 1, pos + k)
        return out

    return ends(0, start)


def brute_force_spans(p: TokenPattern, sentence) -> list[tuple[int, int]]:
    """Longest reachable end per start, non-overlapping, left to right."""
    spans = []
    pos = 0
    n = len(sentence.tokens)
    while pos < n:
        reach = brute_force_reach(p, sentence, pos)
        best = max(reach) if reach else pos
        if best > pos:
            spans.append((pos, best))
            pos = best
        else:
            pos += 1
    return spans


class TestBruteForceEquivalence:
    def test_random_small_patterns(self):
        rng = random.Random(99)
        vocab = ["1", "2", "cp", "mg", "matin", "et"]
        spec_pool = [
            {"like_num": True},
            {"is_digit": True},
            {"lower": ["cp", "mg"]},
            {"lower": ["matin"]},
            {"regex": "m.*"},
            {"lower": ["et"], "op": "?"},
            {"like_num": True, "op": "+"},
            {"lower": ["cp"], "op": "*"},
            {"regex": "[a-z]+", "op": "?"},
        ]
        for trial in range(300):
            n_specs = rng.randint(1, 4)
            specs = [dict(rng.choice(spec_pool)) for _ in range(n_specs)]
            try:
                p = pattern(f"t{trial}", "DOSE", *specs)
            except PatternError:
                continue
            words = [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
            s = raw_sent(" ".join(words))
            got = [(sp.start_token, sp.end_token) for sp in find_matches(p, s)]
            assert got == brute_force_spans(p, s), (specs, words)

    def test_every_span_revalidates(self):
        pats = default_patterns()
        s = sent("1 comprime matin et soir pendant 10 jours si douleur")
        for p in pats.patterns:
            for sp in find_matches(p, s):
                assert 0 <= sp.start_token < sp.end_token <= len(s.tokens)
                # replaying spec-by-spec consumption over the span succeeds
                assert sp.end_token in brute_force_reach(p, s, sp.start_token)


class TestFindAll:
    def make_set(self, *patterns_):
        return PatternSet(patterns_)

    def test_longest_same_label_wins(self):
        p1 = pattern("short", "DOSE", {"like_num": True}, {"lower": ["cp"]})
        p2 = pattern("long", "DOSE", {"like_num": True}, {"lower": ["cp"]}, {"lower": ["matin"]})
        spans = find_all(self.make_set(p1, p2), sent("1 cp matin"))
        assert len(spans) == 1
        assert spans[0].pattern_id == "long"

    def test_disjoint_labels_both_kept(self):
        p1 = pattern("d", "DOSE", {"like_num": True}, {"lower": ["cp"]})
        p2 = pattern("f", "FREQUENCY", {"lower": ["matin"]}, {"lower": ["et"]}, {"lower": ["soir"]})
        spans = find_all(self.make_set(p1, p2), sent("1 cp matin et soir"))
        assert {s.label for s in spans} == {"DOSE", "FREQUENCY"}

    def test_identical_spans_collapse(self):
        p1 = pattern("a", "DOSE", {"like_num": True}, {"lower": ["cp"]})
        p2 = pattern("b", "DOSE", {"is_digit": True}, {"lower": ["cp"]})
        spans = find_all(self.make_set(p1, p2), sent("1 cp"))
        assert len(spans) == 1
        assert spans[0].pattern_id == "a"

    def test_cross_label_overlap_kept(self):
        p1 = pattern("d", "DOSE", {"regex": "[0-9](?:-[0-9]){1,3}"})
        p2 = pattern("f", "FREQUENCY", {"regex": "[0-9](?:-[0-9]){1,3}"})
        spans = find_all(self.make_set(p1, p2), sent("1-0-1"))
        assert len(spans) == 2
        assert {s.label for s in spans} == {"DOSE", "FREQUENCY"}
        assert spans[0].start_token == spans[1].start_token


class TestPatternFile:
    def test_default_set_loads_with_inventory(self):
        pats = default_patterns()
        for label in ("DOSE", "FREQUENCY", "DURATION", "COMMENT"):
            assert len(pats.by_label[label]) >= 40, label

    def test_duplicate_id_rejected(self):
        data = [
            {"id": "a", "label": "DOSE", "specs": [{"like_num": True}]},
            {"id": "a", "label": "DOSE", "specs": [{"is_digit": True}]},
        ]
        with pytest.raises(PatternError):
            parse_patterns(data)

    def test_bad_label_rejected(self):
        with pytest.raises(PatternError):
            parse_patterns([{"id": "a", "label": "NOPE", "specs": [{"like_num": True}]}])

    def test_empty_specs_rejected(self):
        with pytest.raises(PatternError):
            parse_patterns([{"id": "a", "label": "DOSE", "specs": []}])

    def test_wildcard_requires_quantifier(self):
        with pytest.raises(PatternError):
            parse_patterns([{"id": "a", "label": "DOSE", "specs": [{}]}])
        ok = parse_patterns([{"id": "a", "label": "DOSE", "specs": [{"like_num": True}, {"op": "?"}]}])
        assert len(ok) == 1

    def test_bad_regex_rejected(self):
        with pytest.raises(PatternError):
            parse_patterns([{"id": "a", "label": "DOSE", "specs": [{"regex": "("}]}])

    def test_op_defaults_to_one(self):
        p = parse_patterns([{"id": "a", "label": "DOSE", "specs": [{"like_num": True}]}]).patterns[0]
        assert p.specs[0].op == "1"
