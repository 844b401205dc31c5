"""Core domain types, edit application, and M2 round-trips."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gecmf.core import (
    AnnotatedSentence,
    Edit,
    EditKind,
    EditSet,
    apply_edits,
    as_tokens,
    parse_m2,
    serialize_m2,
)
from gecmf.errors import (
    EditApplicationError,
    EditError,
    M2ParseError,
    M2ValidationError,
    TokenError,
)

from conftest import sentences_with_edits


def splice_oracle(source, edits):
    """Independent edit application: splice right to left, no offset arithmetic."""
    out = list(source)
    for edit in sorted(edits, key=lambda e: (e.start, e.end), reverse=True):
        out[edit.start : edit.end] = edit.replacement
    return tuple(out)


class TestTokens:
    def test_valid(self):
        assert as_tokens(["a", "b,c", "Ω"]) == ("a", "b,c", "Ω")

    @pytest.mark.parametrize("bad", [[""], ["a b"], ["a\tb"], ["x", "\n"]])
    def test_rejects_whitespace_and_empty(self, bad):
        with pytest.raises(TokenError):
            as_tokens(bad)


class TestEdit:
    def test_kinds(self):
        assert Edit(1, 2, ("x",)).kind is EditKind.SUBSTITUTION
        assert Edit(1, 1, ("x",)).kind is EditKind.INSERTION
        assert Edit(1, 2, ()).kind is EditKind.DELETION

    def test_null_edit_forbidden(self):
        with pytest.raises(EditError):
            Edit(1, 1, ())

    def test_bad_span(self):
        with pytest.raises(EditError):
            Edit(2, 1, ("x",))
        with pytest.raises(EditError):
            Edit(-1, 0, ("x",))


class TestEditSet:
    def test_sorts(self):
        es = EditSet((Edit(3, 4, ("y",)), Edit(0, 1, ("x",))))
        assert [e.start for e in es] == [0, 3]

    def test_rejects_overlap(self):
        with pytest.raises(EditError):
            EditSet((Edit(0, 2, ("x",)), Edit(1, 3, ("y",))))

    def test_rejects_insertion_inside_span(self):
        with pytest.raises(EditError):
            EditSet((Edit(1, 3, ("x",)), Edit(2, 2, ("y",))))

    def test_rejects_two_insertions_same_gap(self):
        with pytest.raises(EditError):
            EditSet((Edit(1, 1, ("x",)), Edit(1, 1, ("y",))))

    def test_touching_allowed(self):
        es = EditSet((Edit(0, 1, ("x",)), Edit(1, 2, ("y",)), Edit(2, 2, ("z",))))
        assert len(es) == 3


class TestApplyEdits:
    def test_identity_on_empty(self):
        assert apply_edits(("a", "b"), EditSet()) == ("a", "b")

    def test_substitution(self):
        # "recomend" -> "recommend" in place
        source = ("is", "to", "recomend", "you", "to", "visit")
        out = apply_edits(source, EditSet((Edit(2, 3, ("recommend",)),)))
        assert out == ("is", "to", "recommend", "you", "to", "visit")

    def test_mixed_left_to_right(self):
        out = apply_edits(("a", "b", "c"), EditSet((Edit(0, 1, ("x",)), Edit(2, 3, ()))))
        assert out == ("x", "b")

    def test_out_of_range(self):
        with pytest.raises(EditApplicationError) as exc:
            apply_edits(("a",), EditSet((Edit(0, 2, ("x",)),)))
        assert exc.value.edit == Edit(0, 2, ("x",))

    @given(sentences_with_edits())
    def test_matches_splice_oracle(self, sentence):
        assert apply_edits(sentence.source, sentence.gold) == splice_oracle(
            sentence.source, sentence.gold
        )

    @given(sentences_with_edits())
    def test_output_length_formula(self, sentence):
        out = apply_edits(sentence.source, sentence.gold)
        delta = sum(len(e.replacement) - e.span_length for e in sentence.gold)
        assert len(out) == len(sentence.source) + delta


class TestParseM2:
    def test_no_annotations(self):
        sentences = parse_m2("S a b c\n")
        assert sentences == [AnnotatedSentence(("a", "b", "c"), EditSet(), 0)]

    def test_substitution_line(self):
        sentences = parse_m2("S a b c\nA 1 2|||R:OTHER|||x|||REQUIRED|||-NONE-|||0\n")
        assert sentences[0].gold.edits == (Edit(1, 2, ("x",)),)
        assert sentences[0].gold.edits[0].kind is EditKind.SUBSTITUTION

    def test_insertion_line(self):
        sentences = parse_m2("S a b\nA 1 1|||M:PUNCT|||,|||REQUIRED|||-NONE-|||0\n")
        assert sentences[0].gold.edits == (Edit(1, 1, (",",)),)
        assert sentences[0].gold.edits[0].kind is EditKind.INSERTION

    def test_none_replacement_is_deletion(self):
        sentences = parse_m2("S a b\nA 0 1|||U:DET|||-NONE-|||REQUIRED|||-NONE-|||0\n")
        assert sentences[0].gold.edits[0].kind is EditKind.DELETION

    def test_noop_yields_empty_set(self):
        sentences = parse_m2("S a b\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n")
        assert sentences == [AnnotatedSentence(("a", "b"), EditSet(), 0)]

    def test_multiple_annotators_split(self):
        text = (
            "S a b\n"
            "A 0 1|||R:X|||x|||REQUIRED|||-NONE-|||0\n"
            "A 1 2|||R:X|||y|||REQUIRED|||-NONE-|||1\n"
        )
        sentences = parse_m2(text)
        assert [s.annotator_id for s in sentences] == [0, 1]
        assert sentences[0].gold.edits == (Edit(0, 1, ("x",)),)
        assert sentences[1].gold.edits == (Edit(1, 2, ("y",)),)

    def test_same_gap_insertions_merge_in_file_order(self):
        text = (
            "S he is good man\n"
            "A 2 2|||M:DET|||a|||REQUIRED|||-NONE-|||0\n"
            "A 2 2|||M:ADV|||very|||REQUIRED|||-NONE-|||0\n"
        )
        (sentence,) = parse_m2(text)
        assert sentence.gold.edits == (Edit(2, 2, ("a", "very")),)

    def test_malformed_line_reports_line_number(self):
        with pytest.raises(M2ParseError) as exc:
            parse_m2("S a b\nA 0 1|||R:X|||x\n")
        assert exc.value.line == 2

    def test_non_integer_span(self):
        with pytest.raises(M2ParseError):
            parse_m2("S a\nA q 1|||R:X|||x|||REQUIRED|||-NONE-|||0\n")

    def test_overlapping_edits_rejected(self):
        text = (
            "S a b c d\n"
            "A 0 2|||R:X|||x|||REQUIRED|||-NONE-|||0\n"
            "A 1 3|||R:X|||y|||REQUIRED|||-NONE-|||0\n"
        )
        with pytest.raises(M2ValidationError):
            parse_m2(text)

    def test_unknown_line_rejected(self):
        with pytest.raises(M2ParseError):
            parse_m2("S a\nB nonsense\n")

    def test_span_beyond_sentence_rejected(self):
        with pytest.raises((M2ValidationError, M2ParseError)):
            parse_m2("S a\nA 0 5|||R:X|||x|||REQUIRED|||-NONE-|||0\n")


class TestSerializeM2:
    def test_empty(self):
        assert serialize_m2([]) == ""

    def test_single_clean_sentence(self):
        assert serialize_m2([AnnotatedSentence(("a", "b", "c"), EditSet(), 0)]) == "S a b c\n\n"

    def test_substitution_roundtrip_bytes(self):
        text = "S a b c\nA 1 2|||R:OTHER|||x|||REQUIRED|||-NONE-|||0\n\n"
        assert serialize_m2(parse_m2(text)) == text

    def test_noop_written_for_secondary_annotator(self):
        sentence = AnnotatedSentence(("a",), EditSet(), annotator_id=2)
        text = serialize_m2([sentence])
        assert "noop" in text
        assert parse_m2(text) == [sentence]

    @given(st.lists(sentences_with_edits(), max_size=5))
    def test_roundtrip_generated(self, sentences):
        assert parse_m2(serialize_m2(sentences)) == sentences

    def test_roundtrip_fixture_file(self, sample_m2_text):
        sentences = parse_m2(sample_m2_text)
        assert parse_m2(serialize_m2(sentences)) == sentences
        # spot checks on the fixture's trickier blocks
        by_annotator = {}
        for s in sentences:
            by_annotator.setdefault(tuple(s.source), []).append(s)
        merged = by_annotator[("He", "is", "good", "man")][0]
        assert merged.gold.edits == (Edit(2, 2, ("a", "very")),)

    def test_roundtrip_synthetic_corpus(self, synthetic_corpus):
        assert parse_m2(serialize_m2(synthetic_corpus)) == synthetic_corpus
