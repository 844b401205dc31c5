"""Domain types for token sequences and edits, edit application, and M2 corpus I/O.

Sentences are pre-tokenized: a sentence is an ordered tuple of surface tokens
and is never re-tokenized at this layer (M2 span indices refer to these tokens).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import (
    EditApplicationError,
    EditError,
    M2ParseError,
    M2ValidationError,
    TokenError,
)

# A tokenized sentence: ordered surface tokens, each non-empty and whitespace-free.
TokenSeq = tuple[str, ...]

NOOP_TYPE = "noop"
EMPTY_REPLACEMENT = "-NONE-"


def as_tokens(tokens: Iterable[str]) -> TokenSeq:
    """Validate and freeze an iterable of surface tokens into a TokenSeq."""
    out = tuple(tokens)
    for tok in out:
        if not isinstance(tok, str) or not tok:
            raise TokenError(f"empty or non-string token in {out!r}")
        if any(ch.isspace() for ch in tok):
            raise TokenError(f"token contains whitespace: {tok!r}")
    return out


class EditKind(enum.Enum):
    SUBSTITUTION = "substitution"
    INSERTION = "insertion"
    DELETION = "deletion"


@dataclass(frozen=True, slots=True)
class Edit:
    """A half-open token span [start, end) on a source sentence plus its replacement.

    The kind is determined by the span and replacement: an empty span with a
    nonempty replacement is an insertion at gap ``start``, a nonempty span with
    an empty replacement is a deletion, and the remaining case is a
    substitution. An empty span with an empty replacement (a null edit) is
    rejected.
    """

    start: int
    end: int
    replacement: TokenSeq

    def __post_init__(self):
        object.__setattr__(self, "replacement", as_tokens(self.replacement))
        if self.start < 0 or self.end < self.start:
            raise EditError(f"invalid span ({self.start}, {self.end})")
        if self.start == self.end and not self.replacement:
            raise EditError(f"null edit at gap {self.start} (empty span, empty replacement)")

    @property
    def kind(self) -> EditKind:
        if self.start == self.end:
            return EditKind.INSERTION
        if not self.replacement:
            return EditKind.DELETION
        return EditKind.SUBSTITUTION

    @property
    def span_length(self) -> int:
        return self.end - self.start

    def shifted(self, offset: int) -> "Edit":
        """The same edit with both span indices moved by ``offset``."""
        return Edit(self.start + offset, self.end + offset, self.replacement)


@dataclass(frozen=True, slots=True)
class EditSet:
    """Edits on one source sentence, sorted by (start, end).

    Span interiors must be disjoint; edits may touch at a boundary, and each
    gap index carries at most one insertion.
    """

    edits: tuple[Edit, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.edits, key=lambda e: (e.start, e.end)))
        object.__setattr__(self, "edits", ordered)
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.start < prev.end:
                raise EditError(f"overlapping edit spans: {prev} and {cur}")
            if (
                prev.kind is EditKind.INSERTION
                and cur.kind is EditKind.INSERTION
                and prev.start == cur.start
            ):
                raise EditError(f"two insertions at gap {cur.start}")

    def __iter__(self) -> Iterator[Edit]:
        return iter(self.edits)

    def __len__(self) -> int:
        return len(self.edits)

    def __bool__(self) -> bool:
        return bool(self.edits)


@dataclass(frozen=True, slots=True)
class AnnotatedSentence:
    """A source sentence with one annotator's gold edits."""

    source: TokenSeq
    gold: EditSet = field(default_factory=EditSet)
    annotator_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "source", as_tokens(self.source))
        for edit in self.gold:
            if edit.end > len(self.source):
                raise EditError(
                    f"edit span ({edit.start}, {edit.end}) exceeds source length {len(self.source)}"
                )


def apply_edits(source: TokenSeq, edits: EditSet) -> TokenSeq:
    """Apply an edit set left to right, shifting later spans by the cumulative offset.

    The output length is ``len(source) + sum(len(replacement) - span_length)``.
    Raises EditApplicationError if any span falls outside the source.
    """
    for edit in edits:
        if edit.end > len(source):
            raise EditApplicationError(
                f"edit span ({edit.start}, {edit.end}) out of range for source of "
                f"length {len(source)}",
                edit=edit,
            )
    out = list(source)
    offset = 0
    for edit in edits:
        out[edit.start + offset : edit.end + offset] = edit.replacement
        offset += len(edit.replacement) - edit.span_length
    return tuple(out)


# --- M2 format ---------------------------------------------------------------
#
# A sentence block is an `S` line of space-separated tokens followed by zero or
# more `A` lines:
#
#   A <start> <end>|||<type>|||<replacement>|||REQUIRED|||-NONE-|||<annotator>
#
# Blocks are separated by blank lines. `-NONE-` denotes an empty replacement;
# a `noop` annotation records an annotator who made no corrections.


def _parse_a_line(line: str, line_no: int):
    """Returns (annotator_id, None) for noop, else (annotator_id, (start, end, replacement))."""
    body = line[2:]
    fields = body.split("|||")
    if len(fields) != 6:
        raise M2ParseError(f"expected 6 '|||'-separated fields in A line, got {len(fields)}", line_no)
    span_part, edit_type, replacement_part = fields[0], fields[1], fields[2]
    span_fields = span_part.split()
    if len(span_fields) != 2:
        raise M2ParseError(f"expected two span offsets, got {span_part!r}", line_no)
    try:
        start, end = int(span_fields[0]), int(span_fields[1])
    except ValueError:
        raise M2ParseError(f"non-integer span offsets {span_part!r}", line_no) from None
    try:
        annotator = int(fields[5])
    except ValueError:
        raise M2ParseError(f"non-integer annotator id {fields[5]!r}", line_no) from None
    if annotator < 0:
        raise M2ParseError(f"negative annotator id {annotator}", line_no)
    if edit_type == NOOP_TYPE:
        return annotator, None
    if start < 0 or end < start:
        raise M2ParseError(f"invalid span ({start}, {end})", line_no)
    if replacement_part == EMPTY_REPLACEMENT or replacement_part == "":
        replacement: TokenSeq = ()
    else:
        replacement = as_tokens(replacement_part.split())
    if start == end and not replacement:
        raise M2ValidationError(f"null edit at gap {start}", line_no)
    return annotator, (start, end, replacement)


def _finish_block(source, raw_edits, annotators, start_line):
    """Build one AnnotatedSentence per annotator seen in the block."""
    sentences = []
    for annotator in sorted(annotators):
        spans = raw_edits.get(annotator, [])
        # Same-gap insertions merge by concatenating replacements in file order.
        merged: list[tuple[int, int, TokenSeq]] = []
        gap_slot: dict[int, int] = {}
        for start, end, replacement in spans:
            if start == end and replacement and start in gap_slot:
                i = gap_slot[start]
                merged[i] = (start, end, merged[i][2] + replacement)
                continue
            if start == end and replacement:
                gap_slot[start] = len(merged)
            merged.append((start, end, replacement))
        try:
            gold = EditSet(tuple(Edit(s, e, r) for s, e, r in merged))
            sentences.append(AnnotatedSentence(source, gold, annotator))
        except EditError as err:
            raise M2ValidationError(str(err), start_line) from err
    return sentences


def parse_m2(text: str | Iterable[str]) -> list[AnnotatedSentence]:
    """Parse M2 text into one AnnotatedSentence per sentence block per annotator.

    A block with no A lines yields a single sentence for annotator 0 with an
    empty edit set.
    """
    lines = text.splitlines() if isinstance(text, str) else [l.rstrip("\n") for l in text]
    sentences: list[AnnotatedSentence] = []
    source: TokenSeq | None = None
    raw_edits: dict[int, list[tuple[int, int, TokenSeq]]] = {}
    annotators: set[int] = set()
    block_line = 0

    def close_block():
        nonlocal source, raw_edits, annotators
        if source is None:
            return
        if not annotators:
            annotators.add(0)
        sentences.extend(_finish_block(source, raw_edits, annotators, block_line))
        source, raw_edits, annotators = None, {}, set()

    for line_no, line in enumerate(lines, 1):
        stripped = line.rstrip()
        if not stripped:
            close_block()
            continue
        if stripped.startswith("S ") or stripped == "S":
            if source is not None:
                close_block()
            try:
                source = as_tokens(stripped[2:].split())
            except TokenError as err:
                raise M2ParseError(str(err), line_no) from err
            block_line = line_no
        elif stripped.startswith("A "):
            if source is None:
                raise M2ParseError("A line before any S line", line_no)
            annotator, parsed = _parse_a_line(stripped, line_no)
            annotators.add(annotator)
            if parsed is not None:
                raw_edits.setdefault(annotator, []).append(parsed)
        else:
            raise M2ParseError(f"unrecognized line {stripped[:40]!r}", line_no)
    close_block()
    return sentences


_TYPE_BY_KIND = {
    EditKind.SUBSTITUTION: "R:OTHER",
    EditKind.INSERTION: "M:OTHER",
    EditKind.DELETION: "U:OTHER",
}


def _format_a_line(edit: Edit, annotator: int) -> str:
    replacement = " ".join(edit.replacement) if edit.replacement else EMPTY_REPLACEMENT
    return (
        f"A {edit.start} {edit.end}|||{_TYPE_BY_KIND[edit.kind]}|||{replacement}"
        f"|||REQUIRED|||-NONE-|||{annotator}"
    )


def _noop_line(annotator: int) -> str:
    return f"A -1 -1|||{NOOP_TYPE}|||{EMPTY_REPLACEMENT}|||REQUIRED|||-NONE-|||{annotator}"


def serialize_m2(sentences: Iterable[AnnotatedSentence]) -> str:
    """Serialize sentences to M2 text; parse_m2(serialize_m2(x)) == x.

    Consecutive sentences sharing a source collapse into one block (the normal
    multi-annotator layout). An empty edit set serializes as an explicit noop
    line when the block has other annotators or a nonzero annotator id, and as
    a bare S line otherwise.
    """
    blocks: list[list[AnnotatedSentence]] = []
    for sentence in sentences:
        if (
            blocks
            and blocks[-1][0].source == sentence.source
            and sentence.annotator_id not in {s.annotator_id for s in blocks[-1]}
        ):
            blocks[-1].append(sentence)
        else:
            blocks.append([sentence])
    out: list[str] = []
    for block in blocks:
        out.append("S " + " ".join(block[0].source) if block[0].source else "S")
        for sentence in block:
            if not sentence.gold:
                if len(block) > 1 or sentence.annotator_id != 0:
                    out.append(_noop_line(sentence.annotator_id))
            else:
                for edit in sentence.gold:
                    out.append(_format_a_line(edit, sentence.annotator_id))
        out.append("")
    return "\n".join(out) + "\n" if out else ""
