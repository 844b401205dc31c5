"""Expansion of multi-edit sentences into single-edit instances, and projection
of the residual edit into per-token error labels.

Each instance applies every gold correction except one; the remaining edit is
re-indexed onto the partially corrected sentence so that applying it alone
yields the fully corrected sentence. Labels live on tokens for substitutions
and deletions and on gap indices for insertions; flattening produces the flat
four-label view (remain/substitution/insert/delete) used for export.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

from .core import AnnotatedSentence, Edit, EditKind, EditSet, TokenSeq, apply_edits, as_tokens
from .errors import EditError

EACH_EDIT = "each-edit"
LAST_EDIT = "last-edit"


@dataclass(frozen=True, slots=True)
class SingleEditInstance:
    """A sentence with exactly one residual gold edit left to correct."""

    instance_id: str
    source: TokenSeq
    residual: Edit
    origin_sentence_id: str = ""
    scheme: str = ""

    def __post_init__(self):
        object.__setattr__(self, "source", as_tokens(self.source))
        if self.residual.end > len(self.source):
            raise EditError(
                f"residual span ({self.residual.start}, {self.residual.end}) exceeds "
                f"source length {len(self.source)}"
            )

    @property
    def corrected(self) -> TokenSeq:
        """The fully corrected sentence: the residual applied to this source."""
        return apply_edits(self.source, EditSet((self.residual,)))


def _instance_for(sentence: AnnotatedSentence, index: int, sentence_id: str, scheme: str) -> SingleEditInstance:
    edits = sentence.gold.edits
    applied = EditSet(edits[:index] + edits[index + 1 :])
    offset = sum(len(e.replacement) - e.span_length for e in edits[:index])
    return SingleEditInstance(
        instance_id=f"{sentence_id}/{scheme}/{index}",
        source=apply_edits(sentence.source, applied),
        residual=edits[index].shifted(offset),
        origin_sentence_id=sentence_id,
        scheme=scheme,
    )


def expand_each_edit(sentence: AnnotatedSentence, sentence_id: str = "s0") -> list[SingleEditInstance]:
    """One instance per gold edit, each with all other corrections applied."""
    return [
        _instance_for(sentence, i, sentence_id, EACH_EDIT)
        for i in range(len(sentence.gold))
    ]


def expand_last_edit(sentence: AnnotatedSentence, sentence_id: str = "s0") -> SingleEditInstance | None:
    """One instance whose residual is the positionally last gold edit, if any.

    "Last" means greatest start, ties broken by greatest end; the edit set is
    kept in that order, so this is its final element.
    """
    if not sentence.gold:
        return None
    return _instance_for(sentence, len(sentence.gold) - 1, sentence_id, LAST_EDIT)


def expand_corpus(
    sentences: Iterable[AnnotatedSentence],
    scheme: str,
    annotator_id: int = 0,
) -> list[SingleEditInstance]:
    """Expand every sentence of one annotator under the given scheme.

    Zero-edit sentences contribute no instances.
    """
    if scheme not in (EACH_EDIT, LAST_EDIT):
        raise ValueError(f"unknown expansion scheme {scheme!r}")
    instances: list[SingleEditInstance] = []
    index = 0
    for sentence in sentences:
        if sentence.annotator_id != annotator_id:
            continue
        sentence_id = f"s{index}"
        index += 1
        if scheme == EACH_EDIT:
            instances.extend(expand_each_edit(sentence, sentence_id))
        else:
            instance = expand_last_edit(sentence, sentence_id)
            if instance is not None:
                instances.append(instance)
    return instances


# --- label projection ---------------------------------------------------------


class TokenLabel(enum.Enum):
    REMAIN = "remain"
    SUBSTITUTION = "substitution"
    DELETE = "delete"


class FlatLabel(enum.Enum):
    REMAIN = "remain"
    SUBSTITUTION = "substitution"
    INSERT = "insert"
    DELETE = "delete"


@dataclass(frozen=True, slots=True)
class LabelSeq:
    """Per-token labels plus insertion lengths carried on gap indices.

    Keeping insertions on gaps is lossless even when an insertion sits next to
    another edit; flatten_labels produces the flat four-label view.
    """

    token_labels: tuple[TokenLabel, ...]
    gap_insertions: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "gap_insertions", dict(self.gap_insertions))
        for gap, length in self.gap_insertions.items():
            if not 0 <= gap <= len(self.token_labels):
                raise EditError(f"gap index {gap} out of range")
            if length < 1:
                raise EditError(f"insertion length {length} at gap {gap} must be positive")


@dataclass(frozen=True, slots=True)
class FlatLabels:
    """Flat per-token labels over remain/substitution/insert/delete.

    ``end_insertion`` marks an insertion at the sentence-final gap (there is no
    following token to carry it); ``ambiguous`` is set when an insertion gap
    precedes a token that already carries a non-remain label, in which case the
    token keeps its own label.
    """

    labels: tuple[FlatLabel, ...]
    end_insertion: bool = False
    ambiguous: bool = False


def project_labels(instance: SingleEditInstance) -> LabelSeq:
    """Label the instance source according to its residual edit."""
    labels = [TokenLabel.REMAIN] * len(instance.source)
    residual = instance.residual
    if residual.kind is EditKind.INSERTION:
        return LabelSeq(tuple(labels), {residual.start: len(residual.replacement)})
    mark = TokenLabel.DELETE if residual.kind is EditKind.DELETION else TokenLabel.SUBSTITUTION
    for i in range(residual.start, residual.end):
        labels[i] = mark
    return LabelSeq(tuple(labels))


_FLAT_BY_TOKEN = {
    TokenLabel.REMAIN: FlatLabel.REMAIN,
    TokenLabel.SUBSTITUTION: FlatLabel.SUBSTITUTION,
    TokenLabel.DELETE: FlatLabel.DELETE,
}


def flatten_labels(labels: LabelSeq) -> FlatLabels:
    """Flatten gap insertions onto the following token.

    The token after an insertion gap is relabeled ``insert`` when it is
    otherwise unmarked; a final-gap insertion sets ``end_insertion`` instead.
    """
    flat = [_FLAT_BY_TOKEN[lab] for lab in labels.token_labels]
    end_insertion = False
    ambiguous = False
    for gap in sorted(labels.gap_insertions):
        if gap == len(flat):
            end_insertion = True
        elif flat[gap] is FlatLabel.REMAIN:
            flat[gap] = FlatLabel.INSERT
        else:
            ambiguous = True
    return FlatLabels(tuple(flat), end_insertion=end_insertion, ambiguous=ambiguous)


def decode_labels(labels: LabelSeq) -> tuple[int, int, EditKind]:
    """Recover the residual's (start, end, kind) from a projected label sequence."""
    if labels.gap_insertions:
        if len(labels.gap_insertions) != 1:
            raise EditError("label sequence carries more than one insertion gap")
        gap = next(iter(labels.gap_insertions))
        return gap, gap, EditKind.INSERTION
    marked = [i for i, lab in enumerate(labels.token_labels) if lab is not TokenLabel.REMAIN]
    if not marked:
        raise EditError("label sequence carries no edit")
    start, end = marked[0], marked[-1] + 1
    kinds = {labels.token_labels[i] for i in marked}
    if len(marked) != end - start or len(kinds) != 1:
        raise EditError("marked tokens do not form a single contiguous span of one kind")
    kind = EditKind.DELETION if kinds == {TokenLabel.DELETE} else EditKind.SUBSTITUTION
    return start, end, kind


# --- instance record files ------------------------------------------------------
#
# One JSON object per line:
#   {"instance_id": ..., "origin_sentence_id": ..., "scheme": ...,
#    "tokens": [...], "residual": {"start": S, "end": E, "replacement": [...]}}


def instance_to_record(instance: SingleEditInstance) -> dict:
    return {
        "instance_id": instance.instance_id,
        "origin_sentence_id": instance.origin_sentence_id,
        "scheme": instance.scheme,
        "tokens": list(instance.source),
        "residual": {
            "start": instance.residual.start,
            "end": instance.residual.end,
            "replacement": list(instance.residual.replacement),
        },
    }


def instance_from_record(record: Mapping) -> SingleEditInstance:
    residual = record["residual"]
    return SingleEditInstance(
        instance_id=record["instance_id"],
        source=as_tokens(record["tokens"]),
        residual=Edit(residual["start"], residual["end"], as_tokens(residual["replacement"])),
        origin_sentence_id=record.get("origin_sentence_id", ""),
        scheme=record.get("scheme", ""),
    )


def write_instances(instances: Iterable[SingleEditInstance], stream: IO[str]) -> int:
    count = 0
    for instance in instances:
        stream.write(json.dumps(instance_to_record(instance), ensure_ascii=False) + "\n")
        count += 1
    return count


def read_instances(stream: IO[str]) -> Iterator[SingleEditInstance]:
    for line in stream:
        line = line.strip()
        if line:
            yield instance_from_record(json.loads(line))
