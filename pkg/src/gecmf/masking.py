"""Masking of single-edit instances for fill-mask correction.

Three strategies decide how many mask sentinels replace the residual span:
the original span length, the subword-piece length of the gold correction
(oracle), or a single mask. Deletions are never masked; they are applied
directly via apply_deletion.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import IO, Callable, Iterable, Iterator, Mapping, Sequence

from .core import EditKind, EditSet, TokenSeq, apply_edits, as_tokens
from .errors import ConfigurationError, EditError, ResidualKindError
from .expansion import SingleEditInstance

MASK_TOKEN = "[MASK]"

# Maps a whitespace-token sequence to subword pieces in the fill model's own
# vocabulary (`##` marks continuation pieces).
PieceTokenizer = Callable[[TokenSeq], Sequence[str]]


class MaskStrategy(enum.Enum):
    ORIGIN_SPAN = "origin"
    TARGET_LENGTH = "target"
    SINGLE = "single"


@dataclass(frozen=True, slots=True)
class MaskedInstance:
    """A token sequence with a contiguous block of mask sentinels.

    ``gold_pieces`` carries the subword segmentation of the gold replacement
    and is present exactly for the target-length strategy, whose mask count is
    defined by it.
    """

    tokens: TokenSeq
    mask_positions: tuple[int, ...]
    gold_replacement: TokenSeq
    instance_id: str = ""
    gold_pieces: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", as_tokens(self.tokens))
        positions = tuple(self.mask_positions)
        object.__setattr__(self, "mask_positions", positions)
        if not positions:
            raise EditError("masked instance has no mask positions")
        for a, b in zip(positions, positions[1:]):
            if b != a + 1:
                raise EditError(f"mask positions not contiguous ascending: {positions}")
        for i, token in enumerate(self.tokens):
            if (token == MASK_TOKEN) != (i in positions):
                raise EditError(
                    f"token {i} ({token!r}) disagrees with mask positions {positions}"
                )


def mask_instance(
    instance: SingleEditInstance,
    strategy: MaskStrategy,
    piece_tokenizer: PieceTokenizer | None = None,
) -> MaskedInstance:
    """Replace the residual span with mask sentinels under the given strategy.

    Insertions splice sentinels into their gap. The origin-span strategy uses
    max(1, span length) sentinels so insertions still get one mask; the
    target-length strategy needs ``piece_tokenizer`` to segment the gold
    replacement and uses one sentinel per piece.
    """
    residual = instance.residual
    if residual.kind is EditKind.DELETION:
        raise ResidualKindError(
            f"instance {instance.instance_id or '<anonymous>'} has a deletion residual; "
            "deletions are not masked, apply them with apply_deletion"
        )
    gold_pieces: tuple[str, ...] | None = None
    if strategy is MaskStrategy.ORIGIN_SPAN:
        n_masks = max(1, residual.span_length)
    elif strategy is MaskStrategy.SINGLE:
        n_masks = 1
    elif strategy is MaskStrategy.TARGET_LENGTH:
        if piece_tokenizer is None:
            raise ConfigurationError("target-length masking requires a piece tokenizer")
        gold_pieces = tuple(piece_tokenizer(residual.replacement))
        if not gold_pieces:
            raise ConfigurationError(
                f"piece tokenizer returned no pieces for {residual.replacement!r}"
            )
        n_masks = len(gold_pieces)
    else:  # pragma: no cover
        raise ConfigurationError(f"unknown strategy {strategy!r}")

    tokens = (
        instance.source[: residual.start]
        + (MASK_TOKEN,) * n_masks
        + instance.source[residual.end :]
    )
    return MaskedInstance(
        tokens=tokens,
        mask_positions=tuple(range(residual.start, residual.start + n_masks)),
        gold_replacement=residual.replacement,
        instance_id=instance.instance_id,
        gold_pieces=gold_pieces,
    )


def apply_deletion(instance: SingleEditInstance) -> TokenSeq:
    """Resolve a deletion residual by splicing its span out of the source."""
    if instance.residual.kind is not EditKind.DELETION:
        raise ResidualKindError(
            f"instance {instance.instance_id or '<anonymous>'} has a "
            f"{instance.residual.kind.value} residual, not a deletion"
        )
    return apply_edits(instance.source, EditSet((instance.residual,)))


# --- masked record files ---------------------------------------------------------
#
# One JSON object per line:
#   {"instance_id": ..., "strategy": ..., "tokens": [...], "mask_positions": [...],
#    "gold_replacement": [...], "gold_pieces": [...] | null}


def masked_to_record(masked: MaskedInstance, strategy: MaskStrategy | None = None) -> dict:
    record = {
        "instance_id": masked.instance_id,
        "tokens": list(masked.tokens),
        "mask_positions": list(masked.mask_positions),
        "gold_replacement": list(masked.gold_replacement),
        "gold_pieces": list(masked.gold_pieces) if masked.gold_pieces is not None else None,
    }
    if strategy is not None:
        record["strategy"] = strategy.value
    return record


def masked_from_record(record: Mapping) -> MaskedInstance:
    pieces = record.get("gold_pieces")
    return MaskedInstance(
        tokens=as_tokens(record["tokens"]),
        mask_positions=tuple(record["mask_positions"]),
        gold_replacement=as_tokens(record["gold_replacement"]),
        instance_id=record.get("instance_id", ""),
        gold_pieces=tuple(pieces) if pieces is not None else None,
    )


def write_masked(masked: Iterable[MaskedInstance], stream: IO[str], strategy: MaskStrategy | None = None) -> int:
    count = 0
    for item in masked:
        stream.write(json.dumps(masked_to_record(item, strategy), ensure_ascii=False) + "\n")
        count += 1
    return count


def read_masked(stream: IO[str]) -> Iterator[MaskedInstance]:
    for line in stream:
        line = line.strip()
        if line:
            yield masked_from_record(json.loads(line))
