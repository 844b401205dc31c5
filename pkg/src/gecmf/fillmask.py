"""Fill-mask backends and candidate assembly.

A FillModel produces ranked candidate subword pieces for every mask sentinel
and segments token sequences into its own subword vocabulary. Two mocks run
offline (a gold oracle and a frequency-lexicon baseline); RemoteClient speaks
the HTTP/JSON protocol of the model server. Pieces follow the wordpiece
convention: a leading ``##`` marks a continuation that concatenates onto the
preceding piece.
"""

from __future__ import annotations

import json
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import httpx

from .core import TokenSeq, as_tokens
from .errors import (
    CandidateRankError,
    ConfigurationError,
    PieceMergeError,
    ProtocolError,
    TransportError,
)
from .masking import MaskedInstance

CONTINUATION = "##"


@dataclass(frozen=True, slots=True)
class Candidate:
    """One ranked prediction for a mask position."""

    piece: str
    log_prob: float

    def __post_init__(self):
        if not self.piece:
            raise ConfigurationError("candidate piece must be nonempty")
        if not math.isfinite(self.log_prob) or self.log_prob > 0:
            raise ConfigurationError(f"log_prob must be finite and <= 0, got {self.log_prob}")


@dataclass(frozen=True, slots=True)
class PredictionSet:
    """Ranked candidate lists, one per mask position.

    Lists produced by a fill call are sorted by log probability descending
    with ties broken by ascending piece; reranking may reorder them.
    """

    per_mask: tuple[tuple[Candidate, ...], ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "per_mask", tuple(tuple(c) for c in self.per_mask))
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        for i, candidates in enumerate(self.per_mask):
            if len(candidates) > self.k:
                raise ConfigurationError(
                    f"mask {i} has {len(candidates)} candidates, more than k={self.k}"
                )

    def ranked_order_violation(self) -> str | None:
        """Describe the first place a list breaks the fill-output sort contract."""
        for i, candidates in enumerate(self.per_mask):
            for a, b in zip(candidates, candidates[1:]):
                if a.log_prob < b.log_prob or (a.log_prob == b.log_prob and a.piece >= b.piece):
                    return f"mask {i}: {a.piece!r}@{a.log_prob} before {b.piece!r}@{b.log_prob}"
        return None


class FillModel(ABC):
    """A fill-mask oracle plus the subword segmenter that goes with it."""

    model_id: str = "unknown"

    @abstractmethod
    def fill(self, masked: MaskedInstance, k: int) -> PredictionSet:
        """Top-k candidates for every mask position of the instance."""

    @abstractmethod
    def pieces(self, tokens: TokenSeq) -> tuple[str, ...]:
        """Segment whitespace tokens into this model's subword pieces."""

    def count_pieces(self, tokens: TokenSeq) -> int:
        return len(self.pieces(tokens))


def fill(model: FillModel, masked: MaskedInstance, k: int) -> PredictionSet:
    """Run the model on a masked instance and check the response contract."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    predictions = model.fill(masked, k)
    if len(predictions.per_mask) != len(masked.mask_positions):
        raise ProtocolError(
            f"model {model.model_id!r} returned {len(predictions.per_mask)} candidate "
            f"lists for {len(masked.mask_positions)} masks"
        )
    violation = predictions.ranked_order_violation()
    if violation is not None:
        raise ProtocolError(f"model {model.model_id!r} returned unsorted candidates: {violation}")
    return predictions


def merge_pieces(pieces: Sequence[str]) -> TokenSeq:
    """Concatenate continuation pieces onto their predecessors.

    ``["ad", "##e", "##quate"]`` becomes ``("adequate",)``. The first piece
    must not be a continuation.
    """
    if not pieces:
        return ()
    if pieces[0].startswith(CONTINUATION):
        raise PieceMergeError(f"leading continuation piece {pieces[0]!r}")
    tokens: list[str] = []
    for piece in pieces:
        if piece.startswith(CONTINUATION):
            tokens[-1] += piece[len(CONTINUATION) :]
        else:
            tokens.append(piece)
    return as_tokens(tokens)


def assemble_hypothesis(masked: MaskedInstance, predictions: PredictionSet, rank: int) -> TokenSeq:
    """Fill every mask with its rank-th candidate and merge the filled region.

    Only the mask block is merged; context tokens are spliced back unchanged.
    A continuation marker on the first filled piece is stripped, since there
    is no piece inside the region for it to continue.
    """
    if rank < 1:
        raise ConfigurationError(f"rank must be >= 1, got {rank}")
    fills: list[str] = []
    for i, candidates in enumerate(predictions.per_mask):
        if rank > len(candidates):
            raise CandidateRankError(
                f"mask {i}: rank {rank} exceeds the {len(candidates)} available candidates",
                mask_index=i,
            )
        fills.append(candidates[rank - 1].piece)
    if fills and fills[0].startswith(CONTINUATION) and len(fills[0]) > len(CONTINUATION):
        fills[0] = fills[0][len(CONTINUATION) :]
    merged = merge_pieces(fills)
    start = masked.mask_positions[0]
    end = masked.mask_positions[-1] + 1
    return masked.tokens[:start] + merged + masked.tokens[end:]


# --- mock backends -----------------------------------------------------------


def _rank_log_prob(rank: int) -> float:
    # Strictly decreasing, tie-free, always < 0.
    return -0.1 * rank


class GoldMock(FillModel):
    """Oracle backend: the gold correction appears at a configured rank.

    Remaining ranks are filled with inert distractor pieces. When the mask
    count differs from the gold token count, the gold tokens are re-split (or
    truncated) so that ``n`` pieces merge back to as much of the correction as
    the mask budget allows. With ``split_pieces`` the segmenter also breaks
    long tokens into ``##`` continuations, exercising subword merging
    end-to-end.
    """

    def __init__(self, gold_rank: int = 1, split_pieces: bool = False, chunk: int = 4):
        if gold_rank < 1:
            raise ConfigurationError(f"gold_rank must be >= 1, got {gold_rank}")
        self.gold_rank = gold_rank
        self.split_pieces = split_pieces
        self.chunk = chunk
        self.model_id = "gold-mock"

    def pieces(self, tokens: TokenSeq) -> tuple[str, ...]:
        if not self.split_pieces:
            return tuple(tokens)
        out: list[str] = []
        for token in tokens:
            if len(token) <= self.chunk:
                out.append(token)
                continue
            out.append(token[: self.chunk])
            for i in range(self.chunk, len(token), self.chunk):
                out.append(CONTINUATION + token[i : i + self.chunk])
        return tuple(out)

    def _fit(self, replacement: TokenSeq, n_masks: int) -> list[str]:
        """Exactly n_masks pieces that merge back to (a prefix of) the replacement."""
        if n_masks < len(replacement):
            return list(replacement[:n_masks])
        pieces = list(replacement)
        while len(pieces) < n_masks:
            widest, width = -1, 1
            for i, piece in enumerate(pieces):
                body = piece[len(CONTINUATION) :] if piece.startswith(CONTINUATION) else piece
                if len(body) > width:
                    widest, width = i, len(body)
            if widest < 0:
                pieces.append("<pad>")  # nothing left to split; degrade visibly
                continue
            piece = pieces[widest]
            marker = CONTINUATION if piece.startswith(CONTINUATION) else ""
            body = piece[len(CONTINUATION) :] if marker else piece
            half = (len(body) + 1) // 2
            pieces[widest : widest + 1] = [marker + body[:half], CONTINUATION + body[half:]]
        return pieces

    def fill(self, masked: MaskedInstance, k: int) -> PredictionSet:
        n = len(masked.mask_positions)
        if masked.gold_pieces is not None and len(masked.gold_pieces) == n:
            fills = list(masked.gold_pieces)
        else:
            fills = self._fit(masked.gold_replacement, n)
        per_mask = []
        for gold_piece in fills:
            candidates = []
            for rank in range(1, k + 1):
                if rank == self.gold_rank:
                    candidates.append(Candidate(gold_piece, _rank_log_prob(rank)))
                else:
                    distractor = f"<junk{rank}>"
                    if distractor == gold_piece:
                        distractor = f"<junk{rank}bis>"
                    candidates.append(Candidate(distractor, _rank_log_prob(rank)))
            per_mask.append(tuple(candidates))
        return PredictionSet(per_mask=tuple(per_mask), k=k)


def load_default_lexicon() -> dict[str, int]:
    text = resources.files("gecmf.data").joinpath("lexicon.json").read_text("utf-8")
    return dict(json.loads(text))


class LexiconMock(FillModel):
    """Frequency-table baseline: every mask gets the k most frequent pieces.

    Useful for exercising false-positive paths offline with nontrivial (and
    almost always wrong) predictions.
    """

    def __init__(self, lexicon: Mapping[str, int] | None = None):
        self.lexicon = dict(lexicon) if lexicon is not None else load_default_lexicon()
        if not self.lexicon:
            raise ConfigurationError("lexicon is empty")
        total = sum(self.lexicon.values())
        ranked = sorted(self.lexicon.items(), key=lambda kv: (-kv[1], kv[0]))
        self._ranked = tuple(
            Candidate(piece, math.log(count / total)) for piece, count in ranked
        )
        self.model_id = "lexicon-mock"

    def pieces(self, tokens: TokenSeq) -> tuple[str, ...]:
        return tuple(tokens)

    def fill(self, masked: MaskedInstance, k: int) -> PredictionSet:
        top = self._ranked[:k]
        return PredictionSet(per_mask=tuple(top for _ in masked.mask_positions), k=k)


# --- remote backend ----------------------------------------------------------


class RemoteClient(FillModel):
    """HTTP client for the fill-mask model server.

    Whole token sequences go over the wire so the server controls subword
    segmentation of the context. Transport failures are retried (default 2
    retries); concurrent requests are bounded by ``max_in_flight``.
    """

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        retries: int = 2,
        max_in_flight: int = 8,
        transport: httpx.BaseTransport | None = None,
    ):
        if not base_url:
            raise ConfigurationError("remote model requires an endpoint URL")
        self.base_url = base_url
        self.retries = retries
        self.max_in_flight = max_in_flight
        self._client = httpx.Client(base_url=base_url, timeout=timeout, transport=transport)
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self.model_id = f"remote:{base_url}"

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                with self._slots:
                    response = self._client.request(method, path, json=payload)
            except httpx.TransportError as err:
                last_error = err
                continue
            if response.status_code >= 500:
                last_error = TransportError(f"{path} returned {response.status_code}")
                continue
            if not response.is_success:
                raise ProtocolError(f"{path} returned {response.status_code}: {response.text[:200]}")
            try:
                return response.json()
            except ValueError as err:
                raise ProtocolError(f"{path} returned non-JSON body") from err
        raise TransportError(
            f"{path} failed after {self.retries + 1} attempts: {last_error}"
        ) from last_error

    def fill(self, masked: MaskedInstance, k: int) -> PredictionSet:
        data = self._request(
            "POST", "/v1/fill_mask", {"tokens": list(masked.tokens), "top_k": k}
        )
        try:
            masks = data["masks"]
            per_mask = []
            indices = []
            for entry in masks:
                indices.append(entry["index"])
                per_mask.append(
                    tuple(Candidate(c["piece"], c["log_prob"]) for c in entry["candidates"])
                )
        except (KeyError, TypeError) as err:
            raise ProtocolError(f"malformed fill_mask response: {err}") from err
        if tuple(indices) != tuple(masked.mask_positions):
            raise ProtocolError(
                f"server reported masks at {indices}, client expected {list(masked.mask_positions)}"
            )
        return PredictionSet(per_mask=tuple(per_mask), k=k)

    def pieces(self, tokens: TokenSeq) -> tuple[str, ...]:
        data = self._request("POST", "/v1/tokenize", {"tokens": list(tokens)})
        try:
            return tuple(data["pieces"])
        except (KeyError, TypeError) as err:
            raise ProtocolError(f"malformed tokenize response: {err}") from err

    def health(self) -> dict:
        data = self._request("GET", "/v1/health")
        if isinstance(data, dict) and data.get("model_id"):
            self.model_id = f"remote:{data['model_id']}"
        return data
