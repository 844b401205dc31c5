"""Span-based sentence-level scoring (P/R/F0.5) and mask-level accuracy (Acc@k),
plus the reranking hook and corpus-level pipeline driver.

Sentence scoring extracts system edits by aligning the source with the
hypothesis and matches them 1:1 against the gold edits. Exact matching
requires identical (start, end, replacement); any-token matching additionally
credits a gold span whose aligned hypothesis content shares at least one token
with the gold replacement, which is the criterion used with single-mask
filling. Gold edit sets are expected in the extractor's canonical form (as
produced by this toolkit); see score_sentence.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .alignment import AlignmentOp, align, ops_to_edits
from .core import EditKind, EditSet, TokenSeq
from .errors import (
    ConfigurationError,
    EmptyGoldError,
    ProtocolError,
    TransportError,
)
from .expansion import SingleEditInstance
from .fillmask import Candidate, FillModel, PredictionSet, assemble_hypothesis, fill
from .masking import MaskedInstance, MaskStrategy, apply_deletion, mask_instance


class MatchMode(enum.Enum):
    EXACT = "exact"
    ANY_TOKEN = "any-token"


def default_mode(strategy: MaskStrategy) -> MatchMode:
    """Any-token matching for single-mask runs, exact matching otherwise."""
    return MatchMode.ANY_TOKEN if strategy is MaskStrategy.SINGLE else MatchMode.EXACT


def f_beta_score(precision: float, recall: float, beta: float = 0.5) -> float:
    """Weighted harmonic mean of precision and recall; 0 when both are 0."""
    if beta <= 0:
        raise ConfigurationError(f"beta must be positive, got {beta}")
    if precision == 0.0 and recall == 0.0:
        return 0.0
    b2 = beta * beta
    return (1 + b2) * precision * recall / (b2 * precision + recall)


def prf(tp: int, fp: int, fn: int, beta: float = 0.5) -> tuple[float, float, float]:
    """Precision, recall and F-beta with the empty-denominator-is-perfect convention."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ConfigurationError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    return precision, recall, f_beta_score(precision, recall, beta)


# --- sentence-level scoring ----------------------------------------------------


def _boundary_maps(ops: Sequence[AlignmentOp], n_source: int) -> tuple[list[int], list[int]]:
    """Target positions bracketing each source boundary.

    before[b] is the target position when source position b is first reached
    (ahead of any insertions at gap b); after[b] is the position just before
    the op consuming source token b (behind any insertions at gap b). Thus
    target[before[s]:after[e]] is the hypothesis content aligned to the source
    span [s, e), with boundary insertions pulled inside.
    """
    before = [0] * (n_source + 1)
    after = [0] * (n_source + 1)
    src_pos = 0
    tgt_pos = 0
    for op in ops:
        if op.consumes_source:
            after[src_pos] = tgt_pos
        if op.consumes_target:
            tgt_pos += 1
        if op.consumes_source:
            src_pos += 1
            before[src_pos] = tgt_pos
    after[n_source] = tgt_pos
    return before, after


def score_sentence(
    source: TokenSeq,
    hypothesis: TokenSeq,
    gold: EditSet,
    mode: MatchMode = MatchMode.EXACT,
) -> tuple[int, int, int]:
    """Count (tp, fp, fn) between extracted system edits and gold edits.

    System edits come from aligning source with hypothesis. Exact matching
    pairs edits with identical span and replacement. Any-token matching
    additionally credits an unmatched gold edit when the hypothesis changed
    its span and the aligned span content shares at least one token with the
    gold replacement; the system edits overlapping that span are consumed by
    the match so they do not also count as false positives.
    """
    ops = align(source, hypothesis)
    system = list(ops_to_edits(ops, source, hypothesis))
    matched_system = [False] * len(system)
    matched_gold = [False] * len(gold)

    for gi, gold_edit in enumerate(gold):
        for si, system_edit in enumerate(system):
            if matched_system[si]:
                continue
            if (
                system_edit.start == gold_edit.start
                and system_edit.end == gold_edit.end
                and system_edit.replacement == gold_edit.replacement
            ):
                matched_system[si] = True
                matched_gold[gi] = True
                break

    tp = sum(matched_gold)
    if mode is MatchMode.ANY_TOKEN:
        before, after = _boundary_maps(ops, len(source))
        for gi, gold_edit in enumerate(gold):
            if matched_gold[gi]:
                continue
            touching = [
                si
                for si, system_edit in enumerate(system)
                if not matched_system[si]
                and system_edit.start <= gold_edit.end
                and gold_edit.start <= system_edit.end
            ]
            if not touching:
                continue
            span_content = hypothesis[before[gold_edit.start] : after[gold_edit.end]]
            changed = span_content != source[gold_edit.start : gold_edit.end]
            if changed and set(span_content) & set(gold_edit.replacement):
                matched_gold[gi] = True
                tp += 1
                for si in touching:
                    matched_system[si] = True

    fp = matched_system.count(False)
    fn = matched_gold.count(False)
    return tp, fp, fn


# --- mask-level accuracy ---------------------------------------------------------


def _top_pieces(candidates: Sequence[Candidate], k: int) -> set[str]:
    return {c.piece for c in candidates[:k]}


def _mask_counts(
    predictions: PredictionSet,
    gold_pieces: Sequence[str],
    k: int,
    mode: MatchMode,
) -> tuple[int, int]:
    """(correct, units) for one instance's predictions at depth k."""
    n_masks = len(predictions.per_mask)
    if mode is MatchMode.ANY_TOKEN:
        gold = set(gold_pieces)
        correct = sum(
            1 for candidates in predictions.per_mask if gold & _top_pieces(candidates, k)
        )
        return correct, n_masks
    # Exact: position-aligned comparison, truncated at the shorter side; masks
    # with no gold piece and surplus gold pieces both count as incorrect.
    units = max(n_masks, len(gold_pieces))
    correct = 0
    for i in range(min(n_masks, len(gold_pieces))):
        if gold_pieces[i] in _top_pieces(predictions.per_mask[i], k):
            correct += 1
    return correct, units


def mask_accuracy(
    predictions: PredictionSet,
    gold_pieces: Sequence[str],
    k: int,
    mode: MatchMode = MatchMode.EXACT,
) -> float:
    """Fraction of masks whose gold piece (exact) or any gold token (any-token)
    appears in the top-k candidates."""
    if not gold_pieces:
        raise EmptyGoldError("mask accuracy needs a nonempty gold")
    if k < 1 or k > predictions.k:
        raise ConfigurationError(f"k={k} outside the requested depth {predictions.k}")
    correct, units = _mask_counts(predictions, gold_pieces, k, mode)
    return correct / units if units else 1.0


# --- reranking -------------------------------------------------------------------

# A reranker permutes one mask's candidate list; it gets the mask index and the
# ranked candidates and must return the same candidates in a new order.
Reranker = Callable[[int, tuple[Candidate, ...]], Sequence[Candidate]]


def identity_reranker(mask_index: int, candidates: tuple[Candidate, ...]) -> Sequence[Candidate]:
    return candidates


def oracle_reranker(per_mask_gold: Sequence[set[str]]) -> Reranker:
    """Promotes the best-ranked gold candidate to rank 1 where one is present."""

    def rerank_one(mask_index: int, candidates: tuple[Candidate, ...]) -> Sequence[Candidate]:
        gold = per_mask_gold[mask_index] if mask_index < len(per_mask_gold) else set()
        for i, candidate in enumerate(candidates):
            if candidate.piece in gold:
                return (candidates[i],) + candidates[:i] + candidates[i + 1 :]
        return candidates

    return rerank_one


def rerank(predictions: PredictionSet, reranker: Reranker) -> PredictionSet:
    """Apply a reranker per mask, enforcing that each list is a permutation."""
    reordered = []
    for i, candidates in enumerate(predictions.per_mask):
        new_order = tuple(reranker(i, candidates))
        if Counter(new_order) != Counter(candidates):
            raise ConfigurationError(f"reranker did not return a permutation at mask {i}")
        reordered.append(new_order)
    return PredictionSet(per_mask=tuple(reordered), k=predictions.k)


def gold_targets(
    masked: MaskedInstance, mode: MatchMode, model: FillModel
) -> tuple[list[str], list[set[str]]]:
    """Gold sequence for mask_accuracy and per-mask sets for the oracle reranker."""
    if mode is MatchMode.ANY_TOKEN:
        tokens = list(masked.gold_replacement)
        return tokens, [set(tokens)] * len(masked.mask_positions)
    pieces = (
        list(masked.gold_pieces)
        if masked.gold_pieces is not None
        else list(model.pieces(masked.gold_replacement))
    )
    sets = [
        {pieces[i]} if i < len(pieces) else set()
        for i in range(len(masked.mask_positions))
    ]
    return pieces, sets


# --- corpus evaluation -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Micro-averaged corpus results."""

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_beta: float
    beta: float
    acc_at: Mapping[int, float]
    n_instances: int
    excluded_deletions: int

    def __post_init__(self):
        object.__setattr__(self, "acc_at", dict(self.acc_at))

    def to_record(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f_beta": self.f_beta,
            "beta": self.beta,
            "acc_at": {str(k): v for k, v in sorted(self.acc_at.items())},
            "n_instances": self.n_instances,
            "excluded_deletions": self.excluded_deletions,
        }


@dataclass(frozen=True, slots=True)
class _InstanceCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    mask_correct: Mapping[int, int] = field(default_factory=dict)
    mask_units: int = 0
    excluded: bool = False


def _evaluate_instance(
    instance: SingleEditInstance,
    strategy: MaskStrategy,
    model: FillModel,
    k: int,
    mode: MatchMode,
    include_deletions: bool,
    oracle_rerank: bool,
    acc_depths: tuple[int, ...],
) -> _InstanceCounts:
    gold_set = EditSet((instance.residual,))
    if instance.residual.kind is EditKind.DELETION:
        if not include_deletions:
            return _InstanceCounts(excluded=True)
        hypothesis = apply_deletion(instance)
        tp, fp, fn = score_sentence(instance.source, hypothesis, gold_set, mode)
        return _InstanceCounts(tp=tp, fp=fp, fn=fn)

    piece_tokenizer = model.pieces if strategy is MaskStrategy.TARGET_LENGTH else None
    masked = mask_instance(instance, strategy, piece_tokenizer)
    predictions = fill(model, masked, k)
    gold_seq, gold_sets = gold_targets(masked, mode, model)
    if oracle_rerank:
        predictions = rerank(predictions, oracle_reranker(gold_sets))
    hypothesis = assemble_hypothesis(masked, predictions, rank=1)
    tp, fp, fn = score_sentence(instance.source, hypothesis, gold_set, mode)
    mask_correct = {}
    mask_units = 0
    for depth in acc_depths:
        correct, units = _mask_counts(predictions, gold_seq, depth, mode)
        mask_correct[depth] = correct
        mask_units = units
    return _InstanceCounts(tp=tp, fp=fp, fn=fn, mask_correct=mask_correct, mask_units=mask_units)


def evaluate_corpus(
    instances: Iterable[SingleEditInstance],
    strategy: MaskStrategy,
    model: FillModel,
    k: int = 5,
    mode: MatchMode | None = None,
    include_deletions: bool = False,
    beta: float = 0.5,
    oracle_rerank: bool = False,
    jobs: int | None = None,
) -> EvalReport:
    """Mask, fill, assemble and score every instance; micro-average the counts.

    Deletion residuals are excluded unless ``include_deletions``, in which case
    they are applied directly and scored (trivially correct, no mask counts).
    Transport and protocol failures are re-raised with the instance id.
    """
    mode = mode if mode is not None else default_mode(strategy)
    acc_depths = (1, k) if k != 1 else (1,)

    def run_one(instance: SingleEditInstance) -> _InstanceCounts:
        try:
            return _evaluate_instance(
                instance, strategy, model, k, mode, include_deletions, oracle_rerank, acc_depths
            )
        except (TransportError, ProtocolError) as err:
            raise type(err)(f"instance {instance.instance_id}: {err}") from err

    instances = list(instances)
    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, instances))
    else:
        results = [run_one(instance) for instance in instances]

    tp = fp = fn = 0
    excluded = 0
    total_units = 0
    correct_at = {depth: 0 for depth in acc_depths}
    n_instances = 0
    for counts in results:
        if counts.excluded:
            excluded += 1
            continue
        n_instances += 1
        tp += counts.tp
        fp += counts.fp
        fn += counts.fn
        total_units += counts.mask_units
        for depth in acc_depths:
            correct_at[depth] += counts.mask_correct.get(depth, 0)
    precision, recall, f_beta = prf(tp, fp, fn, beta)
    acc_at = {
        depth: (correct_at[depth] / total_units if total_units else 1.0)
        for depth in acc_depths
    }
    return EvalReport(
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        f_beta=f_beta,
        beta=beta,
        acc_at=acc_at,
        n_instances=n_instances,
        excluded_deletions=excluded,
    )


# --- report rendering --------------------------------------------------------------


def render_grid(reports: Mapping[tuple[str, str], EvalReport], k: int = 5) -> str:
    """Fixed-width strategy-by-scheme table of P/R/F and Acc@1/Acc@k."""
    schemes = sorted({scheme for _, scheme in reports})
    strategies = [s.value for s in MaskStrategy if any(st == s.value for st, _ in reports)]
    header = f"{'strategy':<10}"
    for scheme in schemes:
        header += f"| {scheme:^44} "
    sub = f"{'':<10}"
    for _ in schemes:
        sub += f"| {'P@1':>7} {'R@1':>7} {'F0.5@1':>7} {'Acc@1':>9} {f'Acc@{k}':>9} "
    lines = [header, sub, "-" * len(sub)]
    for strategy in strategies:
        row = f"{strategy:<10}"
        for scheme in schemes:
            report = reports.get((strategy, scheme))
            if report is None:
                row += f"| {'-':>44} "
                continue
            acc1 = report.acc_at.get(1, float('nan'))
            acck = report.acc_at.get(k, acc1)
            row += (
                f"| {report.precision:>7.3f} {report.recall:>7.3f} {report.f_beta:>7.3f} "
                f"{acc1:>9.3f} {acck:>9.3f} "
            )
        lines.append(row)
    return "\n".join(lines)


def report_record(
    report: EvalReport, strategy: MaskStrategy, scheme: str, mode: MatchMode, k: int
) -> dict:
    record = {"strategy": strategy.value, "scheme": scheme, "mode": mode.value, "k": k}
    record.update(report.to_record())
    return record


def write_reports(records: Sequence[dict], stream) -> None:
    for record in records:
        stream.write(json.dumps(record, ensure_ascii=False) + "\n")
