"""Token-level alignment of a source sentence with a corrected sentence.

A minimum-cost edit script is computed by dynamic programming, then maximal
runs of adjacent non-match operations are merged into span edits. Costs:
match 0, insert/delete 1, substitute 1 reduced to 0.9 when the two tokens are
equal case-insensitively. Internally costs are scaled by 10 so the table is
exact integer arithmetic and tie detection never depends on float rounding.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import Edit, EditSet, TokenSeq

COST_SCALE = 10
_MATCH_COST = 0
_CASE_SUB_COST = 9  # 0.9 before scaling
_SUB_COST = 10
_GAP_COST = 10  # insert or delete


class AlignOpKind(enum.Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


@dataclass(frozen=True, slots=True)
class AlignmentOp:
    """One step of an edit script.

    match/substitute consume a token on both sides, delete consumes only a
    source token, insert only a target token.
    """

    op: AlignOpKind
    src_index: int | None = None
    tgt_index: int | None = None

    @property
    def consumes_source(self) -> bool:
        return self.op in (AlignOpKind.MATCH, AlignOpKind.SUBSTITUTE, AlignOpKind.DELETE)

    @property
    def consumes_target(self) -> bool:
        return self.op in (AlignOpKind.MATCH, AlignOpKind.SUBSTITUTE, AlignOpKind.INSERT)


def _pair_cost(a: str, b: str) -> tuple[int, AlignOpKind]:
    if a == b:
        return _MATCH_COST, AlignOpKind.MATCH
    if a.casefold() == b.casefold():
        return _CASE_SUB_COST, AlignOpKind.SUBSTITUTE
    return _SUB_COST, AlignOpKind.SUBSTITUTE


# Tie-break preference when several operations reach a cell at equal cost.
_PREFERENCE = {
    AlignOpKind.MATCH: 0,
    AlignOpKind.SUBSTITUTE: 1,
    AlignOpKind.DELETE: 2,
    AlignOpKind.INSERT: 3,
}


def align(source: TokenSeq, target: TokenSeq) -> list[AlignmentOp]:
    """Minimum-cost edit script from source to target.

    Ties are broken by the fixed preference match > substitute > delete >
    insert, so the result is a pure function of its inputs.
    """
    n, m = len(source), len(target)
    # cost[i][j]: cheapest alignment of source[:i] with target[:j];
    # best[i][j]: preferred last operation achieving it.
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    best: list[list[AlignOpKind | None]] = [[None] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = i * _GAP_COST
        best[i][0] = AlignOpKind.DELETE
    for j in range(1, m + 1):
        cost[0][j] = j * _GAP_COST
        best[0][j] = AlignOpKind.INSERT
    for i in range(1, n + 1):
        src_tok = source[i - 1]
        for j in range(1, m + 1):
            pair, pair_op = _pair_cost(src_tok, target[j - 1])
            candidates = (
                (cost[i - 1][j - 1] + pair, pair_op),
                (cost[i - 1][j] + _GAP_COST, AlignOpKind.DELETE),
                (cost[i][j - 1] + _GAP_COST, AlignOpKind.INSERT),
            )
            cost[i][j], best[i][j] = min(candidates, key=lambda c: (c[0], _PREFERENCE[c[1]]))

    ops: list[AlignmentOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        op = best[i][j]
        if op is AlignOpKind.DELETE:
            i -= 1
            ops.append(AlignmentOp(op, src_index=i))
        elif op is AlignOpKind.INSERT:
            j -= 1
            ops.append(AlignmentOp(op, tgt_index=j))
        else:
            i -= 1
            j -= 1
            ops.append(AlignmentOp(op, src_index=i, tgt_index=j))
    ops.reverse()
    return ops


def alignment_cost(ops: list[AlignmentOp], source: TokenSeq, target: TokenSeq) -> int:
    """Total cost of an edit script on the scaled integer scale."""
    total = 0
    for op in ops:
        if op.op is AlignOpKind.MATCH:
            pass
        elif op.op is AlignOpKind.SUBSTITUTE:
            total += _pair_cost(source[op.src_index], target[op.tgt_index])[0]
        else:
            total += _GAP_COST
    return total


def ops_to_edits(ops: list[AlignmentOp], source: TokenSeq, target: TokenSeq) -> EditSet:
    """Merge maximal runs of adjacent non-match operations into span edits.

    The resulting edit set applied to the source reproduces the target.
    """
    edits: list[Edit] = []
    src_pos = 0
    run_start: int | None = None
    replacement: list[str] = []

    def close_run(end: int):
        nonlocal run_start, replacement
        if run_start is not None:
            edits.append(Edit(run_start, end, tuple(replacement)))
            run_start, replacement = None, []

    for op in ops:
        if op.op is AlignOpKind.MATCH:
            close_run(src_pos)
            src_pos += 1
            continue
        if run_start is None:
            run_start = src_pos
        if op.consumes_target:
            replacement.append(target[op.tgt_index])
        if op.consumes_source:
            src_pos += 1
    close_run(src_pos)
    return EditSet(tuple(edits))


def extract_edits(source: TokenSeq, target: TokenSeq) -> EditSet:
    """Align and merge in one step: the toolkit's canonical edit extraction."""
    return ops_to_edits(align(source, target), source, target)
