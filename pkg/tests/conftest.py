"""Shared fixtures and hypothesis strategies."""

from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from gecmf.core import AnnotatedSentence, Edit, EditSet, parse_m2

FIXTURES = Path(__file__).parent / "fixtures"

VOCAB = ("a", "b", "c", "d", "e")


@pytest.fixture(scope="session")
def synthetic_corpus() -> list[AnnotatedSentence]:
    return parse_m2((FIXTURES / "synthetic.m2").read_text("utf-8"))


@pytest.fixture(scope="session")
def sample_m2_text() -> str:
    return (FIXTURES / "sample.m2").read_text("utf-8")


def token_seqs(min_size=0, max_size=6, vocab=VOCAB):
    return st.lists(st.sampled_from(vocab), min_size=min_size, max_size=max_size).map(tuple)


@st.composite
def sentences_with_edits(draw, min_tokens=1, max_tokens=8, vocab=VOCAB):
    """An AnnotatedSentence with a random valid edit set (possibly empty)."""
    source = tuple(draw(st.lists(st.sampled_from(vocab), min_size=min_tokens, max_size=max_tokens)))
    edits = []
    pos = 0
    insertion_blocked_at = -1
    while pos <= len(source):
        action = draw(st.integers(0, 4))
        if action == 0 and pos > insertion_blocked_at:
            replacement = tuple(draw(st.lists(st.sampled_from(vocab), min_size=1, max_size=2)))
            edits.append(Edit(pos, pos, replacement))
            insertion_blocked_at = pos  # at most one insertion per gap
        elif action == 1 and pos < len(source):
            end = min(len(source), pos + draw(st.integers(1, 2)))
            edits.append(Edit(pos, end, ()))
            pos = end
        elif action == 2 and pos < len(source):
            end = min(len(source), pos + draw(st.integers(1, 2)))
            replacement = tuple(draw(st.lists(st.sampled_from(vocab), min_size=1, max_size=2)))
            edits.append(Edit(pos, end, replacement))
            pos = end
        else:
            pos += 1
    return AnnotatedSentence(source, EditSet(tuple(edits)), 0)


def random_sentence(rng: random.Random, vocab=VOCAB, max_tokens=10) -> AnnotatedSentence:
    """Plain-random counterpart of sentences_with_edits for bulk property runs."""
    source = tuple(rng.choice(vocab) for _ in range(rng.randint(1, max_tokens)))
    edits = []
    pos = 0
    insertion_blocked_at = -1
    while pos <= len(source):
        action = rng.randint(0, 4)
        if action == 0 and pos > insertion_blocked_at:
            edits.append(Edit(pos, pos, tuple(rng.choice(vocab) for _ in range(rng.randint(1, 2)))))
            insertion_blocked_at = pos
        elif action == 1 and pos < len(source):
            end = min(len(source), pos + rng.randint(1, 2))
            edits.append(Edit(pos, end, ()))
            pos = end
        elif action == 2 and pos < len(source):
            end = min(len(source), pos + rng.randint(1, 2))
            edits.append(Edit(pos, end, tuple(rng.choice(vocab) for _ in range(rng.randint(1, 2)))))
            pos = end
        else:
            pos += 1
    return AnnotatedSentence(source, EditSet(tuple(edits)), 0)
