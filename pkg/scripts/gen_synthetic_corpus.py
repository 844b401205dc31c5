#!/usr/bin/env python3
"""Regenerate the bundled synthetic M2 corpus (tests/fixtures/synthetic.m2).

Sentences are built from short distinct common words; replacement tokens are
novel 6+ character pseudo-words, so every planted edit set is exactly what the
toolkit's own extractor recovers (asserted below). Edits are spaced at least
one matched token apart so extraction never merges neighbours. Substitutions
replace a span with the same number of tokens and insertions add one token,
which keeps mask counts aligned with gold lengths under every strategy: a
perfect oracle can then reach exact 1.0 on both sentence- and mask-level
metrics, the property the oracle acceptance check relies on.

Deterministic: rerunning this script reproduces the checked-in file.
"""

import random
from pathlib import Path

from gecmf.alignment import extract_edits
from gecmf.core import AnnotatedSentence, Edit, EditKind, EditSet, apply_edits, serialize_m2

SEED = 20250801
N_SENTENCES = 60
N_ZERO_EDIT = 5

BASE_VOCAB = """the a an of to in on at by for and or but not he she it we they you i
this that his her its our your out up down over under with from into as if so
then than when where who what why how all any each few more most some such no
yes one two ten old new big hot red car dog cat sun day way man men kid fun run
sit sat eat ate see saw say said go went get got may can will must did done has
had have was were are is be been am do does very much many less own same""".split()
BASE_VOCAB = sorted({w for w in BASE_VOCAB if w.isalpha() and len(w) <= 5})

CONSONANTS = "bcdfghjklmnpqrstvwz"
VOWELS = "aeiou"


def pseudo_word(rng: random.Random, used: set) -> str:
    while True:
        syllables = rng.randint(3, 4)
        word = "".join(rng.choice(CONSONANTS) + rng.choice(VOWELS) for _ in range(syllables))
        if word not in used:
            used.add(word)
            return word


def plant_edits(rng: random.Random, length: int, used: set) -> list:
    max_edits = max(1, min(3, (length - 2) // 4))
    n_edits = rng.randint(1, max_edits)
    for _ in range(50):
        anchors = sorted(rng.sample(range(0, length - 3), n_edits))
        if all(b - a >= 4 for a, b in zip(anchors, anchors[1:])):
            break
    else:
        anchors = [0]
    edits = []
    for anchor in anchors:
        kind = rng.choice([EditKind.SUBSTITUTION, EditKind.SUBSTITUTION, EditKind.INSERTION, EditKind.DELETION])
        if kind is EditKind.INSERTION:
            edits.append(Edit(anchor, anchor, (pseudo_word(rng, used),)))
        elif kind is EditKind.DELETION:
            span = rng.randint(1, 2)
            edits.append(Edit(anchor, anchor + span, ()))
        else:
            # Same-length substitutions keep mask count == gold piece count under
            # every strategy, so a perfect oracle can actually reach Acc@1 = 1.
            span = rng.randint(1, 3)
            repl = tuple(pseudo_word(rng, used) for _ in range(span))
            edits.append(Edit(anchor, anchor + span, repl))
    return edits


def main() -> None:
    rng = random.Random(SEED)
    used: set = set()
    sentences = []
    kinds_seen = set()
    while len(sentences) < N_SENTENCES - N_ZERO_EDIT:
        length = rng.randint(8, 14)
        source = tuple(rng.sample(BASE_VOCAB, length))
        edits = plant_edits(rng, length, used)
        gold = EditSet(tuple(edits))
        reference = apply_edits(source, gold)
        if extract_edits(source, reference) != gold:
            continue  # token collision made the planted edits non-canonical; reroll
        kinds_seen.update(e.kind for e in edits)
        sentences.append(AnnotatedSentence(source, gold, 0))
    for _ in range(N_ZERO_EDIT):
        source = tuple(rng.sample(BASE_VOCAB, rng.randint(6, 10)))
        sentences.append(AnnotatedSentence(source, EditSet(), 0))
    assert kinds_seen == {EditKind.SUBSTITUTION, EditKind.INSERTION, EditKind.DELETION}

    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "synthetic.m2"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_m2(sentences), encoding="utf-8")
    n_edits = sum(len(s.gold) for s in sentences)
    print(f"wrote {out} with {len(sentences)} sentences, {n_edits} edits")


if __name__ == "__main__":
    main()
