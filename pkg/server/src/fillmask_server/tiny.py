"""Builder for a small self-contained checkpoint.

Produces a cased wordpiece vocabulary (letters, digits, punctuation, common
affix pieces, the bundled dictionary words) plus a seeded randomly-initialized
masked LM, saved in standard checkpoint layout. The result is pinned: the same
seed and vocabulary always give byte-identical weights, so tests and offline
demos can run without downloading a published checkpoint. Predictions are
deterministic but linguistically meaningless.
"""

from __future__ import annotations

import string
from importlib import resources
from pathlib import Path

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
AFFIXES = [
    "th", "ing", "er", "re", "un", "al", "en", "ed", "es", "ly", "ion", "tion", "ate",
]
FUNCTION_WORDS = [
    "the", "a", "an", "of", "to", "in", "on", "at", "and", "or", "is", "was", "it",
    "he", "she", "they", "we", "you", "that", "this", "with", "for", "but", "not",
]
SEED = 12345


def bundled_words() -> list[str]:
    text = resources.files("fillmask_server.data").joinpath("words.txt").read_text("utf-8")
    return [w for w in text.split() if w]


def build_vocab(whole_words: int = 60) -> list[str]:
    chars = list(string.ascii_lowercase) + list(string.ascii_uppercase) + list(
        string.digits
    ) + list(".,'-!?\"")
    dictionary = bundled_words()
    spread = dictionary[:: max(1, len(dictionary) // whole_words)][:whole_words]
    vocab = list(SPECIALS)
    seen = set(vocab)
    for piece in (
        chars
        + ["##" + c for c in chars]
        + AFFIXES
        + ["##" + a for a in AFFIXES]
        + FUNCTION_WORDS
        + spread
    ):
        if piece not in seen:
            seen.add(piece)
            vocab.append(piece)
    return vocab


def build_tiny_checkpoint(path: str | Path, seed: int = SEED) -> Path:
    """Write the pinned tiny checkpoint into ``path`` and return it."""
    import torch
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.pre_tokenizers import WhitespaceSplit
    from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast

    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    vocab = build_vocab()
    word_piece = WordPiece(
        {piece: i for i, piece in enumerate(vocab)},
        unk_token="[UNK]",
        max_input_chars_per_word=100,
    )
    tokenizer = Tokenizer(word_piece)
    tokenizer.pre_tokenizer = WhitespaceSplit()
    tokenizer.save(str(path / "tokenizer.json"))
    fast = PreTrainedTokenizerFast(
        tokenizer_file=str(path / "tokenizer.json"),
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    fast.save_pretrained(path)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=64,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=128,
        max_position_embeddings=160,
    )
    torch.manual_seed(seed)
    model = BertForMaskedLM(config)
    model.eval()
    model.save_pretrained(path)
    return path
