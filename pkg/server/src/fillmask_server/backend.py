"""Masked-LM inference backend.

Wraps a transformers checkpoint behind three operations: subword segmentation,
whole-sequence tokenization, and top-k fill-mask prediction with log-softmax
scores. Requests are processed one at a time under a lock so that identical
requests always see identical arithmetic; candidate order is fully defined by
(log_prob descending, piece ascending), making responses reproducible bytes.
"""

from __future__ import annotations

import threading

import numpy as np
import torch

MASK_SENTINEL = "[MASK]"
DEFAULT_MODEL = "bert-base-cased"


class NoMaskError(ValueError):
    """The request carries no mask sentinel."""


class NotLoadedError(RuntimeError):
    """Inference was requested before the checkpoint finished loading."""


class FillMaskBackend:
    def __init__(self, model_id: str):
        self.model_id = model_id
        self.load_error: Exception | None = None
        self._lock = threading.Lock()
        self._tokenizer = None
        self._model = None
        self._pieces: np.ndarray | None = None  # vocab id -> piece string
        self._candidate_ids: np.ndarray | None = None  # ids eligible as predictions

    @property
    def loaded(self) -> bool:
        return self._model is not None

    def load(self) -> None:
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(self.model_id)
        model = AutoModelForMaskedLM.from_pretrained(self.model_id)
        model.eval()

        vocab = tokenizer.get_vocab()
        size = max(vocab.values()) + 1
        pieces = np.array([""] * size, dtype=object)
        for piece, idx in vocab.items():
            pieces[idx] = piece
        special_ids = set(tokenizer.all_special_ids)
        candidate_ids = np.array(
            [i for i in range(size) if pieces[i] and i not in special_ids], dtype=np.int64
        )

        with self._lock:
            self._tokenizer = tokenizer
            self._model = model
            self._pieces = pieces
            self._candidate_ids = candidate_ids

    def load_in_background(self) -> threading.Thread:
        def target():
            try:
                self.load()
            except Exception as err:  # surfaced through /v1/health
                self.load_error = err

        thread = threading.Thread(target=target, daemon=True)
        thread.start()
        return thread

    def _require_loaded(self):
        if not self.loaded:
            raise NotLoadedError(f"checkpoint {self.model_id!r} is not loaded")

    def segment(self, token: str) -> list[str]:
        """Subword pieces of one whitespace token; the sentinel is never split."""
        self._require_loaded()
        if token == MASK_SENTINEL:
            return [MASK_SENTINEL]
        pieces = self._tokenizer.tokenize(token)
        return pieces if pieces else [self._tokenizer.unk_token]

    def tokenize(self, tokens: list[str]) -> list[str]:
        return [piece for token in tokens for piece in self.segment(token)]

    def fill(self, tokens: list[str], top_k: int) -> list[dict]:
        """Top-k candidates per sentinel, in ascending request-index order."""
        self._require_loaded()
        tokenizer = self._tokenizer
        ids: list[int] = [tokenizer.cls_token_id]
        masks: list[tuple[int, int]] = []  # (request index, model position)
        for request_index, token in enumerate(tokens):
            if token == MASK_SENTINEL:
                masks.append((request_index, len(ids)))
                ids.append(tokenizer.mask_token_id)
            else:
                ids.extend(
                    tokenizer.convert_tokens_to_ids(piece) for piece in self.segment(token)
                )
        ids.append(tokenizer.sep_token_id)
        if not masks:
            raise NoMaskError(f"no {MASK_SENTINEL} sentinel in request tokens")

        with self._lock:
            with torch.no_grad():
                logits = self._model(torch.tensor([ids])).logits[0]
            log_probs = torch.log_softmax(logits, dim=-1)
            out = []
            for request_index, position in masks:
                scores = log_probs[position].numpy()
                eligible = self._candidate_ids
                # primary key: score descending; tie-break: piece ascending
                order = np.lexsort((self._pieces[eligible], -scores[eligible]))
                chosen = eligible[order[:top_k]]
                out.append(
                    {
                        "index": request_index,
                        "candidates": [
                            {"piece": str(self._pieces[i]), "log_prob": float(scores[i])}
                            for i in chosen
                        ],
                    }
                )
        return out
