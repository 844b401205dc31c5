"""Wire-contract tests for the fill-mask service."""

import math

from fastapi.testclient import TestClient

from fillmask_server.app import create_app


def merge(pieces):
    """Reference wordpiece merge: continuations concatenate onto their predecessor."""
    tokens = []
    for piece in pieces:
        if piece.startswith("##"):
            tokens[-1] += piece[2:]
        else:
            tokens.append(piece)
    return tokens


class TestHealth:
    def test_ok_after_load(self, client, checkpoint):
        response = client.get("/v1/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["model_id"] == checkpoint

    def test_503_before_load(self, tmp_path):
        # no lifespan entered, so the backend never starts loading
        app = create_app(model_id=str(tmp_path / "nowhere"))
        response = TestClient(app).get("/v1/health")
        assert response.status_code == 503
        assert response.json()["status"] == "loading"

    def test_503_reports_load_failure(self, tmp_path):
        app = create_app(model_id=str(tmp_path / "nowhere"))
        with TestClient(app) as client:
            app.state.backend.load_in_background().join()
            response = client.get("/v1/health")
            assert response.status_code == 503
            assert response.json()["status"] == "error"


class TestTokenize:
    def test_vocabulary_word_is_single_piece(self, client):
        response = client.post("/v1/tokenize", json={"tokens": ["the"]})
        assert response.status_code == 200
        assert response.json()["pieces"] == ["the"]

    def test_unknown_word_splits_with_continuations(self, client):
        response = client.post("/v1/tokenize", json={"tokens": ["recomend"]})
        pieces = response.json()["pieces"]
        assert len(pieces) > 1
        assert all(p.startswith("##") for p in pieces[1:])
        assert merge(pieces) == ["recomend"]

    def test_text_form(self, client):
        response = client.post("/v1/tokenize", json={"text": "the window"})
        assert response.status_code == 200
        assert merge(response.json()["pieces"]) == ["the", "window"]

    def test_empty_input_400(self, client):
        for payload in ({}, {"text": ""}, {"tokens": []}, {"tokens": ["a", ""]}):
            response = client.post("/v1/tokenize", json=payload)
            assert response.status_code == 400, payload

    def test_sentinel_never_split(self, client):
        response = client.post("/v1/tokenize", json={"tokens": ["[MASK]"]})
        assert response.json()["pieces"] == ["[MASK]"]


class TestFillMask:
    def test_contract(self, client):
        request = {"tokens": ["the", "[MASK]", "window"], "top_k": 7}
        response = client.post("/v1/fill_mask", json=request)
        assert response.status_code == 200
        masks = response.json()["masks"]
        assert len(masks) == 1
        assert masks[0]["index"] == 1
        candidates = masks[0]["candidates"]
        assert len(candidates) == 7
        for candidate in candidates:
            assert candidate["piece"]
            assert math.isfinite(candidate["log_prob"])
            assert candidate["log_prob"] <= 0
        # sorted by log_prob descending, ties by piece ascending
        keys = [(-c["log_prob"], c["piece"]) for c in candidates]
        assert keys == sorted(keys)

    def test_multiple_masks_ascending_order(self, client):
        request = {"tokens": ["[MASK]", "window", "[MASK]", "small", "[MASK]"], "top_k": 2}
        masks = client.post("/v1/fill_mask", json=request).json()["masks"]
        assert [m["index"] for m in masks] == [0, 2, 4]

    def test_no_sentinel_422(self, client):
        response = client.post("/v1/fill_mask", json={"tokens": ["no", "mask"], "top_k": 3})
        assert response.status_code == 422

    def test_malformed_400(self, client):
        for payload in (
            {"tokens": [], "top_k": 3},
            {"tokens": ["[MASK]"], "top_k": 0},
            {"tokens": ["[MASK]"], "top_k": 101},
            {"top_k": 3},
            {"tokens": "not-a-list", "top_k": 3},
        ):
            response = client.post("/v1/fill_mask", json=payload)
            assert response.status_code == 400, payload

    def test_special_tokens_never_predicted(self, client):
        request = {"tokens": ["[MASK]"], "top_k": 50}
        masks = client.post("/v1/fill_mask", json=request).json()["masks"]
        pieces = {c["piece"] for c in masks[0]["candidates"]}
        assert not pieces & {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"}

    def test_context_affects_predictions(self, client):
        one = client.post("/v1/fill_mask", json={"tokens": ["the", "[MASK]"], "top_k": 5})
        two = client.post("/v1/fill_mask", json={"tokens": ["window", "[MASK]"], "top_k": 5})
        assert one.json() != two.json()
