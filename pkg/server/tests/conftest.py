"""Session fixtures: the pinned tiny checkpoint and a ready client."""

import pytest
from fastapi.testclient import TestClient

from fillmask_server.app import create_app
from fillmask_server.tiny import build_tiny_checkpoint


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory) -> str:
    return str(build_tiny_checkpoint(tmp_path_factory.mktemp("ckpt")))


@pytest.fixture(scope="session")
def app(checkpoint):
    return create_app(model_id=checkpoint, preload=True)


@pytest.fixture(scope="session")
def client(app):
    with TestClient(app) as test_client:
        yield test_client
