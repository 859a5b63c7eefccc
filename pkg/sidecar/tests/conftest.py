import sys
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))
from make_tiny_checkpoint import main as make_checkpoint

from tad_sidecar.app import ServiceConfig, create_app


@pytest.fixture(scope="session")
def checkpoint_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("ckpt") / "tiny"
    make_checkpoint(str(out))
    return out


@pytest.fixture(scope="session")
def service(checkpoint_dir, tmp_path_factory):
    config = ServiceConfig(
        model_path=str(checkpoint_dir),
        max_batch=16,
        checkpoint_store=str(tmp_path_factory.mktemp("ckpt-store")),
        warmstart_max_steps=4,
    )
    app = create_app(config)
    with TestClient(app) as client:
        yield client


@pytest.fixture(scope="session")
def protocol_fixture():
    import json

    # golden fixtures shared with the consumer's client tests
    path = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "embed_protocol.json"
    return json.loads(path.read_text())
