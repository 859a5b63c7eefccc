import numpy as np

from tad_sidecar.masking import mask_text


def test_info_matches_golden_fixture(service, protocol_fixture):
    resp = service.get("/info")
    assert resp.status_code == 200
    body = resp.json()
    for key in protocol_fixture["info"]["required_keys"]:
        assert key in body
    assert body["dim"] == 64
    assert body["supports_mask"] is True


def test_embed_matches_golden_fixture(service, protocol_fixture):
    contract = protocol_fixture["response_contract"]
    for request_key in ("embed_request", "embed_plain_request"):
        request = protocol_fixture[request_key]
        resp = service.post("/embed", json=request)
        assert resp.status_code == 200
        body = resp.json()
        for key in contract["required_keys"]:
            assert key in body
        assert len(body["vectors"]) == len(request["texts"])
        for row in body["vectors"]:
            assert len(row) == body["dim"]
            norm = float(np.linalg.norm(row))
            assert abs(norm - 1.0) < contract["unit_norm_tol"]


def test_malformed_bodies_are_400(service, protocol_fixture):
    for raw in protocol_fixture["errors"]["malformed_bodies"]:
        resp = service.post("/embed", content=raw.encode())
        assert resp.status_code == protocol_fixture["errors"]["malformed_status"], raw


def test_oversized_batch_is_413(service, protocol_fixture):
    resp = service.post("/embed", json={"texts": ["x"] * 17, "mask_stems": None})
    assert resp.status_code == protocol_fixture["errors"]["oversize_status"]


def test_vector_order_preserved_under_permutation(service):
    sentinels = ["first unique alpha", "second unique beta", "third unique gamma"]
    base = service.post("/embed", json={"texts": sentinels, "mask_stems": None}).json()
    perm = [sentinels[2], sentinels[0], sentinels[1]]
    permuted = service.post("/embed", json={"texts": perm, "mask_stems": None}).json()
    assert np.allclose(permuted["vectors"][0], base["vectors"][2], atol=1e-5)
    assert np.allclose(permuted["vectors"][1], base["vectors"][0], atol=1e-5)
    assert np.allclose(permuted["vectors"][2], base["vectors"][1], atol=1e-5)


def test_masked_vs_unmasked_differ_for_stem_bearing_text(service):
    text = "covid cases rising everywhere"
    plain = service.post("/embed", json={"texts": [text], "mask_stems": None}).json()
    masked = service.post(
        "/embed", json={"texts": [text], "mask_stems": ["covid"]}
    ).json()
    cos = float(np.dot(plain["vectors"][0], masked["vectors"][0]))
    assert cos < 1 - 1e-6
    # no stem present: identical
    neutral = "nothing interesting happened"
    a = service.post("/embed", json={"texts": [neutral], "mask_stems": None}).json()
    b = service.post("/embed", json={"texts": [neutral], "mask_stems": ["covid"]}).json()
    assert np.allclose(a["vectors"][0], b["vectors"][0])


def test_embed_empty_batch(service):
    resp = service.post("/embed", json={"texts": [], "mask_stems": None})
    assert resp.status_code == 200
    assert resp.json()["vectors"] == []


def test_mask_text_rule():
    assert mask_text("COVID19 is a hoax", ["covid", "hoax"]) == "[MASK] is a [MASK]"
    assert mask_text("so...  COVID-19!", ["covid"]) == "so...  [MASK]!"
    assert mask_text("СOVID obfuscated", ["covid"]) == "[MASK] obfuscated"
    assert mask_text("nothing here", ["covid"]) == "nothing here"


def test_warmstart_creates_derived_checkpoint(service):
    texts = ["covid vaccine rollout", "new variant spreading", "quarantine extended"]
    base_info = service.get("/info").json()
    resp = service.post(
        "/warmstart",
        json={"parent_hash": "base", "window_id": "2020-02", "texts": texts, "steps": 2},
    )
    assert resp.status_code == 200
    ckpt = resp.json()["checkpoint"]
    assert len(ckpt) == 16
    # idempotent for the same (parent, window, steps)
    again = service.post(
        "/warmstart",
        json={"parent_hash": "base", "window_id": "2020-02", "texts": texts, "steps": 2},
    )
    assert again.json()["checkpoint"] == ckpt
    # derived checkpoint can itself be a parent (lineage chain)
    child = service.post(
        "/warmstart",
        json={"parent_hash": ckpt, "window_id": "2020-03", "texts": texts, "steps": 2},
    )
    assert child.status_code == 200 and child.json()["checkpoint"] != ckpt
    assert base_info == service.get("/info").json()  # serving model unchanged


def test_warmstart_errors(service):
    resp = service.post("/warmstart", json={"parent_hash": "nope", "window_id": "w",
                                            "texts": ["x"]})
    assert resp.status_code == 404
    resp = service.post("/warmstart", json={"window_id": "w", "texts": ["x"]})
    assert resp.status_code == 400
    resp = service.post("/warmstart", content=b"not json")
    assert resp.status_code == 400
