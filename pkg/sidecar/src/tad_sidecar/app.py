"""HTTP service speaking the embedding wire protocol.

GET  /info      -> {"name", "dim", "supports_mask"}
POST /embed     {"texts": [...], "mask_stems": [...] | null}
                -> {"dim", "vectors"}; 400 malformed, 413 oversized batch
POST /warmstart {"parent_hash", "window_id", "texts", "steps"?}
                -> {"checkpoint"}; exclusive (one fine-tune at a time)
"""

from __future__ import annotations

import argparse
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .encoder import CheckpointEncoder, checkpoint_hash


@dataclass
class ServiceConfig:
    model_path: str
    max_batch: int = 64
    checkpoint_store: str = "checkpoints"
    warmstart_max_steps: int = 10
    dim: int | None = None  # validated against the loaded encoder when set
    name: str = "tad-embed-service"


def _bad_request(reason: str) -> JSONResponse:
    return JSONResponse({"error": reason}, status_code=400)


def create_app(config: ServiceConfig) -> FastAPI:
    encoder = CheckpointEncoder(config.model_path)
    if config.dim is not None and config.dim != encoder.dim:
        raise ValueError(f"config dim {config.dim} != encoder dim {encoder.dim}")
    store = Path(config.checkpoint_store)
    warmstart_lock = threading.Lock()
    known = {encoder.base_hash: encoder.path, "base": encoder.path}

    app = FastAPI(title=config.name)

    @app.get("/info")
    def info():
        return {"name": config.name, "dim": encoder.dim, "supports_mask": True}

    @app.post("/embed")
    async def embed(request: Request):
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _bad_request("body is not valid JSON")
        if not isinstance(body, dict):
            return _bad_request("body must be a JSON object")
        texts = body.get("texts")
        if not isinstance(texts, list) or any(not isinstance(t, str) for t in texts):
            return _bad_request("'texts' must be a list of strings")
        stems = body.get("mask_stems")
        if stems is not None and (
            not isinstance(stems, list) or any(not isinstance(s, str) for s in stems)
        ):
            return _bad_request("'mask_stems' must be null or a list of strings")
        if len(texts) > config.max_batch:
            return JSONResponse(
                {"error": f"batch {len(texts)} exceeds max {config.max_batch}"},
                status_code=413,
            )
        vectors = encoder.embed(texts, stems)
        return {"dim": encoder.dim, "vectors": [row.tolist() for row in vectors]}

    @app.post("/warmstart")
    async def warmstart(request: Request):
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _bad_request("body is not valid JSON")
        if not isinstance(body, dict):
            return _bad_request("body must be a JSON object")
        parent = body.get("parent_hash")
        window_id = body.get("window_id")
        texts = body.get("texts", [])
        if not isinstance(parent, str) or not isinstance(window_id, str):
            return _bad_request("'parent_hash' and 'window_id' are required strings")
        if not isinstance(texts, list) or any(not isinstance(t, str) for t in texts):
            return _bad_request("'texts' must be a list of strings")
        if not texts:
            return _bad_request("'texts' must be non-empty for a warm start")
        if parent not in known:
            return JSONResponse({"error": f"unknown parent {parent!r}"}, status_code=404)
        steps = min(int(body.get("steps", config.warmstart_max_steps)),
                    config.warmstart_max_steps)
        new_hash = checkpoint_hash(parent, window_id, steps)
        out_dir = store / new_hash
        with warmstart_lock:
            if not out_dir.exists():  # idempotent per (parent, window, steps)
                parent_encoder = (
                    encoder if known[parent] == encoder.path
                    else CheckpointEncoder(known[parent])
                )
                parent_encoder.warmstart(texts, out_dir, steps=steps)
            known[new_hash] = str(out_dir)
        return {"checkpoint": new_hash}

    return app


def main() -> None:
    parser = argparse.ArgumentParser(description="embedding sidecar")
    parser.add_argument("--model", required=True, help="checkpoint directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8191)
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--checkpoint-store", default="checkpoints")
    args = parser.parse_args()

    import uvicorn

    app = create_app(
        ServiceConfig(
            model_path=args.model,
            max_batch=args.max_batch,
            checkpoint_store=args.checkpoint_store,
        )
    )
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
