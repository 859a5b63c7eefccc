"""Checkpoint-backed text encoder with mean pooling and bounded
masked-LM fine-tuning for lineage warm starts."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer

from .masking import mask_text


def checkpoint_hash(parent: str, window_id: str, steps: int) -> str:
    blob = f"{parent}|{window_id}|{steps}".encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class CheckpointEncoder:
    """Wraps a masked-LM checkpoint; embeddings are L2-normalized mean
    pooled encoder states."""

    def __init__(self, path, max_length: int = 64):
        self.path = str(path)
        self.model = AutoModelForMaskedLM.from_pretrained(self.path)
        self.model.eval()
        self.tokenizer = AutoTokenizer.from_pretrained(self.path)
        self.max_length = max_length

    @property
    def dim(self) -> int:
        return int(self.model.config.hidden_size)

    @property
    def base_hash(self) -> str:
        return hashlib.sha256(str(Path(self.path).resolve()).encode()).hexdigest()[:16]

    def _encoder(self):
        # BertForMaskedLM exposes the bare encoder as .bert; fall back to
        # the base_model attribute for other architectures
        return getattr(self.model, "bert", self.model.base_model)

    @torch.no_grad()
    def embed(self, texts: list[str], mask_stems: list[str] | None = None) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float32)
        if mask_stems:
            texts = [mask_text(t, mask_stems, self.tokenizer.mask_token) for t in texts]
        enc = self.tokenizer(
            texts, padding=True, truncation=True, max_length=self.max_length,
            return_tensors="pt",
        )
        hidden = self._encoder()(**enc).last_hidden_state
        mask = enc["attention_mask"].unsqueeze(-1).float()
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        out = pooled.numpy().astype(np.float64)
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return (out / norms).astype(np.float32)

    def warmstart(self, texts: list[str], out_dir, steps: int = 10,
                  lr: float = 5e-4, seed: int = 0, mask_prob: float = 0.15) -> None:
        """Bounded masked-LM fine-tune on the supplied texts; the derived
        checkpoint is written to ``out_dir``."""
        torch.manual_seed(seed)
        model = AutoModelForMaskedLM.from_pretrained(self.path)
        model.train()
        optimizer = torch.optim.AdamW(model.parameters(), lr=lr)
        mask_id = self.tokenizer.mask_token_id
        batch = max(1, min(8, len(texts)))
        for step in range(steps):
            lo = (step * batch) % max(1, len(texts))
            chunk = texts[lo : lo + batch] or texts[:batch]
            enc = self.tokenizer(
                chunk, padding=True, truncation=True, max_length=self.max_length,
                return_tensors="pt",
            )
            input_ids = enc["input_ids"].clone()
            labels = input_ids.clone()
            special = torch.zeros_like(input_ids, dtype=torch.bool)
            for tok_id in self.tokenizer.all_special_ids:
                special |= input_ids == tok_id
            masked = (torch.rand_like(input_ids, dtype=torch.float) < mask_prob) & ~special
            if not masked.any():  # guarantee at least one target
                candidates = (~special).nonzero()
                if len(candidates):
                    i, j = candidates[0]
                    masked[i, j] = True
            labels[~masked] = -100
            input_ids[masked] = mask_id
            loss = model(
                input_ids=input_ids, attention_mask=enc["attention_mask"], labels=labels
            ).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        model.eval()
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        model.save_pretrained(out_dir)
        self.tokenizer.save_pretrained(out_dir)
