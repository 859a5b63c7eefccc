"""Embedding sidecar: serves transformer-encoder embeddings over HTTP
with optional whole-token keyword masking and lineage-derived masked-LM
warm starts."""

__version__ = "0.1.0"
