"""tadkit: drift-aware dataset construction and refresh evaluation.

Pipeline stages: ingest a timestamped JSONL stream through updatable
keyword filters, cut it into fixed or adaptive time windows, extend each
window with semantically close unfiltered posts via masked embeddings and
high-density cluster sets, sample an oracle subset for human labels,
aggregate noisy expert votes, and measure how static vs refreshed
classifiers age across the stream.
"""

__version__ = "0.1.0"
