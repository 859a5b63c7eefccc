#!/usr/bin/env python3
"""Build a small randomly-initialized masked-LM checkpoint with a
character-level WordPiece tokenizer. Useful for tests and for running the
sidecar in environments without downloaded pretrained weights.

    python scripts/make_tiny_checkpoint.py --out ./tiny-encoder
"""

import argparse
import string

import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.normalizers import BertNormalizer
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import BertProcessing
from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast


def build_tokenizer() -> PreTrainedTokenizerFast:
    chars = string.ascii_lowercase + string.digits + "-'"
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += list(chars)
    vocab += ["##" + c for c in chars]
    vmap = {tok: i for i, tok in enumerate(vocab)}
    tk = Tokenizer(WordPiece(vmap, unk_token="[UNK]", max_input_chars_per_word=100))
    tk.normalizer = BertNormalizer(lowercase=True)
    tk.pre_tokenizer = BertPreTokenizer()
    tk.post_processor = BertProcessing(("[SEP]", vmap["[SEP]"]), ("[CLS]", vmap["[CLS]"]))
    return PreTrainedTokenizerFast(
        tokenizer_object=tk,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )


def main(out: str, hidden: int = 64, layers: int = 2, heads: int = 2, seed: int = 7) -> None:
    tokenizer = build_tokenizer()
    config = BertConfig(
        vocab_size=len(tokenizer),
        hidden_size=hidden,
        num_hidden_layers=layers,
        num_attention_heads=heads,
        intermediate_size=hidden * 2,
        max_position_embeddings=128,
    )
    torch.manual_seed(seed)
    model = BertForMaskedLM(config)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    print(f"wrote checkpoint to {out} (dim {hidden}, vocab {len(tokenizer)})")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    parser.add_argument("--hidden", type=int, default=64)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--heads", type=int, default=2)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    main(args.out, args.hidden, args.layers, args.heads, args.seed)
