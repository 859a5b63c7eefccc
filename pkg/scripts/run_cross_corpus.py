#!/usr/bin/env python3
"""Cross-corpus generalization table on synthetic disjoint-signal corpora
(or user corpora given as name=dir with train.jsonl/test.jsonl).

Example:
    python scripts/run_cross_corpus.py --synthetic 3 --out results/cross.csv
"""

import argparse
import csv
import json
from pathlib import Path

from tadkit.cli import _load_corpus
from tadkit.refresh import cross_corpus_eval, make_synthetic_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--synthetic", type=int, default=2,
                        help="number of synthetic corpora to generate")
    parser.add_argument("--corpora", nargs="*", default=[],
                        help="extra corpora as name=dir")
    parser.add_argument("--groups", default=None,
                        help="JSON similarity groups, e.g. '{\"a\": [\"b\"]}'")
    parser.add_argument("--kind", default="centroid")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results/cross_corpus.csv")
    args = parser.parse_args()

    corpora = [
        make_synthetic_corpus(f"syn{i}", seed=101 + 101 * i)
        for i in range(args.synthetic)
    ]
    for spec in args.corpora:
        name, _, path = spec.partition("=")
        corpora.append(_load_corpus(name, path))

    groups = json.loads(args.groups) if args.groups else None
    result = cross_corpus_eval(corpora, groups, kind=args.kind, seed=args.seed)

    header = f"{'corpus':10s} {'same':>6s} {'cross':>6s} {'similar':>8s}"
    print(header)
    for name in result.names:
        cross = result.cross[name]
        sim = result.similar[name]
        print(
            f"{name:10s} {result.same[name]:6.3f} "
            f"{cross if cross is None else round(cross, 3)!s:>6s} "
            f"{sim if sim is None else round(sim, 3)!s:>8s}"
        )

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["train", "test", "accuracy"])
        writer.writeheader()
        writer.writerows(result.to_csv_rows())
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
