"""Regenerate the bundled synthetic corpus and print its planted structure."""

import argparse
from pathlib import Path

from signed_ego.synthetic import make_corpus

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=ROOT / "fixtures" / "corpus.jsonl.gz")
    args = ap.parse_args()
    corpus = make_corpus(args.seed)
    corpus.write(args.out)
    print(f"wrote {args.out} ({len(corpus.lines)} lines)")
    print("mixed-direction pairs:", ", ".join(f"{a}-{b}" for a, b in corpus.mixed_pairs))
    print("failing egos:", ", ".join(f"{e} ({r})" for e, r in sorted(corpus.failing.items())))


if __name__ == "__main__":
    main()
