#!/usr/bin/env python3
"""Write a synthetic disc dataset as PNGs under the standard class layout.

Usage: python scripts/make_synthetic_dataset.py --out data/synthetic --n-ok 300 --n-nok 300
"""
import argparse

from keypoint_ad.synthetic import write_synthetic_tree


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output root directory")
    parser.add_argument("--n-ok", type=int, default=300)
    parser.add_argument("--n-nok", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=96, help="image side length in pixels")
    args = parser.parse_args()
    root = write_synthetic_tree(args.out, n_ok=args.n_ok, n_nok=args.n_nok, seed=args.seed, size=args.size)
    print(f"wrote {args.n_ok} OK + {args.n_nok} NOK images under {root}")


if __name__ == "__main__":
    main()
