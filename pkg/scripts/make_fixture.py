#!/usr/bin/env python3
"""
Synthetic Fixture Script

Write a small deterministic split for smoke runs of the harness.

Usage:
    python scripts/make_fixture.py data/fixture --sequences 3 --frames 10
    python scripts/make_fixture.py data/fixture_lt --layout tnllt --absent 4-6
"""

import argparse
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.dataset.synthetic import make_synthetic_split
from app.schemas.geometry import ImageSize


def main() -> int:
    parser = argparse.ArgumentParser(description="Generate a synthetic tracking split")
    parser.add_argument("root", help="output directory (one subdirectory per sequence)")
    parser.add_argument("--sequences", type=int, default=3)
    parser.add_argument("--frames", type=int, default=10)
    parser.add_argument("--size", default="160x120", help="WIDTHxHEIGHT")
    parser.add_argument("--layout", choices=["tnl2k", "tnllt"], default="tnl2k")
    parser.add_argument("--absent", help="1-based inclusive frame span, e.g. 4-6")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    width, height = (int(v) for v in args.size.lower().split("x"))
    span = None
    if args.absent:
        lo, hi = (int(v) for v in args.absent.split("-"))
        span = (lo, hi)

    root = make_synthetic_split(
        args.root,
        n_sequences=args.sequences,
        n_frames=args.frames,
        size=ImageSize(width=width, height=height),
        layout=args.layout,
        seed=args.seed,
        absent_span=span,
    )
    print(f"✅ Wrote {args.sequences} sequences x {args.frames} frames to {root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
