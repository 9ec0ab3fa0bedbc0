#!/usr/bin/env python3
"""Independent reference for random_window on the fat Cantor scheme.

Rebuilds the gaps with exact fractions and the counter-mode Bernoulli draws, then writes
the sandwich in the same JSON layout the library serializes.
"""
import argparse
import json
from fractions import Fraction

MASK = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def bernoulli_bit(seed, index, p):
    u = splitmix64(splitmix64(seed) ^ ((index * 0xD1B54A32D192ED03) & MASK))
    return u * p.denominator < p.numerator << 64


def fat_gaps(scale, depth):
    # pieces of stage n have equal length; each loses a centered gap of scale * 4^-n
    gaps = []
    pieces = [Fraction(0)]
    length = Fraction(1)
    for stage in range(1, depth + 1):
        gap = scale / 4**stage
        child = (length - gap) / 2
        nxt = []
        for pos, left in enumerate(pieces):
            lo = left + child
            gaps.append((stage, pos, lo, lo + gap))
            nxt += [left, lo + gap]
        pieces, length = nxt, child
    return sorted(gaps, key=lambda g: g[2])


def rat(q):
    return f"{q.numerator}/{q.denominator}"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--p", default="1/2")
    ap.add_argument("--scale", default="1")
    ap.add_argument("--depth", type=int, default=6)
    args = ap.parse_args()
    p, scale = Fraction(args.p), Fraction(args.scale)

    inner, outer, cursor = [], [], Fraction(0)
    for stage, pos, lo, hi in fat_gaps(scale, args.depth):
        if bernoulli_bit(args.seed, (1 << (stage - 1)) + pos, p):
            inner.append((lo, hi, True))
        else:
            outer.append((cursor, lo, False))
            cursor = hi
    outer.append((cursor, Fraction(1), False))

    def dump(parts):
        return [{"hi": rat(b), "hiOpen": o, "lo": rat(a), "loOpen": o} for a, b, o in parts]

    label = f"random(fat({rat(scale)}),bernoulli(seed={args.seed},p={rat(p)}),depth={args.depth})"
    doc = {
        "depth": args.depth,
        "inner": dump(inner),
        "label": label,
        "measInner": rat(sum((b - a for a, b, _ in inner), Fraction(0))),
        "measOuter": rat(sum((b - a for a, b, _ in outer), Fraction(0))),
        "outer": dump(outer),
    }
    print(json.dumps(doc, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
