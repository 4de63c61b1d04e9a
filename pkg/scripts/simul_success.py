"""Success-rate sweep for the randomized simultaneous block factorization.

Fixes a family of matrices with prescribed block shapes, then for each
failure budget eps sweeps scalar valuations v around the prescribed
required_v(q, r, eps) and measures the single-draw success rate over many
attempts.  The rate at v = required_v should sit above 1 - eps.
"""

from __future__ import annotations

import argparse
import random
import sys

from dvrlu.config import DvrConfig
from dvrlu.matrix import random_matrix
from dvrlu.simul import SimulResult, attempt_simultaneous, required_v


def parse_family(text: str) -> list[list[int]]:
    # "2,2;1,3" -> [[2, 2], [1, 3]]
    out = []
    for part in text.split(";"):
        sizes = [int(x) for x in part.split(",") if x.strip()]
        if not sizes:
            raise ValueError(f"empty block list in {text!r}")
        out.append(sizes)
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--prec", type=int, default=30)
    ap.add_argument("--blocks", default="2,2;1,3",
                    help="block sizes per family member, e.g. '2,2;1,3'")
    ap.add_argument("--eps", default="0.5,0.25", help="failure budgets")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--spread", type=int, default=1,
                    help="also sweep v-spread .. v+spread around required_v")
    args = ap.parse_args()

    cfg = DvrConfig(p=args.p, prec=args.prec)
    shapes = parse_family(args.blocks)
    famrng = random.Random(args.seed)
    family = [(random_matrix(cfg, sum(s), famrng), s) for s in shapes]
    r_list = [len(s) for _, s in family]

    dims = "x".join(str(sum(s)) for s in shapes)
    print(f"q={args.p} N={args.prec} family dims {dims} blocks {shapes} "
          f"trials={args.trials} seed={args.seed}")
    for eps in [float(x) for x in args.eps.split(",") if x.strip()]:
        v_star = required_v(args.p, r_list, eps)
        print(f"\neps={eps}  required_v={v_star}  target rate >= {1 - eps:.3f}")
        for v in range(max(0, v_star - args.spread), v_star + args.spread + 1):
            rng = random.Random(args.seed + 1)
            succ = 0
            for _ in range(args.trials):
                got = attempt_simultaneous(cfg, family, v, rng)
                succ += isinstance(got, SimulResult)
            mark = " <- required_v" if v == v_star else ""
            print(f"  v={v}: success {succ}/{args.trials} = {succ / args.trials:.4f}{mark}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
