"""Merge random disjoint metamodel pairs and re-check conforming models.

    python scripts/merge_conservativity.py --pairs 300
"""

import argparse
import random
import time
from collections import Counter

from metakernel import model_store as ms
from metakernel.errors import MergeConflict
from metakernel.generators import GenConfig, ModelGenConfig, gen_identity_spec, gen_metamodel, gen_model
from metakernel.merge import merge, translate_model


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=100)
    ap.add_argument("--models", type=int, default=8, help="candidate models per side")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    tally = Counter()
    relaxed = 0
    for i in range(args.pairs):
        a = gen_metamodel(rng, GenConfig(max_constraints=0, prefix="L"), f"Left{i}")
        b = gen_metamodel(rng, GenConfig(max_constraints=0, prefix="R"), f"Right{i}")
        try:
            merged, report = merge(a, b, gen_identity_spec(rng, a, b))
        except MergeConflict as err:
            tally["conflict"] += 1
            print(f"pair {i}: {err}")
            continue
        relaxed += len(report.relaxed)
        for src in (a, b):
            for _ in range(args.models):
                m = gen_model(rng, src, ModelGenConfig(p_fault=0.0))
                if not ms.is_well_formed(m, src):
                    continue
                ok = ms.is_well_formed(translate_model(m, merged, report.renames), merged)
                tally["kept" if ok else "lost"] += 1
    print(f"{args.pairs} pairs in {time.perf_counter() - t0:.2f}s: {dict(tally)}; {relaxed} bound relaxations")
    raise SystemExit(1 if tally["lost"] or tally["conflict"] else 0)


if __name__ == "__main__":
    main()
