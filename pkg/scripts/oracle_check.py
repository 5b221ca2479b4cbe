"""Compare check_conformance against the brute-force checker in tests/oracles.py.

    python scripts/oracle_check.py --pairs 2000 --seed 1
"""

import argparse
import random
import sys
import time
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import well_formed  # noqa: E402

from metakernel import model_store as ms  # noqa: E402
from metakernel.generators import GenConfig, ModelGenConfig, gen_metamodel, gen_model  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-entities", type=int, default=19)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    verdicts, codes, bad = Counter(), Counter(), []
    for i in range(args.pairs):
        mm = gen_metamodel(rng, GenConfig(), f"G{i}")
        model = gen_model(rng, mm, ModelGenConfig(max_entities=args.max_entities))
        diags = ms.check_conformance(model, mm)
        codes.update({d.code for d in diags})
        want = well_formed(model, mm)
        verdicts[want] += 1
        if (not diags) != want:
            bad.append(i)
    print(f"{args.pairs} pairs in {time.perf_counter() - t0:.2f}s; well-formed={verdicts[True]} ill-formed={verdicts[False]}")
    print("diagnostic codes seen:", dict(sorted(codes.items())))
    print("disagreements:", bad[:20] or "none")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
