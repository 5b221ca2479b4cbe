"""Random clone-editing sessions with a full correspondence audit after every op.

    python scripts/clone_soak.py --seeds 5 --ops 1000
"""

import argparse
import random
import time
from collections import Counter
from pathlib import Path

from metakernel import clones
from metakernel import model_store as ms
from metakernel.generators import random_clone_op
from metakernel.syntax_io import parse_metamodel

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def soak(seed: int, ops: int) -> tuple[Counter, list[str]]:
    rng = random.Random(seed)
    mm = parse_metamodel((FIXTURES / "signalflow.mm").read_text())
    model = ms.new_model(mm, "soak")
    top = ms.instantiate(model, mm, "Component", None, "Top")
    for _ in range(3):
        ms.instantiate(model, mm, "Component", top)
    tally = Counter()
    for step in range(ops):
        op, outcome = random_clone_op(rng, model, mm)
        tally[f"{op}:{outcome}"] += 1
        problems = clones.audit(model) + ms.check_forest(model)
        if problems:
            return tally, [f"step {step} ({op}): {p}" for p in problems]
    return tally, []


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--ops", type=int, default=1000)
    ap.add_argument("--first-seed", type=int, default=0)
    args = ap.parse_args()
    failed = 0
    for seed in range(args.first_seed, args.first_seed + args.seeds):
        t0 = time.perf_counter()
        tally, problems = soak(seed, args.ops)
        ok = sum(n for k, n in tally.items() if k.endswith(":ok"))
        refused = sum(n for k, n in tally.items() if k.endswith(":refused"))
        print(f"seed {seed}: {ok} applied, {refused} refused, {time.perf_counter() - t0:.2f}s", "CLEAN" if not problems else "BROKEN")
        for p in problems[:5]:
            print("   ", p)
        failed += bool(problems)
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
