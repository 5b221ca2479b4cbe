"""Walk through the signal-flow scenarios: constraint check, clone triptych, evolution.

    python scripts/signalflow_demo.py
"""

from pathlib import Path

from metakernel import clones
from metakernel import model_store as ms
from metakernel.constraints import eval_all
from metakernel.evolution import diff_metamodels, evolution_report
from metakernel.syntax_io import parse_metamodel, parse_model, serialize_model

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def load(name):
    return (FIXTURES / name).read_text()


def main() -> None:
    mm = parse_metamodel(load("signalflow.mm"))
    for name in ("short_circuit.mdl", "pass_up.mdl"):
        model = parse_model(load(name), mm)
        results, ok = eval_all(model, mm)
        print(f"{name}: {'well formed' if ok else 'ill formed'}")
        for r in results:
            for v in r.violations:
                print(f"  {r.name} violated at {ms.entity_path(model, v.context)} ({ms.element_path(model, v.element)})")

    model = parse_model(load("nested_clone.mdl"), mm)
    proto, c2 = ms.resolve(model, "/Component1/Component2"), ms.resolve(model, "/Component1/C2")
    clones.update_attribute(model, mm, c2, "gain", 9.0)
    clones.update_attribute(model, mm, proto, "gain", 4.0)
    clones.update_attribute(model, mm, proto, "label", "amp")
    print("\nclone triptych")
    for attr in ("gain", "label"):
        print(f"  {attr}: prototype={ms.get_attribute(model, mm, proto, attr)!r} clone={ms.get_attribute(model, mm, c2, attr)!r}")
    print(f"  clone modified: {sorted(model.entities[c2].clone_info.modified)}")
    clones.add_entity(model, mm, proto, "InPort", "trim")
    print("  after adding /Component1/Component2/trim:", [model.entities[c].name for c in model.entities[c2].children])
    print("\n" + serialize_model(model))

    v1, v3 = parse_metamodel(load("signalflow_base.mm")), parse_metamodel(load("signalflow_no_outport.mm"))
    evolving = parse_model(load("evolve_model.mdl"), v1)
    for old, new in ((v1, mm), (v1, v3)):
        print(f"{old.name} v{old.version} -> v{new.version}: {', '.join(map(str, diff_metamodels(old, new)))}")
        for i in evolution_report(evolving, old, new):
            print(f"  {i.kind:24} {i.path}")


if __name__ == "__main__":
    main()
