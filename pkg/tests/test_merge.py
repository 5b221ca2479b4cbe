import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fixture_text
from metakernel import meta_core as mc
from metakernel import model_store as ms
from metakernel.errors import DuplicateSpecEntry, MergeConflict, NameCollision, UnknownClassInSpec
from metakernel.generators import GenConfig, ModelGenConfig, gen_identity_spec, gen_metamodel, gen_model
from metakernel.merge import (
    IMPLEMENTATION,
    INTERFACE,
    EquivalenceEntry,
    EquivalenceSpec,
    check_merged_conformance,
    merge,
    translate_model,
)
from metakernel.syntax_io import parse_equivalence, parse_metamodel, parse_model

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def discrete():
    return parse_metamodel(fixture_text("discrete.mm"))


@pytest.fixture
def continuous():
    return parse_metamodel(fixture_text("continuous.mm"))


@pytest.fixture
def hybrid(discrete, continuous):
    return merge(discrete, continuous, parse_equivalence(fixture_text("hybrid.eqv")))


def test_system_inside_state(hybrid, discrete):
    merged, report = hybrid
    assert mc.can_contain(merged, "State", "System")
    model = parse_model(fixture_text("hybrid_model.mdl"), merged)
    assert check_merged_conformance(model, merged) == []
    codes = {d.code for d in ms.check_conformance(model, discrete, check_reference=False)}
    assert "unknown-class" in codes


def test_hybrid_report(hybrid):
    merged, report = hybrid
    assert report.produced_classes == ["System"]
    assert report.rewritten == [("SiblingTransitions", []), ("FlowAssigns", [])]
    assert report.flagged == []
    assert report.renames == {"Behavior": "System", "System": "System"}
    assert set(merged.classes) == {"State", "System", "Variable", "Flow"}
    assert {a.name for a in mc.effective_attributes(merged, "System")} == {"priority", "solver"}


def test_pure_discrete_model_still_conforms(hybrid, discrete):
    merged, report = hybrid
    model = ms.new_model(discrete)
    s = ms.instantiate(model, discrete, "State", None, "Idle")
    t = ms.instantiate(model, discrete, "State", s, "Inner")
    u = ms.instantiate(model, discrete, "State", s, "Other")
    ms.instantiate(model, discrete, "Behavior", t)
    ms.connect(model, discrete, "Transition", {"from": t, "to": u}, s)
    assert ms.is_well_formed(model, discrete)
    assert ms.is_well_formed(translate_model(model, merged, report.renames), merged)


def test_renamed_identity_rewrites_constraint(discrete, continuous):
    spec = EquivalenceSpec([EquivalenceEntry("State", "System", new_name="Mode")])
    merged, report = merge(discrete, continuous, spec)
    assert ("SiblingTransitions", [("State", "Mode")]) in report.rewritten
    assert ("FlowAssigns", []) in report.rewritten
    assert merged.constraint("SiblingTransitions").expr.context == "Mode"
    assert merged.classes["Mode"].glyph == "rounded-box"
    # State contained State, System contained System: both now mean Mode, unbounded
    assert [r.child for r in merged.classes["Mode"].containments].count("Mode") == 1
    assert report.relaxed == []


def test_empty_spec_is_disjoint_union(discrete, continuous):
    merged, report = merge(discrete, continuous, EquivalenceSpec())
    assert len(merged.classes) == len(discrete.classes) + len(continuous.classes)
    for src in (discrete, continuous):
        for name in src.classes:
            assert mc.effective_features(merged, name) == mc.effective_features(src, name)
    assert report.produced_classes == [] and report.flagged == []
    assert merged.name == "Discrete_Continuous"


def two_plus_two():
    a = parse_metamodel("metamodel A version 1\nclass Car { attr wheels: integer = 4 }\nclass Garage { contains Car }")
    b = parse_metamodel("metamodel B version 1\nclass Vehicle { attr plate: string = \"\" }\nclass Road { contains Vehicle }")
    return a, b


def test_identity_unions_attributes():
    a, b = two_plus_two()
    merged, report = merge(a, b, EquivalenceSpec([EquivalenceEntry("Car", "Vehicle", new_name="Auto")]))
    assert [x.name for x in merged.classes["Auto"].attributes] == ["wheels", "plate"]
    assert mc.can_contain(merged, "Garage", "Auto") and mc.can_contain(merged, "Road", "Auto")
    for src in (a, b):
        m = ms.new_model(src)
        host = ms.instantiate(m, src, list(src.classes)[1])
        ms.instantiate(m, src, list(src.classes)[0], host)
        assert ms.is_well_formed(translate_model(m, merged, report.renames), merged)


def test_attribute_clash_is_a_conflict():
    a, b = two_plus_two()
    b.classes["Vehicle"].attributes.append(mc.AttributeDef("wheels", mc.ValueType("integer"), 2))
    with pytest.raises(MergeConflict, match="wheels"):
        merge(a, b, EquivalenceSpec([EquivalenceEntry("Car", "Vehicle")]))


def test_identical_attribute_merges_silently():
    a, b = two_plus_two()
    b.classes["Vehicle"].attributes.append(mc.AttributeDef("wheels", mc.ValueType("integer"), 4))
    merged, _ = merge(a, b, EquivalenceSpec([EquivalenceEntry("Car", "Vehicle")]))
    assert [x.name for x in merged.classes["Car"].attributes] == ["wheels", "plate"]


def test_spec_errors(discrete, continuous):
    with pytest.raises(UnknownClassInSpec):
        merge(discrete, continuous, EquivalenceSpec([EquivalenceEntry("Nope", "System")]))
    with pytest.raises(DuplicateSpecEntry):
        merge(
            discrete,
            continuous,
            EquivalenceSpec([EquivalenceEntry("State", "System"), EquivalenceEntry("State", "Flow", INTERFACE, "X")]),
        )
    with pytest.raises(NameCollision):
        merge(discrete, discrete, EquivalenceSpec())
    with pytest.raises(NameCollision):
        merge(discrete, continuous, EquivalenceSpec([EquivalenceEntry("Behavior", "Flow", INTERFACE, "State")]))


def test_crossing_identity_pairs_make_a_cycle():
    a = parse_metamodel("metamodel A version 1\nclass P {}\nclass Q extends P {}")
    b = parse_metamodel("metamodel B version 1\nclass R {}\nclass S extends R {}")
    spec = EquivalenceSpec([EquivalenceEntry("P", "S"), EquivalenceEntry("Q", "R")])
    with pytest.raises(MergeConflict, match="cycle"):
        merge(a, b, spec)


def partial_pair():
    a = parse_metamodel(
        """metamodel A version 1
        class Sensor { attr rate: real = 1.0  contains Cell }
        class Cell {}
        class Rack { contains Sensor }
        association Reads { role by: Sensor  role of: Cell }"""
    )
    b = parse_metamodel(
        """metamodel B version 1
        class Probe { attr depth: integer = 0 }
        class Well { contains Probe }
        association Logs { role who: Probe  role at: Well }
        constraint ProbeLogged { Probe.attachingConnections(Logs)->size() <= 3 }"""
    )
    return a, b


def test_interface_mode():
    a, b = partial_pair()
    merged, report = merge(a, b, EquivalenceSpec([EquivalenceEntry("Sensor", "Probe", INTERFACE, "Instrument")]))
    assert mc.plays_role(merged, "Instrument", "Sensor") and mc.plays_role(merged, "Instrument", "Probe")
    assert not mc.can_contain(merged, "Rack", "Instrument") and not mc.can_contain(merged, "Instrument", "Cell")
    assert {x.name for x in mc.effective_attributes(merged, "Instrument")} == {"rate", "depth"}
    assert not mc.is_subtype(merged, "Instrument", "Sensor")
    assert report.produced_classes == ["Instrument"]
    assert [n for n, _ in report.flagged] == ["ProbeLogged"] and report.rewritten == []


def test_implementation_mode():
    a, b = partial_pair()
    merged, report = merge(a, b, EquivalenceSpec([EquivalenceEntry("Sensor", "Probe", IMPLEMENTATION, "Unit")]))
    assert mc.can_contain(merged, "Rack", "Unit") and mc.can_contain(merged, "Well", "Unit")
    assert mc.can_contain(merged, "Unit", "Cell")
    assert not mc.plays_role(merged, "Unit", "Sensor") and not mc.plays_role(merged, "Unit", "Probe")
    assert [n for n, _ in report.flagged] == ["ProbeLogged"]


def test_relaxation_is_reported():
    a = parse_metamodel("metamodel A version 1\nclass Box { contains Lid [1] }\nclass Lid {}")
    b = parse_metamodel("metamodel B version 1\nclass Crate {}\nclass Shelf { contains Crate [1..2] }")
    merged, report = merge(a, b, EquivalenceSpec([EquivalenceEntry("Box", "Crate")]))
    # Shelf lies outside the merged closure, so its bound is kept
    assert report.relaxed == ["Box contains Lid [1..1] -> [0..1]"]
    # an old Crate model (no lid) must still conform as a Box
    m = ms.new_model(b)
    shelf = ms.instantiate(m, b, "Shelf")
    ms.instantiate(m, b, "Crate", shelf)
    assert ms.is_well_formed(translate_model(m, merged, report.renames), merged)


def shape(mm):
    def cls(c):
        return (
            c.is_abstract,
            frozenset(c.attributes),
            frozenset(c.superclasses),
            frozenset(c.interface_supers),
            frozenset(c.implementation_supers),
            frozenset(c.containments),
        )

    return (
        {n: cls(c) for n, c in mm.classes.items()},
        {n: frozenset(a.roles) for n, a in mm.associations.items()},
        {c.name: c.expr for c in mm.constraints},
    )


@given(seeds)
def test_identity_merge_is_symmetric(seed):
    rng = random.Random(seed)
    a = gen_metamodel(rng, GenConfig(prefix="L"), "Left")
    b = gen_metamodel(rng, GenConfig(prefix="R"), "Right")
    spec = gen_identity_spec(rng, a, b)
    m1, r1 = merge(a, b, spec)
    m2, r2 = merge(b, a, spec.mirrored())
    assert shape(m1) == shape(m2)
    assert sorted(r1.relaxed) == sorted(r2.relaxed)


@given(seeds)
def test_report_partitions_constraints(seed):
    rng = random.Random(seed)
    a = gen_metamodel(rng, GenConfig(prefix="L"), "Left")
    b = gen_metamodel(rng, GenConfig(prefix="R"), "Right")
    merged, report = merge(a, b, gen_identity_spec(rng, a, b))
    names = [c.name for c in a.constraints + b.constraints]
    assert sorted([n for n, _ in report.rewritten] + [n for n, _ in report.flagged]) == sorted(names)
    assert mc.validate_metamodel(merged) == []


@given(seeds)
def test_conservativity(seed):
    rng = random.Random(seed)
    a = gen_metamodel(rng, GenConfig(prefix="L", max_constraints=0), "Left")
    b = gen_metamodel(rng, GenConfig(prefix="R", max_constraints=0), "Right")
    merged, report = merge(a, b, gen_identity_spec(rng, a, b))
    for src in (a, b):
        model = gen_model(rng, src, ModelGenConfig(p_fault=0.0))
        if ms.is_well_formed(model, src):
            assert ms.is_well_formed(translate_model(model, merged, report.renames), merged)
