import copy
import random

from hypothesis import given
from hypothesis import strategies as st

from conftest import fixture_text
from metakernel import evolution as ev
from metakernel import model_store as ms
from metakernel.evolution import Change, diff_metamodels, evolution_report
from metakernel.generators import GenConfig, ModelGenConfig, gen_metamodel, gen_model
from metakernel.meta_core import AttributeDef, RoleDef, ValueType
from metakernel.syntax_io import parse_metamodel, parse_model


def load(name):
    return parse_metamodel(fixture_text(name))


def test_diff_of_identical_is_empty(signalflow):
    assert diff_metamodels(signalflow, copy.deepcopy(signalflow)) == []


def test_diff_removed_outport():
    v2, v3 = load("signalflow_base.mm"), load("signalflow_no_outport.mm")
    assert diff_metamodels(v2, v3) == [Change("ClassRemoved", "OutPort")]


def test_diff_added_attribute(signalflow):
    v2 = copy.deepcopy(signalflow)
    v2.classes["Component"].attributes.append(AttributeDef("delay", ValueType("integer"), 0))
    (c,) = diff_metamodels(signalflow, v2)
    assert (c.kind, c.subject) == ("AttributeAdded", "Component") and "delay" in c.detail


def test_diff_constraint_and_role(signalflow):
    base = load("signalflow_base.mm")
    kinds = [c.kind for c in diff_metamodels(base, signalflow)]
    assert kinds == ["ConstraintAdded"]
    v2 = copy.deepcopy(signalflow)
    roles = v2.associations["BufferedConnection"].roles
    roles[0] = RoleDef("src", "OutPort", roles[0].multiplicity)
    v2.classes["Port"].is_abstract = False
    kinds = [c.kind for c in diff_metamodels(signalflow, v2)]
    assert kinds == ["AbstractnessChanged", "RoleChanged"]


def test_same_version_is_empty(signalflow):
    model = parse_model(fixture_text("nested_clone.mdl"), signalflow)
    assert evolution_report(model, signalflow, signalflow) == []


def test_outport_removal_counts():
    v1, v3 = load("signalflow_base.mm"), load("signalflow_no_outport.mm")
    model = parse_model(fixture_text("evolve_model.mdl"), v1)
    report = evolution_report(model, v1, v3)
    kinds = [i.kind for i in report]
    assert kinds == [ev.ORPHANED] * 3 + [ev.LINK_INVALID] * 2
    assert sorted(i.path for i in report if i.kind == ev.ORPHANED) == ["/Top/Mixer/left", "/Top/Mixer/right", "/Top/out"]


def test_constraint_addition_flags_the_link(signalflow):
    v1 = load("signalflow_base.mm")
    model = parse_model(fixture_text("evolve_model.mdl"), v1)
    (i,) = evolution_report(model, v1, signalflow)
    assert i.kind == ev.NEW_CONSTRAINT_VIOLATION and i.element == 8
    assert "OutPortHierarchy" in i.message


def test_report_does_not_mutate(signalflow):
    v1 = load("signalflow_base.mm")
    model = parse_model(fixture_text("evolve_model.mdl"), v1)
    before = copy.deepcopy(model)
    evolution_report(model, v1, load("signalflow_no_outport.mm"))
    assert model == before


@given(st.integers(0, 2**32 - 1))
def test_report_mirrors_conformance(seed):
    rng = random.Random(seed)
    v1 = gen_metamodel(rng, GenConfig(), "V")
    v2 = gen_metamodel(rng, GenConfig(), "V")
    model = gen_model(rng, v1, ModelGenConfig(p_fault=0.0))
    report = evolution_report(model, v1, v2)
    diags = ms.check_conformance(model, v2, check_reference=False)
    assert len(report) == len(diags)
    assert sorted((i.element, i.path, i.message) for i in report) == sorted((d.element, d.location, d.message) for d in diags)
    order = [ev.IMPACT_KINDS.index(i.kind) for i in report]
    assert order == sorted(order)
    if ms.is_well_formed(model, v1):
        assert evolution_report(model, v1, v1) == []
