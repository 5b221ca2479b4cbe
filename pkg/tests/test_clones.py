import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fixture_text
from metakernel import clones
from metakernel import model_store as ms
from metakernel.errors import CloneRestriction, DerivationCycle, IllegalContainment, PrototypeInUse, UnknownAttribute
from metakernel.generators import GenConfig, ModelGenConfig, gen_metamodel, gen_model, random_clone_op
from metakernel.syntax_io import parse_model
from oracles import isomorphic_copy

BC = "BufferedConnection"


@pytest.fixture
def fig(signalflow):
    return parse_model(fixture_text("nested_clone.mdl"), signalflow)


def wire(model, mm, src, dst, container):
    return clones.add_link(model, mm, BC, {"src": src, "dst": dst}, container)


def test_fixture_clone_is_isomorphic(fig):
    assert clones.audit(fig) == []
    assert isomorphic_copy(fig, 4, 7)


def test_clone_component2_into_component1(signalflow, fig):
    c = clones.clone(fig, signalflow, 4, 1, "C3")
    assert ms.entity_path(fig, c) == "/Component1/C3"
    assert isomorphic_copy(fig, 4, c)
    assert all(fig.entities[x].clone_info.modified == set() for x in ms.subtree(fig, c))
    assert clones.audit(fig) == []


def test_leaf_clone(signalflow, fig):
    c = clones.clone(fig, signalflow, 2, 1, "in2")
    (m,) = [m for m in fig.correspondences if m.clone_root == c]
    assert m.pairs == {2: c} and m.link_pairs == {}


def test_five_entity_subtree_with_internal_and_external_links(signalflow):
    model = ms.new_model(signalflow)
    top = ms.instantiate(model, signalflow, "Component", None, "Top")
    proto = ms.instantiate(model, signalflow, "Component", top, "P")
    a = ms.instantiate(model, signalflow, "InPort", proto)
    b = ms.instantiate(model, signalflow, "OutPort", proto)
    inner = ms.instantiate(model, signalflow, "Component", proto)
    c = ms.instantiate(model, signalflow, "InPort", inner)
    outside = ms.instantiate(model, signalflow, "InPort", top)
    wire(model, signalflow, a, c, proto)
    wire(model, signalflow, a, b, proto)
    wire(model, signalflow, c, b, inner)
    wire(model, signalflow, b, outside, top)  # end outside
    wire(model, signalflow, a, b, top)  # container outside
    assert len(ms.subtree(model, proto)) == 5
    n_links = len(model.links)
    cl = clones.clone(model, signalflow, proto, top, "Q")
    assert len(ms.subtree(model, cl)) == 5
    assert len(model.links) == n_links + 3
    assert isomorphic_copy(model, proto, cl)
    assert clones.audit(model) == []


def test_extensions_are_not_copied(signalflow, fig):
    ms.annotate(fig, 5, "note", "only here")
    c = clones.clone(fig, signalflow, 4, 1)
    m = fig.correspondences[-1]
    assert fig.entities[m.pairs[5]].extensions == {}
    assert fig.entities[c].values == fig.entities[4].values


def test_unmodified_tracks_modified_survives(signalflow, fig):
    clones.update_attribute(fig, signalflow, 4, "gain", 3.0)
    assert fig.entities[7].values["gain"] == 3.0
    clones.update_attribute(fig, signalflow, 7, "gain", 2.0)
    assert fig.entities[7].clone_info.modified == {"gain"}
    updated = clones.update_attribute(fig, signalflow, 4, "gain", 5.0)
    assert fig.entities[7].values["gain"] == 2.0 and updated == []
    with pytest.raises(UnknownAttribute):
        clones.propagate_attribute(fig, signalflow, 4, "colour")


def test_three_level_chain(signalflow, fig):
    b = clones.clone(fig, signalflow, 7, 1, "C2b")
    clones.update_attribute(fig, signalflow, 4, "label", "chain")
    assert fig.entities[7].values["label"] == "chain"
    assert fig.entities[b].values["label"] == "chain"
    clones.update_attribute(fig, signalflow, 7, "label", "mine")
    assert fig.entities[b].values["label"] == "mine"
    clones.update_attribute(fig, signalflow, 4, "label", "again")
    assert fig.entities[b].values["label"] == "mine"


def test_add_in_prototype_reaches_clone(signalflow, fig):
    new = clones.add_entity(fig, signalflow, 4, "InPort", "in2")
    m = fig.correspondences[0]
    assert fig.entities[m.pairs[new]].class_name == "InPort"
    lid = wire(fig, signalflow, new, 6, 4)
    assert m.link_pairs[lid] in fig.links
    assert clones.audit(fig) == []


def test_delete_without_clones_is_noop_summary(signalflow):
    model = ms.new_model(signalflow)
    top = ms.instantiate(model, signalflow, "Component")
    p = ms.instantiate(model, signalflow, "InPort", top)
    s = clones.delete_entity(model, p)
    assert s.removed_entities == [p] and s.removed_links == [] and s.added_entities == []


def test_delete_link_anchor_in_prototype(signalflow, fig):
    lid = wire(fig, signalflow, 5, 6, 4)
    m = fig.correspondences[0]
    twin = m.link_pairs[lid]
    s = clones.delete_entity(fig, 6)
    assert 9 in s.removed_entities and twin in s.removed_links and lid in s.removed_links
    assert ms.check_forest(fig) == [] and clones.audit(fig) == []


def test_guard(signalflow, fig):
    assert not clones.add_entity_in_clone_guard(fig, 7, "InPort")
    assert clones.add_entity_in_clone_guard(fig, 4, "InPort")
    assert clones.add_entity_in_clone_guard(fig, None, "Component")
    with pytest.raises(CloneRestriction):
        clones.add_entity(fig, signalflow, 7, "InPort")
    with pytest.raises(CloneRestriction):
        clones.delete_entity(fig, 8)
    with pytest.raises(CloneRestriction):
        wire(fig, signalflow, 8, 9, 7)


def test_subprototype_accepts_local_additions(signalflow, fig):
    s = clones.create_subprototype(fig, signalflow, 4, 1, "Sub")
    m = fig.correspondences[-1]
    assert m.kind == clones.SUBPROTOTYPE and len(m.pairs) == 3
    local = clones.add_entity(fig, signalflow, s, "OutPort", "extra")
    assert local not in m.pairs.values()
    assert clones.audit(fig) == []
    clones.update_attribute(fig, signalflow, 4, "gain", 7.5)
    assert fig.entities[s].values["gain"] == fig.entities[7].values["gain"] == 7.5


def test_prototype_in_use(signalflow, fig):
    with pytest.raises(PrototypeInUse) as exc:
        clones.delete_entity(fig, 4)
    assert "C2" in str(exc.value)
    outer = ms.instantiate(fig, signalflow, "Component", None, "Outer")
    clones.clone(fig, signalflow, 4, outer)
    with pytest.raises(PrototypeInUse):
        clones.delete_entity(fig, 1)  # an ancestor of a prototype with a clone elsewhere
    clones.delete_entity(fig, outer)
    clones.delete_entity(fig, 7)
    assert fig.correspondences == []
    clones.delete_entity(fig, 4)
    assert ms.check_forest(fig) == []


def test_derivation_cycle(signalflow, fig):
    with pytest.raises(DerivationCycle):
        clones.clone(fig, signalflow, 1, 4)
    with pytest.raises(IllegalContainment):
        clones.clone(fig, signalflow, 4, 5)


def test_root_level_clone(signalflow, fig):
    c = clones.clone(fig, signalflow, 4, None)
    assert c in fig.roots and clones.audit(fig) == []


@given(st.integers(0, 2**32 - 1))
def test_fresh_clone_isomorphic(seed):
    rng = random.Random(seed)
    mm = gen_metamodel(rng, GenConfig(), "G")
    model = gen_model(rng, mm, ModelGenConfig(p_fault=0.0, max_entities=15))
    small = [e for e in model.entities if len(ms.subtree(model, e)) <= 8]
    if not small:
        return
    proto = rng.choice(small)
    root = clones.clone(model, mm, proto, None)
    assert isomorphic_copy(model, proto, root)
    assert clones.audit(model) == []


@given(st.integers(0, 2**32 - 1))
def test_copy_on_write_marks_only_grow_by_clone_edits(seed):
    rng = random.Random(seed)
    mm = gen_metamodel(rng, GenConfig(), "G")
    model = gen_model(rng, mm, ModelGenConfig(p_fault=0.0, max_entities=10))
    for _ in range(60):
        before = {e.id: set(e.clone_info.modified) for e in model.entities.values() if e.clone_info}
        op, outcome = random_clone_op(rng, model, mm, max_entities=60)
        after = {e.id: set(e.clone_info.modified) for e in model.entities.values() if e.clone_info}
        grown = [i for i in after if i in before and after[i] != before[i]]
        assert all(after[i] >= before[i] for i in after if i in before)
        assert len(grown) <= 1 and (not grown or op == "set_attribute")
        assert clones.audit(model) == [] and ms.check_forest(model) == []
