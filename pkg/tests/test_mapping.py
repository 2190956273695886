from __future__ import annotations

import pytest
from hypothesis import given

from hasneto.mapping import (
    MaterializeError, Resolver, decompose, graph_for, instances, materialize, put, types_of,
)
from hasneto.model import ClassId, Platform
from hasneto.store import INFRASTRUCTURE_GRAPH, LABEL, RDF_TYPE, GraphStore, Literal, Triple
from scenarios import COLLECTION, DEPLOYMENT, EX, clean_store
from strategies import instances as typed_instances


@given(typed_instances)
def test_materialize_inverts_decompose(inst):
    store = GraphStore()
    store.insert_many(INFRASTRUCTURE_GRAPH, decompose(inst))
    assert materialize(store, inst.iri) == inst


@given(typed_instances)
def test_decompose_is_deterministic(inst):
    assert decompose(inst) == decompose(inst)


def test_minimal_platform_is_three_triples():
    p = Platform(EX + "tower", "tower", "stationary")
    assert decompose(p) == {
        Triple(p.iri, RDF_TYPE, "http://hadatac.org/ont/vstoi#Platform"),
        Triple(p.iri, LABEL, Literal("tower", "string")),
        Triple(p.iri, "http://hadatac.org/ont/hasneto#hasMobility", Literal("stationary", "string")),
    }


def test_fixture_deployment_has_four_settings():
    store = clean_store()
    dep = materialize(store, DEPLOYMENT)
    assert dict(dep.settings) == {"interval": "60s", "height": "2m", "power": "solar",
                                  "mode": "continuous"}


def test_untyped_subject():
    store = GraphStore()
    store.insert(INFRASTRUCTURE_GRAPH, Triple(EX + "x", LABEL, Literal.of("x")))
    with pytest.raises(MaterializeError, match="untyped subject"):
        materialize(store, EX + "x")


def test_missing_required_field():
    store = GraphStore()
    p = Platform(EX + "tower", "tower", "stationary")
    put(store, p)
    store.remove(INFRASTRUCTURE_GRAPH, Triple(p.iri, "http://hadatac.org/ont/hasneto#hasMobility",
                                              Literal("stationary", "string")))
    with pytest.raises(MaterializeError):
        materialize(store, p.iri)


def test_graph_placement():
    store = clean_store()
    m = materialize(store, EX + "m/clean0")
    assert graph_for(store, m) == COLLECTION
    assert graph_for(store, materialize(store, COLLECTION)) == COLLECTION
    assert graph_for(store, materialize(store, DEPLOYMENT)) == INFRASTRUCTURE_GRAPH
    assert store.graphs_of(EX + "obs/clean0") == {COLLECTION}


def test_instances_and_resolver():
    store = clean_store()
    ms = instances(store, ClassId.MEASUREMENT)
    assert len(ms) == 4 and ms == sorted(ms)
    r = Resolver(store)
    assert r.get(ms[0], ClassId.MEASUREMENT).iri == ms[0]
    assert r.get(ms[0], ClassId.UNIT) is None
    assert r.get(EX + "nothing", ClassId.MEASUREMENT) is None
    assert types_of(store, DEPLOYMENT) == {ClassId.DEPLOYMENT}
