"""Provenance traces: measurement -> collection -> deployment -> devices -> agents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .mapping import Resolver, instances
from .model import (
    Agent, ClassId, DataCollection, Deployment, Detector, Instrument, InterventionEvent,
    Platform,
)
from .store import GraphStore, P, ROLE_BY_PREDICATE, StoreError

DEPLOYER_ROLE = "Deployer"


class NotFound(StoreError):
    def __init__(self, iri: str, what: str = "subject"):
        super().__init__(f"unknown {what}: {iri}")
        self.iri = iri


class TraceError(StoreError):
    """A link in the chain is missing; ``hop`` names the first one."""

    def __init__(self, hop: str, iri: Optional[str], message: str = ""):
        super().__init__(f"broken provenance chain at {hop}: {message or iri}")
        self.hop = hop
        self.iri = iri


@dataclass(frozen=True)
class ProvenanceTrace:
    measurement: str
    data_collection: DataCollection
    deployment: Deployment
    instrument: Instrument
    detectors: tuple[Detector, ...]
    platform: Platform
    agents: tuple[tuple[Agent, str], ...]
    interventions: tuple[InterventionEvent, ...]
    notes: tuple[str, ...] = ()


def _need(r: Resolver, iri: Optional[str], cls: ClassId, hop: str):
    if iri is None:
        raise TraceError(hop, None, f"no {hop} reference")
    rec = r.get(iri, cls)
    if rec is None:
        raise TraceError(hop, iri, f"{iri} does not resolve to a well-formed {cls.value}")
    return rec


def trace(store: GraphStore, measurement: str, resolver: Optional[Resolver] = None) -> ProvenanceTrace:
    r = resolver or Resolver(store)
    if not r.is_a(measurement, ClassId.MEASUREMENT):
        raise NotFound(measurement, "measurement")
    m = _need(r, measurement, ClassId.MEASUREMENT, "measurement")
    if r.is_a(m.data_collection, ClassId.DATA_COLLECTION):
        deps = set(store.objects(m.data_collection, P["deployment"]))
        if len(deps) != 1:
            raise TraceError("deployment", None,
                             f"collection {m.data_collection} has {len(deps)} deployment references")
    dc = _need(r, m.data_collection, ClassId.DATA_COLLECTION, "dataCollection")
    dep = _need(r, dc.deployment, ClassId.DEPLOYMENT, "deployment")
    inst = _need(r, dep.instrument, ClassId.INSTRUMENT, "instrument")
    platform = _need(r, dep.platform, ClassId.PLATFORM, "platform")
    detectors = tuple(_need(r, d, ClassId.DETECTOR, "detector") for d in inst.detectors)

    agents: dict[tuple[str, str], Agent] = {}
    for a_iri, role in dc.associations:
        agents[(a_iri, role.value)] = _need(r, a_iri, ClassId.AGENT, "agent")
    deployer = _need(r, dep.deployed_by, ClassId.AGENT, "agent")
    if not any(a == deployer.iri for a, _ in agents):
        agents[(deployer.iri, DEPLOYER_ROLE)] = deployer

    targets = {inst.iri} | set(inst.detectors)
    events = []
    for iri in instances(store, ClassId.INTERVENTION_EVENT):
        ev = r.get(iri, ClassId.INTERVENTION_EVENT)
        if ev is None:
            continue
        if ev.target in targets and ev.at <= m.timestamp:
            _need(r, ev.agent, ClassId.AGENT, "agent")
            events.append(ev)
    events.sort(key=lambda e: (e.at, e.iri))

    notes = []
    matching = [d.iri for d in detectors if d.characteristic == m.characteristic]
    if len(matching) > 1:
        notes.append("ambiguous detector: " + ", ".join(matching)
                     + f" all measure {m.characteristic}")
    return ProvenanceTrace(
        measurement=measurement,
        data_collection=dc,
        deployment=dep,
        instrument=inst,
        detectors=detectors,
        platform=platform,
        agents=tuple(sorted(((a, role) for (_, role), a in agents.items()),
                            key=lambda p: (p[0].iri, p[1]))),
        interventions=tuple(events),
        notes=tuple(notes),
    )


def activities_of(store: GraphStore, agent: str) -> list[tuple[str, ClassId, Optional[str]]]:
    """Every deployment, collection and intervention that references ``agent``."""
    r = Resolver(store)
    if not r.is_a(agent, ClassId.AGENT):
        raise NotFound(agent, "agent")
    out: list[tuple[str, ClassId, Optional[str]]] = []
    for dep in store.subjects(P["deployed_by"], agent):
        if r.is_a(dep, ClassId.DEPLOYMENT):
            out.append((dep, ClassId.DEPLOYMENT, DEPLOYER_ROLE))
    for pred, role in ROLE_BY_PREDICATE.items():
        for dc in store.subjects(pred, agent):
            if r.is_a(dc, ClassId.DATA_COLLECTION):
                out.append((dc, ClassId.DATA_COLLECTION, role))
    for ev in store.subjects(P["agent"], agent):
        if r.is_a(ev, ClassId.INTERVENTION_EVENT):
            out.append((ev, ClassId.INTERVENTION_EVENT, None))
    return sorted(out, key=lambda x: (x[0], x[1].value, x[2] or ""))
