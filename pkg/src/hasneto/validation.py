"""Rule catalog over the four metadata categories and the validator.

Rule ids are ``DC<category>-<n>``: 1 infrastructure, 2 interventions and
calibration, 3 scientific annotation, 4 provenance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .mapping import Resolver, instances
from .model import (
    DEVICE_CLASSES, ClassId, DataCollection, Deployment, Mobility, Unit,
)
from .serialization import fingerprint
from .store import P, ROLE_PREDICATES, GraphStore, Literal, bulk
from .units import ConversionError, convert

RULES: dict[str, tuple[str, str]] = {
    "DC1-1": ("error", "deployment instrument and platform resolve"),
    "DC1-2": ("error", "detector attached to at most one instrument"),
    "DC1-3": ("warning", "stationary platform has a location"),
    "DC2-1": ("warning", "measurement within the detector's calibrated range"),
    "DC2-2": ("warning", "no unrecorded intervention during an active collection"),
    "DC3-1": ("error", "measurement characteristic, unit, observation and entity resolve"),
    "DC3-2": ("error", "unit quantity kind matches characteristic"),
    "DC4-1": ("error", "collection has agents and exactly one deployment"),
    "DC4-2": ("error", "measurement time within the deployment interval"),
    "DC4-3": ("error", "observation measurements share one collection"),
}


@dataclass(frozen=True, order=True)
class Violation:
    rule_id: str
    subject: str
    severity: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    store_fingerprint: str

    @property
    def errors(self) -> int:
        return sum(v.severity == "error" for v in self.violations)

    @property
    def warnings(self) -> int:
        return sum(v.severity == "warning" for v in self.violations)

    def rule_ids(self) -> list[str]:
        return [v.rule_id for v in self.violations]


def _one(values: Optional[list]) -> Optional[str]:
    """The single IRI value of a functional property, else None."""
    if not values or len(values) != 1 or isinstance(values[0], Literal):
        return None
    return values[0]


def _literal(values: Optional[list]):
    if not values or len(values) != 1 or not isinstance(values[0], Literal):
        return None
    return values[0].to_python()


class _Validator:
    def __init__(self, store: GraphStore, resolver: Optional[Resolver] = None):
        self.store = store
        self.r = resolver or Resolver(store)
        self.out: list[Violation] = []
        self._deployment_of: dict[str, Optional[Deployment]] = {}
        self._ranged: dict[tuple[str, str], list] = {}
        # Filled while scanning measurements; reused by DC4-3.
        self._dc_of: dict[str, set] = {}
        self._obs_dcs: dict[str, set] = {}

    def flag(self, rule: str, subject: str, message: str) -> None:
        self.out.append(Violation(rule, subject, RULES[rule][0], message))

    # -- shared lookups ----------------------------------------------------

    def deployment_of(self, dc_iri: str) -> Optional[Deployment]:
        """The collection's single resolvable Deployment record."""
        if dc_iri not in self._deployment_of:
            deps = self.store.objects(dc_iri, P["deployment"])
            dep = self.r.get(deps[0], ClassId.DEPLOYMENT) if len(set(deps)) == 1 else None
            self._deployment_of[dc_iri] = dep
        return self._deployment_of[dc_iri]

    def instruments_listing(self, detector: str) -> list[str]:
        return sorted(i for i in self.store.subjects(P["detector"], detector)
                      if self.r.is_a(i, ClassId.INSTRUMENT))

    def ranged_detectors(self, dc_iri: str, characteristic: str) -> list:
        key = (dc_iri, characteristic)
        if key not in self._ranged:
            found = []
            dep = self.deployment_of(dc_iri)
            inst = self.r.get(dep.instrument, ClassId.INSTRUMENT) if dep else None
            if inst is not None:
                for d_iri in inst.detectors:
                    det = self.r.get(d_iri, ClassId.DETECTOR)
                    if det is not None and det.range is not None \
                            and det.characteristic == characteristic:
                        found.append(det)
            self._ranged[key] = found
        return self._ranged[key]

    # -- category 1 --------------------------------------------------------

    def infrastructure(self) -> None:
        for dep in instances(self.store, ClassId.DEPLOYMENT):
            props = self.r.props(dep)
            for field, cls in (("instrument", ClassId.INSTRUMENT), ("platform", ClassId.PLATFORM)):
                target = _one(props.get(P[field]))
                if target is None:
                    self.flag("DC1-1", dep, f"{field}: expected exactly one {cls.value} reference")
                elif not self.r.is_a(target, cls):
                    self.flag("DC1-1", dep, f"{field} {target} does not resolve to a {cls.value}")

        devices: set[str] = set()
        for cls in DEVICE_CLASSES:
            devices.update(instances(self.store, cls))
        for iri in sorted(devices):
            kinds = sorted(k.value for k in self.r.types(iri) & DEVICE_CLASSES)
            if len(kinds) > 1:
                self.flag("DC1-1", iri, f"typed as more than one device category: {', '.join(kinds)}")

        for det in instances(self.store, ClassId.DETECTOR):
            owners = self.instruments_listing(det)
            if len(owners) > 1:
                self.flag("DC1-2", det, f"listed by {len(owners)} instruments: {', '.join(owners)}")

        for plat in instances(self.store, ClassId.PLATFORM):
            props = self.r.props(plat)
            mobility = _literal(props.get(P["mobility"]))
            has_loc = props.get(P["latitude"]) and props.get(P["longitude"])
            if mobility == Mobility.STATIONARY.value and not has_loc:
                self.flag("DC1-3", plat, "stationary platform has no location")

    # -- category 2 --------------------------------------------------------

    def interventions(self, collections: list[DataCollection]) -> None:
        by_instrument: dict[str, list[DataCollection]] = {}
        for dc in collections:
            dep = self.deployment_of(dc.iri)
            if dep is not None:
                by_instrument.setdefault(dep.instrument, []).append(dc)
        for iri in instances(self.store, ClassId.INTERVENTION_EVENT):
            ev = self.r.get(iri, ClassId.INTERVENTION_EVENT)
            if ev is None:
                continue
            if self.r.is_a(ev.target, ClassId.INSTRUMENT):
                targets = [ev.target]
            elif self.r.is_a(ev.target, ClassId.DETECTOR):
                targets = self.instruments_listing(ev.target)
            else:
                continue
            for inst in targets:
                for dc in by_instrument.get(inst, ()):
                    if not dc.active_at(ev.at):
                        continue
                    dep = self.deployment_of(dc.iri)
                    if ("configuration", ev.iri) in dep.settings:
                        continue
                    self.flag("DC2-2", ev.iri,
                              f"{ev.kind.value} of {ev.target} during collection {dc.iri} "
                              f"without a recorded configuration setting")

    def calibrated_range(self, m: str, value, unit: Optional[Unit], ch: str, dc: str) -> None:
        if value is None or unit is None:
            return
        for det in self.ranged_detectors(dc, ch):
            rng_unit = self.r.get(det.range.unit, ClassId.UNIT)
            if rng_unit is None:
                continue
            try:
                v = convert(value, unit, rng_unit)
            except ConversionError:
                continue
            if not det.range.min <= v <= det.range.max:
                self.flag("DC2-1", m,
                          f"value {v} {rng_unit.label} outside calibrated range "
                          f"[{det.range.min}, {det.range.max}] of detector {det.iri}")
                return

    # -- categories 2-4 over measurements -----------------------------------

    def measurements(self, collections: set[str]) -> None:
        r = self.r
        obs_entity: dict[str, bool] = {}
        for m in instances(self.store, ClassId.MEASUREMENT):
            props = r.props(m)
            ch = _one(props.get(P["characteristic"]))
            unit_iri = _one(props.get(P["unit"]))
            obs = _one(props.get(P["observation"]))
            dc = _one(props.get(P["data_collection"]))
            value = _literal(props.get(P["value"]))
            when = _literal(props.get(P["timestamp"]))
            for d in props.get(P["data_collection"], ()):
                self._dc_of.setdefault(m, set()).add(d)
                for o in props.get(P["observation"], ()):
                    self._obs_dcs.setdefault(o, set()).add(d)

            characteristic = r.get(ch, ClassId.CHARACTERISTIC)
            unit = r.get(unit_iri, ClassId.UNIT)
            if characteristic is None:
                self.flag("DC3-1", m, f"characteristic does not resolve: {ch}")
            if unit is None:
                self.flag("DC3-1", m, f"unit does not resolve: {unit_iri}")
            if value is None:
                self.flag("DC3-1", m, "missing numeric value")
            if not r.is_a(obs, ClassId.OBSERVATION):
                self.flag("DC3-1", m, f"observation does not resolve: {obs}")
            else:
                if obs not in obs_entity:
                    ent = _one(r.props(obs).get(P["entity"]))
                    obs_entity[obs] = r.is_a(ent, ClassId.ENTITY_OF_INTEREST)
                if not obs_entity[obs]:
                    self.flag("DC3-1", m, f"entity of observation {obs} does not resolve")

            if characteristic is not None and unit is not None \
                    and characteristic.quantity_kind != unit.quantity_kind:
                self.flag("DC3-2", m,
                          f"unit {unit.label} measures {unit.quantity_kind} but characteristic "
                          f"{characteristic.label} is {characteristic.quantity_kind}")

            if dc not in collections:
                self.flag("DC4-2", m, f"data collection does not resolve: {dc}")
                continue
            if ch is not None:
                self.calibrated_range(m, value, unit, ch, dc)
            dep = self.deployment_of(dc)
            if dep is None:
                continue
            if when is None:
                self.flag("DC4-2", m, "missing timestamp")
            elif not dep.covers(when):
                self.flag("DC4-2", m, f"timestamp outside deployment {dep.iri} interval")

    def provenance(self) -> None:
        for dc_iri in instances(self.store, ClassId.DATA_COLLECTION):
            props = self.r.props(dc_iri)
            if not any(props.get(p) for p in ROLE_PREDICATES.values()):
                self.flag("DC4-1", dc_iri, "no agent associated with the collection")
            deps = props.get(P["deployment"]) or []
            if len(set(deps)) != 1:
                self.flag("DC4-1", dc_iri, f"expected exactly one deployment, found {len(set(deps))}")
                continue
            dep = self.deployment_of(dc_iri)
            if dep is None:
                self.flag("DC4-1", dc_iri, f"deployment {deps[0]} does not resolve")
                continue
            start = _literal(props.get(P["start"]))
            end = _literal(props.get(P["end"]))
            if start is None:
                self.flag("DC4-1", dc_iri, "collection has no start time")
            elif start < dep.start or (dep.end is not None and (end is None or end > dep.end)):
                self.flag("DC4-1", dc_iri, f"collection interval not within deployment {dep.iri}")

        for obs in instances(self.store, ClassId.OBSERVATION):
            dcs = set(self._obs_dcs.get(obs, ()))
            for m in self.store.objects(obs, P["measurement"]):
                if m in self._dc_of:
                    dcs |= self._dc_of[m]
                else:
                    dcs.update(self.store.objects(m, P["data_collection"]))
            if len(dcs) > 1:
                self.flag("DC4-3", obs, f"measurements span {len(dcs)} collections: "
                                        f"{', '.join(sorted(map(str, dcs)))}")

    def run(self) -> list[Violation]:
        typed = set(instances(self.store, ClassId.DATA_COLLECTION))
        records = [self.r.get(iri, ClassId.DATA_COLLECTION) for iri in sorted(typed)]
        self.infrastructure()
        self.interventions([dc for dc in records if dc is not None])
        self.measurements(typed)
        self.provenance()
        return sorted(set(self.out))


def validate(store: GraphStore) -> ValidationReport:
    with bulk():
        return ValidationReport(tuple(_Validator(store).run()), fingerprint(store))


def range_violation(store: GraphStore, measurement: str,
                    resolver: Optional[Resolver] = None) -> Optional[str]:
    """DC2-1 message for one measurement, or None when it is in range (or vacuous)."""
    v = _Validator(store, resolver)
    props = v.r.props(measurement)
    ch = _one(props.get(P["characteristic"]))
    dc = _one(props.get(P["data_collection"]))
    if ch is None or dc is None:
        return None
    unit = v.r.get(_one(props.get(P["unit"])), ClassId.UNIT)
    v.calibrated_range(measurement, _literal(props.get(P["value"])), unit, ch, dc)
    return v.out[0].message if v.out else None


def dc2_1_violations(report: ValidationReport) -> set[str]:
    return {v.subject for v in report.violations if v.rule_id == "DC2-1"}


def violations_for(report: ValidationReport, rules: Iterable[str]) -> list[Violation]:
    wanted = set(rules)
    return [v for v in report.violations if v.rule_id in wanted]
