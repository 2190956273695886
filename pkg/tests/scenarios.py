"""Hand-built stores shared by the test modules."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from hasneto.mapping import put
from hasneto.model import (
    Agent, Characteristic, DataCollection, Deployment, Detector, EntityOfInterest,
    Instrument, InterventionEvent, Measurement, Observation, Platform, Range, Unit,
)
from hasneto.store import GraphStore
from hasneto.units import BUILTIN_UNITS, CELSIUS, FAHRENHEIT, GRAM, KELVIN

EX = "http://example.org/kb/"

PLATFORM = EX + "tower1"
INSTRUMENT = EX + "thermometer1"
DETECTOR = EX + "thermistor1"
DEPLOYMENT = EX + "deployment1"
COLLECTION = EX + "collection1"
AIR = EX + "air"
WATER = EX + "water"
AIR_TEMP = EX + "airTemperature"
WATER_TEMP = EX + "waterTemperature"
CO2 = EX + "co2Concentration"
PPM = EX + "unit/ppm"
ALICE = EX + "alice"
BOB = EX + "bob"
T0 = datetime(2015, 6, 1, tzinfo=timezone.utc)


def ts(minutes: float) -> datetime:
    return T0 + timedelta(minutes=minutes)


def infrastructure(store: GraphStore, *, detector_range=(0, 20), range_unit=CELSIUS.iri,
                   deployment_end=None, extra_detectors=()) -> None:
    """Units, agents, entities, one thermometer deployed on one tower."""
    for u in BUILTIN_UNITS:
        put(store, u)
    put(store, Unit(PPM, "parts per million", "concentration", 1, 0))
    put(store, Agent(ALICE, "Alice", "person"))
    put(store, Agent(BOB, "Bob", "person"))
    put(store, EntityOfInterest(AIR, "air", "outside"))
    put(store, EntityOfInterest(WATER, "water"))
    put(store, Characteristic(AIR_TEMP, "air temperature", "temperature"))
    put(store, Characteristic(WATER_TEMP, "water temperature", "temperature"))
    put(store, Characteristic(CO2, "CO2 concentration", "concentration"))
    put(store, Platform(PLATFORM, "weather tower", "stationary", ("42.55", "-73.68")))
    rng = None if detector_range is None else Range(detector_range[0], detector_range[1], range_unit)
    put(store, Detector(DETECTOR, "thermistor", AIR_TEMP, None, rng))
    for det in extra_detectors:
        put(store, det)
    put(store, Instrument(INSTRUMENT, "thermometer", "T-100", "SN-1",
                          (DETECTOR,) + tuple(d.iri for d in extra_detectors)))
    put(store, Deployment(DEPLOYMENT, INSTRUMENT, PLATFORM, T0, BOB, deployment_end,
                          (("interval", "60s"), ("height", "2m"), ("power", "solar"),
                           ("mode", "continuous"))))


def collection(store: GraphStore, iri: str = COLLECTION, start=None, end=None,
               associations=((ALICE, "Scientist"), (BOB, "Technician")),
               deployment: str = DEPLOYMENT) -> None:
    put(store, DataCollection(iri, deployment, start or T0, end, associations))


def measure(store: GraphStore, name: str, value, *, when=None, unit=CELSIUS.iri,
            characteristic=AIR_TEMP, entity=AIR, dc=COLLECTION, obs=None) -> str:
    """Add one measurement in its own observation (unless ``obs`` given)."""
    m = EX + "m/" + name
    o = obs or EX + "obs/" + name
    put(store, Measurement(m, value, unit, characteristic, when or ts(10), o, dc))
    put(store, Observation(o, entity, (m,)), graph=dc)
    return m


def clean_store() -> GraphStore:
    """1 platform, 1 instrument+detector, 1 deployment, 1 collection, 4 measurements."""
    store = GraphStore()
    infrastructure(store)
    collection(store)
    for i, v in enumerate(["12.5", "13", "14.25", "15"]):
        measure(store, f"clean{i}", v, when=ts(10 + i))
    return store


def calibration_store(seed: int = 7):
    """Two collections on one thermometer calibrated for [0, 20] C.

    Collection A sees values in [5, 15]; collection B sees values in [-10, 10].
    Returns (store, a_iris, b_iris, b_values).
    """
    rnd = random.Random(seed)
    store = GraphStore()
    infrastructure(store)
    dc_a, dc_b = EX + "collectionA", EX + "collectionB"
    collection(store, dc_a, ts(0), ts(1000))
    collection(store, dc_b, ts(2000), ts(3000))
    a_iris, b_iris, b_values = [], [], {}
    for i in range(10):
        va = round(rnd.uniform(5, 15), 3)
        a_iris.append(measure(store, f"A{i}", str(va), when=ts(10 + i), dc=dc_a))
    for i in range(10):
        vb = round(rnd.uniform(-10, 10), 3)
        iri = measure(store, f"B{i}", str(vb), when=ts(2010 + i), dc=dc_b)
        b_iris.append(iri)
        b_values[iri] = vb
    return store, a_iris, b_iris, b_values


def single_violation_fixtures() -> dict[str, GraphStore]:
    """One store per rule, each breaking exactly that rule."""
    out = {}

    def fresh():
        s = GraphStore()
        infrastructure(s)
        collection(s)
        measure(s, "ok", "10", when=ts(10))
        return s

    s = fresh()  # deployment on a platform nobody declared
    put(s, Deployment(EX + "deployment2", INSTRUMENT, EX + "ghostPlatform", T0, BOB))
    out["DC1-1"] = s

    s = fresh()
    put(s, Instrument(EX + "thermometer2", "spare thermometer", detectors=(DETECTOR,)))
    out["DC1-2"] = s

    s = fresh()
    put(s, Platform(EX + "mast", "mast", "stationary"))
    out["DC1-3"] = s

    s = fresh()
    measure(s, "cold", "-5", when=ts(11))
    out["DC2-1"] = s

    s = fresh()
    put(s, InterventionEvent(EX + "recal", "calibration", INSTRUMENT, ts(30), BOB,
                             (("offset", "0.2"),)))
    out["DC2-2"] = s

    s = fresh()
    measure(s, "dangling", "10", unit=EX + "unit/nowhere", when=ts(12))
    out["DC3-1"] = s

    s = fresh()
    measure(s, "heavy", "10", unit=GRAM.iri, when=ts(12))
    out["DC3-2"] = s

    s = fresh()
    collection(s, EX + "orphanCollection", associations=())
    out["DC4-1"] = s

    s = fresh()
    measure(s, "early", "10", when=T0 - timedelta(days=1))
    out["DC4-2"] = s

    s = fresh()
    collection(s, EX + "collection2")
    shared = EX + "obs/shared"
    m1 = EX + "m/split1"
    m2 = EX + "m/split2"
    put(s, Measurement(m1, "10", CELSIUS.iri, AIR_TEMP, ts(13), shared, COLLECTION))
    put(s, Measurement(m2, "11", CELSIUS.iri, AIR_TEMP, ts(13), shared, EX + "collection2"))
    put(s, Observation(shared, AIR, (m1, m2)), graph=COLLECTION)
    out["DC4-3"] = s
    return out


def mixed_store() -> GraphStore:
    """Air temperature, air CO2 and water temperature in one collection."""
    store = GraphStore()
    infrastructure(store)
    collection(store)
    measure(store, "airT1", "11", when=ts(10))
    measure(store, "airT2", "12.5", when=ts(11))
    measure(store, "airCO2", "410", unit=PPM, characteristic=CO2, when=ts(10))
    measure(store, "waterT", "9", characteristic=WATER_TEMP, entity=WATER, when=ts(12))
    measure(store, "airTF", "53.6", unit=FAHRENHEIT.iri, when=ts(13))
    measure(store, "airTK", "285.15", unit=KELVIN.iri, when=ts(14))
    return store


INDOOR_AIR = EX + "indoorAir"
CO2_SENSOR = EX + "co2sensor1"
BROKEN_COLLECTION = EX + "brokenCollection"


def oracle_store(seed: int, n: int = 40):
    """Random measurements over 3 entities, 2 characteristics and 4 units.

    Mixes in-range and out-of-range values, a few unit/characteristic kind
    mismatches, and a collection whose deployment does not exist.
    Returns (store, measurement IRIs).
    """
    rnd = random.Random(seed)
    store = GraphStore()
    co2 = Detector(CO2_SENSOR, "CO2 sensor", CO2, None, Range(300, 500, PPM))
    infrastructure(store, extra_detectors=(co2,))
    put(store, EntityOfInterest(INDOOR_AIR, "air", "indoor"))
    collection(store)
    collection(store, BROKEN_COLLECTION, deployment=EX + "ghostDeployment")
    temp_units = [CELSIUS.iri, FAHRENHEIT.iri, KELVIN.iri]
    iris = []
    for i in range(n):
        entity = rnd.choice([AIR, AIR, WATER, INDOOR_AIR])
        if rnd.random() < 0.6:
            ch, unit = AIR_TEMP, rnd.choice(temp_units)
            celsius = rnd.uniform(-10, 30)
            value = {CELSIUS.iri: celsius, FAHRENHEIT.iri: celsius * 9 / 5 + 32,
                     KELVIN.iri: celsius + 273.15}[unit]
        else:
            ch, unit, value = CO2, PPM, rnd.uniform(250, 550)
        if rnd.random() < 0.1:
            unit = PPM if ch == AIR_TEMP else CELSIUS.iri
        dc = BROKEN_COLLECTION if rnd.random() < 0.15 else COLLECTION
        iris.append(measure(store, f"r{i}", f"{value:.3f}", when=ts(10 + i), unit=unit,
                            characteristic=ch, entity=entity, dc=dc))
    return store, iris
