#!/usr/bin/env python3
"""Regenerates data/fsr_dataset.jsonl.

134 scored requirements (97 sensor-related, 37 actuator-related) plus a
separate 12-entry example pool for few-shot prompts. Texts are assembled from
phrase lists with a fixed seed, so the output is stable.
"""
import json
import random
import sys
from pathlib import Path

SIGNALS = {
    "APP": ["accelerator pedal position", "pedal position", "driver torque request from the accelerator pedal"],
    "WSA": ["steering wheel angle", "steering angle", "wheel steering angle"],
    "WS": ["vehicle velocity", "wheel speed", "vehicle speed"],
    "YR": ["yaw rate", "vehicle yaw rate", "yaw rate sensor"],
    "ST": ["steering torque", "driver steering torque", "steering column torque"],
}
ACTUATORS = {
    "TA": ["throttle actuator", "electronic throttle", "throttle valve"],
    "BA": ["brake actuator", "hydraulic brake unit", "brake pressure modulator"],
    "SA": ["steering actuator", "electric power steering motor", "steering motor"],
}
SENSOR_FAULTS = [
    "In case of uncertainty in the {a} data",
    "If the {a} signal is lost",
    "When the {a} signal becomes implausible",
    "If the {a} value is delayed by more than 100 ms",
    "In the event of a stuck {a} reading",
    "If the {a} measurement drifts beyond its tolerance",
    "When noise on the {a} signal exceeds the plausibility limit",
    "If spikes are detected in the {a} signal",
]
PAIR_FAULTS = [
    "If the {a} and the {b} signals are inconsistent",
    "In case of simultaneous faults in the {a} and {b} data",
    "When both the {a} and the {b} become unavailable",
    "If the {a} disagrees with the {b} for more than 200 ms",
    "In the event of corrupted {a} and {b} messages on the CAN bus",
]
SENSOR_REACTIONS = [
    "the SUT shall limit the engine torque to a safe value within 200 ms",
    "the system shall switch to a degraded driving mode and warn the driver",
    "the SUT shall automatically adjust the speed of the vehicle to maintain a safe distance to the vehicle ahead",
    "the system shall keep the vehicle stable and prevent unintended acceleration",
    "the controller shall ignore the faulty value and hold the last valid one for at most 500 ms",
    "the SUT shall reduce the vehicle speed to below 30 km/h",
    "the system shall inform the driver through a visual and an acoustic warning",
    "the system shall transition to a safe state within the fault tolerant time interval",
    "the vehicle shall remain within its lane while decelerating smoothly",
    "the SUT shall disable the cruise control function",
]
ACTUATOR_FAULTS = [
    "In the event of a failure of the {a}",
    "If the {a} does not follow its command",
    "When the {a} reports an internal error",
    "If the response of the {a} is delayed",
    "In case the {a} is stuck in its current position",
]
ACTUATOR_PAIR_FAULTS = [
    "In the event of simultaneous failures in both the {a} and {b}",
    "If both the {a} and the {b} stop responding",
]
ACTUATOR_REACTIONS = [
    "the system shall activate an emergency deceleration procedure and automatically engage hazard lights",
    "the SUT shall bring the vehicle to a controlled stop",
    "the system shall cut the engine torque and apply the parking brake at standstill",
    "the controller shall switch to the redundant actuation path within 100 ms",
    "the driver shall be warned and the maximum speed limited to 50 km/h",
]

SENSOR_PLAN = [
    (("APP",), 22), (("WSA",), 1), (("WS",), 24), (("YR",), 14), (("ST",), 1),
    (("APP", "WS"), 12), (("WS", "YR"), 8), (("APP", "YR"), 5), (("YR", "WSA"), 4),
    (("WS", "ST"), 3), (("APP", "WSA"), 2), (("ST", "YR"), 1),
]
ACTUATOR_PLAN = [(("TA",), 12), (("BA",), 11), (("SA",), 8), (("TA", "BA"), 4), (("BA", "SA"), 2)]

FSR1 = ("In case of uncertainty in the vehicle velocity data, the SUT shall automatically adjust the speed of the "
        "vehicle to maintain a safe following distance of at least five meters from the vehicle ahead")
FSR2 = ("In the event of simultaneous failures in both the throttle and brake actuators, the system shall activate "
        "an emergency deceleration procedure and automatically engage hazard lights")


def sentence(rng, locs, names, singles, pairs, reactions):
    a = rng.choice(names[locs[0]])
    if len(locs) == 1:
        cond = rng.choice(singles).format(a=a)
    else:
        cond = rng.choice(pairs).format(a=a, b=rng.choice(names[locs[1]]))
    return f"{cond}, {rng.choice(reactions)}."


def unique_text(rng, seen, *args):
    for _ in range(1000):
        t = sentence(rng, *args)
        if t not in seen:
            seen.add(t)
            return t
    raise RuntimeError("phrase lists too small")


def main(out):
    rng = random.Random(42)
    seen = {FSR1 + ".", FSR2 + "."}
    sensor, actuator = [], []
    for locs, count in SENSOR_PLAN:
        for _ in range(count):
            if locs == ("WS",) and not any(r["text"].startswith(FSR1) for r in sensor):
                text = FSR1 + "."
            else:
                text = unique_text(rng, seen, locs, SIGNALS, SENSOR_FAULTS, PAIR_FAULTS, SENSOR_REACTIONS)
            sensor.append({"text": text, "gold_class": "sensor", "gold_locations": list(locs)})
    for locs, count in ACTUATOR_PLAN:
        for _ in range(count):
            if locs == ("TA", "BA") and not any(r["text"].startswith(FSR2) for r in actuator):
                text = FSR2 + "."
            else:
                text = unique_text(rng, seen, locs, ACTUATORS, ACTUATOR_FAULTS, ACTUATOR_PAIR_FAULTS,
                                   ACTUATOR_REACTIONS)
            actuator.append({"text": text, "gold_class": "actuator", "gold_locations": list(locs)})
    assert len(sensor) == 97 and len(actuator) == 37

    scored = sensor + actuator
    rng.shuffle(scored)
    # FSR1/FSR2 keep their published ids
    for r in scored:
        r["split"] = "eval"
    fsr1 = next(r for r in scored if r["text"].startswith(FSR1))
    fsr2 = next(r for r in scored if r["text"].startswith(FSR2))
    ordered = [fsr1, fsr2] + [r for r in scored if r is not fsr1 and r is not fsr2]
    for i, r in enumerate(ordered, 1):
        r["id"] = f"FSR{i}"

    # Example pool, interleaved so every prefix mixes both classes.
    pool_plan = [("sensor", ("APP",)), ("actuator", ("BA",)), ("sensor", ("WS",)), ("sensor", ("YR",)),
                 ("actuator", ("TA",)), ("sensor", ("APP", "WS")), ("sensor", ("WSA",)),
                 ("actuator", ("SA",)), ("sensor", ("ST",)), ("sensor", ("WS", "YR")),
                 ("actuator", ("TA", "BA")), ("sensor", ("APP", "YR"))]
    pool = []
    for i, (kind, locs) in enumerate(pool_plan, 1):
        if kind == "sensor":
            text = unique_text(rng, seen, locs, SIGNALS, SENSOR_FAULTS, PAIR_FAULTS, SENSOR_REACTIONS)
        else:
            text = unique_text(rng, seen, locs, ACTUATORS, ACTUATOR_FAULTS, ACTUATOR_PAIR_FAULTS, ACTUATOR_REACTIONS)
        pool.append({"id": f"EX{i}", "text": text, "gold_class": kind, "gold_locations": list(locs),
                     "split": "example"})

    keys = ["id", "text", "gold_class", "gold_locations", "split"]
    with open(out, "w") as f:
        for r in ordered + pool:
            f.write(json.dumps({k: r[k] for k in keys}) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "fsr_dataset.jsonl")
