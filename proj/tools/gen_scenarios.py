#!/usr/bin/env python3
"""Regenerates scenarios/figure4.jsonl and scenarios/figure4-doubled.jsonl.

Each review text carries exactly one lexicon keyword; the fillers contain
none, so the expected tallies are 50/30/0 and 100/60/0.
"""
import json
import math
import pathlib

POSITIVE = ["good", "great", "happy", "active", "nice", "believe"]
NEGATIVE = ["sad", "bad", "poor", "useless", "cold", "cry"]
POS_TEMPLATES = [
    "The driver was {w} and arrived early",
    "Really {w} trip across town",
    "Very {w} service from pickup to dropoff",
    "I {w} this fleet keeps its promises",
]
NEG_TEMPLATES = [
    "The cabin felt {w} during the ride",
    "A {w} experience from start to finish",
    "Driver made my kid {w} with loud music",
    "Honestly {w} route choice today",
]
KM_PER_DEG = math.pi * 6371.0088 / 180.0


def line(kind, payload):
    return json.dumps({"kind": kind, "payload": payload}, sort_keys=True)


def build(name, base, n_pos, n_neg):
    out = [line("scenario", {"name": name})]
    providers = [f"P{base + i:04d}" for i in range(1, 4)]
    customers = [f"C{base + i:04d}" for i in range(1, 5)]
    tag = name.replace("-", "")
    for i, p in enumerate(providers):
        out.append(line("provider.registered", {"providerId": p, "login": f"{tag}-prov{i + 1}",
                                                "name": f"Provider {i + 1}", "password": "provider-pass",
                                                "approved": True}))
    for i, c in enumerate(customers):
        out.append(line("customer.registered", {"customerId": c, "login": f"{tag}-cust{i + 1}",
                                                "name": f"Customer {i + 1}", "password": "customer-pass"}))
    vehicles = []
    for i, p in enumerate(providers):
        d = f"D{base + i + 1:04d}"
        out.append(line("driver.added", {"driverId": d, "providerId": p, "login": f"{tag}-drv{i + 1}",
                                         "name": f"Driver {i + 1}", "password": "driver-pass"}))
        for j in range(2):
            v = f"V{base + 2 * i + j + 1:04d}"
            vehicles.append(v)
            out.append(line("vehicle.added", {"vehicleId": v, "providerId": p, "vehicleType": "sedan" if j == 0 else "van",
                                              "costPerKmMinor": 250 + 75 * (2 * i + j),
                                              "home": {"lat": 12.97 + 0.01 * i, "lon": 77.59 + 0.01 * j}}))
    for ci, c in enumerate(customers):
        for vi, v in enumerate(vehicles):
            if (ci + vi) % 3 != 0:
                out.append(line("rating.set", {"customerId": c, "vehicleId": v, "rating": 1 + (ci * 2 + vi) % 5}))
    rid = base * 10
    for k in range(n_pos):
        rid += 1
        text = POS_TEMPLATES[k % len(POS_TEMPLATES)].format(w=POSITIVE[k % len(POSITIVE)])
        out.append(line("review.submitted", {"reviewId": f"R{rid:04d}", "customerId": customers[k % 4],
                                             "providerId": providers[k % 3], "text": text,
                                             "stars": 4 + k % 2, "createdAt": 1_700_000_000_000 + k}))
    for k in range(n_neg):
        rid += 1
        text = NEG_TEMPLATES[k % len(NEG_TEMPLATES)].format(w=NEGATIVE[k % len(NEGATIVE)])
        out.append(line("review.submitted", {"reviewId": f"R{rid:04d}", "customerId": customers[k % 4],
                                             "providerId": providers[(k + 1) % 3], "text": text,
                                             "stars": 1 + k % 2, "createdAt": 1_700_000_100_000 + k}))
    lat0, lon0 = 12.97, 77.59
    out.append(line("path", {"name": "meridian-12.5km",
                             "points": [{"lat": lat0, "lon": lon0}, {"lat": lat0 + 12.5 / KM_PER_DEG, "lon": lon0}]}))
    return "\n".join(out) + "\n"


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "scenarios"
    root.mkdir(exist_ok=True)
    (root / "figure4.jsonl").write_text(build("figure4", 0, 50, 30))
    (root / "figure4-doubled.jsonl").write_text(build("figure4-doubled", 100, 100, 60))


if __name__ == "__main__":
    main()
