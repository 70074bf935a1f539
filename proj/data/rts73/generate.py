#!/usr/bin/env python3
"""Writes the 73-bus three-area test system with hourly forecasts.

Topology and loads follow the 24-bus reliability test system replicated in
three areas (node ids 1xx, 2xx, 3xx) plus bus 325 and six interties.
Generators are aggregated by unit type per bus. Wind sits at six buses.
"""

import csv
import json
import math
from pathlib import Path

HERE = Path(__file__).resolve().parent

LOADS = {1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175, 10: 195, 13: 265,
         14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128}

# from, to, reactance (pu), rating (MW)
BRANCHES = [
    (1, 2, 0.0139, 175), (1, 3, 0.2112, 175), (1, 5, 0.0845, 175), (2, 4, 0.1267, 175),
    (2, 6, 0.1920, 175), (3, 9, 0.1190, 175), (3, 24, 0.0839, 400), (4, 9, 0.1037, 175),
    (5, 10, 0.0883, 175), (6, 10, 0.0605, 175), (7, 8, 0.0614, 175), (8, 9, 0.1651, 175),
    (8, 10, 0.1651, 175), (9, 11, 0.0839, 400), (9, 12, 0.0839, 400), (10, 11, 0.0839, 400),
    (10, 12, 0.0839, 400), (11, 13, 0.0476, 500), (11, 14, 0.0418, 500), (12, 13, 0.0476, 500),
    (12, 23, 0.0966, 500), (13, 23, 0.0865, 500), (14, 16, 0.0389, 500), (15, 16, 0.0173, 500),
    (15, 21, 0.0490, 500), (15, 21, 0.0490, 500), (15, 24, 0.0519, 500), (16, 17, 0.0259, 500),
    (16, 19, 0.0231, 500), (17, 18, 0.0144, 500), (17, 22, 0.1053, 500), (18, 21, 0.0259, 500),
    (18, 21, 0.0259, 500), (19, 20, 0.0396, 500), (19, 20, 0.0396, 500), (20, 23, 0.0216, 500),
    (20, 23, 0.0216, 500), (21, 22, 0.0678, 500),
]

INTERTIES = [(107, 203, 0.1610, 175), (113, 215, 0.0652, 500), (123, 217, 0.1000, 500),
             (223, 318, 0.0967, 500), (121, 325, 0.0480, 500), (323, 325, 0.0090, 722)]

# type: (energy $/MWh, up $/MWh, down $/MWh)
UNIT_TYPES = {
    "ct": (90.0, 4.0, 4.0),
    "coal76": (18.0, 9.0, 9.0),
    "oil100": (55.0, 3.0, 3.0),
    "oil197": (50.0, 6.0, 6.0),
    "oil12": (95.0, 5.0, 5.0),
    "coal155": (13.0, 8.0, 8.0),
    "nuclear": (6.0, 40.0, 40.0),
    "hydro": (1.0, 2.0, 2.0),
    "coal350": (12.0, 8.0, 8.0),
}

# bus: [(type, MW)]
UNITS = {
    1: [("ct", 40), ("coal76", 152)], 2: [("ct", 40), ("coal76", 152)], 7: [("oil100", 300)],
    13: [("oil197", 591)], 15: [("oil12", 60), ("coal155", 155)], 16: [("coal155", 155)],
    18: [("nuclear", 400)], 21: [("nuclear", 400)], 22: [("hydro", 300)],
    23: [("coal155", 310), ("coal350", 350)],
}

WIND_BUSES = [118, 122, 218, 222, 318, 322]
WIND_PEAK_MW = 300.0
WIND_SIGMA_PU = 0.6
WIND_CORR_SAME_AREA = 0.3
LINE_SCALE = 1.0
SLACK = 113

LOAD_PROFILE = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96, 0.95,
                0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63]


def wind_forecast(bus, hour):
    phase = (bus % 100) / 7.0 + (bus // 100)
    return round(WIND_PEAK_MW * (0.55 + 0.3 * math.cos(2 * math.pi * (hour - 3) / 24 + phase)), 1)


def main():
    nodes = [a * 100 + b for a in (1, 2, 3) for b in range(1, 25)] + [325]
    with open(HERE / "nodes.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["node_id", "zone", "is_slack"])
        for n in nodes:
            w.writerow([n, "area" + str(n // 100), int(n == SLACK)])

    with open(HERE / "lines.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["line_id", "from_node", "to_node", "reactance_pu", "flow_limit_mw"])
        for a in (1, 2, 3):
            seen = {}
            for fr, to, x, lim in BRANCHES:
                key = (fr, to)
                seen[key] = seen.get(key, 0) + 1
                lid = "%d-%d" % (a * 100 + fr, a * 100 + to)
                if seen[key] > 1:
                    lid += "-" + str(seen[key])
                w.writerow([lid, a * 100 + fr, a * 100 + to, x, round(lim * LINE_SCALE, 1)])
        for fr, to, x, lim in INTERTIES:
            w.writerow(["%d-%d" % (fr, to), fr, to, x, round(lim * LINE_SCALE, 1)])

    with open(HERE / "generators.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["gen_id", "node_id", "p_min_mw", "p_max_mw", "cost_energy", "cost_up", "cost_down"])
        for a in (1, 2, 3):
            for b, units in UNITS.items():
                for t, mw in units:
                    e, u, d = UNIT_TYPES[t]
                    w.writerow(["%s-%d" % (t, a * 100 + b), a * 100 + b, 0, mw, round(e * (1 + 0.01 * a), 3),
                                round(u * (1 + 0.02 * a), 3), round(d * (1 + 0.02 * a), 3)])

    fdir = HERE / "forecasts"
    fdir.mkdir(exist_ok=True)
    for h in range(24):
        with open(fdir / ("hour_%02d.csv" % h), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["node_id", "net_demand_mw", "vre_mw"])
            for n in nodes:
                load = LOADS.get(n % 100, 0) * LOAD_PROFILE[h] if n != 325 else 0.0
                vre = wind_forecast(n, h) if n in WIND_BUSES else 0.0
                w.writerow([n, round(load - vre, 1), vre])

    cov = [[WIND_SIGMA_PU ** 2 * (1.0 if i == j else WIND_CORR_SAME_AREA if a // 100 == b // 100 else 0.0)
            for j, b in enumerate(WIND_BUSES)] for i, a in enumerate(WIND_BUSES)]
    config = {
        "grid": ".",
        "alpha": 0.95,
        "methods": ["dsw", "ext", "ccg"],
        "c_viol": 1000,
        "max_scenarios": 10,
        "adm_iterations": 20,
        "flagged_lines": 15,
        "output_dir": "../../out/rts73",
        "hours": [{"hour": h, "forecast": "forecasts/hour_%02d.csv" % h} for h in range(24)],
        "sampler": {"nodes": WIND_BUSES, "covariance_pu2": cov, "base_mva": 100,
                    "train_seed": 2024, "test_seed": 4048, "train_count": 500, "test_count": 200},
    }
    with open(HERE / "config.json", "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
