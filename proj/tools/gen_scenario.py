#!/usr/bin/env python3
"""Regenerate data/scenario-ch-2022.csv.

The series are approximate: 2022 levels follow publicly stated Swiss
aggregates, earlier years are reconstructed from a linear trend with
small deterministic noise and a 2020/21 dip for the activity-driven
sectors. Quarterly profiles cover 2019-2022.
"""

import random
import sys
from pathlib import Path

START, END = 2010, 2022

# carrier -> sector -> (2022 TJ, trend TJ/yr)
CONSUMPTION = {
    "electricity": {
        "households": (69000, 300),
        "industry": (62000, 100),
        "services": (56000, 200),
        "transport": (13500, 550),
        "agriculture": (4500, 50),
    },
    "heatingOil": {
        "households": (70000, -3500),
        "services": (25000, -1200),
        "industry": (12000, -500),
        "agriculture": (2000, -50),
    },
    "motorFuel": {"transport": (210000, -3000), "agriculture": (4000, -50)},
    "gas": {"households": (38000, -1200), "industry": (42000, -800), "services": (20000, -600)},
    "coal": {"industry": (4500, -200)},
    "wood": {"households": (28000, 200), "industry": (9000, 100), "services": (4000, 50)},
    "biofuel": {"transport": (5500, 250)},
    "biogas": {"industry": (1500, 50)},
    "waste": {"industry": (11000, 0)},
    "districtHeat": {"households": (9000, 150), "services": (6000, 100), "industry": (4000, 0)},
}

PRODUCTION = {
    "wood": (48000, 300),
    "waste": (46000, 200),
    "biogas": (5800, 100),
    "biofuel": (2000, 50),
    "districtHeat": (20000, 250),
}

STOCK = {"heatingOil": (800, -20), "motorFuel": (300, 0)}

# kg CO2-eq per TJ of final consumption, used to synthesise emission series
COMBUSTION = {
    "heatingOil": 73700,
    "motorFuel": 73300,
    "gas": 56100,
    "coal": 94600,
    "wood": 1500,
    "biofuel": 1000,
    "biogas": 500,
    "waste": 45000,
}

# tech -> (capacity TJ/yr, efficiency, landUse km2/TJ, emission kg/TJ, cost CHF/TJ, summer share)
TECH = {
    "nuclear": (83160, 0.33, 0.00005, 3300, 4000, 0.45),
    "river": (61200, 1.0, 0.002, 1100, 3000, 0.62),
    "reservoir": (57600, 1.0, 0.01, 1700, 3500, 0.40),
    "solar": (13680, 1.0, 0.0028, 11000, 1500, 0.68),
    "wind": (540, 1.0, 0.014, 3300, 2000, 0.38),
    "gas": (1800, 0.55, 0.0001, 110000, 15000, 0.42),
    "biomass": (2160, 0.30, 0.05, 16700, 10000, 0.48),
    "biogas": (1440, 0.35, 0.02, 55000, 12000, 0.50),
    "waste": (8640, 0.25, 0.0001, 140000, 2000, 0.50),
}

DEMAND_SUMMER = {
    "households": 0.42,
    "industry": 0.49,
    "services": 0.47,
    "transport": 0.46,
    "agriculture": 0.52,
}

LOSS = {"electricity": 0.07, "gas": 0.01, "districtHeat": 0.10}

COVID = {2020: 0.95, 2021: 0.98}
COVID_SECTORS = {"industry", "services", "transport"}


def fmt(v):
    return f"{v:.6g}" if abs(v) < 1e6 else f"{v:.0f}"


def main(out_path):
    rng = random.Random(2022)
    rows = []

    def history(series, level, trend, unit, covid=False):
        values = {}
        for y in range(START, END + 1):
            v = level + trend * (y - END)
            v *= 1 + rng.uniform(-0.01, 0.01)
            if covid and y in COVID:
                v *= COVID[y]
            values[y] = max(v, 0.0)
            rows.append((series, y, fmt(values[y]), unit))
        return values

    totals = {}
    for carrier, sectors in CONSUMPTION.items():
        for sector, (level, trend) in sectors.items():
            vals = history(f"consumption.{carrier}.{sector}", level, trend, "TJ", sector in COVID_SECTORS)
            for y, v in vals.items():
                totals.setdefault(carrier, {}).setdefault(y, 0.0)
                totals[carrier][y] += v
    for carrier, (level, trend) in PRODUCTION.items():
        history(f"production.{carrier}", level, trend, "TJ")
    for carrier, (level, trend) in STOCK.items():
        history(f"stock.{carrier}", level, trend, "TJ")
    for carrier, factor in COMBUSTION.items():
        for y, activity in totals[carrier].items():
            t = activity * factor / 1000.0 * (1 + rng.uniform(-0.005, 0.005))
            rows.append((f"emissions.{carrier}", y, fmt(t), "t"))

    for carrier, rate in LOSS.items():
        rows.append((f"loss.{carrier}", END, fmt(rate), "ratio"))
    for tech, (cap, eff, land, em, cost, _) in TECH.items():
        rows.append((f"capacity.{tech}", END, fmt(cap), "TJ"))
        rows.append((f"tech.{tech}.efficiency", END, fmt(eff), "ratio"))
        rows.append((f"tech.{tech}.landUse", END, fmt(land), "km2/TJ"))
        rows.append((f"tech.{tech}.emission", END, fmt(em), "kg/TJ"))
        rows.append((f"tech.{tech}.cost", END, fmt(cost), "CHF/TJ"))

    def quarterly(series, annual, summer_share):
        # Q2+Q3 carry the summer share; within each half the split is 45/55.
        for y in range(2019, END + 1):
            s = annual * summer_share
            w = annual - s
            q = {1: w * 0.55, 2: s * 0.45, 3: s * 0.55, 4: w * 0.45}
            for n in range(1, 5):
                v = q[n] * (1 + rng.uniform(-0.003, 0.003))
                rows.append((f"quarterly.{series}.Q{n}", y, fmt(v), "TJ"))

    for tech, (cap, *_rest, summer) in TECH.items():
        quarterly(f"supply.{tech}", cap, summer)
    for sector, summer in DEMAND_SUMMER.items():
        quarterly(f"demand.{sector}", CONSUMPTION["electricity"][sector][0], summer)

    with open(out_path, "w") as f:
        f.write("# Approximate Swiss energy system, history 2010-2022, quarterly profiles 2019-2022.\n")
        f.write("# Units: TJ unless stated. Regenerate with tools/gen_scenario.py.\n")
        f.write("series,year,value,unit\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "data" / "scenario-ch-2022.csv"
    main(sys.argv[1] if len(sys.argv) > 1 else default)
