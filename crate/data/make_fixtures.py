"""Writes the synthetic energy fixtures in this directory.

Fourteen days of quarter-hourly grid mix and regional solar output, plus
hourly day-ahead prices. The shapes are plausible (diurnal solar, a windy
spell, evening price peaks) but the numbers are invented.
"""

import csv
import math
import random
from datetime import datetime, timedelta

DAYS = 14
START = datetime(2023, 3, 1)
rng = random.Random(20230301)


def stamps(step_minutes, count):
    return [(START + timedelta(minutes=step_minutes * k)).strftime("%Y-%m-%dT%H:%M") for k in range(count)]


def solar_shape(hour):
    return max(0.0, math.sin(math.pi * (hour - 6.5) / 12.0)) if 6.5 <= hour <= 18.5 else 0.0


periods = DAYS * 96
quarter = stamps(15, periods)

wind = []
level = 0.4
for k in range(periods):
    level = min(1.0, max(0.05, level + rng.gauss(0.0, 0.03)))
    wind.append(level)

with open("grid_mix.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["timestamp", "Nuclear", "Fossil Gas", "Wind Onshore", "Wind Offshore", "Solar", "Biomass",
                "Hydro Run-of-river", "Other"])
    for k, ts in enumerate(quarter):
        hour = (k % 96) / 4.0
        day = k // 96
        sun = solar_shape(hour) * (0.6 + 0.4 * math.sin(day))
        demand = 9000 + 1500 * math.sin(math.pi * (hour - 7) / 12.0)
        nuclear = 3900.0
        onshore = 2400 * wind[k]
        offshore = 2200 * wind[k]
        solar = 5000 * max(sun, 0.0)
        biomass = 300 + rng.uniform(-20, 20)
        hydro = 40 + rng.uniform(-5, 5)
        gas = max(200.0, demand - nuclear - onshore - offshore - solar - biomass - hydro)
        row = [nuclear, gas, onshore, offshore, solar, biomass, hydro, rng.uniform(50, 80)]
        cells = [f"{v:.1f}" for v in row]
        if k == 500:
            cells[3] = ""  # a metering gap, carried forward on ingest
        w.writerow([ts] + cells)

with open("onsite.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["timestamp", "kw"])
    for k, ts in enumerate(quarter):
        hour = (k % 96) / 4.0
        day = k // 96
        clouds = 0.5 + 0.5 * abs(math.sin(1.7 * day + 0.3))
        raw = 120000 * solar_shape(hour) * clouds + rng.uniform(-300, 300)
        w.writerow([ts, f"{raw:.1f}"])

with open("prices.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["timestamp", "eur_per_mwh"])
    for k, ts in enumerate(stamps(60, DAYS * 24)):
        hour = k % 24
        base = 95 + 35 * math.exp(-((hour - 19) / 2.0) ** 2) + 20 * math.exp(-((hour - 8) / 1.5) ** 2)
        base -= 40 * solar_shape(hour)
        w.writerow([ts, f"{base + rng.uniform(-8, 8):.2f}"])
