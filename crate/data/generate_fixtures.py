"""Regenerate the synthetic fixtures in this directory.

The fixtures are smooth, seeded stand-ins for the real datasets (national
half-hourly load, per-cluster wind capacity factors, hourly wholesale
prices). Running this script again reproduces the files byte for byte.
"""
import csv
import math
import os
from datetime import datetime, timedelta

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
rng = np.random.default_rng(20230101)


def demand_shape(hour):
    # MW, hour-of-day in [0, 24)
    night = 21500.0
    morning = 6200.0 * math.exp(-((hour - 10.0) ** 2) / (2 * 2.2 ** 2))
    afternoon = 7600.0 * math.exp(-((hour - 15.0) ** 2) / (2 * 2.0 ** 2))
    evening = 6400.0 * math.exp(-((hour - 19.8) ** 2) / (2 * 1.9 ** 2))
    noon_dip = -1500.0 * math.exp(-((hour - 12.2) ** 2) / (2 * 0.7 ** 2))
    return night + morning + afternoon + evening + noon_dip


def write_demand():
    start = datetime(2023, 1, 1)
    path = os.path.join(HERE, "demand_2023.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["timestamp", "power_mw"])
        for day in range(365):
            season = 1.0 + 0.08 * math.sin(2 * math.pi * (day - 80) / 365.0)
            weekday = 0.94 if (start + timedelta(days=day)).weekday() >= 5 else 1.0
            level = season * weekday * (1.0 + 0.02 * rng.standard_normal())
            for slot in range(48):
                hour = slot / 2.0
                value = level * demand_shape(hour) + 180.0 * rng.standard_normal()
                ts = start + timedelta(days=day, minutes=30 * slot)
                w.writerow([ts.strftime("%Y-%m-%dT%H:%M:%S"), f"{value:.3f}"])


CLUSTERS = [
    ("north", 310.0),
    ("north_central", 560.0),
    ("central_coast", 1180.0),
    ("central_highlands", 890.0),
    ("south_central", 1420.0),
    ("southeast", 640.0),
    ("mekong_delta", 1050.0),
]


def write_wind():
    start = datetime(2023, 1, 1)
    with open(os.path.join(HERE, "wind", "manifest.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["cluster_id", "installed_mw"])
        for name, cap in CLUSTERS:
            w.writerow([name, f"{cap:.1f}"])
    for k, (name, _) in enumerate(CLUSTERS):
        phase = 2.0 + 1.3 * k
        base = 0.28 + 0.03 * k
        with open(os.path.join(HERE, "wind", f"{name}.csv"), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["timestamp", "capacity_factor"])
            ar = 0.0
            for hour in range(8760):
                day = hour // 24
                hod = hour % 24
                season = 0.12 * math.cos(2 * math.pi * (day - 15) / 365.0)
                diurnal = 0.09 * math.cos(2 * math.pi * (hod - phase) / 24.0)
                ar = 0.92 * ar + 0.03 * rng.standard_normal()
                cf = min(max(base + season + diurnal + ar, 0.0), 1.0)
                ts = start + timedelta(hours=hour)
                w.writerow([ts.strftime("%Y-%m-%dT%H:%M:%S"), f"{cf:.5f}"])


def price_shape(hour):
    # EUR/kWh
    base = 0.105
    morning = 0.032 * math.exp(-((hour - 8.5) ** 2) / (2 * 1.4 ** 2))
    evening = 0.055 * math.exp(-((hour - 19.5) ** 2) / (2 * 1.8 ** 2))
    solar_dip = -0.022 * math.exp(-((hour - 13.5) ** 2) / (2 * 2.0 ** 2))
    night = -0.012 * math.exp(-((hour - 3.5) ** 2) / (2 * 2.0 ** 2))
    return base + morning + evening + solar_dip + night


def write_prices():
    start = datetime(2023, 1, 1)
    days = (datetime(2024, 4, 1) - start).days
    assert days == 456
    with open(os.path.join(HERE, "prices_hourly.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["timestamp", "price"])
        for day in range(days):
            level = 1.0 + 0.18 * rng.standard_normal()
            spread = 1.0 + 0.25 * rng.standard_normal()
            for hour in range(24):
                mean = price_shape(hour)
                value = level * (0.105 + spread * (mean - 0.105)) + 0.006 * rng.standard_normal()
                ts = start + timedelta(days=day, hours=hour)
                w.writerow([ts.strftime("%Y-%m-%dT%H:%M:%S"), f"{value:.5f}"])


if __name__ == "__main__":
    write_demand()
    write_wind()
    write_prices()
