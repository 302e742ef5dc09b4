"""Synthetic 38-unit ANSP cross-section used by ``frontier-bench demo``.

The data are invented. Values are drawn inside plausible ranges for European
air-navigation providers, with a productivity signal planted in a few
factors, WEALTH and RES made strongly collinear, and one unit (``MUAC``)
that some DEA models exclude. The generator is deterministic; the shipped
files under ``frontier_bench/data/demo`` are its output.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .dataframe import VariableSpec, default_catalog

SEED = 20160101
N_UNITS = 38
MONTHS = 12
FILES = ("anspdata.csv", "monthly_traffic.csv", "demo_catalog.json", "demo_config.json")

PERFORMANCE = (
    VariableSpec("CFH", "performance", "h"),
    VariableSpec("ATCO_HOURS", "performance", "h"),
    VariableSpec("STAFF_COSTS", "performance", "EUR"),
    VariableSpec("IFR_FLIGHTS", "performance", "Nb"),
)


def _log_uniform(rng, lo, hi, size):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def _g(x) -> str:
    return format(float(x), ".10g")


def generate() -> dict[str, str]:
    """Return ``{file name: text}`` for the four demo files."""
    rng = np.random.default_rng(SEED)
    n = N_UNITS
    ids = [f"ANSP{i:02d}" for i in range(1, n)] + ["MUAC"]

    time = np.round(rng.uniform(934, 1990, n))
    nona = rng.uniform(0.38, 0.87, n)
    delatm = (rng.random(n) < 0.25).astype(int)
    met = (rng.random(n) < 0.6).astype(int)
    airp = (rng.random(n) < 0.2).astype(int)
    owner = rng.random(n)
    jsc = (owner < 0.4).astype(int)
    state = (owner > 0.6).astype(int)
    size = np.round(_log_uniform(rng, 20400, 2190000, n), -2)
    ocean = (rng.random(n) < 0.15).astype(int)
    coord = rng.integers(2, 12, n)
    l_airp = rng.integers(0, 4, n)
    nofab = (rng.random(n) < 0.1).astype(int)
    over = rng.uniform(0.10, 1.0, n)
    dom = rng.uniform(0.0, 0.5, n) * (1.0 - over)
    dens = rng.uniform(0.69, 11.47, n)
    vi = rng.uniform(0.04, 0.38, n)
    hi = rng.uniform(0.27, 0.63, n)
    si = rng.uniform(0.04, 0.45, n)
    costs = np.round(rng.uniform(11, 225, n), 1)
    wealth = np.round(_log_uniform(rng, 2074, 181647, n))
    # technology proxy tracks log wealth closely, so the pair is collinear by construction
    wpos = (np.log(wealth) - np.log(2074)) / (np.log(181647) - np.log(2074))
    res = np.clip(0.26 + 95.5 * wpos + rng.normal(0, 2.0, n), 0.26, 95.76)

    # seasonal traffic: Gini of a zero-mean shape scales linearly with its amplitude
    target_gini = rng.uniform(0.025, 0.255, n)
    months = np.arange(MONTHS)
    monthly = []
    gini_true = np.empty(n)
    for i in range(n):
        shape = np.sin(2 * np.pi * (months - 3) / MONTHS) + rng.normal(0, 0.15, MONTHS)
        shape -= shape.mean()
        g_shape = np.abs(shape[:, None] - shape[None, :]).sum() / (2 * MONTHS**2)
        base = _log_uniform(rng, 8000, 150000, 1)[0]
        counts = np.round(base * (1 + target_gini[i] / g_shape * shape))
        monthly.append(counts.astype(int))
        c = np.sort(counts)
        gini_true[i] = float((2 * np.arange(1, MONTHS + 1) - MONTHS - 1) @ c / (MONTHS * c.sum()))

    log_prod = (-0.35 + 0.25 * (np.log(time) - np.log(1434)) - 0.4 * (nona - 0.64)
                + 0.35 * airp + 0.08 * jsc + 0.10 * (np.log(size) - np.log(346350))
                + 0.45 * (over - 0.55) - 1.2 * dom - 2.5 * (gini_true - 0.10)
                + 0.002 * (costs - 91) + rng.normal(0, 0.08, n))
    prod = np.exp(log_prod)
    atcos = np.round(_log_uniform(rng, 60, 2500, n))
    atco_hours = atcos * time
    cfh = np.round(prod * atco_hours)
    staff_costs = np.round(atco_hours * costs * (1 + nona) * rng.uniform(0.9, 1.1, n))
    ifr = np.round(cfh * rng.uniform(1.2, 2.4, n))

    header = ["dmu_id", "year", "TIME", "NONA", "DELATM", "MET", "AIRP", "JSC", "STATE",
              "SIZE", "OCEAN", "COORD", "L_AIRP", "NOFAB", "OVER", "DOM", "DENS", "VI", "HI",
              "SI", "COSTS", "RES", "WEALTH", "CFH", "ATCO_HOURS", "STAFF_COSTS", "IFR_FLIGHTS"]
    cols = [time, nona, delatm, met, airp, jsc, state, size, ocean, coord, l_airp, nofab,
            over, dom, dens, vi, hi, si, costs, res, wealth, cfh, atco_hours, staff_costs, ifr]
    lines = [",".join(header)]
    for i, dmu in enumerate(ids):
        lines.append(",".join([dmu, "2016"] + [_g(c[i]) for c in cols]))
    data_csv = "\n".join(lines) + "\n"

    traffic = [",".join(["dmu_id"] + [f"M{m + 1:02d}" for m in months])]
    traffic += [",".join([dmu] + [str(v) for v in monthly[i]]) for i, dmu in enumerate(ids)]
    traffic_csv = "\n".join(traffic) + "\n"

    catalog = default_catalog().extended(PERFORMANCE)
    catalog_json = catalog.to_json() + "\n"

    base_regs = ["TIME", "NONA", "AIRP", "JSC", "SIZE", "OVER", "DOM", "GINI", "DENS", "COSTS", "RES"]
    all_but_wealth = [s.name for s in default_catalog() if s.name != "WEALTH"]
    config = {
        "data": "anspdata.csv",
        "catalog": "demo_catalog.json",
        "monthly_counts": "monthly_traffic.csv",
        "year": 2016,
        "missing_policy": "drop_row",
        "productivity": {"name": "PROD", "output": "CFH", "input": "ATCO_HOURS"},
        "pca": {"variables": ["DENS", "VI", "HI", "SI"], "retain": 0.8},
        "dea": [
            {"name": "M1", "inputs": ["ATCO_HOURS"], "outputs": ["CFH"], "rts": "CRS",
             "orientation": "input", "exclude": []},
            {"name": "M2", "inputs": ["ATCO_HOURS", "STAFF_COSTS"], "outputs": ["CFH", "IFR_FLIGHTS"],
             "rts": "CRS", "orientation": "input", "exclude": []},
            {"name": "M2A", "inputs": ["ATCO_HOURS", "STAFF_COSTS"], "outputs": ["CFH", "IFR_FLIGHTS"],
             "rts": "CRS", "orientation": "input", "exclude": ["MUAC"]},
        ],
        "regressions": [
            {"label": "PROD_OLS", "dependent": "PROD", "regressors": all_but_wealth,
             "method": "OLS", "reduce": True},
            {"label": "M1_OLS", "dependent": "DEA_M1", "regressors": base_regs, "method": "OLS"},
            {"label": "M1_Tobit", "dependent": "DEA_M1", "regressors": base_regs, "method": "Tobit",
             "lower": 0, "upper": 1},
            {"label": "M1_Truncated", "dependent": "DEA_M1", "regressors": base_regs,
             "method": "Truncated", "lower": 0},
            {"label": "M2A_OLS", "dependent": "DEA_M2A", "regressors": base_regs, "method": "OLS",
             "reduce": True},
        ],
        "selection": {
            "threshold": 0.33,
            "vif_threshold": 10,
            "dummy_sets": {"fab": ["NOFAB"], "geography": ["OCEAN"]},
            "airspace": ["SIZE", "COORD", "L_AIRP", "DENS", "VI", "HI", "SI"],
            "demand": ["OVER", "DOM", "GINI"],
            "staged": [{"label": "PROD_staged", "dependent": "PROD", "method": "OLS"}],
        },
        "comparison": ["M1_OLS", "M1_Tobit", "M1_Truncated"],
        "output_dir": "out",
        "render": {"decimals": 3, "decimal_separator": "."},
    }
    config_json = json.dumps(config, indent=2) + "\n"
    return {"anspdata.csv": data_csv, "monthly_traffic.csv": traffic_csv,
            "demo_catalog.json": catalog_json, "demo_config.json": config_json}


def bundled() -> dict[str, str]:
    """The shipped demo files, read from package data."""
    root = resources.files("frontier_bench.data").joinpath("demo")
    return {name: root.joinpath(name).read_text("utf-8") for name in FILES}


def write_demo(directory) -> list[Path]:
    """Copy the bundled demo files into ``directory`` (created if needed)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, text in bundled().items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        out.append(path)
    return out


if __name__ == "__main__":
    # regenerate the package data: python -m frontier_bench.demo <dir>
    import sys

    target = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    target.mkdir(parents=True, exist_ok=True)
    for name, text in generate().items():
        (target / name).write_text(text, encoding="utf-8")
