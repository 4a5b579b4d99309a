"""Build the bundled 1,000-row auto-claims sample under data/.

The repository cannot ship the real tariff dataset, so this script draws a
schema-faithful synthetic stand-in: the same nine rating variables (six
categorical, two numeric, one of them log-scaled), claim counts from a
zero-inflated Poisson whose log-mean is a known function of the rating
variables, and average claim amounts from a Gamma whose log-mean carries a
positive claim-count effect (coefficient 0.3, dispersion 0.8).

A handful of rows get blanked cells and two get zero exposure so the
ingestion path (missing-row dropping, exposure validation) has something
to chew on.  Claim rates are kept high enough (about 1.2 claims per row)
that a fitted frequency model beats the always-zero prediction on MAE.

Run from the repository root:

    python3 demos/make_claims_sample.py
"""

import csv
import pathlib

import numpy as np

from freqsev.data import ColumnSpec, DataSchema
from freqsev.families import Gamma, ZeroInflatedPoisson

OUT_CSV = pathlib.Path(__file__).resolve().parent.parent / "data" / "claims_sample_1k.csv"
OUT_SCHEMA = OUT_CSV.with_name("claims_sample_1k.schema.ini")

SEED = 20240817
N_ROWS = 1000
ZERO_INFLATION = 0.15
COUNT_EFFECT = 0.3  # claim-count coefficient in the severity log-mean
DISPERSION = 0.8

VEH_POWER = [str(v) for v in range(4, 10)]
VEH_AGE = ["(0,1]", "(1,4]", "(4,10]", "(10,Inf)"]
DRIV_AGE = ["[18,21]", "(21,25]", "(25,35]", "(35,45]", "(45,55]", "(55,70]", "(70,Inf)"]
VEH_BRAND = [f"B{k}" for k in range(1, 15)]
VEH_GAS = ["Diesel", "Regular"]
REGION = [f"R{k}" for k in range(1, 23)]
AREA = list("ABCDEF")


def main() -> None:
    rng = np.random.default_rng(SEED)
    power = rng.choice(VEH_POWER, N_ROWS, p=[0.22, 0.24, 0.2, 0.16, 0.1, 0.08])
    veh_age = rng.choice(VEH_AGE, N_ROWS, p=[0.1, 0.3, 0.38, 0.22])
    driv_age = rng.choice(DRIV_AGE, N_ROWS, p=[0.04, 0.08, 0.22, 0.24, 0.2, 0.16, 0.06])
    brand = rng.choice(VEH_BRAND, N_ROWS)
    gas = rng.choice(VEH_GAS, N_ROWS, p=[0.45, 0.55])
    region = rng.choice(REGION, N_ROWS)
    area_idx = rng.integers(0, 6, N_ROWS)
    area = np.array(AREA)[area_idx]
    # population density rises with the area class, log-normal within class
    density = np.round(np.exp(rng.normal(3.0 + 1.1 * area_idx, 0.5))).astype(int) + 1
    bonus_malus = np.minimum(50 + np.round(rng.exponential(30, N_ROWS)).astype(int), 350)
    exposure = np.round(rng.uniform(0.2, 1.0, N_ROWS), 2)

    power_eff = 0.08 * (power.astype(int) - 6)
    veh_age_eff = np.array([0.10, 0.00, -0.08, -0.18])[[VEH_AGE.index(v) for v in veh_age]]
    driv_age_f = np.array([0.45, 0.28, 0.10, 0.00, -0.05, 0.00, 0.12])
    driv_age_s = np.array([0.30, 0.15, 0.05, 0.00, 0.00, 0.05, 0.10])
    driv_idx = np.array([DRIV_AGE.index(v) for v in driv_age])
    gas_eff = np.where(gas == "Diesel", 0.06, 0.0)
    area_f = 0.05 * area_idx
    area_s = -0.04 * area_idx
    bm_eff = 0.8 * (bonus_malus - 50) / 300.0
    # stable per-label wiggles for the high-cardinality factors
    brand_eff = 0.05 * np.sin(np.array([VEH_BRAND.index(b) for b in brand], dtype=float))
    region_eff = 0.08 * np.cos(np.array([REGION.index(r) for r in region], dtype=float))

    f_raw = power_eff + veh_age_eff + driv_age_f[driv_idx] + gas_eff + area_f + bm_eff + brand_eff
    # calibrate the intercept so the expected claim count per row is ~1.2
    f_intercept = np.log(1.2 / (1 - ZERO_INFLATION)) - np.log(np.mean(exposure * np.exp(f_raw)))
    lam = exposure * np.exp(f_raw + f_intercept)
    n = ZeroInflatedPoisson(ZERO_INFLATION).sample(lam, rng)

    s_raw = np.log(1200.0) + driv_age_s[driv_idx] + area_s + region_eff - 0.1 * veh_age_eff
    ybar = np.zeros(N_ROWS)
    pos = n > 0
    mu = np.exp(s_raw[pos] + COUNT_EFFECT * n[pos])
    ybar[pos] = np.round(Gamma(DISPERSION).sample(mu, DISPERSION / n[pos], rng), 2)

    rows = []
    for i in range(N_ROWS):
        rows.append(
            [
                power[i], veh_age[i], driv_age[i], brand[i], gas[i], region[i], area[i],
                str(density[i]), str(bonus_malus[i]), str(n[i]),
                repr(float(exposure[i])), repr(float(ybar[i])),
            ]
        )
    # blanked cells and degenerate exposures for the ingestion path
    for row_idx, col_idx in [(37, 7), (144, 3), (291, 1), (402, 8), (555, 0), (678, 6), (803, 2), (918, 5)]:
        rows[row_idx][col_idx] = ""
    rows[250][10] = "0.0"
    rows[750][10] = "0.0"

    OUT_CSV.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT_CSV, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["VehPower", "VehAge", "DrivAge", "VehBrand", "VehGas", "Region", "Area",
             "Density", "BonusMalus", "ClaimNb", "Exposure", "AvgClaimAmount"]
        )
        writer.writerows(rows)

    schema = DataSchema(
        covariates=[
            ColumnSpec("VehPower", "categorical"),
            ColumnSpec("VehAge", "categorical"),
            ColumnSpec("DrivAge", "categorical"),
            ColumnSpec("VehBrand", "categorical"),
            ColumnSpec("VehGas", "categorical"),
            ColumnSpec("Region", "categorical"),
            ColumnSpec("Area", "categorical"),
            ColumnSpec("Density", "numeric", log_transform=True),
            ColumnSpec("BonusMalus", "numeric"),
        ],
        count="ClaimNb",
        exposure="Exposure",
        severity="AvgClaimAmount",
    )
    schema.to_ini(OUT_SCHEMA)

    print(f"wrote {N_ROWS} rows to {OUT_CSV}")
    print(f"claims per row: {n.mean():.3f}; rows with claims: {np.mean(n > 0):.3f}")
    print(f"schema sidecar: {OUT_SCHEMA}")


if __name__ == "__main__":
    main()
