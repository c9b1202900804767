"""Synthetic emitter tables for demos and desk-scale protocol tests.

Rows follow the default descriptor schema with a planted nonlinear signal:
the wavelength target couples the emission energy to charge-transfer
character, frontier orbitals and an interaction term; the rate constant
follows the frequency-squared law with multiplicative noise; the quantum
yield is a noisy logistic blend. `Calc_lambda`/`Calc_kr` are noisy
estimates of the targets, mimicking calculated inputs.
"""

from __future__ import annotations

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from .dataset import Dataset, FeatureSchema, Sample, default_schema
from .physics import TransitionRecord, kr_from_transition


def _sigmoid(z: float) -> float:
    return 1.0 / (1.0 + math.exp(-z))


def synthetic_dataset(n_rows: int = 206, seed: int = 7,
                      schema: FeatureSchema | None = None) -> Dataset:
    schema = schema or default_schema()
    rng = np.random.default_rng(seed)
    states = schema.excited_state_labels
    bond_levels = schema.feature("coor_bond_type1").levels

    samples = []
    for i in range(n_rows):
        nu_cm = rng.uniform(15200.0, 23200.0)
        lengths = np.sort(rng.normal(2.05, 0.08, size=4))
        types = rng.choice(bond_levels, size=4, p=[0.45, 0.35, 0.12, 0.08])
        rho_pt = rng.normal(1.2, 0.1)
        rho_coor = rng.normal(0.8, 0.15, size=4)
        h_t1_s0 = float(np.exp(rng.normal(math.log(300.0), 0.5)))
        h_t1_s1 = float(np.exp(rng.normal(math.log(150.0), 0.5)))
        r_eh = {s: (rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0)) for s in states}
        lam = {s: rng.uniform(0.2, 0.9) for s in states}
        ct = {s: rng.uniform(0.0, 1.0) for s in states}
        homo = rng.uniform(-6.2, -4.6)
        lumo = rng.uniform(-2.6, -1.2)
        mu = rng.uniform(2.0, 14.0)
        osc = float(10.0 ** rng.uniform(-4.0, -1.3))
        refr = rng.uniform(1.33, 1.55)

        wavelength = (
            1e7 / nu_cm
            + 12.0 * math.tanh(2.0 * (ct["T1"] - 0.5))
            + 6.0 * math.sin(1.5 * homo)
            + 10.0 * math.exp(-(((lumo + 1.9) / 0.4) ** 2))
            + 8.0 * (rho_pt - 1.2) * (mu - 8.0) / 3.0
            + rng.normal(0.0, 3.0)
        )
        calc_wavelength = wavelength + rng.normal(0.0, 8.0) + 10.0

        kr_true = kr_from_transition(
            TransitionRecord.from_wavelength(wavelength, osc)
        ) * (0.4 + 0.6 * _sigmoid(h_t1_s0 / 300.0 - 1.0)) * math.exp(rng.normal(0.0, 0.25))
        calc_kr = kr_from_transition(TransitionRecord.from_wavelength(calc_wavelength, osc))

        plqy = _sigmoid(
            1.2 * (math.log10(kr_true) - 5.0)
            + 0.8 * (h_t1_s0 / 400.0 - 0.8)
            - 1.5 * (lam["T1"] - 0.55)
            + rng.normal(0.0, 0.4)
        )

        values: dict[str, float | str] = {"nu": nu_cm}
        for j in range(4):
            values[f"coor_bond_length{j + 1}"] = float(lengths[j])
        for j in range(4):
            values[f"coor_bond_type{j + 1}"] = str(types[j])
        values["rho_Pt"] = float(rho_pt)
        for j in range(4):
            values[f"rho_coor{j + 1}"] = float(rho_coor[j])
        values["H_T1_S0"] = h_t1_s0
        values["H_T1_S1"] = h_t1_s1
        for s in states:
            values[f"R_EH_{s}_a"], values[f"R_EH_{s}_b"] = r_eh[s]
        for s in states:
            values[f"LAMBDA_{s}"] = lam[s]
        for s in states:
            values[f"CT_{s}"] = ct[s]
        values["HOMO"] = homo
        values["LUMO"] = lumo
        values["mu"] = mu
        values["f"] = osc
        values["Calc_lambda"] = calc_wavelength
        values["Calc_kr"] = calc_kr
        values["refractive_index"] = refr

        targets = {
            "wavelength_nm": float(wavelength),
            "kr_per_s": float(kr_true),
            "plqy": float(plqy),
        }
        samples.append(Sample(f"cplx{i:04d}", values, targets))
    return Dataset(schema, tuple(samples))


def write_dataset_csv(dataset: Dataset, path: str | Path,
                      include_targets: bool = True) -> None:
    target_cols = ["wavelength_nm", "kr_per_s", "plqy"] if include_targets else []
    columns = ["id", *dataset.schema.feature_names, *target_cols]
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for s in dataset.samples:
            row: list[str] = [s.id]
            for name in dataset.schema.feature_names:
                v = s.values.get(name, "")
                row.append(v if isinstance(v, str) else repr(float(v)))
            for col in target_cols:
                v = s.targets.get(col)
                row.append("" if v is None else repr(float(v)))
            writer.writerow(row)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Write a synthetic emitter CSV.")
    parser.add_argument("out", help="output CSV path")
    parser.add_argument("--rows", type=int, default=206)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--no-targets", action="store_true",
                        help="omit target columns (prediction-only file)")
    args = parser.parse_args(argv)
    ds = synthetic_dataset(args.rows, args.seed)
    write_dataset_csv(ds, args.out, include_targets=not args.no_targets)
    print(f"wrote {len(ds)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
