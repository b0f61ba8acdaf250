"""Regenerate the bundled example data in src/jointpricing/data.

Usage: python3 scripts/make_fixtures.py
"""

from pathlib import Path

import numpy as np

from jointpricing.empirical_screen import LossSeries, write_losses
from jointpricing.mortality_sim import synthetic_datasets, synthetic_params, write_mortality_csv

DATA = Path(__file__).resolve().parent.parent / "src" / "jointpricing" / "data"


def half_years(first_year=2006, count=27):
    labels, year, half = [], first_year, 2
    for _ in range(count):
        labels.append(f"{year}-H{half}")
        year, half = (year, 2) if half == 1 else (year + 1, 1)
    return labels


def loss_lines(n_lines, seed, periods):
    rng = np.random.default_rng(seed)
    t = np.arange(1, len(periods) + 1)
    common = rng.standard_normal(len(t))
    out = []
    for i in range(n_lines):
        level = 10 ** rng.uniform(5, 8)
        growth = rng.uniform(-0.01, 0.03)
        cv = 10 ** rng.uniform(-1.5, -0.4)
        load = rng.uniform(-0.5, 0.95)
        noise = load * common + np.sqrt(1 - load**2) * rng.standard_normal(len(t))
        values = level * (1 + growth * t) * np.exp(cv * noise)
        out.append(LossSeries(f"L{i + 1:02d}", f"Synthetic line {i + 1}", periods, np.round(values, 2)))
    return out


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    periods = half_years()
    write_losses(loss_lines(3, 3, periods), DATA / "losses_3lines.csv")
    write_losses(loss_lines(10, 14, periods), DATA / "losses_10lines.csv")

    # Common factor dominates: both products load on the same improvement.
    params = synthetic_params(seed=2024)
    for pop, ds in zip("ab", synthetic_datasets(params, noise=0.005, seed=7)):
        write_mortality_csv(ds, DATA / f"mortality_common_{pop}.csv")

    # Low volatility: present values are close to linear in the shocks, so
    # their distribution is close to Gaussian.
    params = synthetic_params(common_vol=0.3, specific_vol=0.05, seed=2025)
    for pop, ds in zip("ab", synthetic_datasets(params, noise=0.002, seed=8)):
        write_mortality_csv(ds, DATA / f"mortality_lowvol_{pop}.csv")


if __name__ == "__main__":
    main()
