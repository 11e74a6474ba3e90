"""Generate the synthetic 33-entity indicator dataset in data/surrogate33.

The layout mirrors a national health survey extract: 131 indicators, a mix of
higher-is-better and lower-is-better columns, incomes over roughly a tenfold
range, and a missing-value pattern where dropping incomplete columns leaves
116 indicators and dropping State07 first leaves 125.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

M, K = 33, 131
ONLY_STATE07 = 9
SCATTERED = 6


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "data" / "surrogate33")
    parser.add_argument("--seed", type=int, default=20240531)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)

    names = [f"State{i + 1:02d}" for i in range(M)]
    log_income = rng.uniform(np.log(45_000), np.log(450_000), size=M)
    income = np.round(np.exp(log_income), -1)

    # Latent development level: tied to income with idiosyncratic variation.
    z = (log_income - log_income.mean()) / log_income.std()
    merit = 0.7 * z + 0.7 * rng.standard_normal(M)

    polarity = np.where(rng.random(K) < 0.4, -1, 1)
    loading = rng.uniform(0.2, 1.0, size=K)
    centre = rng.uniform(20.0, 70.0, size=K)
    spread = rng.uniform(3.0, 12.0, size=K)
    signal = merit[:, None] * loading[None, :] + rng.standard_normal((M, K))
    values = np.round(centre + polarity * spread * signal, 1)
    values = np.clip(values, 0.1, 99.9)

    missing = np.zeros((M, K), dtype=bool)
    cols = rng.permutation(K)
    state07 = names.index("State07")
    for c in cols[:ONLY_STATE07]:
        missing[state07, c] = True
    others = [i for i in range(M) if i != state07]
    for c in cols[ONLY_STATE07:ONLY_STATE07 + SCATTERED]:
        for i in rng.choice(others, size=rng.integers(1, 4), replace=False):
            missing[i, c] = True

    indicators = [f"ind{k + 1:03d}" for k in range(K)]
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "indicators.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["entity", *indicators])
        for i, name in enumerate(names):
            w.writerow([name, *("" if missing[i, k] else f"{values[i, k]:.1f}" for k in range(K))])
    with open(args.out / "polarity.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["indicator", "polarity"])
        for k in range(K):
            w.writerow([indicators[k], "+1" if polarity[k] > 0 else "-1"])
    with open(args.out / "income.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["entity", "income"])
        for name, p in zip(names, income):
            w.writerow([name, f"{int(p)}"])
    with open(args.out / "truth.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["entity", "latent_merit"])
        for name, m in zip(names, merit):
            w.writerow([name, f"{m:.6f}"])


if __name__ == "__main__":
    main()
