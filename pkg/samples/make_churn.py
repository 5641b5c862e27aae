"""Regenerate churn.csv, the small demo dataset used by churn.zml."""

import csv

import numpy as np

rng = np.random.default_rng(7)
n = 300
plans = np.array(["basic", "plus", "pro"])
with open("churn.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["tenure_months", "monthly_charges", "plan", "support_calls", "autopay", "churned"])
    for i in range(n):
        tenure = int(rng.integers(1, 72))
        plan = plans[rng.integers(0, 3)]
        charges = round(20 + 25 * int(np.flatnonzero(plans == plan)[0]) + rng.normal(0, 8), 2)
        calls = int(rng.poisson(1.5))
        autopay = bool(rng.random() < 0.6)
        z = 1.2 - 0.06 * tenure + 0.02 * (charges - 45) + 0.5 * calls - 0.8 * autopay
        churned = "yes" if rng.random() < 1 / (1 + np.exp(-z)) else "no"
        row = [tenure, charges, plan, calls, str(autopay).lower(), churned]
        if rng.random() < 0.04:
            row[int(rng.integers(0, 5))] = ""
        w.writerow(row)
