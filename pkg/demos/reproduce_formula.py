"""Score the published carbonate UCS formula on the bundled measurements.

Run: python3 demos/reproduce_formula.py
"""

# %%
import numpy as np

from gepucs import metrics, table1
from gepucs.reference import predict_ucs_eq2

ds = table1()
f = ds.features()
measured = ds.target()
predicted = predict_ucs_eq2(f["n"], f["v"])

print(f"{len(ds)} specimens, porosity {f['n'].min()}-{f['n'].max()} %, "
      f"velocity {f['v'].min()}-{f['v'].max()} m/s")

# %% The first few rows side by side.
for n, v, y, p in list(zip(f["n"], f["v"], measured, predicted))[:5]:
    print(f"n={n:5.1f}  v={v:7.1f}  measured={y:5.1f}  predicted={p:7.3f}")

# %% Aggregate scores.  Two R^2 readings exist; the squared Pearson
# correlation is the one that lands near the published 0.92.
report = metrics.MetricsReport.compute(measured, predicted)
print(report.to_json())
print("residual R^2 would be", round(metrics.r2_residual(measured, predicted), 4))

# %% UCS falls as velocity rises at fixed porosity.
v = np.linspace(2500, 5500, 7)
print(np.round(predict_ucs_eq2(20.0, v), 2))
