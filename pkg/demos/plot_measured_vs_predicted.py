"""Measured vs. predicted UCS scatter for the bundled formula model.

Run: python3 demos/plot_measured_vs_predicted.py [out.svg]
"""

# %%
import sys

from gepucs import metrics, table1
from gepucs.modelfile import ModelFile, eq2_model_path
from gepucs.svgplot import scatter_svg

model = ModelFile.load(eq2_model_path())
print(model.infix())

ds = table1()
pred = model.predict(ds.features())
svg = scatter_svg(ds.target(), pred, r2=metrics.r_squared(ds.target(), pred))

out = sys.argv[1] if len(sys.argv) > 1 else "measured_vs_predicted.svg"
with open(out, "w") as f:
    f.write(svg)
print("wrote", out)
