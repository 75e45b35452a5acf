"""From a simulated lane to detector ROC curves.

Runs the full pipeline on the ``easy`` preset, then prints the comparison
report and a coarse text plot of each ROC curve.
"""

# %%
import tempfile
from pathlib import Path

import numpy as np

from emi_ace import io
from emi_ace.pipeline import PipelineConfig, run_pipeline

out = Path(tempfile.mkdtemp(prefix="emi_ace_demo_"))
manifest = run_pipeline(PipelineConfig(out_dir=str(out), preset="easy", seed=0))
print(f"{len(manifest['artifacts'])} artifacts in {out}")
print((out / "report.txt").read_text())

# %% Text ROC curves
far_grid = np.linspace(0, 0.3, 31)
for method in ("ace-global", "wace", "jomp", "energy"):
    c = io.read_roc(out / f"roc_{method}.csv")
    pd = [c.pd[c.far <= f].max(initial=0.0) for f in far_grid]
    bar = "".join(" .:-=+*#%@"[min(int(p * 9.999), 9)] for p in pd)
    print(f"{method:10s} |{bar}|  (FAR 0 to 0.3 per m^2)")

# %% Confidence maps are written as PGM; open them in any image viewer
print("maps:", sorted(p.name for p in out.glob("map_*.pgm")))
