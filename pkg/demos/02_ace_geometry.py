"""ACE as a squared cosine in whitened space.

Shows why a strongly correlated background direction fools an energy
detector while ACE shrugs it off.
"""

# %%
import numpy as np

from emi_ace import BackgroundModel, ace_statistic, build_dictionary
from emi_ace.lane_sim import ground_covariance, ground_direction

rng = np.random.default_rng(0)
d = build_dictionary()
atom = d.features[40]

cov = ground_covariance(100.0)
bg = BackgroundModel(np.zeros(42), np.linalg.inv(cov))

# %% A target sample versus a large ground swing
target = atom * 3.0 + rng.multivariate_normal(np.zeros(42), cov) * 0.1
ground = ground_direction() * 10.0 + rng.multivariate_normal(np.zeros(42), cov) * 0.1
for name, x in (("target", target), ("ground", ground)):
    print(f"{name:6s} energy={np.sum(x**2):8.2f}  ACE={ace_statistic(x, atom, bg):.3f}  "
          f"plain cos^2={(x @ atom) ** 2 / (x @ x):.3f}")

# %% Whitening by hand gives the same number
evals, evecs = np.linalg.eigh(cov)
W = evecs @ np.diag(evals ** -0.5) @ evecs.T
a, b = W @ target, W @ atom
print("whitened cos^2:", (a @ b) ** 2 / ((a @ a) * (b @ b)))

# %% Scale invariance: ACE ignores how strong the return is
for s in (0.01, 1.0, 100.0):
    print(f"scale {s:>6}: ACE={ace_statistic(s * target, atom, bg):.6f}")
