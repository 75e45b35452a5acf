"""Walk through the DSRF dictionary: relaxation responses and their features.

Run with ``python3 demos/01_dsrf_dictionary.py``.
"""

# %% A single relaxation term
import numpy as np

from emi_ace.dictionary import RelaxationModel, build_dictionary, default_operating_freqs, dsrf_response

freqs = default_operating_freqs()
print(f"{freqs.size} operating frequencies, {freqs[0]:.0f} Hz to {freqs[-1]:.0f} Hz")

zeta_hz = 3000.0
model = RelaxationModel(0.0, np.array([1.0]), np.array([2 * np.pi * zeta_hz]))
h = dsrf_response(model, freqs)
# at f == zeta the in-phase part has dropped to half and quadrature peaks
k = int(np.argmin(np.abs(freqs - zeta_hz)))
print(f"near {freqs[k]:.0f} Hz: re={h[k].real:.3f} im={h[k].imag:.3f}")

# %% The dictionary
d = build_dictionary()
print(f"{len(d)} atoms, zeta from {d.relaxation_freqs[0]:g} Hz to {d.relaxation_freqs[-1]:g} Hz")

# Atoms outside the operating band barely change shape, so the useful
# part of the dictionary is the middle.  Coherence between neighbours
# shows how redundant the atoms are.
F = d.features
coh = np.abs(np.sum(F[1:] * F[:-1], axis=1))
for i in (0, 25, 50, 75, 98):
    print(f"atom {i:2d} ({d.relaxation_freqs[i]:9.0f} Hz)  |<a_i, a_i+1>| = {coh[i]:.4f}")

# %% Feature normalization invariants
print("max | ||a|| - 1 |      :", np.abs(np.linalg.norm(F, axis=1) - 1).max())
print("max | mean(real part) |:", np.abs(F[:, :21].mean(axis=1)).max())
