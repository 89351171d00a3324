"""
H-distribution of a plane-wave oscillation
==========================================

For ``u_r = a exp(2 pi i r k.x)`` the multiplier with symbol ``psi(xi/|xi|)``
sees a single direction, so the H-distribution acts on ``phi (x) psi`` as
``psi(k/|k|) int phi |a|^2``.
"""
import numpy as np

from ccspectral import (CompactBump, GaussianBump, Grid, TestBank, estimate_hdistribution, oscillation_family,
                        symbol_from_label)

grid = Grid((512, 512))
profile = CompactBump((0.5, 0.5), 0.3)
phi_profile = GaussianBump((0.45, 0.55), 0.1, label="phi")
a2 = profile.on(grid) * profile.on(grid)
phi_a2 = float(np.sum(phi_profile.on(grid).values * a2.values) * grid.cell_volume)
print(f"int phi |a|^2 = {phi_a2:.12f}")

labels = ["one", "riesz:0", "riesz:1", "direction-indicator:0:0.3", "parabolic-xixj:0:1"]
bank = TestBank.from_profiles(grid, [phi_profile], labels)

###############################################################################
# Estimate the table for three directions and compare every entry with the
# single-mode prediction.

for k in [(1, 0), (1, 1), (2, -1)]:
    fam = oscillation_family(grid, profile, k, "exponential")
    est = estimate_hdistribution(fam, fam, bank, (1, 1), [8, 16, 32, 64])
    unit = np.asarray(k, float) / np.linalg.norm(k)
    print(f"k = {k}")
    for lab in labels:
        e = est.entry(0, 0, "phi", lab)
        pred = float(symbol_from_label(lab)(unit)) * phi_a2
        print(f"  {lab:28s} estimate {e.value.real:+.6f} +- {e.error:.1e}   predicted {pred:+.6f}")

###############################################################################
# A real cosine oscillation splits its energy between +k and -k, so odd
# symbols average to zero.

fam = oscillation_family(grid, profile, (1, 1), "cosine")
est = estimate_hdistribution(fam, fam, bank, (1, 1), [8, 16, 32, 64])
print("cosine, riesz:0 :", f"{abs(est.entry(0, 0, 'phi', 'riesz:0').value):.1e}")
print("cosine, one     :", f"{est.entry(0, 0, 'phi', 'one').value.real:.6f}  (half of int phi |a|^2)")
