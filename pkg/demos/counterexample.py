"""
Why domination matters
======================

A one-dimensional sequence whose square concentrates at a point while every
truncated H-distribution vanishes. Nothing dominates it in L^2, so the
optimal compensated compactness statement does not apply and the weak limit
of ``u_r^2`` is ``2 delta(x0)`` instead of 0.
"""
import numpy as np

from ccspectral import GaussianBump, TestBank, estimate_hdistribution, pair, paper_counterexample_family, richardson
from ccspectral.multipliers import truncate

rs = [8, 16, 32, 64]
fam = paper_counterexample_family(rs, x0=0.5)
x0 = fam.params["x0"]
print(f"grid: {fam.grid.sizes[0]} points, plateau centre {x0:.6f}")

###############################################################################
# The members are plateaus of height r and half-width r^-2, so the integral
# of u_r^2 is 2 for every r while the pairing with a fixed test function
# decays like 1/r.

phi = GaussianBump((x0,), 0.05).on(fam.grid)
for r in rs:
    u = fam.scalar(r)
    print(f"r={r:3d}  int u^2 = {pair(u, u).real:.12f}   <u, phi> = {pair(u, phi).real:.3e}")

###############################################################################
# Pairing the square against phi and extrapolating in 1/r gives 2 phi(x0).

ex = richardson(rs, [pair(fam.scalar(r) * fam.scalar(r), phi) for r in rs])
print(f"lim <u_r^2, phi> = {ex.value.real:.8f} +- {ex.error:.1e}   (2 phi(x0) = 2)")

###############################################################################
# Truncation at any fixed level l wipes out every member with r > l, so each
# truncated H-distribution mu_l is identically zero.

print("T_l(u_r) == 0 for r > l:", all(not np.any(truncate(fam.scalar(r), l).values)
                                      for r in rs for l in (2, 4, 7.5)))
bank = TestBank.from_profiles(fam.grid, [GaussianBump((x0,), 0.05, label="phi")], ["one"])
mu = estimate_hdistribution(fam, fam, bank, (1,), rs, l_schedule=[2, 4, 8], truncate_target="member")
print(f"max |mu_l| over l in (2, 4, 8): {mu.max_abs():.1e}")
