"""Algebraic tails and the flattening of the invasion profile.

From a Heaviside datum the solution develops an x^{-2s} tail immediately;
the best-fit amplitude C(t) in u ~ C/x^{2s} then grows (close to linearly),
so no traveling profile can stabilize.  Runs in roughly a minute.
"""

import numpy as np

from alleefront import RunSettings, flattening_series, run, tail_fit

S, BETA = 0.5, 1.5

settings = RunSettings(s=S, beta=BETA, t_end=12.0, dx=0.4, snapshot_every=1.0)
print("running s=%g beta=%g to t=%g ..." % (S, BETA, settings.t_end))
traj = run(settings)

snap1 = [s_ for s_ in traj.snapshots if abs(s_.t - 1.0) < 1e-9][0]
fixed, free = tail_fit(snap1, S, (1e-4, 1e-2))
print()
print("tail at t = 1 over u in (1e-4, 1e-2):")
print("  fixed-exponent fit : u ~ %.4g / x^%.1f  (rel misfit %.1e)" % (fixed.C, -fixed.exponent, fixed.residual))
print("  free-exponent fit  : exponent %.4f  (expect about %.1f = -2s)" % (free.exponent, -2 * S))

snaps = [s_ for s_ in traj.snapshots if s_.t >= 1.0]
flat = flattening_series(snaps, S, (1e-5, 1e-2))
print()
print("flattening amplitude C(t), window u in (1e-5, 1e-2):")
for t, C in zip(flat.t, flat.C):
    print("  t = %5.1f   C = %.4f" % (t, C))
print("late-window linear fit: slope %.4f, max relative deviation %.2e"
      % (flat.linear_coef[0], flat.max_rel_deviation))
