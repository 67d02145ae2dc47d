"""Watch a heavy-tailed front accelerate and measure its exponent.

Runs the monostable equation u_t = D[u] + u^beta (1 - u) with fractional
diffusion from a Heaviside datum, tracks the half-level line x_{1/2}(t), and
compares the fitted log-log slope with the predicted rate
beta / (2 s (beta - 1)).

Takes about a minute.  Try s = 0.8 to see the contrast with a constant-speed
front.
"""

import numpy as np

from alleefront import LevelSeries, RunSettings, exponent_fit, regime_classify, run

S, BETA, T_END = 0.5, 3.0, 40.0

settings = RunSettings(s=S, beta=BETA, t_end=T_END, dx=0.5)
print("running s=%g beta=%g to t=%g ..." % (S, BETA, T_END))
traj = run(settings)

t, x = traj.level_series(0.5)
for tq in (5, 10, 20, 30, 40):
    i = np.argmin(np.abs(t - tq))
    print("  t = %5.1f   x_1/2 = %8.2f" % (t[i], x[i]))

fit = exponent_fit(LevelSeries(0.5, t, x), (T_END / 3, T_END))
report = regime_classify(S, BETA)
print()
print("fitted slope of log x_1/2 vs log t : %.3f" % fit.slope)
print("predicted rate beta/(2s(beta-1))   : %.3f" % report.exponent_p)
print("regime                             : %s" % report.regime)
print("grid grew to %d interior points" % traj.final_grid.n)
