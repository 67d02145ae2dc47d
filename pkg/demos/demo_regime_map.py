"""ASCII map of the propagation regimes in the (s, beta) plane.

'a' accelerating (super-linear level lines, rate beta/(2s(beta-1))),
'L' linear front, 'c' the critical curve s = 1/2 + 1/(2(beta-1)),
'e' exponential (KPP, beta = 1).
"""

import numpy as np

from alleefront import regime_classify

MARK = {"accelerating": "a", "linear-front": "L", "critical": "c", "exponential": "e"}

betas = np.concatenate([[1.0], np.linspace(1.25, 4.0, 12)])
ss = np.linspace(0.1, 1.5, 29)

print("      s:", " ".join("%4.2f" % s for s in ss[::4]))
for beta in betas[::-1]:
    row = "".join(MARK[regime_classify(s, beta).regime] for s in ss)
    print("beta %4.2f %s" % (beta, row))

print()
for s, beta in ((0.5, 3.0), (0.8, 3.0), (0.75, 3.0), (0.3, 1.0)):
    rep = regime_classify(s, beta)
    extra = "" if rep.exponent_p is None else " p = %.4f" % rep.exponent_p
    print("(s=%.2f, beta=%.1f) -> %s%s" % (s, beta, rep.regime, extra))
