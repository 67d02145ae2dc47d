"""Spectral accuracy of the splitting quadrature.

Applies the discrete operator to cos(xi x) and compares with the exact
symbol action -|xi|^{2s} cos(xi x); the observed order under grid refinement
should be about 2 with the default splitting exponent gamma = 1 + s.
"""

import numpy as np

from alleefront import fractional_kernel, symbol_error

XI, W = 1.0, 120.0

for s in (0.3, 0.5, 0.7):
    spec = fractional_kernel(s)
    gamma = 1.0 + s
    print("s = %.1f (gamma = %.1f)" % (s, gamma))
    prev = None
    for dx in (0.4, 0.2, 0.1, 0.05):
        err = symbol_error(spec, gamma, XI, dx, W)
        order = "" if prev is None else "  order %.2f" % np.log2(prev / err)
        print("  dx = %-5g rel err %.3e%s" % (dx, err, order))
        prev = err
    print()
