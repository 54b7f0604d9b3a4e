"""Online weighted linear regression on a drifting series.

Fits ``y ~ b0 + b1 * x`` where x is the relative index (-n+1, ..., 0), so the
intercept sits at the newest point. Each point carries a weight eta_k in the
squared-residual objective; the eta sequence is induced by the learning
weights gamma via eta_k = gamma_k * prod_{j>k} (1 - gamma_j), which is exactly
the recursion implemented by `update`: old weights scale by (1 - gamma_new)
and the new point enters with weight gamma_new.

In design-matrix form the row weights are w_k = sqrt(eta_k); the normal
equations therefore involve eta-weighted sums (the `sw2*` accumulators) and
the sandwich variance of the coefficients involves eta^2-weighted sums (the
`sw4*` accumulators):

    beta_hat = (Xw' Xw)^-1 Xw' yw
    var beta_hat = (Xw' Xw)^-1 [Xw' diag(w^2 s2) Xw] (Xw' Xw)^-1

with the residual variance s2 estimated from the weighted residual sum of
squares via

    s2 = n_eff * WRSS / (sum_eta * max(n_eff - 2, 0.1)),
    n_eff = (sum eta)^2 / sum eta^2.

The n_eff/sum_eta factor makes the estimator invariant to rescaling all
weights; in the unit-weight gauge (every w_k^2 = 1) it reduces to the
classical RSS / (n - 2), and under equal normalized weights the coefficient
variances collapse to the ordinary least-squares ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_DET_FLOOR = 1e-300


@dataclass
class RegressionState:
    """Accumulators for the weighted fit; updated online, never revisited."""

    sw2: float = 0.0    # sum eta
    sw2x: float = 0.0   # sum eta * x
    sw2x2: float = 0.0  # sum eta * x^2
    sw2y: float = 0.0   # sum eta * y
    sw2xy: float = 0.0  # sum eta * x * y
    sw2y2: float = 0.0  # sum eta * y^2
    sw4: float = 0.0    # sum eta^2
    sw4x: float = 0.0   # sum eta^2 * x
    sw4x2: float = 0.0  # sum eta^2 * x^2
    n: int = 0

    def update(self, y_new: float, gamma_new: float) -> None:
        """Absorb one point: discount history by (1 - gamma_new), shift all
        previous x by -1, then add (x=0, y=y_new) with weight gamma_new."""
        if not 0.0 < gamma_new <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {gamma_new}")
        d = 1.0 - gamma_new
        d2 = d * d
        sw2, sw2x, sw2x2 = d * self.sw2, d * self.sw2x, d * self.sw2x2
        sw2y, sw2xy, sw2y2 = d * self.sw2y, d * self.sw2xy, d * self.sw2y2
        sw4, sw4x, sw4x2 = d2 * self.sw4, d2 * self.sw4x, d2 * self.sw4x2

        # x -> x - 1 via binomial identities, then the new point at x = 0.
        self.sw2 = sw2 + gamma_new
        self.sw2x = sw2x - sw2
        self.sw2x2 = sw2x2 - 2.0 * sw2x + sw2
        self.sw2y = sw2y + gamma_new * y_new
        self.sw2xy = sw2xy - sw2y
        self.sw2y2 = sw2y2 + gamma_new * y_new * y_new
        self.sw4 = sw4 + gamma_new * gamma_new
        self.sw4x = sw4x - sw4
        self.sw4x2 = sw4x2 - 2.0 * sw4x + sw4
        self.n += 1

    def estimates(self):
        """Return (b0, b1, sd_b0, sd_b1), or None when the fit is not
        identified (fewer than 3 points or singular normal equations)."""
        if self.n < 3:
            return None
        det = self.sw2 * self.sw2x2 - self.sw2x * self.sw2x
        if not det > _DET_FLOOR:
            return None
        b1 = (self.sw2 * self.sw2xy - self.sw2x * self.sw2y) / det
        b0 = (self.sw2x2 * self.sw2y - self.sw2x * self.sw2xy) / det
        wrss = (
            self.sw2y2
            + b0 * b0 * self.sw2
            + b1 * b1 * self.sw2x2
            - 2.0 * b0 * self.sw2y
            - 2.0 * b1 * self.sw2xy
            + 2.0 * b0 * b1 * self.sw2x
        )
        wrss = max(wrss, 0.0)  # guards cancellation on (near-)exact fits
        n_eff = self.sw2 * self.sw2 / self.sw4
        s2 = n_eff * wrss / (self.sw2 * max(n_eff - 2.0, 0.1))
        v0 = (
            self.sw2x2 * self.sw2x2 * self.sw4
            - 2.0 * self.sw2x2 * self.sw2x * self.sw4x
            + self.sw2x * self.sw2x * self.sw4x2
        ) * s2 / (det * det)
        v1 = (
            self.sw2x * self.sw2x * self.sw4
            - 2.0 * self.sw2 * self.sw2x * self.sw4x
            + self.sw2 * self.sw2 * self.sw4x2
        ) * s2 / (det * det)
        return b0, b1, math.sqrt(max(v0, 0.0)), math.sqrt(max(v1, 0.0))
