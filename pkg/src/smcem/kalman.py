"""Exact fixed-lag smoothing for the scalar linear-Gaussian AR(1) model.

Serves as the analytic oracle the particle filter is checked against:
forward Kalman filtering followed by a lag-limited backward (RTS) sweep gives
the posterior moments of X_k given Y_{1:k+lag}, from which the expected
squared residual E[(Y_k - X_k)^2 | Y_{1:k+lag}] = (Y_k - m)^2 + P follows.
"""

from __future__ import annotations

import numpy as np


def kalman_filter(a, sigma_w, sigma_v, y):
    """Forward pass. Returns (m_f, p_f, m_pred, p_pred) where the predictive
    moments at index t refer to X_t | Y_{1:t-1} and the filtered ones to
    X_t | Y_{1:t}; X_1 is initialised at its stationary law."""
    y = np.asarray(y, dtype=float)
    T = len(y)
    q = sigma_w * sigma_w
    r = sigma_v * sigma_v
    m_f = np.empty(T)
    p_f = np.empty(T)
    m_pred = np.empty(T)
    p_pred = np.empty(T)
    m_pred[0] = 0.0
    p_pred[0] = q / (1.0 - a * a)
    for t in range(T):
        if t > 0:
            m_pred[t] = a * m_f[t - 1]
            p_pred[t] = a * a * p_f[t - 1] + q
        gain = p_pred[t] / (p_pred[t] + r)
        m_f[t] = m_pred[t] + gain * (y[t] - m_pred[t])
        p_f[t] = (1.0 - gain) * p_pred[t]
    return m_f, p_f, m_pred, p_pred


def kalman_smoother(a, sigma_w, sigma_v, y, lag):
    """Fixed-lag smoothing moments and expected squared residuals.

    Returns (means, variances, resid2) of length T, where entry k-1 holds the
    moments of X_k | Y_{1:min(k+lag, T)} and
    resid2[k-1] = E[(Y_k - X_k)^2 | Y_{1:min(k+lag, T)}].
    """
    y = np.asarray(y, dtype=float)
    T = len(y)
    m_f, p_f, m_pred, p_pred = kalman_filter(a, sigma_w, sigma_v, y)
    means = np.empty(T)
    variances = np.empty(T)
    for k in range(T):
        end = min(k + lag, T - 1)
        m, p = m_f[end], p_f[end]
        for j in range(end - 1, k - 1, -1):
            c = p_f[j] * a / p_pred[j + 1]
            m = m_f[j] + c * (m - m_pred[j + 1])
            p = p_f[j] + c * c * (p - p_pred[j + 1])
        means[k] = m
        variances[k] = p
    resid2 = (y - means) ** 2 + variances
    return means, variances, resid2
