"""Pure-numpy hidden-state recursions; the fallback kernel implementation.

Same contracts as the compiled kernels: scaled forward/backward passes and
per-sequence expectation accumulation for the re-estimation step.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def forward(pi, a, b, obs):
    """Scaled forward pass.

    Returns (alpha, scales) where alpha[t] is the filtered state
    distribution after observation t and scales[t] the per-step
    normalizer; sum(log(scales)) is the sequence log-likelihood.
    """
    T, n = len(obs), len(pi)
    alpha = np.empty((T, n))
    scales = np.empty(T)
    work = pi * b[:, obs[0]]
    scales[0] = work.sum()
    alpha[0] = work / scales[0]
    for t in range(1, T):
        work = (alpha[t - 1] @ a) * b[:, obs[t]]
        scales[t] = work.sum()
        alpha[t] = work / scales[t]
    return alpha, scales


def backward(a, b, obs, scales):
    """Scaled backward pass matching ``forward``'s normalizers.

    With this scaling, alpha[t] * beta[t] sums to one at every t.
    """
    T, n = len(obs), a.shape[0]
    beta = np.empty((T, n))
    beta[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        beta[t] = (a @ (b[:, obs[t + 1]] * beta[t + 1])) / scales[t + 1]
    return beta


def sequence_stats(pi, a, b, obs):
    """Expected-count accumulation for one observation sequence.

    Returns (loglik, pi_acc, trans_acc, emit_acc): the sequence
    log-likelihood under the current parameters, the initial-state
    posterior, expected transition counts, and expected emission counts.
    """
    T, n = len(obs), len(pi)
    alpha, scales = forward(pi, a, b, obs)
    beta = backward(a, b, obs, scales)
    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)

    trans_acc = np.zeros((n, n))
    for t in range(T - 1):
        xi = (
            alpha[t][:, None]
            * a
            * (b[:, obs[t + 1]] * beta[t + 1])[None, :]
            / scales[t + 1]
        )
        trans_acc += xi

    emit_acc = np.zeros((n, b.shape[1]))
    for t in range(T):
        emit_acc[:, obs[t]] += gamma[t]

    return float(np.log(scales).sum()), gamma[0].copy(), trans_acc, emit_acc
