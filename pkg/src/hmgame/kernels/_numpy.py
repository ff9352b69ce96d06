"""Reference kernels: plain numpy, vectorised over states, looped over time."""

import numpy as np


def forward(A, B, pi, obs):
    """Scaled forward pass.

    Returns ``(alpha, scale)`` where ``alpha[t]`` is the filtered posterior at
    step ``t`` and ``scale[t]`` the one-step predictive probability of
    ``obs[t]``. A zero scale aborts the pass; later rows are left at zero.
    """
    T, n = obs.shape[0], A.shape[0]
    alpha = np.zeros((T, n))
    scale = np.zeros(T)
    a = pi * B[:, obs[0]]
    for t in range(T):
        if t > 0:
            a = (alpha[t - 1] @ A) * B[:, obs[t]]
        c = a.sum()
        scale[t] = c
        if c == 0.0:
            break
        alpha[t] = a / c
    return alpha, scale


def backward(A, B, obs, scale):
    T, n = obs.shape[0], A.shape[0]
    beta = np.empty((T, n))
    beta[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        beta[t] = A @ (B[:, obs[t + 1]] * beta[t + 1]) / scale[t + 1]
    return beta


def transition_counts(A, B, obs, alpha, beta, scale):
    """Expected transition counts summed over time (unnormalised xi)."""
    if obs.shape[0] < 2:
        return np.zeros_like(A)
    w = B[:, obs[1:]].T * beta[1:] / scale[1:, None]
    return A * (alpha[:-1].T @ w)


def sample_path(pi_cdf, A_cdf, B_cdf, u_state, u_obs):
    """Inverse-CDF sampling driven by pre-drawn uniforms."""
    T = u_state.shape[0]
    n, k = A_cdf.shape[0], B_cdf.shape[1]
    states = np.empty(T, dtype=np.int64)
    symbols = np.empty(T, dtype=np.int64)
    s = min(int(np.searchsorted(pi_cdf, u_state[0], side="right")), n - 1)
    for t in range(T):
        if t > 0:
            s = min(int(np.searchsorted(A_cdf[s], u_state[t], side="right")), n - 1)
        states[t] = s
        symbols[t] = min(int(np.searchsorted(B_cdf[s], u_obs[t], side="right")), k - 1)
    return states, symbols
