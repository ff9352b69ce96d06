"""numba-compiled twins of the kernels in ``_numpy``; same signatures and outputs."""

import numpy as np
from numba import njit


@njit(cache=True)
def forward(A, B, pi, obs):
    T, n = obs.shape[0], A.shape[0]
    alpha = np.zeros((T, n))
    scale = np.zeros(T)
    a = np.empty(n)
    for t in range(T):
        o = obs[t]
        c = 0.0
        for j in range(n):
            if t == 0:
                acc = pi[j]
            else:
                acc = 0.0
                for i in range(n):
                    acc += alpha[t - 1, i] * A[i, j]
            a[j] = acc * B[j, o]
            c += a[j]
        scale[t] = c
        if c == 0.0:
            break
        for j in range(n):
            alpha[t, j] = a[j] / c
    return alpha, scale


@njit(cache=True)
def backward(A, B, obs, scale):
    T, n = obs.shape[0], A.shape[0]
    beta = np.empty((T, n))
    w = np.empty(n)
    for j in range(n):
        beta[T - 1, j] = 1.0
    for t in range(T - 2, -1, -1):
        o = obs[t + 1]
        for j in range(n):
            w[j] = B[j, o] * beta[t + 1, j]
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += A[i, j] * w[j]
            beta[t, i] = acc / scale[t + 1]
    return beta


@njit(cache=True)
def transition_counts(A, B, obs, alpha, beta, scale):
    T, n = obs.shape[0], A.shape[0]
    xi = np.zeros((n, n))
    for t in range(T - 1):
        o = obs[t + 1]
        c = scale[t + 1]
        for i in range(n):
            ai = alpha[t, i]
            for j in range(n):
                xi[i, j] += ai * A[i, j] * B[j, o] * beta[t + 1, j] / c
    return xi


@njit(cache=True)
def _draw(cdf, u):
    m = cdf.shape[0]
    for j in range(m - 1):
        if u < cdf[j]:
            return j
    return m - 1


@njit(cache=True)
def sample_path(pi_cdf, A_cdf, B_cdf, u_state, u_obs):
    T = u_state.shape[0]
    states = np.empty(T, dtype=np.int64)
    symbols = np.empty(T, dtype=np.int64)
    s = _draw(pi_cdf, u_state[0])
    for t in range(T):
        if t > 0:
            s = _draw(A_cdf[s], u_state[t])
        states[t] = s
        symbols[t] = _draw(B_cdf[s], u_obs[t])
    return states, symbols
