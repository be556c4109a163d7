# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hidden-state recursions.

Drop-in replacement for the numpy kernels: tight typed loops over the
scaled forward/backward passes and the expected-count accumulation that
dominate fitting time on large corpora.
"""

from libc.math cimport log

import numpy as np

BACKEND_NAME = "cython"


def forward(double[::1] pi, double[:, ::1] a, double[:, ::1] b, int[::1] obs):
    cdef Py_ssize_t T = obs.shape[0]
    cdef Py_ssize_t n = pi.shape[0]
    alpha_arr = np.empty((T, n))
    scales_arr = np.empty(T)
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[::1] scales = scales_arr
    cdef Py_ssize_t t, i, j
    cdef double acc, total

    total = 0.0
    for i in range(n):
        alpha[0, i] = pi[i] * b[i, obs[0]]
        total += alpha[0, i]
    scales[0] = total
    for i in range(n):
        alpha[0, i] /= total

    for t in range(1, T):
        total = 0.0
        for j in range(n):
            acc = 0.0
            for i in range(n):
                acc += alpha[t - 1, i] * a[i, j]
            alpha[t, j] = acc * b[j, obs[t]]
            total += alpha[t, j]
        scales[t] = total
        for j in range(n):
            alpha[t, j] /= total

    return alpha_arr, scales_arr


def backward(double[:, ::1] a, double[:, ::1] b, int[::1] obs, double[::1] scales):
    cdef Py_ssize_t T = obs.shape[0]
    cdef Py_ssize_t n = a.shape[0]
    beta_arr = np.empty((T, n))
    cdef double[:, ::1] beta = beta_arr
    cdef Py_ssize_t t, i, j
    cdef double acc

    for i in range(n):
        beta[T - 1, i] = 1.0
    for t in range(T - 2, -1, -1):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += a[i, j] * b[j, obs[t + 1]] * beta[t + 1, j]
            beta[t, i] = acc / scales[t + 1]

    return beta_arr


def sequence_stats(double[::1] pi, double[:, ::1] a, double[:, ::1] b, int[::1] obs):
    cdef Py_ssize_t T = obs.shape[0]
    cdef Py_ssize_t n = pi.shape[0]
    cdef Py_ssize_t n_symbols = b.shape[1]

    alpha_arr, scales_arr = forward(pi, a, b, obs)
    beta_arr = backward(a, b, obs, scales_arr)
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[::1] scales = scales_arr

    gamma_arr = np.empty((T, n))
    trans_arr = np.zeros((n, n))
    emit_arr = np.zeros((n, n_symbols))
    pi_arr = np.empty(n)
    cdef double[:, ::1] gamma = gamma_arr
    cdef double[:, ::1] trans = trans_arr
    cdef double[:, ::1] emit = emit_arr
    cdef double[::1] pi_acc = pi_arr

    cdef Py_ssize_t t, i, j
    cdef double total, loglik

    for t in range(T):
        total = 0.0
        for i in range(n):
            gamma[t, i] = alpha[t, i] * beta[t, i]
            total += gamma[t, i]
        for i in range(n):
            gamma[t, i] /= total

    for t in range(T - 1):
        for i in range(n):
            for j in range(n):
                trans[i, j] += (
                    alpha[t, i] * a[i, j] * b[j, obs[t + 1]] * beta[t + 1, j]
                ) / scales[t + 1]

    for t in range(T):
        for i in range(n):
            emit[i, obs[t]] += gamma[t, i]

    for i in range(n):
        pi_acc[i] = gamma[0, i]

    loglik = 0.0
    for t in range(T):
        loglik += log(scales[t])

    return loglik, pi_arr, trans_arr, emit_arr
