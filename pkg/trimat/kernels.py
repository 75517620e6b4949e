"""Compiled SGD kernels for classic MF and TriMat.

Per-term losses and their analytic gradients are exposed for direct use
(gradient checks, single-step inspection). The epoch kernels apply the same
updates in place, one interaction at a time, in the order given.

All kernels release the GIL so grid cells can train on a thread pool.
Loops are explicit; numba's ``np.dot`` needs a BLAS binding we do not ship.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NORM_EPS = 1e-8


@njit(nogil=True, cache=True)
def _row_dot(A, i, B, j):
    s = 0.0
    for f in range(A.shape[1]):
        s += A[i, f] * B[j, f]
    return s


@njit(nogil=True, cache=True)
def _row_norm(A, i, eps):
    s = 0.0
    for f in range(A.shape[1]):
        s += A[i, f] * A[i, f]
    return max(np.sqrt(s), eps)


@njit(nogil=True, cache=True)
def _bilinear(U, i, C, p, V, j):
    s = 0.0
    for a in range(C.shape[1]):
        row = 0.0
        for b in range(C.shape[2]):
            row += C[p, a, b] * V[j, b]
        s += U[i, a] * row
    return s


# ---------------------------------------------------------------------------
# Per-term losses and gradients
# ---------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def classic_raw_term_loss(u, v, t):
    e = t - np.sum(u * v)
    return e * e


@njit(nogil=True, cache=True)
def classic_raw_term_gradients(u, v, t):
    """d/du and d/dv of (t - u.v)^2."""
    e = t - np.sum(u * v)
    return -2.0 * e * v, -2.0 * e * u


@njit(nogil=True, cache=True)
def cosine(u, v, eps):
    nu = max(np.sqrt(np.sum(u * u)), eps)
    nv = max(np.sqrt(np.sum(v * v)), eps)
    return np.sum(u * v) / (nu * nv)


@njit(nogil=True, cache=True)
def classic_normalized_term_loss(u, v, t, eps):
    e = t - cosine(u, v, eps)
    return e * e


@njit(nogil=True, cache=True)
def classic_normalized_term_gradients(u, v, t, eps):
    """d/du and d/dv of (t - cos(u, v))^2 with both norms floored at eps."""
    raw_nu = np.sqrt(np.sum(u * u))
    raw_nv = np.sqrt(np.sum(v * v))
    nu = max(raw_nu, eps)
    nv = max(raw_nv, eps)
    s = np.sum(u * v) / (nu * nv)
    e = t - s
    ds_du = v / (nu * nv)
    ds_dv = u / (nu * nv)
    # a floored norm is constant, so it contributes no term
    if raw_nu > eps:
        ds_du = ds_du - s * u / (nu * nu)
    if raw_nv > eps:
        ds_dv = ds_dv - s * v / (nv * nv)
    return -2.0 * e * ds_du, -2.0 * e * ds_dv


@njit(nogil=True, cache=True)
def _triple(u, c, v):
    s = 0.0
    for a in range(c.shape[0]):
        for b in range(c.shape[1]):
            s += u[a] * c[a, b] * v[b]
    return s


@njit(nogil=True, cache=True)
def trimat_term_loss(u, c, v, t):
    e = t - _triple(u, c, v)
    return e * e


@njit(nogil=True, cache=True)
def trimat_term_gradients(u, c, v, t):
    """d/du, d/dv and d/dC of (t - u^T C v)^2."""
    e = t - _triple(u, c, v)
    cv = np.zeros(c.shape[0])
    ctu = np.zeros(c.shape[1])
    for a in range(c.shape[0]):
        for b in range(c.shape[1]):
            cv[a] += c[a, b] * v[b]
            ctu[b] += c[a, b] * u[a]
    grad_c = np.empty_like(c)
    for a in range(c.shape[0]):
        for b in range(c.shape[1]):
            grad_c[a, b] = -2.0 * e * u[a] * v[b]
    return -2.0 * e * cv, -2.0 * e * ctu, grad_c


# ---------------------------------------------------------------------------
# Epoch kernels (in place)
# ---------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def classic_raw_epoch(users, items, targets, order, U, V, lr):
    for n in range(order.shape[0]):
        r = order[n]
        i = users[r]
        j = items[r]
        g = 2.0 * lr * (targets[r] - _row_dot(U, i, V, j))
        for f in range(U.shape[1]):
            uf = U[i, f]
            vf = V[j, f]
            U[i, f] = uf + g * vf
            V[j, f] = vf + g * uf


@njit(nogil=True, cache=True)
def classic_normalized_epoch(users, items, targets, order, U, V, lr, eps):
    k = U.shape[1]
    for n in range(order.shape[0]):
        r = order[n]
        i = users[r]
        j = items[r]
        nu = _row_norm(U, i, eps)
        nv = _row_norm(V, j, eps)
        u_floored = nu <= eps
        v_floored = nv <= eps
        s = _row_dot(U, i, V, j) / (nu * nv)
        g = 2.0 * lr * (targets[r] - s)
        for f in range(k):
            uf = U[i, f]
            vf = V[j, f]
            ds_du = vf / (nu * nv)
            ds_dv = uf / (nu * nv)
            if not u_floored:
                ds_du -= s * uf / (nu * nu)
            if not v_floored:
                ds_dv -= s * vf / (nv * nv)
            U[i, f] = uf + g * ds_du
            V[j, f] = vf + g * ds_dv


@njit(nogil=True, cache=True)
def trimat_epoch(users, items, pairs, targets, order, U, V, C, lr):
    rows = C.shape[1]
    cols = C.shape[2]
    cv = np.empty(rows)
    ctu = np.empty(cols)
    for n in range(order.shape[0]):
        r = order[n]
        i = users[r]
        j = items[r]
        p = pairs[r]
        s = 0.0
        for a in range(rows):
            cv[a] = 0.0
            for b in range(cols):
                cv[a] += C[p, a, b] * V[j, b]
            s += U[i, a] * cv[a]
        for b in range(cols):
            ctu[b] = 0.0
            for a in range(rows):
                ctu[b] += C[p, a, b] * U[i, a]
        g = 2.0 * lr * (targets[r] - s)
        for a in range(rows):
            for b in range(cols):
                C[p, a, b] += g * U[i, a] * V[j, b]
        for a in range(rows):
            U[i, a] += g * cv[a]
        for b in range(cols):
            V[j, b] += g * ctu[b]


# ---------------------------------------------------------------------------
# Training-set MSE
# ---------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def classic_raw_mse(users, items, targets, U, V):
    total = 0.0
    for r in range(targets.shape[0]):
        e = targets[r] - _row_dot(U, users[r], V, items[r])
        total += e * e
    return total / max(targets.shape[0], 1)


@njit(nogil=True, cache=True)
def classic_normalized_mse(users, items, targets, U, V, eps):
    total = 0.0
    for r in range(targets.shape[0]):
        i = users[r]
        j = items[r]
        s = _row_dot(U, i, V, j) / (_row_norm(U, i, eps) * _row_norm(V, j, eps))
        e = targets[r] - s
        total += e * e
    return total / max(targets.shape[0], 1)


@njit(nogil=True, cache=True)
def trimat_mse(users, items, pairs, targets, U, V, C):
    total = 0.0
    for r in range(targets.shape[0]):
        e = targets[r] - _bilinear(U, users[r], C, pairs[r], V, items[r])
        total += e * e
    return total / max(targets.shape[0], 1)
