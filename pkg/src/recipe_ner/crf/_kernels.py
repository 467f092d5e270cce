"""Log-space inference kernels for a linear-chain CRF.

Every kernel takes an emission matrix ``E`` of shape ``(n, K)``, a start
vector ``start`` of shape ``(K,)`` and a transition matrix ``trans`` of shape
``(K, K)`` indexed ``[previous, current]``.

Two implementations exist: loop-based kernels compiled with numba and
vectorised numpy kernels. ``RECIPE_NER_BACKEND`` picks one (``numba``,
``numpy`` or ``auto``); ``auto`` uses numba when it imports.

The training objective works on a flattened corpus:

* ``attr_idx``: attribute ids of all positions, concatenated;
* ``pos_ptr``: ``attr_idx[pos_ptr[i]:pos_ptr[i+1]]`` are the attributes of position ``i``;
* ``seq_ptr``: positions ``seq_ptr[s]:seq_ptr[s+1]`` belong to sequence ``s``;
* ``labels``: gold tag index per position.

Parameters are packed as ``[W.ravel(), start, trans.ravel()]`` where ``W`` is
the ``(n_attr, K)`` emission weight matrix.
"""

from __future__ import annotations

import os

import numpy as np

_BACKEND_ENV = "RECIPE_NER_BACKEND"


# --------------------------------------------------------------------------
# numpy reference path

def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def np_forward(E, start, trans):
    n, K = E.shape
    alpha = np.empty((n, K))
    alpha[0] = start + E[0]
    for i in range(1, n):
        alpha[i] = _logsumexp(alpha[i - 1][:, None] + trans, axis=0) + E[i]
    return alpha, float(_logsumexp(alpha[-1], axis=0))


def np_backward(E, trans):
    n, K = E.shape
    beta = np.zeros((n, K))
    for i in range(n - 2, -1, -1):
        beta[i] = _logsumexp(trans + (E[i + 1] + beta[i + 1])[None, :], axis=1)
    return beta


def np_viterbi(E, start, trans):
    n, K = E.shape
    delta = start + E[0]
    back = np.zeros((n, K), dtype=np.int64)
    for i in range(1, n):
        cand = delta[:, None] + trans
        # argmax returns the first maximum, i.e. the lowest tag index
        back[i] = np.argmax(cand, axis=0)
        delta = cand[back[i], np.arange(K)] + E[i]
    path = np.empty(n, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for i in range(n - 1, 0, -1):
        path[i - 1] = back[i, path[i]]
    return path, float(delta[path[-1]])


def np_emissions(W, attr_idx, pos_ptr, p0, p1):
    n = p1 - p0
    E = np.zeros((n, W.shape[1]))
    lo, hi = pos_ptr[p0], pos_ptr[p1]
    if hi > lo:
        rows = np.repeat(np.arange(n), np.diff(pos_ptr[p0:p1 + 1]))
        np.add.at(E, rows, W[attr_idx[lo:hi]])
    return E


def np_nll_grad(theta, n_attr, K, attr_idx, pos_ptr, seq_ptr, labels):
    W = theta[: n_attr * K].reshape(n_attr, K)
    start = theta[n_attr * K: n_attr * K + K]
    trans = theta[n_attr * K + K:].reshape(K, K)
    gW = np.zeros_like(W)
    gstart = np.zeros(K)
    gtrans = np.zeros((K, K))
    nll = 0.0
    for s in range(len(seq_ptr) - 1):
        p0, p1 = seq_ptr[s], seq_ptr[s + 1]
        n = p1 - p0
        y = labels[p0:p1]
        E = np_emissions(W, attr_idx, pos_ptr, p0, p1)
        alpha, logz = np_forward(E, start, trans)
        beta = np_backward(E, trans)
        gold = start[y[0]] + E[np.arange(n), y].sum() + trans[y[:-1], y[1:]].sum()
        nll += logz - gold

        node = np.exp(alpha + beta - logz)
        node[np.arange(n), y] -= 1.0
        rows = np.repeat(np.arange(n), np.diff(pos_ptr[p0:p1 + 1]))
        np.add.at(gW, attr_idx[pos_ptr[p0]:pos_ptr[p1]], node[rows])
        gstart += node[0]
        if n > 1:
            pair = np.exp(alpha[:-1, :, None] + trans[None, :, :]
                          + (E[1:] + beta[1:])[:, None, :] - logz)
            gtrans += pair.sum(axis=0)
            np.add.at(gtrans, (y[:-1], y[1:]), -1.0)
    return nll, np.concatenate([gW.ravel(), gstart, gtrans.ravel()])


# --------------------------------------------------------------------------
# numba path

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_lse_col(prev, trans, k):
        K = prev.shape[0]
        m = -np.inf
        for j in range(K):
            v = prev[j] + trans[j, k]
            if v > m:
                m = v
        if m == -np.inf:
            return m
        s = 0.0
        for j in range(K):
            s += np.exp(prev[j] + trans[j, k] - m)
        return m + np.log(s)

    @njit(cache=True)
    def _nb_lse(v):
        m = -np.inf
        for x in v:
            if x > m:
                m = x
        if m == -np.inf:
            return m
        s = 0.0
        for x in v:
            s += np.exp(x - m)
        return m + np.log(s)

    @njit(cache=True)
    def _nb_forward_into(E, start, trans, alpha):
        n, K = E.shape
        for k in range(K):
            alpha[0, k] = start[k] + E[0, k]
        for i in range(1, n):
            for k in range(K):
                alpha[i, k] = _nb_lse_col(alpha[i - 1], trans, k) + E[i, k]
        return _nb_lse(alpha[n - 1])

    @njit(cache=True)
    def _nb_backward_into(E, trans, beta, tmp):
        n, K = E.shape
        for k in range(K):
            beta[n - 1, k] = 0.0
        for i in range(n - 2, -1, -1):
            for j in range(K):
                for k in range(K):
                    tmp[k] = trans[j, k] + E[i + 1, k] + beta[i + 1, k]
                beta[i, j] = _nb_lse(tmp)

    @njit(cache=True)
    def nb_forward(E, start, trans):
        alpha = np.empty(E.shape)
        logz = _nb_forward_into(E, start, trans, alpha)
        return alpha, logz

    @njit(cache=True)
    def nb_backward(E, trans):
        beta = np.empty(E.shape)
        tmp = np.empty(E.shape[1])
        _nb_backward_into(E, trans, beta, tmp)
        return beta

    @njit(cache=True)
    def nb_viterbi(E, start, trans):
        n, K = E.shape
        delta = np.empty(K)
        nxt = np.empty(K)
        back = np.zeros((n, K), dtype=np.int64)
        for k in range(K):
            delta[k] = start[k] + E[0, k]
        for i in range(1, n):
            for k in range(K):
                best = 0
                bv = delta[0] + trans[0, k]
                for j in range(1, K):
                    v = delta[j] + trans[j, k]
                    if v > bv:  # strict: ties keep the lowest index
                        bv = v
                        best = j
                back[i, k] = best
                nxt[k] = bv + E[i, k]
            for k in range(K):
                delta[k] = nxt[k]
        path = np.empty(n, dtype=np.int64)
        best = 0
        for k in range(1, K):
            if delta[k] > delta[best]:
                best = k
        path[n - 1] = best
        score = delta[best]
        for i in range(n - 1, 0, -1):
            path[i - 1] = back[i, path[i]]
        return path, score

    @njit(cache=True)
    def nb_emissions(W, attr_idx, pos_ptr, p0, p1):
        K = W.shape[1]
        E = np.zeros((p1 - p0, K))
        for i in range(p0, p1):
            for a in range(pos_ptr[i], pos_ptr[i + 1]):
                row = attr_idx[a]
                for k in range(K):
                    E[i - p0, k] += W[row, k]
        return E

    @njit(cache=True)
    def nb_nll_grad(theta, n_attr, K, attr_idx, pos_ptr, seq_ptr, labels):
        W = theta[: n_attr * K].reshape((n_attr, K))
        start = theta[n_attr * K: n_attr * K + K]
        trans = theta[n_attr * K + K:].reshape((K, K))
        grad = np.zeros(theta.shape[0])
        gstart_off = n_attr * K
        gtrans_off = n_attr * K + K
        tmp = np.empty(K)
        nll = 0.0
        for s in range(seq_ptr.shape[0] - 1):
            p0 = seq_ptr[s]
            p1 = seq_ptr[s + 1]
            n = p1 - p0
            E = nb_emissions(W, attr_idx, pos_ptr, p0, p1)
            alpha = np.empty((n, K))
            beta = np.empty((n, K))
            logz = _nb_forward_into(E, start, trans, alpha)
            _nb_backward_into(E, trans, beta, tmp)

            gold = start[labels[p0]]
            for i in range(n):
                gold += E[i, labels[p0 + i]]
                if i > 0:
                    gold += trans[labels[p0 + i - 1], labels[p0 + i]]
            nll += logz - gold

            for i in range(n):
                y = labels[p0 + i]
                for k in range(K):
                    g = np.exp(alpha[i, k] + beta[i, k] - logz)
                    if k == y:
                        g -= 1.0
                    for a in range(pos_ptr[p0 + i], pos_ptr[p0 + i + 1]):
                        grad[attr_idx[a] * K + k] += g
                    if i == 0:
                        grad[gstart_off + k] += g
                if i > 0:
                    yp = labels[p0 + i - 1]
                    for j in range(K):
                        for k in range(K):
                            grad[gtrans_off + j * K + k] += np.exp(
                                alpha[i - 1, j] + trans[j, k] + E[i, k] + beta[i, k] - logz)
                    grad[gtrans_off + yp * K + y] -= 1.0
        return nll, grad


def _select_backend() -> str:
    choice = os.environ.get(_BACKEND_ENV, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_BACKEND_ENV} must be auto, numba or numpy, got {choice!r}")
    if choice == "numba" and not HAVE_NUMBA:
        raise ImportError(f"{_BACKEND_ENV}=numba but numba is not installed")
    if choice == "auto":
        return "numba" if HAVE_NUMBA else "numpy"
    return choice


BACKEND = _select_backend()

if BACKEND == "numba":
    forward, backward, viterbi = nb_forward, nb_backward, nb_viterbi
    emissions, nll_grad = nb_emissions, nb_nll_grad
else:
    forward, backward, viterbi = np_forward, np_backward, np_viterbi
    emissions, nll_grad = np_emissions, np_nll_grad
