"""Numba kernels for collapsed Gibbs sampling.

Both kernels seed numba's internal Mersenne Twister on entry, so output is a
pure function of the arguments.  Tokens are visited strictly in stream order
(document order, then token order within each document), which keeps the
chain independent of vocabulary id relabeling.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def train_sweeps(w_ids, d_ids, k, n_terms, n_docs, alpha, beta, iterations, seed):
    """Run collapsed Gibbs over the token stream; return final count matrices.

    w_ids/d_ids: int32 arrays of per-token term and document ids, in stream
    order.  Returns (topic_term_counts, doc_topic_counts).
    """
    np.random.seed(seed)
    n = w_ids.shape[0]
    z = np.empty(n, np.int32)
    n_kw = np.zeros((k, n_terms), np.int64)
    n_dk = np.zeros((n_docs, k), np.int64)
    n_k = np.zeros(k, np.int64)

    for i in range(n):
        t = np.random.randint(0, k)
        z[i] = t
        n_kw[t, w_ids[i]] += 1
        n_dk[d_ids[i], t] += 1
        n_k[t] += 1

    cum = np.empty(k, np.float64)
    vbeta = n_terms * beta
    for _ in range(iterations):
        for i in range(n):
            w = w_ids[i]
            d = d_ids[i]
            t = z[i]
            n_kw[t, w] -= 1
            n_dk[d, t] -= 1
            n_k[t] -= 1

            total = 0.0
            for j in range(k):
                total += (n_kw[j, w] + beta) / (n_k[j] + vbeta) * (n_dk[d, j] + alpha)
                cum[j] = total
            u = np.random.random() * total
            t = 0
            while t < k - 1 and cum[t] <= u:
                t += 1

            z[i] = t
            n_kw[t, w] += 1
            n_dk[d, t] += 1
            n_k[t] += 1

    return n_kw, n_dk


@njit(cache=True)
def infer_sweeps(w_ids, phi, alpha, sweeps, burn_in, seed):
    """Fixed-phi Gibbs over one document; mean of per-sweep theta estimates
    across the post-burn-in window."""
    np.random.seed(seed)
    k = phi.shape[0]
    n = w_ids.shape[0]
    n_dk = np.zeros(k, np.int64)
    z = np.empty(n, np.int32)
    for i in range(n):
        t = np.random.randint(0, k)
        z[i] = t
        n_dk[t] += 1

    cum = np.empty(k, np.float64)
    acc = np.zeros(k, np.float64)
    samples = 0
    for s in range(sweeps):
        for i in range(n):
            w = w_ids[i]
            t = z[i]
            n_dk[t] -= 1
            total = 0.0
            for j in range(k):
                total += phi[j, w] * (n_dk[j] + alpha)
                cum[j] = total
            u = np.random.random() * total
            t = 0
            while t < k - 1 and cum[t] <= u:
                t += 1
            z[i] = t
            n_dk[t] += 1
        if s >= burn_in:
            denom = n + k * alpha
            for j in range(k):
                acc[j] += (n_dk[j] + alpha) / denom
            samples += 1

    theta = np.empty(k, np.float64)
    for j in range(k):
        theta[j] = acc[j] / samples
    return theta
