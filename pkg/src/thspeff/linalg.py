"""Dense symmetric eigensolver.

Householder reduction to tridiagonal form followed by the implicit-shift QL
iteration. Both stages are compiled with numba; the matrices met here are at
most a few hundred rows, where this is competitive with LAPACK and keeps the
spectral code free of a hidden dependency on which driver numpy was built
against.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .errors import EigenSolverError

MAX_SWEEPS_PER_EIGENVALUE = 30


@numba.njit(cache=True)
def _tridiagonalize(A, Q):
    # In place: A <- Q^T A Q is tridiagonal, Q accumulates the reflectors.
    n = A.shape[0]
    v = np.empty(n)
    for k in range(n - 2):
        m = k + 1
        scale = 0.0
        for i in range(m, n):
            scale += abs(A[i, k])
        if scale == 0.0:
            continue
        norm2 = 0.0
        for i in range(m, n):
            v[i] = A[i, k] / scale
            norm2 += v[i] * v[i]
        tail = norm2 - v[m] * v[m]
        if tail == 0.0:
            continue
        alpha = -math.copysign(math.sqrt(norm2), v[m])
        v[m] -= alpha
        vnorm2 = tail + v[m] * v[m]
        inv = 1.0 / math.sqrt(vnorm2)
        for i in range(m, n):
            v[i] *= inv
        # A <- H A H with H = I - 2 v v^T acting on rows/cols m..n-1
        for j in range(n):
            s = 0.0
            for i in range(m, n):
                s += v[i] * A[i, j]
            s *= 2.0
            for i in range(m, n):
                A[i, j] -= s * v[i]
        for i in range(n):
            s = 0.0
            for j in range(m, n):
                s += A[i, j] * v[j]
            s *= 2.0
            for j in range(m, n):
                A[i, j] -= s * v[j]
        for i in range(n):
            s = 0.0
            for j in range(m, n):
                s += Q[i, j] * v[j]
            s *= 2.0
            for j in range(m, n):
                Q[i, j] -= s * v[j]


@numba.njit(cache=True)
def _tql(d, e, Z, want_vectors, max_sweeps):
    # d: diagonal, e[i]: coupling between i and i+1 (e[n-1] unused).
    # Returns 0 on success, otherwise 1 + index of the stuck eigenvalue.
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if sweeps == max_sweeps:
                return l + 1
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    for k in range(Z.shape[0]):
                        f = Z[k, i + 1]
                        Z[k, i + 1] = s * Z[k, i] + c * f
                        Z[k, i] = c * Z[k, i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def symmetric_eigh(A, vectors: bool = False):
    """Eigenvalues (ascending) and optionally eigenvectors of a symmetric matrix.

    Raises :class:`EigenSolverError` if the QL iteration fails to deflate an
    eigenvalue within ``MAX_SWEEPS_PER_EIGENVALUE`` sweeps.
    """
    A = np.array(A, dtype=np.float64, order="C")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    n = A.shape[0]
    if n == 0:
        return (np.empty(0), np.empty((0, 0))) if vectors else np.empty(0)
    if not np.all(np.isfinite(A)):
        raise EigenSolverError("matrix has non-finite entries")
    A = 0.5 * (A + A.T)
    Q = np.eye(n)
    _tridiagonalize(A, Q)
    d = np.diag(A).copy()
    e = np.zeros(n)
    e[: n - 1] = np.diag(A, -1)
    Z = Q if vectors else np.empty((0, 0))
    status = _tql(d, e, Z, vectors, MAX_SWEEPS_PER_EIGENVALUE)
    if status:
        raise EigenSolverError(
            f"QL iteration did not converge for eigenvalue {status - 1} "
            f"after {MAX_SWEEPS_PER_EIGENVALUE} sweeps"
        )
    order = np.argsort(d, kind="stable")
    if vectors:
        return d[order], Z[:, order]
    return d[order]


def symmetric_eigvalsh(A):
    return symmetric_eigh(A, vectors=False)
