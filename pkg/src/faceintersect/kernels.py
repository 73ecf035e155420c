"""Hot inner loops, each with a numba and a numpy implementation.

The public functions dispatch to the jitted version when numba is live (see
:mod:`faceintersect._accel`) and fall back to numpy otherwise.  Both versions
are kept numerically equivalent; ``tests/test_kernels.py`` checks that.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit

__all__ = [
    "project_simplex_rows",
    "simplex_lstsq_rows",
    "residual_norms",
    "lemma1_regions",
    "HAVE_NUMBA",
]


# ---------------------------------------------------------------------------
# Euclidean projection of each row onto the probability simplex
# ---------------------------------------------------------------------------

def _project_simplex_rows_np(Y):
    n, k = Y.shape
    U = -np.sort(-Y, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, k + 1)
    cond = U - css / ind > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(n), rho] / (rho + 1)
    return np.maximum(Y - theta[:, None], 0.0)


@njit(cache=True)
def _project_simplex_row_nb(y, out):
    k = y.shape[0]
    u = np.sort(y)[::-1]
    css = 0.0
    theta = 0.0
    for j in range(k):
        css += u[j]
        t = (css - 1.0) / (j + 1)
        if u[j] - t > 0:
            theta = t
    for j in range(k):
        v = y[j] - theta
        out[j] = v if v > 0 else 0.0


@njit(cache=True)
def _project_simplex_rows_nb(Y):
    n, k = Y.shape
    out = np.empty((n, k))
    for i in range(n):
        _project_simplex_row_nb(Y[i], out[i])
    return out


def project_simplex_rows(Y):
    """Project every row of ``Y`` onto ``{x >= 0, sum(x) = 1}``."""
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        return project_simplex_rows(Y[None, :])[0]
    if HAVE_NUMBA:
        return _project_simplex_rows_nb(Y)
    return _project_simplex_rows_np(Y)


# ---------------------------------------------------------------------------
# Simplex-constrained least squares, one problem per row
#   minimise 0.5 a^T G a - h^T a   subject to a in the probability simplex
# with G = W W^T and h = W x.  Accelerated projected gradient followed by an
# exact KKT polish on the detected support.
# ---------------------------------------------------------------------------

POLISH_EVERY = 16


def _polish_np(G, h, a, tol):
    """Exact solution on the support of ``a`` if it satisfies KKT, else ``None``."""
    k = a.shape[0]
    S = a > tol
    s = int(S.sum())
    if s == 0:
        return None
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = G[np.ix_(S, S)]
    K[:s, s] = 1.0
    K[s, :s] = 1.0
    rhs = np.concatenate([h[S], [1.0]])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    aS = sol[:s]
    if np.any(aS < 0):
        return None
    # on the support the gradient equals lam = -nu (nu solves the sum = 1 row)
    lam = -sol[s]
    cand = np.zeros(k)
    cand[S] = aS
    grad = G @ cand - h
    # KKT: no coordinate off the support may have a smaller gradient
    if np.all(grad[~S] - lam >= -1e-10 * (1.0 + np.abs(grad).max())):
        return cand
    return None


def _simplex_lstsq_rows_np(G, H, max_iter, tol):
    n, k = H.shape
    L = max(float(np.linalg.eigvalsh(G)[-1]), 1e-300)
    step = 1.0 / L
    A = np.full((n, k), 1.0 / k)
    Z = A.copy()
    t = np.ones(n)
    out = np.empty((n, k))
    todo = np.arange(n)
    for it in range(max_iter):
        if todo.size == 0:
            break
        Ak, Zk, tk = A[todo], Z[todo], t[todo]
        grad = Zk @ G - H[todo]
        A_new = _project_simplex_rows_np(Zk - step * grad)
        delta = np.abs(A_new - Ak).max(axis=1)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        Zk = A_new + ((tk - 1.0) / t_new)[:, None] * (A_new - Ak)
        # gradient-based restart keeps the iteration monotone in practice
        restart = np.einsum("ij,ij->i", Zk - A_new, A_new - Ak) > 0
        Zk[restart] = A_new[restart]
        A[todo], Z[todo], t[todo] = A_new, Zk, t_new
        finished = delta <= tol
        check = it % POLISH_EVERY == POLISH_EVERY - 1
        keep = np.ones(todo.size, dtype=bool)
        for p, i in enumerate(todo):
            if finished[p] or check:
                cand = _polish_np(G, H[i], A[i], 1e-12)
                if cand is not None:
                    out[i] = cand
                    keep[p] = False
                elif finished[p]:
                    out[i] = A[i]
                    keep[p] = False
        todo = todo[keep]
    for i in todo:
        cand = _polish_np(G, H[i], A[i], 1e-12)
        out[i] = A[i] if cand is None else cand
    return out


@njit(cache=True)
def _project_simplex_inplace_nb(y, buf, out):
    # sort a copy in descending order (k is small: insertion sort, no allocation)
    k = y.shape[0]
    for j in range(k):
        v = y[j]
        p = j
        while p > 0 and buf[p - 1] < v:
            buf[p] = buf[p - 1]
            p -= 1
        buf[p] = v
    css = 0.0
    theta = 0.0
    for j in range(k):
        css += buf[j]
        t = (css - 1.0) / (j + 1)
        if buf[j] - t > 0:
            theta = t
    for j in range(k):
        v = y[j] - theta
        out[j] = v if v > 0 else 0.0


@njit(cache=True)
def _polish_row_nb(G, h, a, out_row, K, rhs, idx, cand):
    k = a.shape[0]
    s = 0
    for j in range(k):
        if a[j] > 1e-12:
            idx[s] = j
            s += 1
    if s == 0:
        return False
    Ks = K[: s + 1, : s + 1]
    rs = rhs[: s + 1]
    for p in range(s):
        for q in range(s):
            Ks[p, q] = G[idx[p], idx[q]]
        Ks[p, s] = 1.0
        Ks[s, p] = 1.0
        rs[p] = h[idx[p]]
    Ks[s, s] = 0.0
    rs[s] = 1.0
    if abs(np.linalg.det(Ks)) <= 1e-300:
        return False
    sol = np.linalg.solve(Ks, rs)
    for p in range(s):
        if sol[p] < 0:
            return False
    lam = -sol[s]
    for j in range(k):
        cand[j] = 0.0
    for p in range(s):
        cand[idx[p]] = sol[p]
    gmax = 0.0
    for j in range(k):
        g = -h[j]
        for q in range(k):
            g += G[j, q] * cand[q]
        if abs(g) > gmax:
            gmax = abs(g)
    for j in range(k):
        if cand[j] == 0.0:
            g = -h[j]
            for q in range(k):
                g += G[j, q] * cand[q]
            if g - lam < -1e-10 * (1.0 + gmax):
                return False
    for j in range(k):
        out_row[j] = cand[j]
    return True


@njit(cache=True)
def _simplex_lstsq_rows_nb(G, H, max_iter, tol):
    n, k = H.shape
    L = max(np.linalg.eigvalsh(G)[-1], 1e-300)
    step = 1.0 / L
    out = np.empty((n, k))
    a = np.empty(k)
    z = np.empty(k)
    y = np.empty(k)
    buf = np.empty(k)
    a_new = np.empty(k)
    K = np.zeros((k + 1, k + 1))
    rhs = np.zeros(k + 1)
    idx = np.empty(k, dtype=np.int64)
    cand = np.empty(k)
    for i in range(n):
        h = H[i]
        for j in range(k):
            a[j] = 1.0 / k
            z[j] = 1.0 / k
        t = 1.0
        done = False
        for it in range(max_iter):
            for j in range(k):
                g = -h[j]
                for q in range(k):
                    g += G[j, q] * z[q]
                y[j] = z[j] - step * g
            _project_simplex_inplace_nb(y, buf, a_new)
            delta = 0.0
            for j in range(k):
                d = abs(a_new[j] - a[j])
                if d > delta:
                    delta = d
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            mom = (t - 1.0) / t_new
            dot = 0.0
            for j in range(k):
                zj = a_new[j] + mom * (a_new[j] - a[j])
                dot += (zj - a_new[j]) * (a_new[j] - a[j])
                z[j] = zj
            if dot > 0:
                for j in range(k):
                    z[j] = a_new[j]
            for j in range(k):
                a[j] = a_new[j]
            t = t_new
            if delta <= tol or it % 16 == 15:
                if _polish_row_nb(G, h, a, out[i], K, rhs, idx, cand):
                    done = True
                    break
                if delta <= tol:
                    break
        if not done and not _polish_row_nb(G, h, a, out[i], K, rhs, idx, cand):
            for j in range(k):
                out[i, j] = a[j]
    return out


def simplex_lstsq_rows(X, W, max_iter=20000, tol=1e-13):
    """Solve ``min ||x_i - a W||`` over the probability simplex for every row.

    Parameters
    ----------
    X : (n, m) array
        Rows to be explained.
    W : (k, m) array
        Dictionary rows.
    max_iter, tol :
        Budget and sup-norm step tolerance of the accelerated gradient phase.

    Returns
    -------
    (n, k) array of row-stochastic weights.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    G = np.ascontiguousarray(W @ W.T)
    H = np.ascontiguousarray(X @ W.T)
    if HAVE_NUMBA:
        return _simplex_lstsq_rows_nb(G, H, int(max_iter), float(tol))
    return _simplex_lstsq_rows_np(G, H, int(max_iter), float(tol))


# ---------------------------------------------------------------------------
# Distance of every row to a subspace (near-point counting)
# ---------------------------------------------------------------------------

def _residual_norms_np(X, Q):
    if Q.shape[1] == 0:
        return np.sqrt(np.einsum("ij,ij->i", X, X))
    C = X @ Q
    sq = np.einsum("ij,ij->i", X, X) - np.einsum("ij,ij->i", C, C)
    # the subtraction form loses accuracy for points lying in Q, recompute those
    small = sq < 1e-6 * np.einsum("ij,ij->i", X, X)
    if small.any():
        R = X[small] - C[small] @ Q.T
        sq[small] = np.einsum("ij,ij->i", R, R)
    return np.sqrt(np.maximum(sq, 0.0))


@njit(cache=True)
def _residual_norms_nb(X, Q):
    n, m = X.shape
    d = Q.shape[1]
    out = np.empty(n)
    c = np.empty(d)
    for i in range(n):
        for k in range(d):
            s = 0.0
            for j in range(m):
                s += X[i, j] * Q[j, k]
            c[k] = s
        acc = 0.0
        for j in range(m):
            p = 0.0
            for k in range(d):
                p += Q[j, k] * c[k]
            r = X[i, j] - p
            acc += r * r
        out[i] = np.sqrt(acc)
    return out


def residual_norms(X, Q):
    """Return ``||x_i - Q Q^T x_i||`` for every row ``x_i`` of ``X``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    if HAVE_NUMBA:
        return _residual_norms_nb(X, Q)
    return _residual_norms_np(X, Q)


# ---------------------------------------------------------------------------
# Region membership used by the simplex-centre Monte Carlo
# ---------------------------------------------------------------------------

def _lemma1_regions_np(P):
    n, d = P.shape
    lab = np.full(n, -1, dtype=np.int64)
    lab[np.all(P >= 1.0 / (2 * d), axis=1)] = 0
    hi = P >= 1.0 - 1.0 / (4 * d)
    has = hi.any(axis=1)
    lab[has] = np.argmax(hi[has], axis=1) + 1
    return lab


@njit(cache=True)
def _lemma1_regions_nb(P):
    n, d = P.shape
    lab = np.full(n, -1, dtype=np.int64)
    lo = 1.0 / (2 * d)
    hi = 1.0 - 1.0 / (4 * d)
    for i in range(n):
        inner = True
        for j in range(d):
            if P[i, j] < lo:
                inner = False
        if inner:
            lab[i] = 0
        for j in range(d):
            if P[i, j] >= hi:
                lab[i] = j + 1
                break
    return lab


def lemma1_regions(P):
    """Label points of the standard simplex by region.

    Label 0 means every coordinate is at least ``1/(2d)``; label ``j`` (1-based)
    means coordinate ``j-1`` is at least ``1 - 1/(4d)``; -1 means neither.  The
    regions are disjoint for ``d >= 2``.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    if HAVE_NUMBA:
        return _lemma1_regions_nb(P)
    return _lemma1_regions_np(P)
