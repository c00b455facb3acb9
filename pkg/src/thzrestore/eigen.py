"""Symmetric eigendecomposition by parallel-ordered cyclic Jacobi rotations.

Each sweep visits every (p, q) pair once.  Pairs are grouped into n-1
rounds of disjoint pairs (round-robin tournament ordering), so all rotations
of a round commute and are applied together with vectorised row/column
updates.
"""
import numpy as np


BIG_THETA = 1e150


class EigenConvergenceError(RuntimeError):
    pass


def _round_robin(n):
    """Rounds of disjoint index pairs covering all pairs of range(n)."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0]
        if pairs:
            rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def off_diagonal_norm(a):
    # summed directly: subtracting the diagonal from the full norm cancels badly
    off = a[~np.eye(a.shape[0], dtype=bool)]
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(matrix, tol=1e-12, max_sweeps=100):
    """Eigenvalues (unsorted) and orthonormal eigenvectors (columns) of a
    symmetric matrix.  Stops once the off-diagonal Frobenius norm is below
    ``tol`` times the Frobenius norm of the input."""
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=1e-12, atol=0):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0:
        return np.diag(a).copy(), v
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        if off_diagonal_norm(a) <= tol * scale:
            return np.diag(a).copy(), v
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0
            if not np.any(active):
                continue
            app = a[p, p]
            aqq = a[q, q]
            with np.errstate(over="ignore", divide="ignore"):
                theta = np.where(active, (aqq - app) / (2.0 * np.where(active, apq, 1.0)), 0.0)
            # for huge theta, t -> 1 / (2 theta) and theta**2 would overflow
            big = np.abs(theta) > BIG_THETA
            root = np.sqrt(np.where(big, 0.0, theta * theta) + 1.0)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.sign(theta) / (np.abs(theta) + root))
            t = np.where(active, t, 0.0)
            t = np.where(active & (theta == 0), 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # rows p, q
            rp = a[p, :].copy()
            rq = a[q, :].copy()
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            # columns p, q
            cp = a[:, p].copy()
            cq = a[:, q].copy()
            a[:, p] = cp * c - cq * s
            a[:, q] = cp * s + cq * c
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp = v[:, p].copy()
            vq = v[:, q].copy()
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    if off_diagonal_norm(a) <= tol * scale:
        return np.diag(a).copy(), v
    raise EigenConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
