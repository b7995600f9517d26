"""Dense symmetric eigenvalue helpers for the small matrices (n <= 8) this
toolkit certifies.

Eigenvalues come from a cyclic Jacobi iteration driven to a 1e-12 relative
off-diagonal norm; positive definiteness can be cross-checked independently
through Cholesky success and through leading principal minors, which use a
separate factorization path.

Exponential weights at large rates produce matrices whose entries approach
the double-precision range, so every routine first rescales its input by an
exact power of two (a lossless mantissa-preserving operation) and scales the
results back; squares and products of entries then stay inside the
representable range.
"""

import math

import numpy as np

JACOBI_TOL = 1e-12
_MAX_SWEEPS = 60


def _pow2_scale(mat) -> float:
    """Exact power-of-two factor comparable to the largest matrix entry."""
    peak = float(np.max(np.abs(mat)))
    if peak == 0.0 or not math.isfinite(peak):
        return 1.0
    return float(2.0 ** math.floor(math.log2(peak)))


def jacobi_eigenvalues(mat, tol=JACOBI_TOL):
    """Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi sweeps.

    Convergence is declared when the off-diagonal Frobenius norm drops below
    ``tol`` times the full Frobenius norm (absolute below ``tol`` for
    near-zero matrices).
    """
    a = np.array(mat, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 1:
        return a[0, 0:1].copy()
    scale = _pow2_scale(a)
    a /= scale
    for _ in range(_MAX_SWEEPS):
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off2 += 2.0 * a[p, q] * a[p, q]
        norm = max(math.sqrt(off2 + float(np.sum(np.diag(a) ** 2))), 1e-300)
        if math.sqrt(off2) <= tol * max(norm, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q in place, keeping symmetry
                app, aqq = a[p, p], a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp, arq = a[r, p], a[r, q]
                    a[r, p] = c * arp - s * arq
                    a[p, r] = a[r, p]
                    a[r, q] = c * arq + s * arp
                    a[q, r] = a[r, q]
    return np.sort(np.diag(a).copy()) * scale


def min_eigenvalue(mat) -> float:
    return float(jacobi_eigenvalues(mat)[0])


def cholesky_spd(mat) -> bool:
    """Positive definiteness via Cholesky success; the independent check."""
    a = np.asarray(mat, dtype=float)
    try:
        np.linalg.cholesky(a / _pow2_scale(a))
        return True
    except np.linalg.LinAlgError:
        return False


def leading_principal_minors(mat) -> np.ndarray:
    """Determinants of the top-left k-by-k blocks, k = 1..n.

    Computed on the power-of-two rescaled matrix and scaled back; a minor
    whose true value exceeds double range is reported as a signed infinity,
    preserving the sign pattern the cross-checks rely on.
    """
    a = np.asarray(mat, dtype=float)
    n = a.shape[0]
    scale_exp = int(math.log2(_pow2_scale(a)))
    scaled = a / (2.0**scale_exp)
    out = np.empty(n)
    with np.errstate(over="ignore"):
        for k in range(1, n + 1):
            det = float(np.linalg.det(scaled[:k, :k]))
            out[k - 1] = np.ldexp(det, k * scale_exp)
    return out


def pencil_min_eigenvalue(m, a) -> float:
    """Smallest generalized eigenvalue of the pencil (m, a), a positive definite.

    Computed as the smallest eigenvalue of ``L^-1 m L^-T`` for the Cholesky
    factor ``a = L L^T``, after exact power-of-two rescaling of ``m``.
    """
    a = np.asarray(a, dtype=float)
    m = np.asarray(m, dtype=float)
    scale = _pow2_scale(m)
    chol = np.linalg.cholesky(a)
    y = np.linalg.solve(chol, m / scale)
    c = np.linalg.solve(chol, y.T).T
    c = 0.5 * (c + c.T)
    return float(jacobi_eigenvalues(c)[0]) * scale


def row_norms(rows) -> np.ndarray:
    """Euclidean norms of the rows of an (m, n) array, overflow-safe."""
    rows = np.asarray(rows, dtype=float)
    peak = np.max(np.abs(rows), axis=1)
    safe = np.where(peak > 0.0, peak, 1.0)
    scaled = rows / safe[:, None]
    return safe * np.sqrt(np.sum(scaled * scaled, axis=1))
