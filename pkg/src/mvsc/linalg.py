"""Dense matrix primitives used by the solver.

All functions are pure: they never mutate their arguments and hold no
state, so concurrent calls are safe. Matrices are float64 ndarrays;
callers own the layout.
"""

import logging

import numpy as np
import scipy.linalg

from .errors import DecompositionError, NumericalError, ValidationError

logger = logging.getLogger(__name__)

# Singular values below this fraction of the largest are treated as zero
# in rank-sensitive outputs.
RANK_TOL = 1e-12


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return M


def soft_threshold(x, eps):
    """Scalar shrinkage sign(x) * max(|x| - eps, 0); broadcasts over arrays."""
    if eps < 0:
        raise ValidationError(f"threshold must be nonnegative, got {eps}")
    return np.sign(x) * np.maximum(np.abs(x) - eps, 0.0)


def _svd(M):
    """Thin SVD with a gesvd fallback; raises NumericalError if both fail."""
    try:
        return np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as first:
        try:
            return scipy.linalg.svd(M, full_matrices=False, lapack_driver="gesvd")
        except Exception as second:
            raise NumericalError(
                f"SVD failed to converge on {M.shape} matrix "
                f"(gesdd: {first}; gesvd: {second})"
            ) from second


def svt(M, tau):
    """Singular value thresholding: prox of tau * nuclear norm at M.

    Returns U diag(max(s - tau, 0)) Vt, the unique minimizer of
    tau*||Q||_* + 0.5*||Q - M||_F^2.
    """
    M = _as_matrix(M)
    if tau <= 0:
        raise ValidationError(f"svt threshold must be positive, got {tau}")
    U, s, Vt = _svd(M)
    s = np.maximum(s - tau, 0.0)
    keep = s > 0
    if not keep.any():
        return np.zeros_like(M)
    return (U[:, keep] * s[keep]) @ Vt[keep, :]


def prox_l21(T, kappa):
    """Column-wise shrinkage: prox of kappa * l2,1 norm at T.

    Columns with norm <= kappa are zeroed; the rest are scaled by
    (norm - kappa) / norm.
    """
    T = _as_matrix(T)
    if kappa <= 0:
        raise ValidationError(f"prox_l21 threshold must be positive, got {kappa}")
    norms = np.linalg.norm(T, axis=0)
    scale = np.zeros_like(norms)
    nz = norms > kappa
    scale[nz] = (norms[nz] - kappa) / norms[nz]
    return T * scale


def nuclear_norm(M):
    """Sum of singular values."""
    M = _as_matrix(M)
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError:
        _, s, _ = _svd(M)
    return float(s.sum())


def l21_norm(M):
    """Sum of column Euclidean norms."""
    M = _as_matrix(M)
    return float(np.linalg.norm(M, axis=0).sum())


def inf_norm(M):
    """Max absolute entry (the stopping-criterion norm)."""
    return float(np.max(np.abs(M))) if np.asarray(M).size else 0.0


def solve_spd(A, B):
    """Solve A X = B for symmetric positive definite A via Cholesky.

    A must be symmetric within 1e-8 relative tolerance. If the first
    factorization fails, retries once with diagonal jitter
    1e-10 * trace(A)/n (finite arithmetic can make a PSD-by-construction
    matrix slightly indefinite); a second failure raises.
    """
    A = _as_matrix(A, "A")
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValidationError(f"A must be square, got {A.shape}")
    if B.shape[0] != n:
        raise ValidationError(f"B has {B.shape[0]} rows, expected {n}")
    asym = np.abs(A - A.T).max()
    if asym > 1e-8 * max(1.0, np.abs(A).max()):
        raise ValidationError(f"A is not symmetric (max asymmetry {asym:.3e})")
    try:
        c, low = scipy.linalg.cho_factor(A, lower=True)
    except scipy.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(A) / n
        logger.warning(
            "Cholesky failed; retrying with diagonal jitter %.3e", jitter
        )
        try:
            c, low = scipy.linalg.cho_factor(A + jitter * np.eye(n), lower=True)
        except scipy.linalg.LinAlgError as err:
            raise DecompositionError(
                f"matrix of size {n} is not positive definite "
                f"(jitter {jitter:.3e} did not help)"
            ) from err
    return scipy.linalg.cho_solve((c, low), B)
