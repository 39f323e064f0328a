"""Operator norms of truncated matrices, with certifying singular pairs.

The workhorse is power iteration on the normal operator A^H A from the
fixed all-ones start.  Each iterate carries a residual certificate
||A^H u - sigma v||; an Aitken extrapolation of the Rayleigh quotient
handles near-degenerate leading pairs, where the value converges long
before the vectors settle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .core import Sequence
from .operator import HelsonMatrix, apply, assemble, symbol_value, truncation_indices

SVD_DENSE_CAP = 512
NORM_MAX_ITER = 50000

# residual slack accepted when the Aitken gap says the value has
# converged but a near-degenerate pair keeps the vectors wandering
_DEGENERATE_RESIDUAL = 1e-6


@dataclass
class SpectralReport:
    """Largest singular value with its certifying pair."""

    norm: float
    leading_pair: tuple
    iterations: int
    residual: float

    def to_json(self):
        return {
            "value": self.norm,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _as_dense(matrix):
    if isinstance(matrix, HelsonMatrix):
        return matrix.entries
    arr = np.asarray(matrix, dtype=np.complex128)
    if arr.ndim != 2:
        raise DomainError(f"matrix must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix entries must be finite")
    return arr


def _power_pair(matvec, rmatvec, dim, tol, max_iter):
    """Leading singular triple of the operator behind matvec/rmatvec.

    Returns (sigma, u, v, iterations, residual, converged).  Stops when
    the certificate residual ||A^H u - sigma v|| drops below tol*sigma,
    or when three consecutive Aitken gap estimates of the Rayleigh
    quotient sit below tol^2*lambda while the residual is merely small
    (near-degenerate leading pair; the value is then converged even
    though the vectors are not).
    """
    v = np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)
    basis_tried = 0
    lam_prev2 = lam_prev = None
    aitken_hits = 0
    sigma = 0.0
    u = v.copy()
    residual = 0.0
    for it in range(1, max_iter + 1):
        w = matvec(v)
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            # start vector in the kernel; walk the standard basis
            if basis_tried >= dim:
                u = np.zeros(dim, dtype=np.complex128)
                u[0] = 1.0
                return 0.0, u, u.copy(), it, 0.0, True
            v = np.zeros(dim, dtype=np.complex128)
            v[basis_tried] = 1.0
            basis_tried += 1
            continue
        u = w / sigma
        z = rmatvec(u)
        residual = float(np.linalg.norm(z - sigma * v))
        if residual <= tol * sigma:
            return sigma, u, v, it, residual, True
        lam = sigma * sigma
        if lam_prev2 is not None:
            # Rayleigh quotients of A^H A are nondecreasing up to roundoff;
            # the Aitken gap estimates how much of lambda is still to come
            noise = 1e-15 * lam
            d1 = lam - lam_prev
            d0 = lam_prev - lam_prev2
            if d1 >= -noise and d0 >= d1 - noise:
                d1 = max(d1, 0.0)
                d0 = max(d0, d1)
                gap = 0.0 if d1 == 0.0 else (
                    d1 * d1 / (d0 - d1) if d0 > d1 else np.inf
                )
                # certified bound on the value error, with a roundoff floor
                value_err = gap / (2.0 * sigma) + 1e-15 * sigma
                if value_err <= 0.5 * tol * sigma:
                    aitken_hits += 1
                    if aitken_hits >= 3 and residual <= _DEGENERATE_RESIDUAL * sigma:
                        return sigma, u, v, it, value_err, True
                else:
                    aitken_hits = 0
            else:
                aitken_hits = 0
        lam_prev2, lam_prev = lam_prev, lam
        nz = np.linalg.norm(z)
        if nz == 0.0:
            # u - v pair is exact up to roundoff
            return sigma, u, v, it, residual, True
        v = z / nz
    return sigma, u, v, max_iter, residual, False


def operator_norm(matrix, tol=1e-10, max_iter=NORM_MAX_ITER):
    """Largest singular value of a dense matrix, with certificate.

    Deterministic: fixed all-ones start.  Raises ConvergenceError with
    the best estimate attached when the iteration cap is hit.
    """
    if not (0.0 < tol <= 1e-4):
        raise DomainError(f"tolerance must lie in (0, 1e-4], got {tol}")
    arr = _as_dense(matrix)
    dim = arr.shape[0]
    if dim == 0 or not arr.any():
        e0 = np.zeros(max(dim, 1), dtype=np.complex128)
        e0[0] = 1.0
        return SpectralReport(0.0, (e0, e0.copy()), 0, 0.0)
    ah = arr.conj().T
    sigma, u, v, its, res, ok = _power_pair(
        lambda x: arr @ x, lambda x: ah @ x, dim, tol, max_iter
    )
    report = SpectralReport(sigma, (u, v), its, res)
    if not ok:
        raise ConvergenceError(
            f"operator norm did not certify within {max_iter} iterations "
            f"(residual {res:.3e})",
            best=report,
            iterations=its,
        )
    return report


def operator_norm_symbol(symbol, n_max, prime_budget=None, tol=1e-10,
                         max_iter=NORM_MAX_ITER):
    """Matrix-free operator norm via apply(); usable beyond the dense cap."""
    if not (0.0 < tol <= 1e-4):
        raise DomainError(f"tolerance must lie in (0, 1e-4], got {tol}")
    indices = truncation_indices(n_max, prime_budget)
    dim = len(indices)
    idx = np.asarray(indices, dtype=np.int64)

    def entry_row(i):
        return np.fromiter(
            (symbol_value(symbol, int(p)) for p in idx[i] * idx),
            dtype=np.complex128,
            count=dim,
        )

    def matvec(x):
        return np.array([entry_row(i) @ x for i in range(dim)])

    def rmatvec(x):
        # rows of A^H are conjugated rows of A by symmetry of M(alpha)
        return np.array([np.conj(entry_row(i)) @ x for i in range(dim)])

    sigma, u, v, its, res, ok = _power_pair(matvec, rmatvec, dim, tol, max_iter)
    report = SpectralReport(sigma, (u, v), its, res)
    if not ok:
        raise ConvergenceError(
            f"matrix-free norm did not certify within {max_iter} iterations",
            best=report,
            iterations=its,
        )
    return report


def singular_values(matrix, dense_cap=SVD_DENSE_CAP):
    """All singular values, descending; dense LAPACK route below the cap."""
    arr = _as_dense(matrix)
    if arr.shape[0] > dense_cap:
        raise DomainError(
            f"singular_values capped at {dense_cap} rows, got {arr.shape[0]}"
        )
    return np.linalg.svd(arr, compute_uv=False)


@dataclass
class LowerBoundCheck:
    """op_norm >= l2_norm witness record for the contractive inclusion."""

    op_norm: float
    l2_norm: float
    ok: bool


def l2_lower_bound_check(symbol, n_max, prime_budget=None, tol=1e-10):
    """Check ||M_N(alpha)|| >= ||alpha restricted to the window||.

    The witness pair is a = conj(alpha)/||alpha|| on the window and
    b = e_1: the form then evaluates to the restricted l2 norm.
    """
    indices = truncation_indices(n_max, prime_budget)
    alpha = Sequence({n: symbol_value(symbol, n) for n in indices})
    l2 = alpha.norm()
    report = operator_norm(assemble(symbol, n_max, prime_budget), tol=tol)
    return LowerBoundCheck(
        op_norm=report.norm,
        l2_norm=l2,
        ok=report.norm >= l2 - 1e-9,
    )
