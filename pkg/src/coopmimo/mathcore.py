"""Small dense Hermitian linear-algebra helpers shared by the whole package.

Matrices here are plain complex numpy arrays, at most 8x8 (per-link antenna
counts), so nothing is blocked or sparse.  Eigenvalues are always returned in
descending order: "largest/smallest eigenvalue" elsewhere in the package means
the first/last entry.
"""

import numpy as np

HERMITIAN_RTOL = 1e-10
RANK_RTOL = 1e-14


def _as_matrix(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a.astype(np.complex128, copy=False)


def check_hermitian(a, rtol=HERMITIAN_RTOL):
    """Return `a` as complex128, raising if it is not Hermitian within rtol."""
    a = _as_matrix(a)
    scale = np.linalg.norm(a)
    err = np.linalg.norm(a - a.conj().T)
    if err > rtol * max(scale, 1.0):
        raise ValueError(
            f"matrix is not Hermitian: asymmetry {err:.3e} exceeds "
            f"{rtol:.0e} * max(||A||, 1)"
        )
    return a


def hermitian_eig(a):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : array_like
        Square Hermitian matrix (checked within a relative Frobenius
        tolerance of 1e-10).

    Returns
    -------
    u : ndarray
        Unitary matrix of eigenvectors (columns).
    sigma : ndarray
        Real eigenvalues sorted descending, matching the columns of `u`.
    """
    a = check_hermitian(a)
    sigma, u = np.linalg.eigh(a)  # ascending; LinAlgError on non-convergence
    return u[:, ::-1], sigma[::-1]


def condition_number(a):
    """Ratio of extreme eigenvalues of a Hermitian PSD matrix.

    Returns ``inf`` when the smallest eigenvalue is at or below
    1e-14 times the largest (numerically rank deficient).
    """
    _, sigma = hermitian_eig(a)
    s_max = sigma[0]
    s_min = abs(sigma[-1])  # tiny negative from roundoff counts as ~0
    if s_min <= RANK_RTOL * s_max:
        return np.inf
    return float(s_max / s_min)


def kron(a, b):
    """Kronecker product (thin wrapper, kept for a stable name)."""
    return np.kron(np.asarray(a), np.asarray(b))


def psd_sqrt(a):
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues that dip slightly negative from roundoff are clipped to zero.
    The principal root keeps B @ B.conj().T == A exactly in exact arithmetic,
    which downstream precoder formulas rely on.
    """
    u, sigma = hermitian_eig(a)
    return (u * np.sqrt(np.clip(sigma, 0.0, None))) @ u.conj().T


def floored_spectrum(sigma, floor_rel=1e-12):
    """Floor a descending eigenvalue vector at floor_rel * max for inversion."""
    sigma = np.asarray(sigma, dtype=float)
    top = float(sigma[0])
    if top <= 0.0:
        raise ValueError("spectrum has no positive eigenvalue to invert")
    return np.maximum(sigma, floor_rel * top)
