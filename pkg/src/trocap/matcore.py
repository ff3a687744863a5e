"""Dense complex-matrix kernels.

Everything downstream funnels through this module: Hermitian
eigendecomposition, support-restricted matrix functions, Schatten and
normalized p-norms, Kronecker products with a fixed row-major index
convention, and partial traces.  All logarithms are base 2.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import BadExponent, DimMismatch, NotHermitian, NotPSD

# Relative support cutoff: eigenvalues below SUPPORT_CUTOFF * lambda_max are
# treated as zero by matrix functions and pseudo-inverse powers.
SUPPORT_CUTOFF = 1e-10

HERMITIAN_TOL = 1e-12


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def asmatrix(a) -> np.ndarray:
    """Coerce to a 2-d complex ndarray."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimMismatch(f"expected a matrix, got ndim={m.ndim}")
    return m


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """True when max |A - A*| <= tol * (1 + max |A|)."""
    a = asmatrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + float(np.max(np.abs(a))) if a.size else 1.0
    return float(np.max(np.abs(a - dagger(a)))) <= tol * scale


def hermitize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A*) / 2; removes round-off asymmetry."""
    return (a + dagger(a)) / 2.0


class HermEig(NamedTuple):
    """Spectral decomposition with eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def herm_eig(a: np.ndarray, tol: float = HERMITIAN_TOL) -> HermEig:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized before LAPACK sees it, so identical input
    bits give identical output.  Raises NotHermitian when the asymmetry
    exceeds ``tol * (1 + max|A|)``.
    """
    a = asmatrix(a)
    if not is_hermitian(a, tol):
        dev = float(np.max(np.abs(a - dagger(a))))
        raise NotHermitian(f"matrix deviates from its adjoint by {dev:.3e}")
    w, v = np.linalg.eigh(hermitize(a))
    return HermEig(w, v)


def _support_mask(w: np.ndarray) -> np.ndarray:
    lam_max = float(np.max(w)) if w.size else 0.0
    return w > SUPPORT_CUTOFF * max(lam_max, 0.0)


def _check_psd(w: np.ndarray) -> None:
    lam_max = float(np.max(w)) if w.size else 0.0
    if w.size and float(np.min(w)) < -1e-10 * max(1.0, lam_max):
        raise NotPSD(f"eigenvalue {float(np.min(w)):.3e} is significantly negative")


def matrix_power(a: np.ndarray, alpha: float) -> np.ndarray:
    """Support-restricted power of a PSD matrix.

    Eigenvalues below the support cutoff map to zero, so negative
    exponents act as pseudo-inverse powers.
    """
    if not np.isfinite(alpha):
        raise BadExponent(f"exponent must be finite, got {alpha}")
    w, v = herm_eig(a)
    _check_psd(w)
    mask = _support_mask(w)
    fw = np.zeros_like(w)
    fw[mask] = w[mask] ** alpha
    return (v * fw) @ dagger(v)


def matrix_log2(a: np.ndarray) -> np.ndarray:
    """Support-restricted base-2 logarithm of a PSD matrix."""
    w, v = herm_eig(a)
    _check_psd(w)
    mask = _support_mask(w)
    fw = np.zeros_like(w)
    fw[mask] = np.log2(w[mask])
    return (v * fw) @ dagger(v)


def support_projector(a: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the support of a PSD matrix."""
    w, v = herm_eig(a)
    _check_psd(w)
    mask = _support_mask(w)
    return (v * mask.astype(float)) @ dagger(v)


def schatten_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm (sum of singular values to the p, to the 1/p).

    ``p = inf`` returns the operator norm.
    """
    a = np.asarray(a, dtype=complex)
    if not (p >= 1.0):
        raise BadExponent(f"Schatten exponent must satisfy p >= 1, got {p}")
    s = np.linalg.svd(a, compute_uv=False)
    if np.isinf(p):
        return float(np.max(s)) if s.size else 0.0
    if p == 1.0:
        return float(np.sum(s))
    if p == 2.0:
        return float(np.sqrt(np.sum(s**2)))
    return float(np.sum(s**p) ** (1.0 / p))


def normalized_p_norm(f: np.ndarray, p: float) -> float:
    """p-norm with respect to the normalized trace: (tr|f|^p / dim)^(1/p).

    ``p = inf`` coincides with the operator norm.
    """
    f = asmatrix(f)
    if f.shape[0] != f.shape[1]:
        raise DimMismatch("normalized trace needs a square matrix")
    if not (p >= 1.0):
        raise BadExponent(f"exponent must satisfy p >= 1, got {p}")
    if np.isinf(p):
        return schatten_norm(f, np.inf)
    d = f.shape[0]
    s = np.linalg.svd(f, compute_uv=False)
    return float((np.sum(s**p) / d) ** (1.0 / p))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the row-major convention (i, j) -> i*|B| + j."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m: np.ndarray, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Trace out one tensor factor of an operator on H_A (x) H_B.

    ``keep`` is "A" or "B".  The row-major Kronecker convention of
    :func:`tensor` is assumed.
    """
    m = asmatrix(m)
    da, db = dims
    if m.shape != (da * db, da * db):
        raise DimMismatch(f"matrix shape {m.shape} does not match dims {dims}")
    t = m.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijik->jk", t)
    raise DimMismatch(f"keep must be 'A' or 'B', got {keep!r}")


def permute_systems(m: np.ndarray, dims: tuple[int, ...], perm: tuple[int, ...]) -> np.ndarray:
    """Reorder tensor factors of an operator on H_1 (x) ... (x) H_k.

    ``perm[i]`` names the old factor that lands at new position ``i``.
    """
    m = asmatrix(m)
    k = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimMismatch(f"matrix shape {m.shape} does not match dims {dims}")
    if sorted(perm) != list(range(k)):
        raise DimMismatch(f"perm {perm} is not a permutation of 0..{k - 1}")
    t = m.reshape(dims + dims)
    axes = tuple(perm) + tuple(p + k for p in perm)
    new_dims = tuple(dims[p] for p in perm)
    return t.transpose(axes).reshape(int(np.prod(new_dims)), -1)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(A* B)."""
    return complex(np.sum(a.conj() * b))


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


# ---------------------------------------------------------------------------
# seeded random constructions used throughout tests and optimizers


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_psd(rng: np.random.Generator, dim: int) -> np.ndarray:
    """G G* with complex standard-normal G; full rank almost surely."""
    g = random_complex(rng, (dim, dim))
    return g @ dagger(g)


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    rho = random_psd(rng, dim)
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR with phase fixing."""
    q, r = np.linalg.qr(random_complex(rng, (dim, dim)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = random_complex(rng, dim)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())
