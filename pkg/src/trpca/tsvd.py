"""Slicewise SVD machinery: factorization, tubal rank, norm functionals,
singular-value shrinkage, and coherence diagnostics.

Everything here works per frontal slice of the mode-3 transform.  A
real tensor's transform is conjugate-symmetric across slices, so the
``use_sym`` flags let the redundant half be mirrored instead of
recomputed; results agree with the full computation and both paths are
exercised by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, InvalidParam, NoConvergence, ZeroTensor
from .tensor import (
    as_tensor3,
    conj_transpose,
    fft_mode3,
    fro,
    half_slice_count,
    ifft_mode3,
    linf,
    t_product,
)

# Singular values below this fraction of the largest one count as zero
# when deciding tubal rank.
DEFAULT_RANK_TOL = 1e-10


@dataclass
class TSvdFactors:
    """Skinny factorization A = U * S * V^T (tensor product).

    U is n1 x r x n3, S is r x r x n3 with diagonal frontal slices in
    the Fourier domain, V is n2 x r x n3.  ``sigma[i, j]`` is the j-th
    singular value of the i-th Fourier slice of the input (full set,
    not truncated to r).
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    sigma: np.ndarray

    @property
    def r(self) -> int:
        return self.U.shape[1]

    def reconstruct(self) -> np.ndarray:
        return t_product(t_product(self.U, self.S), conj_transpose(self.V))


@dataclass
class IncoherenceReport:
    """Smallest coherence parameters of the skinny factors.

    Each value is the smallest mu making the corresponding alignment
    bound hold with equality: mu_u for the left factor against the
    column basis, mu_v for the right factor, mu_uv for the entrywise
    magnitude of U * V^T.  Diagnostic only; nothing in the solvers
    consumes these.
    """

    mu_u: float
    mu_v: float
    mu_uv: float
    r: int


def complex_svd(M: np.ndarray):
    """SVD of a complex matrix with a reproducible phase convention.

    Returns (U, s, V) with M = U @ diag(s) @ V^H, singular values
    nonincreasing, and the first row of V rotated to be real and
    nonnegative so that repeated runs produce identical factors.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise DimMismatch(f"complex_svd expects a matrix, got ndim={M.ndim}")
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD failed to converge: {exc}") from exc
    # rotate each singular pair by a unit phase so V[0, j] >= 0 is real
    v0 = np.conj(Vh[:, 0])
    mag = np.abs(v0)
    phase = np.where(mag > 0, np.conj(v0) / np.where(mag > 0, mag, 1.0), 1.0)
    U = U * phase[np.newaxis, :]
    Vh = Vh * np.conj(phase)[:, np.newaxis]
    return U, s, Vh.conj().T


def slice_singular_values(A: np.ndarray, use_sym: bool = True) -> np.ndarray:
    """Singular values of every Fourier slice, shape (n3, min(n1, n2))."""
    A = as_tensor3(A)
    n1, n2, n3 = A.shape
    Af = fft_mode3(A)
    sig = np.empty((n3, min(n1, n2)))
    ks = range(half_slice_count(n3)) if use_sym else range(n3)
    try:
        for k in ks:
            sig[k] = np.linalg.svd(Af[:, :, k], compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD failed to converge: {exc}") from exc
    if use_sym:
        for k in range(half_slice_count(n3), n3):
            sig[k] = sig[n3 - k]
    return sig


def tubal_rank(A: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular tubes that are nonzero relative to the largest."""
    A = as_tensor3(A)
    if not A.any():
        return 0
    sig = slice_singular_values(A)
    smax = float(sig.max())
    if smax == 0.0:
        return 0
    return int(np.count_nonzero(sig.max(axis=0) > tol * smax))


def t_svd(A: np.ndarray, tol: float = DEFAULT_RANK_TOL, use_sym: bool = True) -> TSvdFactors:
    """Skinny factorization of a nonzero tensor.

    Slices in the Fourier domain are decomposed independently; with
    ``use_sym`` the conjugate half is mirrored, otherwise each slice is
    decomposed on its own and the phase convention of
    :func:`complex_svd` keeps the assembled factors real.
    """
    A = as_tensor3(A)
    if not A.any():
        raise ZeroTensor("t_svd of the zero tensor has no skinny form")
    n1, n2, n3 = A.shape
    nmin = min(n1, n2)
    Af = fft_mode3(A)
    Uf = np.empty((n1, nmin, n3), dtype=np.complex128)
    Vf = np.empty((n2, nmin, n3), dtype=np.complex128)
    sig = np.empty((n3, nmin))
    h = half_slice_count(n3)
    ks = range(h) if use_sym else range(n3)
    for k in ks:
        U, s, V = complex_svd(Af[:, :, k])
        Uf[:, :, k] = U
        Vf[:, :, k] = V
        sig[k] = s
    if use_sym:
        for k in range(h, n3):
            Uf[:, :, k] = np.conj(Uf[:, :, n3 - k])
            Vf[:, :, k] = np.conj(Vf[:, :, n3 - k])
            sig[k] = sig[n3 - k]
    smax = float(sig.max())
    r = int(np.count_nonzero(sig.max(axis=0) > tol * smax))
    Sf = np.zeros((r, r, n3), dtype=np.complex128)
    for k in range(n3):
        np.fill_diagonal(Sf[:, :, k], sig[k, :r])
    return TSvdFactors(
        U=ifft_mode3(Uf[:, :r, :]),
        S=ifft_mode3(Sf),
        V=ifft_mode3(Vf[:, :r, :]),
        sigma=sig,
    )


def tnn(A: np.ndarray) -> float:
    """Mean over Fourier slices of the matrix nuclear norm."""
    A = as_tensor3(A)
    return float(slice_singular_values(A).sum() / A.shape[2])


def tnf(A: np.ndarray) -> float:
    """Scale-invariant rank surrogate: nuclear functional over Frobenius.

    Equals sum(sigma) / (sqrt(n3) * ||sigma||_2) over the stacked
    slicewise singular values, so it lies in
    [1/sqrt(n3), sqrt(min(n1, n2))] and is invariant to rescaling.
    """
    A = as_tensor3(A)
    if not A.any():
        raise ZeroTensor("ratio functional undefined for the zero tensor")
    return tnn(A) / fro(A)


def t_svt(
    A: np.ndarray,
    tau: float,
    use_sym: bool = True,
    return_sigma: bool = False,
):
    """Singular-value shrinkage: subtract tau from every slicewise
    singular value, clip at zero, and recombine.

    Solves min_X tau * tnn(X) + 0.5 * ||X - A||_F^2.  ``tau`` may be
    ``inf``, which maps everything to the zero tensor.  When
    ``return_sigma`` is set, also returns the post-shrinkage singular
    values (n3 x min(n1, n2)), from which tnn of the result is
    ``sigma.sum() / n3`` at no extra cost.
    """
    A = as_tensor3(A)
    if not tau >= 0:
        raise InvalidParam(f"shrinkage threshold must be >= 0, got {tau}")
    n1, n2, n3 = A.shape
    nmin = min(n1, n2)
    Af = fft_mode3(A)
    Xf = np.empty_like(Af)
    sig = np.empty((n3, nmin))
    h = half_slice_count(n3)
    ks = range(h) if use_sym else range(n3)
    try:
        for k in ks:
            U, s, Vh = np.linalg.svd(Af[:, :, k], full_matrices=False)
            s2 = np.maximum(s - tau, 0.0)
            Xf[:, :, k] = (U * s2) @ Vh
            sig[k] = s2
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD failed to converge: {exc}") from exc
    if use_sym:
        for k in range(h, n3):
            Xf[:, :, k] = np.conj(Xf[:, :, n3 - k])
            sig[k] = sig[n3 - k]
    X = ifft_mode3(Xf)
    if return_sigma:
        return X, sig
    return X


def incoherence(A: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> IncoherenceReport:
    """Coherence diagnostic of the skinny factors of a nonzero tensor.

    Alignment with the column basis reduces to row energies of the
    factors' Fourier slices, since the basis tensors transform to unit
    impulses on every slice.
    """
    A = as_tensor3(A)
    if not A.any():
        raise ZeroTensor("incoherence undefined for the zero tensor")
    n1, n2, n3 = A.shape
    f = t_svd(A, tol)
    r = f.r
    Ufe = np.sum(np.abs(fft_mode3(f.U)) ** 2, axis=(1, 2)) / n3
    Vfe = np.sum(np.abs(fft_mode3(f.V)) ** 2, axis=(1, 2)) / n3
    mu_u = n1 * n3 / r * float(Ufe.max())
    mu_v = n2 * n3 / r * float(Vfe.max())
    W = t_product(f.U, conj_transpose(f.V))
    mu_uv = n1 * n2 * n3**2 / r * linf(W) ** 2
    return IncoherenceReport(mu_u=mu_u, mu_v=mu_v, mu_uv=mu_uv, r=r)
