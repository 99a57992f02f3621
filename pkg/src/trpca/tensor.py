"""Third-order tensor algebra in the mode-3 Fourier domain.

A tensor is a plain ``numpy.ndarray`` of shape ``(n1, n2, n3)``.  The
frontal slice ``A[:, :, k]`` plays the role of a matrix; a tube is the
length-``n3`` fiber ``A[i, j, :]``.  The tensor-tensor product used
throughout the package multiplies frontal slices after a forward FFT
along the tube axis, which is equivalent to multiplying the block
circulant expansions of the operands but costs only ``n3`` independent
matrix products.

Conventions pinned here and relied on everywhere else:

* forward FFT is unnormalized, the inverse carries the ``1/n3`` factor
  (so ``fro(A)**2 == (1/n3) * sum of squared slice norms`` of the
  transform, the Parseval identity the norm tests assert);
* real tensors transform to conjugate-symmetric complex tensors: slice
  ``k`` and slice ``n3 - k`` (0-based, ``k >= 1``) are elementwise
  conjugates, and slicewise operations may exploit this by computing
  only the first ``n3 // 2 + 1`` slices and mirroring the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, ImagResidualTooLarge

# Relative imaginary magnitude beyond which an inverse transform is
# considered to have lost conjugate symmetry (a bug, not rounding).
IMAG_RESIDUAL_LIMIT = 1e-6


@dataclass(frozen=True)
class Dims:
    """Dimensions of a third-order tensor."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        if min(self.n1, self.n2, self.n3) < 1:
            raise DimMismatch(f"dimensions must be >= 1, got {self}")

    @property
    def n_max(self) -> int:
        return max(self.n1, self.n2)

    @property
    def n_min(self) -> int:
        return min(self.n1, self.n2)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)


def as_tensor3(A, name: str = "tensor") -> np.ndarray:
    """Coerce to a float64 third-order array, validating the rank."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 3:
        raise DimMismatch(f"{name} must be a third-order tensor, got ndim={A.ndim}")
    return A


def half_slice_count(n3: int) -> int:
    """Number of frequency slices that determine the rest by symmetry."""
    return n3 // 2 + 1


def fft_mode3(A: np.ndarray) -> np.ndarray:
    """Forward DFT of every tube (unnormalized)."""
    return np.fft.fft(np.asarray(A), axis=2)


def ifft_mode3(C: np.ndarray, return_residual: bool = False):
    """Inverse DFT of every tube, returning the real part.

    The imaginary part of the inverse of a conjugate-symmetric tensor is
    pure rounding noise; anything larger means an upstream operation
    broke the symmetry, so it raises rather than silently discarding
    signal.
    """
    spatial = np.fft.ifft(np.asarray(C, dtype=np.complex128), axis=2)
    resid = float(np.max(np.abs(spatial.imag))) if spatial.size else 0.0
    scale = 1.0 + (float(np.max(np.abs(spatial.real))) if spatial.size else 0.0)
    if resid > IMAG_RESIDUAL_LIMIT * scale:
        raise ImagResidualTooLarge(
            f"max imaginary residual {resid:.3e} exceeds {IMAG_RESIDUAL_LIMIT:.0e}*(1+max|real|)"
        )
    out = np.ascontiguousarray(spatial.real)
    if return_residual:
        return out, resid
    return out


def t_product(A: np.ndarray, B: np.ndarray, use_sym: bool = True) -> np.ndarray:
    """Tensor-tensor product: slicewise matrix products in the Fourier domain.

    Args:
        A: tensor of shape (n1, l, n3).
        B: tensor of shape (l, n2, n3).
        use_sym: compute only the non-redundant frequency slices and
            mirror the conjugate half (default).  The result is the same
            either way; the flag exists so both paths stay tested.

    Returns:
        Tensor of shape (n1, n2, n3).
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 3 or B.ndim != 3:
        raise DimMismatch("t_product operands must be third-order tensors")
    n1, l, n3 = A.shape
    l2, n2, n3b = B.shape
    if l != l2 or n3 != n3b:
        raise DimMismatch(f"t_product: cannot multiply {A.shape} by {B.shape}")
    Af = fft_mode3(A)
    Bf = fft_mode3(B)
    Cf = np.empty((n1, n2, n3), dtype=np.complex128)
    if use_sym:
        h = half_slice_count(n3)
        Cf[:, :, :h] = np.matmul(
            Af[:, :, :h].transpose(2, 0, 1), Bf[:, :, :h].transpose(2, 0, 1)
        ).transpose(1, 2, 0)
        for k in range(h, n3):
            Cf[:, :, k] = np.conj(Cf[:, :, n3 - k])
    else:
        Cf[:] = np.matmul(Af.transpose(2, 0, 1), Bf.transpose(2, 0, 1)).transpose(1, 2, 0)
    return ifft_mode3(Cf)


def conj_transpose(A: np.ndarray) -> np.ndarray:
    """Transpose every frontal slice and reverse the order of slices 2..n3."""
    A = np.asarray(A)
    out = np.empty((A.shape[1], A.shape[0], A.shape[2]), dtype=A.dtype)
    out[:, :, 0] = np.conj(A[:, :, 0]).T
    if A.shape[2] > 1:
        out[:, :, 1:] = np.conj(A[:, :, :0:-1]).transpose(1, 0, 2)
    return out


def identity_tensor(n: int, n3: int) -> np.ndarray:
    """Identity of the tensor product: first frontal slice I_n, rest zero."""
    I = np.zeros((n, n, n3))
    I[:, :, 0] = np.eye(n)
    return I


def unfold(A: np.ndarray) -> np.ndarray:
    """Stack frontal slices vertically into an (n1*n3, n2) matrix."""
    A = np.asarray(A)
    n1, n2, n3 = A.shape
    return A.transpose(2, 0, 1).reshape(n1 * n3, n2)


def fold(M: np.ndarray, n1: int, n2: int, n3: int) -> np.ndarray:
    """Inverse of :func:`unfold`."""
    M = np.asarray(M)
    if M.shape != (n1 * n3, n2):
        raise DimMismatch(f"fold: expected shape {(n1 * n3, n2)}, got {M.shape}")
    return M.reshape(n3, n1, n2).transpose(1, 2, 0)


def bcirc(A: np.ndarray) -> np.ndarray:
    """Block circulant matrix of the frontal slices.

    Block column j (0-based) holds the slices cyclically shifted down by
    j, so the first block column is slice 1..n3 top to bottom.  This is
    the reference definition of the tensor product and serves as the
    oracle the FFT path is tested against.
    """
    A = np.asarray(A)
    n1, n2, n3 = A.shape
    out = np.zeros((n1 * n3, n2 * n3), dtype=A.dtype)
    for j in range(n3):
        for i in range(n3):
            out[i * n1 : (i + 1) * n1, j * n2 : (j + 1) * n2] = A[:, :, (i - j) % n3]
    return out


def fro(A: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(A).ravel()))


def l1(A: np.ndarray) -> float:
    """Entrywise l1 norm."""
    return float(np.sum(np.abs(A)))


def linf(A: np.ndarray) -> float:
    """Entrywise infinity norm."""
    A = np.asarray(A)
    return float(np.max(np.abs(A))) if A.size else 0.0


def inner(A: np.ndarray, B: np.ndarray) -> float:
    """Euclidean inner product of two same-shaped tensors."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimMismatch(f"inner: shapes {A.shape} and {B.shape} differ")
    return float(np.vdot(A, B).real)
