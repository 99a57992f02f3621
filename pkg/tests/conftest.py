"""Shared fixtures and independent oracle implementations.

The oracles here deliberately avoid the code paths they check: the DFT
oracle is a direct O(n^2) summation, the eigenvalue oracle is a
hand-rolled Hermitian Jacobi iteration, and the scalar minimizer is a
golden-section search.
"""

import math

import numpy as np
import pytest


def naive_dft_mode3(A):
    """Direct DFT summation along the last axis, O(n3^2) per tube."""
    A = np.asarray(A, dtype=np.complex128)
    n3 = A.shape[2]
    W = np.exp(-2j * np.pi * np.outer(np.arange(n3), np.arange(n3)) / n3)
    return A @ W  # sums over the last axis against each frequency column


def hermitian_eigvals_jacobi(M, sweeps=100, tol=1e-13):
    """Eigenvalues of a Hermitian matrix by cyclic two-sided Jacobi.

    Each step phases the pivot entry real, then applies the classical
    symmetric rotation.  Returns eigenvalues sorted descending.
    """
    A = np.array(M, dtype=np.complex128)
    n = A.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(float(np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2)))
        if off <= tol * max(1.0, float(np.linalg.norm(A))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                beta = A[p, q]
                if abs(beta) == 0.0:
                    continue
                phase = beta / abs(beta)
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * abs(beta))
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                U2 = np.array(
                    [[c, s], [-s * np.conj(phase), c * np.conj(phase)]],
                    dtype=np.complex128,
                )
                A[:, [p, q]] = A[:, [p, q]] @ U2
                A[[p, q], :] = U2.conj().T @ A[[p, q], :]
    return np.sort(np.diag(A).real)[::-1]


def golden_section(f, lo, hi, tol=1e-12, max_iter=300):
    """Minimize a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
