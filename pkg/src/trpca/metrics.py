"""Recovery and image-quality metrics."""

from __future__ import annotations

import math

import numpy as np

from .errors import DimMismatch, InvalidParam, TooSmall, ZeroReference
from .tensor import fro

SSIM_C1 = (0.01 * 255.0) ** 2
SSIM_C2 = (0.03 * 255.0) ** 2


def rse(A_hat: np.ndarray, A0: np.ndarray) -> float:
    """Relative square error ||A_hat - A0||_F^2 / ||A0||_F^2."""
    A_hat = np.asarray(A_hat, dtype=np.float64)
    A0 = np.asarray(A0, dtype=np.float64)
    if A_hat.shape != A0.shape:
        raise DimMismatch(f"rse: shapes {A_hat.shape} and {A0.shape} differ")
    ref = fro(A0)
    if ref == 0.0:
        raise ZeroReference("rse against an all-zero reference is undefined")
    return (fro(A_hat - A0) / ref) ** 2


def psnr(ref: np.ndarray, test: np.ndarray, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical inputs."""
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise DimMismatch(f"psnr: shapes {ref.shape} and {test.shape} differ")
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _ssim_plane_blocks(x: np.ndarray, y: np.ndarray, block: int) -> float:
    h, w = x.shape
    hb, wb = h // block, w // block
    xb = x[: hb * block, : wb * block].reshape(hb, block, wb, block)
    yb = y[: hb * block, : wb * block].reshape(hb, block, wb, block)
    mx = xb.mean(axis=(1, 3))
    my = yb.mean(axis=(1, 3))
    vx = (xb**2).mean(axis=(1, 3)) - mx**2
    vy = (yb**2).mean(axis=(1, 3)) - my**2
    cxy = (xb * yb).mean(axis=(1, 3)) - mx * my
    s = ((2 * mx * my + SSIM_C1) * (2 * cxy + SSIM_C2)) / (
        (mx**2 + my**2 + SSIM_C1) * (vx + vy + SSIM_C2)
    )
    return float(s.mean())


def _gauss_kernel(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    # separable valid-mode filtering, rows then columns
    tmp = np.apply_along_axis(np.convolve, 1, img, g, "valid")
    return np.apply_along_axis(np.convolve, 0, tmp, g, "valid")


def _ssim_plane_gauss(x: np.ndarray, y: np.ndarray, size: int = 11, sigma: float = 1.5) -> float:
    g = _gauss_kernel(size, sigma)
    mx = _filter_valid(x, g)
    my = _filter_valid(y, g)
    vx = _filter_valid(x * x, g) - mx**2
    vy = _filter_valid(y * y, g) - my**2
    cxy = _filter_valid(x * y, g) - mx * my
    s = ((2 * mx * my + SSIM_C1) * (2 * cxy + SSIM_C2)) / (
        (mx**2 + my**2 + SSIM_C1) * (vx + vy + SSIM_C2)
    )
    return float(s.mean())


def ssim(ref: np.ndarray, test: np.ndarray, window: str = "block8") -> float:
    """Mean local structural similarity on byte-range images.

    ``window="block8"`` averages the index over non-overlapping 8x8
    blocks; ``window="gauss11"`` uses an 11x11 Gaussian-weighted
    sliding window (sigma 1.5).  Three-dimensional inputs are treated
    as stacks of planes along the last axis and averaged.
    """
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise DimMismatch(f"ssim: shapes {ref.shape} and {test.shape} differ")
    if ref.ndim == 2:
        ref = ref[:, :, np.newaxis]
        test = test[:, :, np.newaxis]
    if ref.ndim != 3:
        raise DimMismatch(f"ssim expects 2- or 3-dimensional input, got ndim={ref.ndim}")
    h, w = ref.shape[:2]
    need = 8 if window == "block8" else 11
    if h < need or w < need:
        raise TooSmall(f"image {h}x{w} is smaller than the {need}x{need} window")
    vals = []
    for c in range(ref.shape[2]):
        if window == "block8":
            vals.append(_ssim_plane_blocks(ref[:, :, c], test[:, :, c], 8))
        elif window == "gauss11":
            vals.append(_ssim_plane_gauss(ref[:, :, c], test[:, :, c]))
        else:
            raise InvalidParam(f"unknown ssim window {window!r}")
    return float(np.mean(vals))
