"""File formats: binary tensors (TNS1), P6 PPM images, frame stacks,
and the salt-noise corruption used by the denoising workload.

TNS1 layout: magic bytes ``TNS1``, one u8 dtype code (0 = IEEE-754
float64 little-endian), three u64 little-endian dims n1, n2, n3, then
the payload with the first index fastest (frontal slices contiguous).
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import (
    BadDtype,
    BadMagic,
    BadMaxval,
    InvalidParam,
    SizeMismatch,
    TruncatedFile,
)
from .rng import make_rng
from .tensor import as_tensor3

TNS_MAGIC = b"TNS1"
TNS_DTYPE_F64 = 0

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def write_tns(path, A: np.ndarray):
    """Write a tensor in the TNS1 binary format."""
    A = as_tensor3(A)
    n1, n2, n3 = A.shape
    with open(path, "wb") as f:
        f.write(TNS_MAGIC)
        f.write(struct.pack("<B", TNS_DTYPE_F64))
        f.write(struct.pack("<QQQ", n1, n2, n3))
        f.write(np.asarray(A, dtype="<f8").flatten(order="F").tobytes())


def read_tns(path) -> np.ndarray:
    """Read a TNS1 tensor; bit-exact round trip with :func:`write_tns`."""
    with open(path, "rb") as f:
        head = f.read(4)
        if head != TNS_MAGIC:
            raise BadMagic(f"expected magic {TNS_MAGIC!r}, got {head!r}")
        raw = f.read(1)
        if len(raw) < 1:
            raise TruncatedFile("missing dtype byte")
        (dtype,) = struct.unpack("<B", raw)
        if dtype != TNS_DTYPE_F64:
            raise BadDtype(f"unsupported dtype code {dtype}")
        raw = f.read(24)
        if len(raw) < 24:
            raise TruncatedFile("missing dimension header")
        n1, n2, n3 = struct.unpack("<QQQ", raw)
        payload = f.read()
    expect = n1 * n2 * n3 * 8
    if len(payload) != expect:
        raise SizeMismatch(f"payload is {len(payload)} bytes, header implies {expect}")
    data = np.frombuffer(payload, dtype="<f8")
    return data.reshape((n1, n2, n3), order="F").copy()


def _read_ppm_token(f) -> bytes:
    tok = b""
    while True:
        ch = f.read(1)
        if not ch:
            if tok:
                return tok
            raise TruncatedFile("unexpected end of PPM header")
        if ch == b"#":  # comment runs to end of line
            while ch and ch != b"\n":
                ch = f.read(1)
            continue
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch


def load_ppm(path) -> np.ndarray:
    """Load a binary P6 PPM as an (h, w, 3) float tensor in [0, 255]."""
    with open(path, "rb") as f:
        if _read_ppm_token(f) != b"P6":
            raise BadMagic(f"{path}: not a binary PPM (P6)")
        w = int(_read_ppm_token(f))
        h = int(_read_ppm_token(f))
        maxval = int(_read_ppm_token(f))
        if maxval != 255:
            raise BadMaxval(f"{path}: maxval {maxval} unsupported (need 255)")
        payload = f.read(h * w * 3)
    if len(payload) < h * w * 3:
        raise TruncatedFile(f"{path}: expected {h * w * 3} pixel bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3).astype(np.float64)


def save_ppm(img: np.ndarray, path):
    """Save an (h, w, 3) tensor as P6, clamping to [0, 255] and rounding."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise SizeMismatch(f"save_ppm expects (h, w, 3), got {img.shape}")
    data = np.rint(np.clip(img, 0.0, 255.0)).astype(np.uint8)
    h, w = img.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def save_gray_ppm(plane: np.ndarray, path):
    """Save a grayscale plane as P6 with equal channels."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise SizeMismatch(f"save_gray_ppm expects (h, w), got {plane.shape}")
    save_ppm(np.repeat(plane[:, :, np.newaxis], 3, axis=2), path)


def to_gray(img: np.ndarray) -> np.ndarray:
    """Luma plane of an (h, w, 3) image."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise SizeMismatch(f"to_gray expects (h, w, 3), got {img.shape}")
    r, g, b = LUMA_WEIGHTS
    return r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]


def load_frames(paths) -> np.ndarray:
    """Stack grayscale frames along the third mode: (h, w, n_frames).

    Each path is a P6 PPM converted to luma.  Frames must share a size.
    """
    paths = list(paths)
    if not paths:
        raise InvalidParam("no frames given")
    planes = []
    for p in paths:
        plane = to_gray(load_ppm(p))
        if planes and plane.shape != planes[0].shape:
            raise SizeMismatch(
                f"{p}: frame size {plane.shape} differs from first frame {planes[0].shape}"
            )
        planes.append(plane)
    return np.stack(planes, axis=2)


def corrupt_salt(img: np.ndarray, fraction: float, seed: int, per_channel: bool = False):
    """Replace an exact fraction of pixel positions with uniform bytes.

    Exactly floor(fraction * h * w) positions are chosen without
    replacement; by default every channel at a chosen position is
    replaced (with independent draws per channel).  ``per_channel``
    instead corrupts channel sites independently, each channel with its
    own position set.  Returns (noisy, mask) where mask marks corrupted
    positions; the mask is for evaluation only and must never reach a
    solver.
    """
    img = as_tensor3(img, "image")
    if not 0.0 <= fraction <= 1.0:
        raise InvalidParam(f"fraction must be in [0, 1], got {fraction}")
    h, w, c = img.shape
    rng = make_rng(seed)
    noisy = img.copy()
    if per_channel:
        mask = np.zeros((h, w, c), dtype=bool)
        count = int(fraction * h * w)
        for ch in range(c):
            flat = rng.permutation(h * w)[:count]
            ii, jj = np.unravel_index(flat, (h, w))
            mask[ii, jj, ch] = True
            noisy[ii, jj, ch] = rng.integers(0, 256, count).astype(np.float64)
        return noisy, mask
    count = int(fraction * h * w)
    flat = rng.permutation(h * w)[:count]
    ii, jj = np.unravel_index(flat, (h, w))
    mask = np.zeros((h, w), dtype=bool)
    mask[ii, jj] = True
    noisy[ii, jj, :] = rng.integers(0, 256, (count, c)).astype(np.float64)
    return noisy, mask
