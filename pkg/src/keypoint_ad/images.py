"""Grayscale image primitives: validation, integral images, Gaussian blur, rotations.

An image is a 2-D float64 array, row major, luminance in [0, 1].
"""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

# ITU-R BT.601 luminance weights for color conversion
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def check_gray(image: np.ndarray) -> np.ndarray:
    """Validate and return a grayscale image as a float64 array in [0, 1]."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    return arr


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) color array (any numeric range) to grayscale in [0, 1].

    8-bit inputs are scaled by 1/255; float inputs are assumed pre-scaled.
    """
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim == 2:
        gray = arr
    elif arr.ndim == 3 and arr.shape[2] in (3, 4):
        r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
        wr, wg, wb = LUMA_WEIGHTS
        gray = wr * r + wg * g + wb * b
    else:
        raise ValueError(f"expected (H, W) or (H, W, 3/4) array, got shape {arr.shape}")
    if np.issubdtype(np.asarray(rgb).dtype, np.integer):
        gray = gray / 255.0
    return np.clip(gray, 0.0, 1.0)


def to_integral(image: np.ndarray) -> np.ndarray:
    """Summed-area table with one zero padding row/column at top/left.

    Entry (i, j) is the sum of all pixels with row < i and col < j, so the
    result has shape (H+1, W+1) and any rectangle sum needs 4 lookups.
    """
    img = check_gray(image)
    h, w = img.shape
    table = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(img, axis=0), axis=1, out=table[1:, 1:])
    return table


def box_sum(integral: np.ndarray, r0: int, c0: int, r1: int, c1: int) -> float:
    """Sum of pixels in rows r0..r1 and cols c0..c1 (inclusive)."""
    return float(
        integral[r1 + 1, c1 + 1]
        - integral[r0, c1 + 1]
        - integral[r1 + 1, c0]
        + integral[r0, c0]
    )


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian kernel truncated at radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    return kernel / kernel.sum()


def gaussian_blur(image: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with clamp-to-border (edge replication) handling."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    kernel = gaussian_kernel(sigma)
    out = ndimage.convolve1d(img, kernel, axis=0, mode="nearest")
    return ndimage.convolve1d(out, kernel, axis=1, mode="nearest")


def rotate90(image: np.ndarray, turns: int = 1) -> np.ndarray:
    """Rotate by `turns` * 90 degrees clockwise, as an exact pixel permutation.

    One turn maps the pixel at (x, y) to (height - 1 - y, x).
    """
    return np.ascontiguousarray(np.rot90(image, k=-(turns % 4)))
