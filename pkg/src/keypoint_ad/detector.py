"""Scale-space keypoint detectors.

Two detectors share the Keypoint/DetectorConfig types:

* ``detect_dog`` -- difference-of-Gaussians extrema with sub-pixel
  refinement and a principal-curvature edge test.
* ``detect_fast_hessian`` -- box-filter Hessian determinant responses
  computed on an integral image, grid-level non-max suppression.

Both return keypoints carrying (x, y, scale, response), sorted by response
descending, and are pure functions of (image, config).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .images import check_gray, gaussian_blur, to_integral

DOG = "dog"
FAST_HESSIAN = "fast_hessian"
DETECTOR_KINDS = (DOG, FAST_HESSIAN)

# conventional defaults for the two detectors
DOG_CONTRAST_THRESHOLD = 0.03
FAST_HESSIAN_CONTRAST_THRESHOLD = 1e-4
FAST_HESSIAN_BASE_SCALE = 1.2
DXY_WEIGHT = 0.9


class ImageTooSmallError(ValueError):
    """Input image is below the detector's minimum size."""


@dataclass(frozen=True)
class Keypoint:
    """One detected feature point: sub-pixel location, scale and strength."""

    x: float
    y: float
    scale: float
    response: float
    detector: str

    def sort_key(self):
        # response desc, then scale desc, then (y, x) asc: pins a total order
        return (-self.response, -self.scale, self.y, self.x)


@dataclass(frozen=True)
class DetectorConfig:
    octaves: int = 4
    scales_per_octave: int = 3
    base_sigma: float = 1.6
    contrast_threshold: float = DOG_CONTRAST_THRESHOLD
    edge_ratio_threshold: float = 10.0
    border_margin: int = 5

    def validate(self) -> "DetectorConfig":
        if self.octaves < 1:
            raise ValueError(f"octaves must be >= 1, got {self.octaves}")
        if self.scales_per_octave < 2:
            raise ValueError(f"scales_per_octave must be >= 2, got {self.scales_per_octave}")
        if self.base_sigma <= 0:
            raise ValueError(f"base_sigma must be > 0, got {self.base_sigma}")
        if self.contrast_threshold < 0 or self.edge_ratio_threshold < 0:
            raise ValueError("thresholds must be >= 0")
        if self.border_margin < 0:
            raise ValueError(f"border_margin must be >= 0, got {self.border_margin}")
        return self


def default_config(kind: str, **overrides) -> DetectorConfig:
    """Per-detector default configuration."""
    if kind == DOG:
        cfg = DetectorConfig()
    elif kind == FAST_HESSIAN:
        cfg = DetectorConfig(contrast_threshold=FAST_HESSIAN_CONTRAST_THRESHOLD)
    else:
        raise ValueError(f"unknown detector kind {kind!r}")
    return replace(cfg, **overrides) if overrides else cfg


def sort_keypoints(keypoints) -> list[Keypoint]:
    return sorted(keypoints, key=Keypoint.sort_key)


# ---------------------------------------------------------------------------
# difference-of-Gaussians detector


def dog_sigmas(cfg: DetectorConfig) -> np.ndarray:
    """Gaussian scales of the full stack: base_sigma * 2^(t / scales_per_octave).

    The per-octave pyramids overlap at their boundary levels, so the whole
    scale space is one chain of octaves*scales_per_octave + 3 images; DoG
    level t has scale base_sigma * 2^(t / scales_per_octave) and extrema are
    searched at t = 1 .. octaves*scales_per_octave.
    """
    s = cfg.scales_per_octave
    count = cfg.octaves * s + 3
    return cfg.base_sigma * 2.0 ** (np.arange(count) / s)


def _dog_stack(image: np.ndarray, cfg: DetectorConfig) -> np.ndarray:
    sigmas = dog_sigmas(cfg)
    level = gaussian_blur(image, sigmas[0])
    gaussians = [level]
    for prev, cur in zip(sigmas[:-1], sigmas[1:]):
        # incremental blur: variances add along the chain
        level = gaussian_blur(level, math.sqrt(cur * cur - prev * prev))
        gaussians.append(level)
    stack = np.stack(gaussians)
    return stack[1:] - stack[:-1]


def _strict_extrema_mask(stack: np.ndarray) -> np.ndarray:
    """True where a voxel strictly dominates (or is dominated by) its 26 neighbors."""
    footprint = np.ones((3, 3, 3), dtype=bool)
    footprint[1, 1, 1] = False
    neighbor_max = ndimage.maximum_filter(stack, footprint=footprint, mode="nearest")
    neighbor_min = ndimage.minimum_filter(stack, footprint=footprint, mode="nearest")
    return (stack > neighbor_max) | (stack < neighbor_min)


def _edge_test(dog_level: np.ndarray, i: int, j: int, edge_ratio: float) -> bool:
    d = dog_level
    dxx = d[i, j + 1] - 2.0 * d[i, j] + d[i, j - 1]
    dyy = d[i + 1, j] - 2.0 * d[i, j] + d[i - 1, j]
    dxy = 0.25 * (d[i + 1, j + 1] - d[i + 1, j - 1] - d[i - 1, j + 1] + d[i - 1, j - 1])
    tr = dxx + dyy
    det = dxx * dyy - dxy * dxy
    if det <= 0:
        # principal curvatures of opposite sign: edge-like, reject
        return False
    if edge_ratio <= 0:
        return True
    return tr * tr * edge_ratio < det * (edge_ratio + 1.0) ** 2


def _interpolate_extremum(dogs: np.ndarray, t: int, i: int, j: int):
    """Quadratic interpolation of the extremum in (scale, y, x).

    Returns (offset, refined_value); offsets are clamped to +-0.5 so the
    refined point stays inside the grid cell of the detected extremum.
    """
    cube = dogs[t - 1 : t + 2, i - 1 : i + 2, j - 1 : j + 2]
    grad = 0.5 * np.array(
        [
            cube[2, 1, 1] - cube[0, 1, 1],
            cube[1, 2, 1] - cube[1, 0, 1],
            cube[1, 1, 2] - cube[1, 1, 0],
        ]
    )
    center = cube[1, 1, 1]
    dss = cube[2, 1, 1] - 2.0 * center + cube[0, 1, 1]
    dyy = cube[1, 2, 1] - 2.0 * center + cube[1, 0, 1]
    dxx = cube[1, 1, 2] - 2.0 * center + cube[1, 1, 0]
    dsy = 0.25 * (cube[2, 2, 1] - cube[2, 0, 1] - cube[0, 2, 1] + cube[0, 0, 1])
    dsx = 0.25 * (cube[2, 1, 2] - cube[2, 1, 0] - cube[0, 1, 2] + cube[0, 1, 0])
    dyx = 0.25 * (cube[1, 2, 2] - cube[1, 2, 0] - cube[1, 0, 2] + cube[1, 0, 0])
    hessian = np.array([[dss, dsy, dsx], [dsy, dyy, dyx], [dsx, dyx, dxx]])
    try:
        offset = -np.linalg.solve(hessian, grad)
    except np.linalg.LinAlgError:
        offset = np.zeros(3)
    offset = np.clip(offset, -0.5, 0.5)
    value = center + 0.5 * float(grad @ offset)
    return offset, value


def detect_dog(image: np.ndarray, cfg: DetectorConfig | None = None) -> list[Keypoint]:
    """Difference-of-Gaussians keypoints, strongest first.

    Keypoints are strict extrema among their 26 scale-space neighbors whose
    refined |DoG| value clears ``contrast_threshold`` and whose spatial
    curvature ratio passes the edge test.
    """
    img = check_gray(image)
    cfg = (cfg or default_config(DOG)).validate()
    h, w = img.shape
    if min(h, w) < 16:
        raise ImageTooSmallError(f"detect_dog needs at least 16x16 pixels, got {h}x{w}")

    dogs = _dog_stack(img, cfg)
    s = cfg.scales_per_octave
    t_max = cfg.octaves * s  # searchable DoG levels are 1..t_max

    margin = max(cfg.border_margin, 1)
    mask = _strict_extrema_mask(dogs)
    mask[: 1] = False
    mask[t_max + 1 :] = False
    mask[:, :margin, :] = False
    mask[:, h - margin :, :] = False
    mask[:, :, :margin] = False
    mask[:, :, w - margin :] = False
    mask &= np.abs(dogs) >= cfg.contrast_threshold

    keypoints = []
    for t, i, j in np.argwhere(mask):
        if not _edge_test(dogs[t], i, j, cfg.edge_ratio_threshold):
            continue
        offset, value = _interpolate_extremum(dogs, t, i, j)
        response = abs(value)
        if response < cfg.contrast_threshold:
            continue
        keypoints.append(
            Keypoint(
                x=float(j + offset[2]),
                y=float(i + offset[1]),
                scale=float(cfg.base_sigma * 2.0 ** ((t + offset[0]) / s)),
                response=float(response),
                detector=DOG,
            )
        )
    return sort_keypoints(keypoints)


# ---------------------------------------------------------------------------
# fast-Hessian (box filter) detector


def fast_hessian_filter_sizes(cfg: DetectorConfig) -> list[int]:
    """Box filter side lengths 9, 15, 21, ... one per configured scale level."""
    return [9 + 6 * k for k in range(cfg.octaves * cfg.scales_per_octave)]


def _box_field(ii: np.ndarray, h: int, w: int, margin: int, r0: int, r1: int, c0: int, c1: int):
    """Box sums over rows [i+r0, i+r1], cols [j+c0, j+c1] for every center in
    the margin-inset grid, via four shifted views of the integral image."""
    i0, i1 = margin, h - margin
    j0, j1 = margin, w - margin
    return (
        ii[i0 + r1 + 1 : i1 + r1 + 1, j0 + c1 + 1 : j1 + c1 + 1]
        - ii[i0 + r0 : i1 + r0, j0 + c1 + 1 : j1 + c1 + 1]
        - ii[i0 + r1 + 1 : i1 + r1 + 1, j0 + c0 : j1 + c0]
        + ii[i0 + r0 : i1 + r0, j0 + c0 : j1 + c0]
    )


def _hessian_response_layer(ii: np.ndarray, h: int, w: int, size: int) -> np.ndarray:
    """|det H| response map at one filter size, zero where the filter overruns."""
    lobe = size // 3
    half = size // 2
    out = np.zeros((h, w))
    if h - 2 * half <= 0 or w - 2 * half <= 0:
        return out
    wing = lobe - 1  # second-derivative filters are 2*lobe-1 wide across the lobes
    inner = lobe // 2
    band_yy = _box_field(ii, h, w, half, -half, half, -wing, wing)
    mid_yy = _box_field(ii, h, w, half, -inner, inner, -wing, wing)
    band_xx = _box_field(ii, h, w, half, -wing, wing, -half, half)
    mid_xx = _box_field(ii, h, w, half, -wing, wing, -inner, inner)
    q_tl = _box_field(ii, h, w, half, -lobe, -1, -lobe, -1)
    q_tr = _box_field(ii, h, w, half, -lobe, -1, 1, lobe)
    q_bl = _box_field(ii, h, w, half, 1, lobe, -lobe, -1)
    q_br = _box_field(ii, h, w, half, 1, lobe, 1, lobe)

    inv_area = 1.0 / (size * size)
    dyy = (band_yy - 3.0 * mid_yy) * inv_area
    dxx = (band_xx - 3.0 * mid_xx) * inv_area
    dxy = (q_tl + q_br - q_tr - q_bl) * inv_area
    det = dxx * dyy - (DXY_WEIGHT * dxy) ** 2
    out[half : h - half, half : w - half] = np.abs(det)
    return out


def detect_fast_hessian(image: np.ndarray, cfg: DetectorConfig | None = None) -> list[Keypoint]:
    """Fast-Hessian keypoints: 3x3x3 maxima of |det H| over the filter-size stack.

    Responses use the box-filter approximation Dxx*Dyy - (0.9*Dxy)^2 on an
    integral image; keypoint scale is 1.2 * filter_size / 9 and locations are
    plain grid maxima (no sub-pixel step).
    """
    img = check_gray(image)
    cfg = (cfg or default_config(FAST_HESSIAN)).validate()
    h, w = img.shape
    if min(h, w) < 24:
        raise ImageTooSmallError(f"detect_fast_hessian needs at least 24x24 pixels, got {h}x{w}")

    ii = to_integral(img)
    sizes = fast_hessian_filter_sizes(cfg)
    stack = np.stack([_hessian_response_layer(ii, h, w, size) for size in sizes])

    footprint = np.ones((3, 3, 3), dtype=bool)
    footprint[1, 1, 1] = False
    neighbor_max = ndimage.maximum_filter(stack, footprint=footprint, mode="nearest")
    mask = stack > neighbor_max
    mask[0] = False
    mask[-1] = False
    mask &= stack >= cfg.contrast_threshold
    margin = cfg.border_margin
    if margin > 0:
        mask[:, :margin, :] = False
        mask[:, h - margin :, :] = False
        mask[:, :, :margin] = False
        mask[:, :, w - margin :] = False

    keypoints = [
        Keypoint(
            x=float(j),
            y=float(i),
            scale=FAST_HESSIAN_BASE_SCALE * sizes[k] / 9.0,
            response=float(stack[k, i, j]),
            detector=FAST_HESSIAN,
        )
        for k, i, j in np.argwhere(mask)
    ]
    return sort_keypoints(keypoints)


def detect(image: np.ndarray, kind: str, cfg: DetectorConfig | None = None) -> list[Keypoint]:
    """Run the named detector ("dog" or "fast_hessian")."""
    if kind == DOG:
        return detect_dog(image, cfg)
    if kind == FAST_HESSIAN:
        return detect_fast_hessian(image, cfg)
    raise ValueError(f"unknown detector kind {kind!r}")


def write_keypoints_csv(path, keypoints) -> None:
    """Dump keypoints as CSV with header x,y,scale,response,detector."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,scale,response,detector\n")
        for kp in keypoints:
            fh.write(f"{kp.x!r},{kp.y!r},{kp.scale!r},{kp.response!r},{kp.detector}\n")
