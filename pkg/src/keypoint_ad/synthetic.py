"""Synthetic disc samples for benchmarks and pipeline demos.

OK samples are soft-edged discs with mild low-contrast texture; NOK samples
additionally carry one of three defect kinds mirroring the real classes:
a rim bite (incomplete), small high-contrast spots (strange object), or a
broad luminance shift (color defect). Defect contrast is sized so defect
keypoint responses dominate the texture responses by a wide margin.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import (
    CLASS_NOK_COLOR,
    CLASS_NOK_INCOMPLETE,
    CLASS_NOK_STRANGE,
    CLASS_OK,
    NOK_CLASSES,
    save_gray_png,
)
from .images import gaussian_blur

BACKGROUND = 0.40
DISC_LEVEL = 0.62
TEXTURE_AMPLITUDE = 0.04
SPOT_DARK = 0.02
SPOT_BRIGHT = 0.99
BITE_LEVEL = 0.08


def _smooth_noise(rng: np.random.Generator, size: int, sigma: float) -> np.ndarray:
    noise = gaussian_blur(rng.standard_normal((size, size)), sigma)
    peak = np.abs(noise).max()
    return noise / peak if peak > 0 else noise


def _soft_disc(size: int, cx: float, cy: float, radius: float, edge: float = 1.5) -> np.ndarray:
    """Anti-aliased disc membership in [0, 1]."""
    yy, xx = np.mgrid[0:size, 0:size]
    dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    return np.clip((radius - dist) / edge + 0.5, 0.0, 1.0)


def synthetic_sample(rng: np.random.Generator, category: str = CLASS_OK, size: int = 96) -> np.ndarray:
    """One grayscale sample of the requested class."""
    cx = size / 2 + rng.uniform(-2.0, 2.0)
    cy = size / 2 + rng.uniform(-2.0, 2.0)
    radius = 0.32 * size + rng.uniform(-2.0, 2.0)

    disc = _soft_disc(size, cx, cy, radius)
    texture = TEXTURE_AMPLITUDE * _smooth_noise(rng, size, sigma=3.0)
    background = BACKGROUND + 0.015 * _smooth_noise(rng, size, sigma=2.0)
    img = background * (1.0 - disc) + (DISC_LEVEL + texture) * disc

    if category == CLASS_NOK_INCOMPLETE:
        # bite: dark broken chunk centered on the rim
        angle = rng.uniform(0.0, 2.0 * np.pi)
        bite_r = rng.uniform(0.25, 0.45) * radius
        bx = cx + radius * np.cos(angle)
        by = cy + radius * np.sin(angle)
        bite = _soft_disc(size, bx, by, bite_r)
        img = img * (1.0 - bite) + BITE_LEVEL * bite
    elif category == CLASS_NOK_STRANGE:
        # small high-contrast spots inside the disc
        for _ in range(rng.integers(1, 4)):
            spot_r = rng.uniform(4.0, 6.5)
            rho = rng.uniform(0.0, max(radius - spot_r - 3.0, 1.0))
            angle = rng.uniform(0.0, 2.0 * np.pi)
            sx = cx + rho * np.cos(angle)
            sy = cy + rho * np.sin(angle)
            level = SPOT_DARK if rng.random() < 0.5 else SPOT_BRIGHT
            spot = _soft_disc(size, sx, sy, spot_r, edge=1.0)
            img = img * (1.0 - spot) + level * spot
    elif category == CLASS_NOK_COLOR:
        # broad luminance shift patch
        rho = rng.uniform(0.0, 0.5 * radius)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        px = cx + rho * np.cos(angle)
        py = cy + rho * np.sin(angle)
        patch_r = rng.uniform(0.25, 0.4) * radius
        shift = rng.choice([-0.35, 0.33])
        patch = _soft_disc(size, px, py, patch_r, edge=1.5) * disc
        img = img + shift * patch
    elif category != CLASS_OK:
        raise ValueError(f"unknown class {category!r}")

    return np.clip(img, 0.0, 1.0)


def synthetic_samples(n_ok: int, n_nok: int, seed: int = 0, size: int = 96):
    """(id, category, image) triples: n_ok OK plus n_nok NOK cycling the defect kinds."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_ok):
        out.append((f"ok_{i:04d}", CLASS_OK, synthetic_sample(rng, CLASS_OK, size)))
    for i in range(n_nok):
        category = NOK_CLASSES[i % len(NOK_CLASSES)]
        out.append((f"nok_{i:04d}", category, synthetic_sample(rng, category, size)))
    return out


def write_synthetic_tree(root, n_ok: int, n_nok: int, seed: int = 0, size: int = 96) -> Path:
    """Write PNGs under the standard <root>/<class_dir>/ layout; returns root."""
    root = Path(root)
    dirs = {
        CLASS_OK: root / "ok",
        CLASS_NOK_INCOMPLETE: root / "nok_incomplete",
        CLASS_NOK_STRANGE: root / "nok_strange",
        CLASS_NOK_COLOR: root / "nok_color",
    }
    for path in dirs.values():
        path.mkdir(parents=True, exist_ok=True)
    for sample_id, category, image in synthetic_samples(n_ok, n_nok, seed=seed, size=size):
        save_gray_png(dirs[category] / f"{sample_id}.png", image)
    return root
