"""Sample ingestion, preprocessing and seeded train/test splits.

Directory layout convention: <root>/<class_dir>/*.png with class_dir one of
ok, nok_incomplete, nok_strange, nok_color. A manifest CSV (id,path,class,
rotation[,split]) is accepted everywhere a directory is.

Splits are drawn without replacement from the rotation-augmented pool with
group-level disjointness: all four rotations of one original stay on the
same side of the train/test boundary unless explicitly disabled.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .descriptor import LABEL_NOK, LABEL_OK
from .images import check_gray, luminance, rotate90

logger = logging.getLogger(__name__)

CLASS_OK = "OK"
CLASS_NOK_INCOMPLETE = "NOK_incomplete"
CLASS_NOK_STRANGE = "NOK_strange_object"
CLASS_NOK_COLOR = "NOK_color"
NOK_CLASSES = (CLASS_NOK_INCOMPLETE, CLASS_NOK_STRANGE, CLASS_NOK_COLOR)
ALL_CLASSES = (CLASS_OK,) + NOK_CLASSES

CLASS_DIRS = {
    "ok": CLASS_OK,
    "nok_incomplete": CLASS_NOK_INCOMPLETE,
    "nok_strange": CLASS_NOK_STRANGE,
    "nok_color": CLASS_NOK_COLOR,
}

ROTATION_SUFFIX = {0: "", 90: "_r90", 180: "_r180", 270: "_r270"}


class EmptyForegroundError(ValueError):
    """Otsu mask found no foreground pixels."""


class InfeasibleSplitError(ValueError):
    """Requested split counts or ratios cannot be satisfied."""


@dataclass(frozen=True)
class SampleRecord:
    id: str
    path: str
    category: str            # OK / NOK_incomplete / NOK_strange_object / NOK_color
    rotation: int = 0        # degrees, one of 0/90/180/270

    def __post_init__(self):
        if self.category not in ALL_CLASSES:
            raise ValueError(f"unknown class {self.category!r}")
        if self.rotation not in ROTATION_SUFFIX:
            raise ValueError(f"rotation must be one of 0/90/180/270, got {self.rotation}")

    @property
    def stem(self) -> str:
        """Id of the unrotated original this sample derives from."""
        for deg, suffix in ROTATION_SUFFIX.items():
            if deg and self.id.endswith(suffix):
                return self.id[: -len(suffix)]
        return self.id

    @property
    def label(self) -> str:
        return LABEL_OK if self.category == CLASS_OK else LABEL_NOK


@dataclass(frozen=True)
class SplitSpec:
    train_ok: int
    train_nok: int
    test_ok: int
    test_nok: int
    nok_ratio: tuple[float, float, float] = (0.4, 0.3, 0.3)
    seed: int = 0
    group_disjoint: bool = True
    from_originals: bool = False

    def __post_init__(self):
        for name in ("train_ok", "train_nok", "test_ok", "test_nok"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if abs(sum(self.nok_ratio) - 1.0) > 1e-9:
            raise ValueError(f"nok_ratio must sum to 1, got {self.nok_ratio}")

    def test_nok_counts(self) -> dict[str, int]:
        """Per-subclass test NOK quotas; the ratio must split the count exactly."""
        counts = {}
        for cls, frac in zip(NOK_CLASSES, self.nok_ratio):
            exact = self.test_nok * frac
            rounded = round(exact)
            if abs(exact - rounded) > 1e-9:
                raise InfeasibleSplitError(
                    f"nok_ratio {self.nok_ratio} does not divide test_nok={self.test_nok} exactly"
                )
            counts[cls] = int(rounded)
        return counts


# ---------------------------------------------------------------------------
# image loading and preprocessing


def load_gray(path) -> np.ndarray:
    """Read a PNG/BMP raster and convert to grayscale in [0, 1]."""
    with Image.open(path) as img:
        mode = img.mode
        if mode not in ("L", "RGB", "RGBA"):
            img = img.convert("RGB")
        arr = np.asarray(img)
    return check_gray(luminance(arr))


def save_gray_png(path, image: np.ndarray) -> None:
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.round(arr * 255.0).astype(np.uint8), mode="L").save(path)


def otsu_threshold(gray: np.ndarray) -> float:
    """Otsu's threshold maximizing between-class variance on a 256-bin histogram.

    Ties (a flat plateau between well-separated modes) resolve to the middle
    of the plateau so single-valued classes never sit on the threshold.
    """
    img = check_gray(gray)
    hist, edges = np.histogram(img, bins=256, range=(0.0, 1.0))
    total = hist.sum()
    centers = 0.5 * (edges[:-1] + edges[1:])
    weight_bg = np.cumsum(hist)
    weight_fg = total - weight_bg
    sum_bg = np.cumsum(hist * centers)
    total_sum = sum_bg[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_bg = sum_bg / weight_bg
        mean_fg = (total_sum - sum_bg) / weight_fg
        between = weight_bg * weight_fg * (mean_bg - mean_fg) ** 2
    between = np.where(np.isfinite(between), between, -1.0)
    peak = between.max()
    ties = np.flatnonzero(between >= peak - 1e-12 * max(peak, 1.0))
    k = int(ties[len(ties) // 2])
    return float(edges[k + 1])


def crop_to_bbox(image: np.ndarray, pad: int = 2, invert: bool = False) -> np.ndarray:
    """Grayscale foreground crop: Otsu mask, largest connected component,
    tight bounding box padded by ``pad`` pixels and clamped to the frame.

    ``invert`` selects dark-on-light foregrounds.
    """
    gray = luminance(image) if np.asarray(image).ndim == 3 else check_gray(image)
    thr = otsu_threshold(gray)
    mask = gray < thr if invert else gray > thr
    if not mask.any():
        raise EmptyForegroundError("foreground mask is empty")
    labeled, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    sizes = ndimage.sum_labels(np.ones_like(gray), labeled, index=np.arange(1, count + 1))
    biggest = int(np.argmax(sizes)) + 1
    rows, cols = np.nonzero(labeled == biggest)
    h, w = gray.shape
    r0 = max(rows.min() - pad, 0)
    r1 = min(rows.max() + pad, h - 1)
    c0 = max(cols.min() - pad, 0)
    c1 = min(cols.max() + pad, w - 1)
    return gray[r0 : r1 + 1, c0 : c1 + 1].copy()


def augment_rotations(sample_id: str, image: np.ndarray) -> list[tuple[str, np.ndarray]]:
    """The original plus its three exact 90-degree rotations."""
    img = check_gray(image)
    return [
        (sample_id + ROTATION_SUFFIX[deg], rotate90(img, deg // 90))
        for deg in (0, 90, 180, 270)
    ]


def augment_records(records) -> list[SampleRecord]:
    """Record-level rotation augmentation: 4x the originals, ids suffixed."""
    out = []
    for rec in records:
        if rec.rotation != 0:
            raise ValueError(f"can only augment unrotated originals, got {rec.id}")
        for deg, suffix in ROTATION_SUFFIX.items():
            out.append(
                SampleRecord(id=rec.id + suffix, path=rec.path, category=rec.category, rotation=deg)
            )
    return out


def load_sample_image(record: SampleRecord, crop: bool = False, invert: bool = False) -> np.ndarray:
    img = load_gray(record.path)
    if crop:
        img = crop_to_bbox(img, invert=invert)
    if record.rotation:
        img = rotate90(img, record.rotation // 90)
    return img


# ---------------------------------------------------------------------------
# ingestion


def scan_image_root(root) -> list[SampleRecord]:
    """Collect originals from the <root>/<class_dir>/*.png|bmp layout."""
    root = Path(root)
    records = []
    for dir_name in sorted(CLASS_DIRS):
        class_dir = root / dir_name
        if not class_dir.is_dir():
            continue
        category = CLASS_DIRS[dir_name]
        for path in sorted(class_dir.iterdir()):
            if path.suffix.lower() not in (".png", ".bmp"):
                continue
            records.append(
                SampleRecord(id=f"{dir_name}_{path.stem}", path=str(path), category=category)
            )
    if not records:
        raise FileNotFoundError(f"no class directories with images under {root}")
    return records


_CLASS_ALIASES = {**CLASS_DIRS, **{cls: cls for cls in ALL_CLASSES}}
_CLASS_PREFIX = {cls: dir_name for dir_name, cls in CLASS_DIRS.items()}


def read_path_class_listing(path) -> list[SampleRecord]:
    """Alternative ingestion format: CSV with header path,class (originals only)."""
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != ["path", "class"]:
            raise ValueError(f"expected header path,class in {path}")
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            file_path, raw_class = line.split(",", 1)
            category = _CLASS_ALIASES.get(raw_class.strip())
            if category is None:
                raise ValueError(f"unknown class {raw_class!r} in {path}")
            sample_id = f"{_CLASS_PREFIX[category]}_{Path(file_path).stem}"
            if sample_id in seen:
                raise ValueError(f"duplicate sample id {sample_id!r} derived from {path}")
            seen.add(sample_id)
            records.append(SampleRecord(id=sample_id, path=file_path.strip(), category=category))
    if not records:
        raise ValueError(f"empty listing {path}")
    return records


def load_records(source) -> list[SampleRecord]:
    """Originals from either a class-directory root or a path,class listing CSV."""
    source = Path(source)
    if source.is_dir():
        return scan_image_root(source)
    return read_path_class_listing(source)


def write_manifest(path, records, splits: dict[str, str] | None = None,
                   header_comments: list[str] | None = None) -> None:
    """Manifest CSV id,path,class,rotation,split with # comment header lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_comments or []:
            fh.write(f"# {line}\n")
        fh.write("id,path,class,rotation,split\n")
        for rec in records:
            split = (splits or {}).get(rec.id, "")
            fh.write(f"{rec.id},{rec.path},{rec.category},{rec.rotation},{split}\n")


def read_manifest(path) -> tuple[list[SampleRecord], dict[str, str]]:
    records, splits = [], {}
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                expected = ["id", "path", "class", "rotation"]
                if header[: len(expected)] != expected:
                    raise ValueError(f"malformed manifest header in {path}")
                continue
            cells = line.split(",")
            rec = SampleRecord(id=cells[0], path=cells[1], category=cells[2], rotation=int(cells[3]))
            records.append(rec)
            if len(cells) > 4 and cells[4]:
                splits[rec.id] = cells[4]
    if header is None:
        raise ValueError(f"empty manifest {path}")
    return records, splits


# ---------------------------------------------------------------------------
# split construction


@dataclass
class SplitResult:
    train: list[SampleRecord]
    test: list[SampleRecord]

    def split_map(self) -> dict[str, str]:
        out = {rec.id: "train" for rec in self.train}
        out.update({rec.id: "test" for rec in self.test})
        return out


def _stem_groups(records) -> dict[str, list[SampleRecord]]:
    groups: dict[str, list[SampleRecord]] = {}
    for rec in records:
        groups.setdefault(rec.stem, []).append(rec)
    return groups


def _take(rng: np.random.Generator, pool: list[SampleRecord], count: int, what: str) -> list[SampleRecord]:
    if count > len(pool):
        raise InfeasibleSplitError(f"need {count} {what} samples, pool has {len(pool)}")
    if count == 0:
        return []
    picked = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in sorted(picked)]


def build_splits(records, spec: SplitSpec) -> SplitResult:
    """Seeded OK/NOK split with per-subclass test NOK quotas.

    Test pools are reserved stem-by-stem (keeping rotation siblings together)
    before sampling, so no augmented rotation of a test original can appear
    in train; set ``group_disjoint=False`` for plain sample-level sampling.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.from_originals:
        records = [rec for rec in records if rec.rotation == 0]
    by_class: dict[str, list[SampleRecord]] = {cls: [] for cls in ALL_CLASSES}
    for rec in records:
        by_class[rec.category].append(rec)
    quotas = spec.test_nok_counts()

    def reserve_test_pool(pool: list[SampleRecord], count: int, what: str):
        """Split a class pool into (test_pool, train_pool) honoring stem groups."""
        if not spec.group_disjoint:
            return list(pool), list(pool)  # same pool; sample-level exclusion happens later
        groups = _stem_groups(pool)
        stems = sorted(groups)
        order = rng.permutation(len(stems))
        test_pool: list[SampleRecord] = []
        taken = set()
        for idx in order:
            if len(test_pool) >= count:
                break
            stem = stems[idx]
            test_pool.extend(groups[stem])
            taken.add(stem)
        if len(test_pool) < count:
            raise InfeasibleSplitError(f"need {count} test {what} samples, class pool has {len(pool)}")
        train_pool = [rec for stem in stems if stem not in taken for rec in groups[stem]]
        return test_pool, train_pool

    # fixed draw order keeps splits reproducible from (records, spec) alone
    ok_test_pool, ok_train_pool = reserve_test_pool(by_class[CLASS_OK], spec.test_ok, "OK")
    test_ok = _take(rng, ok_test_pool, spec.test_ok, "test OK")
    nok_test, nok_train_pool = [], []
    for cls in NOK_CLASSES:
        cls_test_pool, cls_train_pool = reserve_test_pool(by_class[cls], quotas[cls], cls)
        nok_test.extend(_take(rng, cls_test_pool, quotas[cls], f"test {cls}"))
        nok_train_pool.extend(cls_train_pool)

    if spec.group_disjoint:
        train_ok = _take(rng, ok_train_pool, spec.train_ok, "train OK")
        train_nok = _take(rng, nok_train_pool, spec.train_nok, "train NOK")
    else:
        test_ids = {rec.id for rec in test_ok} | {rec.id for rec in nok_test}
        ok_rest = [rec for rec in by_class[CLASS_OK] if rec.id not in test_ids]
        nok_rest = [rec for cls in NOK_CLASSES for rec in by_class[cls] if rec.id not in test_ids]
        train_ok = _take(rng, ok_rest, spec.train_ok, "train OK")
        train_nok = _take(rng, nok_rest, spec.train_nok, "train NOK")

    return SplitResult(train=train_ok + train_nok, test=test_ok + nok_test)
