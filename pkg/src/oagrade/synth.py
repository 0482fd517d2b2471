"""Deterministic synthetic stand-in for the hand radiograph corpus.

Every image is a dark noisy background (all values below 40) with one
elliptical foreground region whose gray level, noise spread and number of
small bright blobs depend on the grade.  Files are binary PGM (P5) named
``g<grade>_<split>_<index>.pgm``; a ``manifest.csv`` lists them.

Each image draws from its own stream ``make_rng(seed, image_stream(...))``,
so a file's content depends only on the seed and its (split, grade, index).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imagecore import GrayImage, write_image
from .pipeline import SPLITS, DatasetManifest, ManifestEntry, save_manifest
from .rng import make_rng

BACKGROUND_MAX = 35
FOREGROUND_MIN = 45
BLOB_LEVEL = 235


@dataclass(frozen=True)
class GradeParams:
    mean: float
    spread: float
    blobs: int


DEFAULT_GRADE_PARAMS = (
    GradeParams(mean=95.0, spread=8.0, blobs=1),
    GradeParams(mean=125.0, spread=10.0, blobs=3),
    GradeParams(mean=155.0, spread=12.0, blobs=5),
    GradeParams(mean=185.0, spread=14.0, blobs=7),
)


@dataclass(frozen=True)
class SynthSpec:
    per_grade_train: int = 9
    per_grade_validation: int = 5
    per_grade_test: int = 3
    width: int = 200
    height: int = 150
    seed: int = 0
    grade_params: tuple[GradeParams, ...] = field(default=DEFAULT_GRADE_PARAMS)

    def __post_init__(self):
        if min(self.per_grade_train, self.per_grade_validation, self.per_grade_test) < 0:
            raise ValueError("per-grade counts must be non-negative")
        if self.width < 8 or self.height < 8:
            raise ValueError("images must be at least 8x8")
        if len(self.grade_params) != 4:
            raise ValueError("need generative parameters for exactly four grades")
        if len(set(self.grade_params)) != 4:
            raise ValueError("grade parameter tuples must be pairwise distinct")

    def count(self, split: str) -> int:
        return {
            "train": self.per_grade_train,
            "validation": self.per_grade_validation,
            "test": self.per_grade_test,
        }[split]


def image_stream(split: str, grade: int, index: int) -> int:
    """Stream number of one image: ``1 + ((split_no * 4 + grade - 1) << 20) + index``."""
    return 1 + ((SPLITS.index(split) * 4 + grade - 1) << 20) + index


def foreground_mask(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    cx = width / 2 + rng.uniform(-0.08, 0.08) * width
    cy = height / 2 + rng.uniform(-0.08, 0.08) * height
    rx = rng.uniform(0.28, 0.38) * width
    ry = rng.uniform(0.28, 0.38) * height
    yy, xx = np.mgrid[0:height, 0:width]
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def render(rng: np.random.Generator, params: GradeParams, width: int, height: int):
    """Draw one image; returns ``(GrayImage, foreground mask)``."""
    img = rng.integers(0, BACKGROUND_MAX + 1, size=(height, width)).astype(np.float64)
    mask = foreground_mask(rng, width, height)
    fg = rng.normal(params.mean, params.spread, size=(height, width))
    img[mask] = fg[mask]

    rows, cols = np.nonzero(mask)
    yy, xx = np.mgrid[0:height, 0:width]
    scale = min(width, height)
    for _ in range(params.blobs):
        k = rng.integers(len(rows))
        ry, rx = rng.uniform(0.02, 0.05, size=2) * scale
        blob = (((xx - cols[k]) / max(rx, 1.0)) ** 2 + ((yy - rows[k]) / max(ry, 1.0)) ** 2 <= 1.0) & mask
        img[blob] = BLOB_LEVEL + rng.normal(0.0, 6.0, size=int(blob.sum()))

    img[mask] = np.clip(img[mask], FOREGROUND_MIN, 255)
    return GrayImage(np.rint(img).astype(np.uint8)), mask


def generate(spec: SynthSpec, out_dir: str | os.PathLike, manifest_name: str = "manifest.csv") -> DatasetManifest:
    """Write every image of ``spec`` plus a manifest into ``out_dir``.

    Within a split, entries interleave the grades (1, 2, 3, 4, 1, 2, ...).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for split in SPLITS:
        for index in range(spec.count(split)):
            for grade in (1, 2, 3, 4):
                rng = make_rng(spec.seed, image_stream(split, grade, index))
                img, _ = render(rng, spec.grade_params[grade - 1], spec.width, spec.height)
                name = f"g{grade}_{split}_{index:03d}.pgm"
                write_image(img, out / name)
                entries.append(ManifestEntry(name, grade, split))
    manifest = DatasetManifest(entries, root=out)
    save_manifest(manifest, out / manifest_name)
    return manifest
