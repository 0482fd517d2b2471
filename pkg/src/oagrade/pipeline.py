"""Manifest-driven experiment: features, scaling, training, evaluation, bundles."""

from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import scaling
from .errors import BundleError, DataError, ManifestError, ParameterError, UnsupportedVersionError
from .features import DEFAULT_LOG_BASE, DEFAULT_QUANT_BITS, N_TEXTURE, extract_features
from .imagecore import EXPECTED_SIZE, read_image, threshold, to_gray
from .neuralnet import (
    GRADES,
    MlpConfig,
    MlpModel,
    decode_output,
    encode_grade,
    forward,
    init_nguyen_widrow,
    train,
)
from .scaling import ScalerParams

log = logging.getLogger(__name__)

SPLITS = ("train", "validation", "test")
MANIFEST_HEADER = ["path", "grade", "split"]
BUNDLE_VERSION = 1


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    grade: int
    split: str


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        self.root = Path(self.root)
        seen = set()
        for e in self.entries:
            if e.grade not in GRADES:
                raise ManifestError(f"{e.path}: grade {e.grade!r} not in 1..4")
            if e.split not in SPLITS:
                raise ManifestError(f"{e.path}: unknown split {e.split!r}")
            if e.path in seen:
                raise ManifestError(f"duplicate path {e.path!r}")
            seen.add(e.path)

    def split(self, name: str) -> list[ManifestEntry]:
        if name not in SPLITS:
            raise ManifestError(f"unknown split {name!r}")
        return [e for e in self.entries if e.split == name]

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.root / p


def load_manifest(path: str | os.PathLike) -> DatasetManifest:
    """Read a ``path,grade,split`` CSV; relative paths resolve against its directory."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != MANIFEST_HEADER:
        raise ManifestError(f"{path}: line 1: header must be 'path,grade,split'")
    entries = []
    seen = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ManifestError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
        p, grade, split = (c.strip() for c in row)
        if grade not in {"1", "2", "3", "4"}:
            raise ManifestError(f"{path}: line {lineno}: invalid grade {grade!r}")
        if split not in SPLITS:
            raise ManifestError(f"{path}: line {lineno}: invalid split {split!r}")
        if p in seen:
            raise ManifestError(f"{path}: line {lineno}: duplicate path {p!r} (first on line {seen[p]})")
        seen[p] = lineno
        entries.append(ManifestEntry(p, int(grade), split))
    return DatasetManifest(entries, root=path.parent)


def save_manifest(manifest: DatasetManifest, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for e in manifest.entries:
            writer.writerow([e.path, e.grade, e.split])


@dataclass(frozen=True)
class PreprocessingRecord:
    threshold: int = 40
    quant_bits: int = DEFAULT_QUANT_BITS
    log_base: float = DEFAULT_LOG_BASE

    @property
    def n_features(self) -> int:
        return 2**self.quant_bits + N_TEXTURE


def image_features(path: str | os.PathLike, record: PreprocessingRecord) -> np.ndarray:
    """parse -> grayscale -> threshold -> feature vector, for one file."""
    try:
        img = to_gray(read_image(path))
        if (img.width, img.height) != EXPECTED_SIZE:
            log.warning("%s: size %dx%d differs from the expected %dx%d",
                        path, img.width, img.height, *EXPECTED_SIZE)
        return extract_features(threshold(img, record.threshold), record.quant_bits, record.log_base)
    except DataError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def build_dataset(manifest: DatasetManifest, split: str, record: PreprocessingRecord):
    """Unnormalised ``(features, grade)`` pairs of one split, in manifest order."""
    return [(image_features(manifest.resolve(e), record), e.grade) for e in manifest.split(split)]


@dataclass(eq=False)
class ModelBundle:
    config: MlpConfig
    model: MlpModel
    scaler: ScalerParams
    preprocessing: PreprocessingRecord
    version: int = BUNDLE_VERSION

    def __eq__(self, other):
        if not isinstance(other, ModelBundle):
            return NotImplemented
        return (
            self.version == other.version
            and self.config == other.config
            and self.model == other.model
            and self.scaler == other.scaler
            and self.preprocessing == other.preprocessing
        )

    __hash__ = None


def _patterns(scaler: ScalerParams, dataset):
    return [(scaling.apply(scaler, v), np.array(encode_grade(g))) for v, g in dataset]


def train_pipeline(manifest: DatasetManifest, config: MlpConfig,
                   record: PreprocessingRecord | None = None, callback=None):
    """Fit the scaler on the train split, train the network, return ``(bundle, history)``."""
    record = record or PreprocessingRecord()
    if config.n_in != record.n_features:
        raise ParameterError(
            f"network has {config.n_in} inputs but preprocessing yields {record.n_features} features"
        )
    dataset = build_dataset(manifest, "train", record)
    if not dataset:
        raise ManifestError("train split is empty")
    scaler = scaling.fit([v for v, _ in dataset])
    model = init_nguyen_widrow(config)
    model, history = train(model, _patterns(scaler, dataset), callback=callback)
    return ModelBundle(config, model, scaler, record), history


# --- evaluation -------------------------------------------------------------


@dataclass(eq=False)
class EvaluationReport:
    """Rows are the reference grade, columns the predicted grade."""

    confusion: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.confusion)
        if c.shape != (4, 4) or np.any(c < 0) or c.sum() <= 0:
            raise ValueError("confusion must be a non-empty 4x4 matrix of non-negative counts")
        self.confusion = c.astype(np.int64)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return accuracy(self.confusion)

    @property
    def per_grade(self) -> dict[int, int]:
        return {g: int(n) for g, n in zip(GRADES, self.confusion.sum(axis=1))}

    @classmethod
    def from_pairs(cls, truths, predictions) -> "EvaluationReport":
        c = np.zeros((4, 4), dtype=np.int64)
        for t, p in zip(truths, predictions, strict=True):
            c[t - 1, p - 1] += 1
        return cls(c)


def accuracy(confusion) -> float:
    c = np.asarray(confusion)
    return float(np.trace(c)) / float(c.sum())


def render_report(report: EvaluationReport) -> str:
    lines = ["truth \\ predicted  " + "".join(f"{'Grade ' + str(g):>9}" for g in GRADES)]
    for g, row in zip(GRADES, report.confusion):
        lines.append(f"{'Grade ' + str(g):<19}" + "".join(f"{int(n):>9d}" for n in row))
    lines.append(f"accuracy: {report.accuracy:.4f}")
    return "\n".join(lines)


def report_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["truth"] + [f"pred_{g}" for g in GRADES])
    for g, row in zip(GRADES, report.confusion):
        writer.writerow([g] + [int(n) for n in row])
    return buf.getvalue()


def predict_vector(bundle: ModelBundle, features) -> tuple[int, tuple[float, float]]:
    _, y = forward(bundle.model, scaling.apply(bundle.scaler, features))
    return decode_output(y), tuple(float(o) for o in y)


def evaluate(bundle: ModelBundle, manifest: DatasetManifest, split: str) -> EvaluationReport:
    entries = manifest.split(split)
    if not entries:
        raise ManifestError(f"split {split!r} is empty")
    truths, preds = [], []
    for e in entries:
        grade, _ = predict_vector(bundle, image_features(manifest.resolve(e), bundle.preprocessing))
        truths.append(e.grade)
        preds.append(grade)
    return EvaluationReport.from_pairs(truths, preds)


def predict(bundle: ModelBundle, image_path: str | os.PathLike):
    """Decoded grade and the two raw sigmoid outputs for one image file."""
    return predict_vector(bundle, image_features(image_path, bundle.preprocessing))


# --- bundle persistence -----------------------------------------------------

_CONFIG_FIELDS = {
    "n_in": int, "n_hidden": int, "n_out": int, "learning_rate": float,
    "momentum": float, "tolerance": float, "max_epochs": int, "rng_seed": int,
}
_PREP_FIELDS = {"threshold": int, "quant_bits": int, "log_base": float}
_MATRICES = ("hidden_weights", "output_weights", "hidden_delta", "output_delta")


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _vec(values) -> str:
    return " ".join(_f(x) for x in values)


def format_bundle(bundle: ModelBundle) -> str:
    lines = ["# oagrade model bundle", f"format_version = {bundle.version}"]
    for name in _CONFIG_FIELDS:
        value = getattr(bundle.config, name)
        lines.append(f"config.{name} = {_f(value) if isinstance(value, float) else value}")
    for name in _PREP_FIELDS:
        value = getattr(bundle.preprocessing, name)
        lines.append(f"preprocessing.{name} = {_f(value) if isinstance(value, float) else value}")
    lines.append(f"scaler.lower = {_f(bundle.scaler.lower)}")
    lines.append(f"scaler.upper = {_f(bundle.scaler.upper)}")
    lines.append(f"scaler.min = {_vec(bundle.scaler.minimum)}")
    lines.append(f"scaler.max = {_vec(bundle.scaler.maximum)}")
    for name in _MATRICES:
        m = getattr(bundle.model, name)
        lines.append(f"model.{name}.shape = {m.shape[0]} {m.shape[1]}")
        for i, row in enumerate(m):
            lines.append(f"model.{name}.{i} = {_vec(row)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_bundle(bundle: ModelBundle, path: str | os.PathLike) -> None:
    Path(path).write_text(format_bundle(bundle), encoding="ascii")


def _field(fields: dict, key: str, conv):
    if key not in fields:
        raise BundleError(f"missing field {key!r}")
    try:
        return conv(fields.pop(key))
    except ValueError:
        raise BundleError(f"malformed value for field {key!r}") from None


def _floats(text: str) -> np.ndarray:
    return np.array([float(t) for t in text.split()], dtype=np.float64)


def parse_bundle(text: str) -> ModelBundle:
    fields: dict[str, str] = {}
    terminated = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if terminated:
            raise BundleError(f"line {lineno}: content after 'end'")
        if line == "end":
            terminated = True
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise BundleError(f"line {lineno}: expected 'key = value'")
        if key in fields:
            raise BundleError(f"line {lineno}: duplicate field {key!r}")
        fields[key] = value.strip()
        if key == "format_version" and value.strip() != str(BUNDLE_VERSION):
            raise UnsupportedVersionError(
                f"unsupported bundle format version {value.strip()!r} (expected {BUNDLE_VERSION})"
            )
    if "format_version" not in fields:
        raise BundleError("missing field 'format_version'")
    if not terminated:
        raise BundleError("truncated bundle: missing 'end' marker")
    fields.pop("format_version")

    try:
        config = MlpConfig(**{n: _field(fields, f"config.{n}", c) for n, c in _CONFIG_FIELDS.items()})
        prep = PreprocessingRecord(**{n: _field(fields, f"preprocessing.{n}", c) for n, c in _PREP_FIELDS.items()})
        scaler = ScalerParams(
            _field(fields, "scaler.min", _floats),
            _field(fields, "scaler.max", _floats),
            _field(fields, "scaler.lower", float),
            _field(fields, "scaler.upper", float),
        )
        arrays = {}
        for name in _MATRICES:
            rows, cols = _field(fields, f"model.{name}.shape", lambda s: tuple(int(t) for t in s.split()))
            m = np.empty((rows, cols), dtype=np.float64)
            for i in range(rows):
                row = _field(fields, f"model.{name}.{i}", _floats)
                if row.shape != (cols,):
                    raise BundleError(f"field 'model.{name}.{i}' has {row.size} values, expected {cols}")
                m[i] = row
            arrays[name] = m
        model = MlpModel(arrays["hidden_weights"], arrays["output_weights"], config=config,
                         hidden_delta=arrays["hidden_delta"], output_delta=arrays["output_delta"])
    except BundleError:
        raise
    except (ValueError, TypeError, ArithmeticError) as exc:
        raise BundleError(f"invalid bundle content: {exc}") from None
    if fields:
        raise BundleError(f"unknown field {sorted(fields)[0]!r}")
    if scaler.n_features != config.n_in or prep.n_features != config.n_in:
        raise BundleError("scaler, preprocessing and network input sizes disagree")
    return ModelBundle(config, model, scaler, prep)


def load_bundle(path: str | os.PathLike) -> ModelBundle:
    return parse_bundle(Path(path).read_text(encoding="ascii"))

