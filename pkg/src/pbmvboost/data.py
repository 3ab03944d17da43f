"""Multiview datasets: manifest I/O, synthetic generation, MNIST view splitting."""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

__all__ = [
    "DataError",
    "MultiviewDataset",
    "load_manifest",
    "load_class_ids",
    "atomic_write",
    "write_manifest",
    "synth_multiview",
    "split_image_views",
    "load_idx",
    "CENTER_WINDOWS",
]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

# Top-left corners of the four 14x14 windows; every window covers rows/cols 10..17.
CENTER_WINDOWS = ((4, 4), (4, 10), (10, 4), (10, 10))
QUARTER_WINDOWS = ((0, 0), (0, 14), (14, 0), (14, 14))


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class MultiviewDataset:
    """V aligned feature matrices with one +/-1 label per example."""

    views: tuple[np.ndarray, ...]
    labels: np.ndarray
    view_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        views = tuple(np.array(v, dtype=np.float64, copy=True) for v in self.views)
        labels = np.array(self.labels, dtype=np.int64, copy=True).ravel()
        if len(views) == 0:
            raise DataError("a dataset needs at least one view")
        n = labels.shape[0]
        if n == 0:
            raise DataError("a dataset needs at least one example")
        for v, X in enumerate(views):
            if X.ndim != 2:
                raise DataError(f"view {v} is not a 2-D matrix")
            if X.shape[0] != n:
                raise DataError(
                    f"row-count mismatch: view {v} has {X.shape[0]} rows, labels have {n}"
                )
            if X.shape[1] < 1:
                raise DataError(f"view {v} has no features")
            X.setflags(write=False)
        if not np.all((labels == 1) | (labels == -1)):
            raise DataError("labels must be -1 or +1")
        labels.setflags(write=False)
        names = tuple(self.view_names) or tuple(f"view{v}" for v in range(len(views)))
        if len(names) != len(views):
            raise DataError("one name per view is required")
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "view_names", names)

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_samples(self) -> int:
        return self.labels.shape[0]

    def subset(self, index) -> "MultiviewDataset":
        index = np.asarray(index)
        return MultiviewDataset(
            tuple(X[index] for X in self.views), self.labels[index], self.view_names
        )

    def with_labels(self, labels) -> "MultiviewDataset":
        return MultiviewDataset(self.views, labels, self.view_names)


def _read_csv_matrix(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric cell") from None
    if not rows:
        raise DataError(f"{path}: empty view file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DataError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64)


def _read_labels(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.strip()
            if not tok:
                continue
            if tok == "-1":
                out.append(-1)
            elif tok in ("1", "+1"):
                out.append(1)
            else:
                raise DataError(f"{path}:{lineno}: label {tok!r} is not -1 or +1")
    return np.array(out, dtype=np.int64)


def load_manifest(path) -> MultiviewDataset:
    """Read a JSON manifest pointing at one CSV per view plus a labels file.

    Paths inside the manifest are resolved relative to the manifest itself.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    try:
        spec = json.loads(path.read_text())
        view_files = spec["views"]
        label_file = spec["labels"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: invalid manifest ({exc})") from None
    root = path.parent
    views = [_read_csv_matrix(root / f) for f in view_files]
    labels = _read_labels(root / label_file)
    names = spec.get("names") or ()
    return MultiviewDataset(tuple(views), labels, tuple(names))


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-" + path.name)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_manifest(dataset: MultiviewDataset, path, prefix: str = "", class_ids=None) -> Path:
    """Write ``dataset`` as CSV files plus a manifest; returns the manifest path.

    Floats are written with ``repr`` so that reloading is bitwise exact.
    ``class_ids`` optionally records the original multiclass labels under
    the manifest's ``classes`` key.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    view_files = []
    for v, X in enumerate(dataset.views):
        name = f"{prefix}v{v}.csv"
        body = "".join(",".join(repr(float(x)) for x in row) + "\n" for row in X)
        atomic_write(path.parent / name, body)
        view_files.append(name)
    label_name = f"{prefix}labels.csv"
    atomic_write(
        path.parent / label_name,
        "".join(("+1" if y > 0 else "-1") + "\n" for y in dataset.labels),
    )
    manifest = {"views": view_files, "labels": label_name, "names": list(dataset.view_names)}
    if class_ids is not None:
        class_ids = np.asarray(class_ids).ravel()
        if class_ids.shape[0] != dataset.n_samples:
            raise DataError("one class id per example is required")
        class_name = f"{prefix}classes.csv"
        atomic_write(path.parent / class_name, "".join(f"{int(c)}\n" for c in class_ids))
        manifest["classes"] = class_name
    atomic_write(path, json.dumps(manifest, indent=2) + "\n")
    return path


def load_class_ids(path) -> Optional[np.ndarray]:
    """Integer class ids listed under the manifest's optional ``classes`` key."""
    path = Path(path)
    spec = json.loads(path.read_text())
    if "classes" not in spec:
        return None
    cpath = path.parent / spec["classes"]
    if not cpath.is_file():
        raise DataError(f"missing file: {cpath}")
    try:
        ids = [int(tok) for tok in cpath.read_text().split()]
    except ValueError:
        raise DataError(f"{cpath}: class ids must be integers") from None
    return np.array(ids, dtype=np.int64)


def synth_multiview(n: int, V: int, noise_per_view: Sequence[float], seed: int) -> MultiviewDataset:
    """Generate ``V`` noisy views of a shared uniform +/-1 label.

    Coordinate 0 of view ``v`` is ``y + sigma_v * N(0, 1)`` with ``sigma_v`` set so
    that its sign disagrees with ``y`` with probability ``noise_per_view[v]``;
    coordinate 1 is pure Gaussian noise. The best threshold on view ``v``
    therefore errs with probability ``noise_per_view[v]``.
    """
    if V < 1 or n < 1:
        raise DataError("n and V must be positive")
    noise = np.asarray(noise_per_view, dtype=np.float64)
    if noise.shape != (V,):
        raise DataError(f"expected {V} noise levels, got {noise.shape}")
    if np.any(noise < 0) or np.any(noise >= 0.5):
        raise DataError("noise levels must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    y = rng.choice(np.array([-1, 1]), size=n)
    views = []
    for p in noise:
        z = rng.standard_normal((n, 2))
        if p == 0:
            # noiseless: separated by a margin around zero
            signal = y * (1.0 + np.abs(z[:, 0]))
        else:
            sigma = -1.0 / norm.ppf(p)
            signal = y + sigma * z[:, 0]
        views.append(np.column_stack([signal, z[:, 1]]))
    return MultiviewDataset(tuple(views), y)


def _windows(mode: str):
    if mode == "quarters":
        return QUARTER_WINDOWS
    if mode == "center_overlap":
        return CENTER_WINDOWS
    raise DataError(f"unknown split mode {mode!r}")


def split_image_views(images, labels_raw, positive_class, mode: str = "quarters") -> MultiviewDataset:
    """Cut 28x28 images into four 14x14 views and relabel one-vs-all.

    ``quarters`` gives the disjoint quadrants; ``center_overlap`` gives four
    windows that all share the central 8x8 block.
    """
    images = np.asarray(images)
    labels_raw = np.asarray(labels_raw).ravel()
    if images.ndim != 3 or images.shape[1:] != (28, 28):
        raise DataError(f"expected n x 28 x 28 images, got shape {images.shape}")
    if images.shape[0] == 0:
        raise DataError("no images")
    if labels_raw.shape[0] != images.shape[0]:
        raise DataError("image and label counts differ")
    scaled = images.astype(np.float64) / 255.0
    views = tuple(
        scaled[:, r : r + 14, c : c + 14].reshape(len(scaled), 196) for r, c in _windows(mode)
    )
    y = np.where(labels_raw == positive_class, 1, -1)
    names = ("top_left", "top_right", "bottom_left", "bottom_right")
    if mode == "center_overlap":
        names = tuple("center_" + s for s in names)
    return MultiviewDataset(views, y, names)


def window_pixel_indices(mode: str) -> list[np.ndarray]:
    """Flat pixel indices (row-major over 28x28) covered by each view."""
    grid = np.arange(784).reshape(28, 28)
    return [grid[r : r + 14, c : c + 14].ravel() for r, c in _windows(mode)]


def load_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Parse an uncompressed MNIST IDX image/label pair."""
    img = Path(images_path).read_bytes()
    lab = Path(labels_path).read_bytes()
    if len(img) < 16:
        raise DataError(f"{images_path}: truncated header")
    magic, count, rows, cols = struct.unpack(">IIII", img[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise DataError(f"{images_path}: bad magic 0x{magic:08x}")
    if len(img) - 16 < count * rows * cols:
        raise DataError(f"{images_path}: truncated pixel data")
    if len(lab) < 8:
        raise DataError(f"{labels_path}: truncated header")
    lmagic, lcount = struct.unpack(">II", lab[:8])
    if lmagic != IDX_LABELS_MAGIC:
        raise DataError(f"{labels_path}: bad magic 0x{lmagic:08x}")
    if len(lab) - 8 < lcount:
        raise DataError(f"{labels_path}: truncated label data")
    if lcount != count:
        raise DataError(f"count mismatch: {count} images, {lcount} labels")
    images = np.frombuffer(img, dtype=np.uint8, count=count * rows * cols, offset=16)
    labels = np.frombuffer(lab, dtype=np.uint8, count=count, offset=8)
    return images.reshape(count, rows, cols).copy(), labels.copy()
