"""Dataset ingestion from headered CSV exports, and a synthetic generator.

A manifest JSON isolates the per-dataset layout: which columns form which
cluster, where the label lives, and whether each file is one sample or one
long stream to window.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .series import SeriesSegment, segment_from_arrays, window_segments

log = logging.getLogger(__name__)

GROUPING_MODES = ("per_file", "stream")


@dataclass(frozen=True)
class ClusterSchema:
    name: str
    channels: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= len(self.channels) <= 3:
            raise ConfigError(
                f"cluster {self.name!r} must list 1-3 channel columns, "
                f"got {len(self.channels)}"
            )


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    clusters: tuple[ClusterSchema, ...]
    label_column: str
    mode: str = "per_file"
    sampling_rate: float | None = None  # metadata only

    def __post_init__(self):
        if not self.clusters:
            raise ConfigError("manifest needs at least one cluster")
        if self.mode not in GROUPING_MODES:
            raise ConfigError(f"mode must be one of {GROUPING_MODES}, got {self.mode!r}")
        if not self.label_column:
            raise ConfigError("manifest needs a label_column")

    @property
    def channel_columns(self) -> list[str]:
        return [ch for cl in self.clusters for ch in cl.channels]


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    try:
        clusters = tuple(
            ClusterSchema(name=c["name"], channels=tuple(c["channels"]))
            for c in raw["clusters"]
        )
        root = Path(raw.get("root", "."))
        if not root.is_absolute():
            root = path.parent / root
        return DatasetManifest(
            root=root,
            clusters=clusters,
            label_column=raw["label_column"],
            mode=raw.get("mode", "per_file"),
            sampling_rate=raw.get("sampling_rate"),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"manifest {path} is missing field {exc}") from exc


def _read_csv_columns(path: Path, channel_cols: list[str], label_col: str):
    """Parse one CSV: float arrays per channel column plus the label value."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return None, None
        header = [h.strip() for h in header]
        positions = {}
        for col in channel_cols + [label_col]:
            if col not in header:
                raise DataError(f"{path}: missing column {col!r}")
            positions[col] = header.index(col)
        columns: list[list[float]] = [[] for _ in channel_cols]
        label = None
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            for k, col in enumerate(channel_cols):
                cell = row[positions[col]] if positions[col] < len(row) else ""
                try:
                    columns[k].append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_num}, column {col!r}: "
                        f"non-numeric cell {cell!r}"
                    ) from None
            cell = row[positions[label_col]] if positions[label_col] < len(row) else ""
            value = cell.strip()
            if not value:
                raise DataError(f"{path}: row {row_num}: empty label")
            if label is None:
                label = value
            elif label != value:
                raise DataError(
                    f"{path}: row {row_num}: label changes from {label!r} to "
                    f"{value!r}; one label per file is required"
                )
    if label is None:
        return None, None
    return [np.array(col) for col in columns], label


def load_csv_dataset(
    manifest: DatasetManifest,
    window_len: int | None = None,
    overlap: int = 0,
) -> list[SeriesSegment]:
    """Load every *.csv under the manifest root into labeled segments.

    Stream mode cuts each file into non-overlapping (or overlapping) windows;
    per-file mode yields one segment per file. Empty files are skipped with a
    warning.
    """
    files = sorted(manifest.root.glob("*.csv"))
    if not files:
        raise DataError(f"no CSV files under {manifest.root}")
    if manifest.mode == "stream" and window_len is None:
        raise ConfigError("stream mode requires a window length (config 'window.length')")
    channel_cols = manifest.channel_columns
    dims = [len(cl.channels) for cl in manifest.clusters]
    segments: list[SeriesSegment] = []
    for path in files:
        columns, label = _read_csv_columns(path, channel_cols, manifest.label_column)
        if columns is None:
            log.warning("%s: no data rows, skipping", path)
            continue
        arrays = []
        pos = 0
        for q in dims:
            arrays.append(np.stack(columns[pos : pos + q]))
            pos += q
        try:
            segment = segment_from_arrays(arrays, label=label, source_id=path.stem)
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from exc
        if manifest.mode == "stream":
            segments.extend(window_segments(segment, window_len, overlap))
        else:
            segments.append(segment)
    return segments


@dataclass(frozen=True)
class ClassRecipe:
    """Signal recipe for one synthetic class."""

    frequency: float  # cycles per window
    amplitude: float = 1.0
    noise_sigma: float = 0.0
    name: str | None = None

    def __post_init__(self):
        if self.frequency <= 0 or self.amplitude <= 0 or self.noise_sigma < 0:
            raise ConfigError(f"invalid class recipe: {self}")


@dataclass(frozen=True)
class SynthSpec:
    cluster_dims: tuple[int, ...]
    length: int
    samples_per_class: int
    recipes: tuple[ClassRecipe, ...]
    seed: int = 0

    def __post_init__(self):
        if not self.cluster_dims or any(not 1 <= q <= 3 for q in self.cluster_dims):
            raise ConfigError(f"cluster_dims must each be 1-3, got {self.cluster_dims}")
        if self.length < 8:
            raise ConfigError(f"length must be >= 8, got {self.length}")
        if self.samples_per_class < 1:
            raise ConfigError("samples_per_class must be >= 1")
        if len(self.recipes) < 2:
            raise ConfigError("need at least 2 class recipes")
        keys = [(r.frequency, r.amplitude, r.noise_sigma) for r in self.recipes]
        if len(set(keys)) != len(keys):
            raise ConfigError("class recipes must be pairwise distinct")

    @property
    def num_classes(self) -> int:
        return len(self.recipes)

    def class_name(self, k: int) -> str:
        return self.recipes[k].name or f"class{k}"


def load_synth_spec(path) -> SynthSpec:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read synth spec {path}: {exc}") from exc
    try:
        recipes = tuple(
            ClassRecipe(
                frequency=float(r["frequency"]),
                amplitude=float(r.get("amplitude", 1.0)),
                noise_sigma=float(r.get("noise_sigma", 0.0)),
                name=r.get("name"),
            )
            for r in raw["recipes"]
        )
        declared = raw.get("num_classes")
        if declared is not None and int(declared) != len(recipes):
            raise ConfigError(
                f"synth spec {path}: num_classes={declared} but {len(recipes)} recipes"
            )
        return SynthSpec(
            cluster_dims=tuple(int(q) for q in raw["cluster_dims"]),
            length=int(raw["length"]),
            samples_per_class=int(raw["samples_per_class"]),
            recipes=recipes,
            seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"synth spec {path} is invalid: {exc}") from exc


def generate_synthetic(spec: SynthSpec) -> list[SeriesSegment]:
    """Sinusoid-per-class segments with per-channel phase offsets plus noise.

    Deterministic for a fixed seed: one generator drives all noise draws in
    class-major, sample-major order.
    """
    rng = np.random.default_rng(spec.seed)
    t = np.arange(spec.length, dtype=np.float64)
    segments = []
    for k, recipe in enumerate(spec.recipes):
        label = spec.class_name(k)
        omega = 2.0 * math.pi * recipe.frequency / spec.length
        for m in range(spec.samples_per_class):
            arrays = []
            g = 0
            for q in spec.cluster_dims:
                cluster = np.empty((q, spec.length))
                for j in range(q):
                    phase = g * math.pi / 4.0
                    cluster[j] = recipe.amplitude * np.sin(omega * t + phase)
                    if recipe.noise_sigma > 0:
                        cluster[j] += rng.normal(0.0, recipe.noise_sigma, spec.length)
                    g += 1
                arrays.append(cluster)
            segments.append(
                segment_from_arrays(arrays, label=label, source_id=f"{label}_s{m:04d}")
            )
    return segments


def write_synthetic_csv(spec: SynthSpec, out_dir) -> Path:
    """Materialize a synthetic dataset as per-sample CSVs plus a manifest.

    Returns the manifest path, ready for the encode command.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    col_names = []
    clusters = []
    axes = "xyz"
    for i, q in enumerate(spec.cluster_dims):
        names = tuple(f"c{i}_{axes[j]}" for j in range(q))
        clusters.append({"name": f"cluster{i}", "channels": list(names)})
        col_names.extend(names)
    for segment in generate_synthetic(spec):
        rows = np.column_stack([v for _, _, v in segment.iter_channels()])
        path = out_dir / f"{segment.source_id}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(col_names + ["label"])
            for row in rows:
                writer.writerow([f"{x:.12g}" for x in row] + [segment.label])
    manifest = {
        "root": ".",
        "mode": "per_file",
        "label_column": "label",
        "clusters": clusters,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path
