"""Dataset ingestion, feature persistence, and a synthetic corpus generator.

Recording file format: a text file whose first line is
``# sample_rate_hz=<float>`` followed by one ``ax,ay,az`` sample per line.
Datasets live in ``root/<class_name>/<sample>.csv`` directory trees.

Synthetic corpora stand in for real recordings at desk scale: every class
is a set of (center Hz, width Hz, gain) noise bands, and each sample sums
Gaussian-band-filtered white noise over those bands, spread across the
three axes with a random unit mixing vector.  All randomness comes from
numpy's PCG64 generator seeded by the spec, so corpora are reproducible
bit-for-bit across runs and platforms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .signals import Signal

_RATE_PREFIX = "# sample_rate_hz="

Band = tuple[float, float, float]  # (center Hz, width Hz, gain)


@dataclass(frozen=True)
class Dataset:
    """Labeled recordings plus where they came from."""

    entries: tuple[tuple[str, Signal], ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        entries = tuple((str(label), signal) for label, signal in self.entries)
        if not entries:
            raise ValueError("dataset must contain at least one entry")
        if any(not label for label, _ in entries):
            raise ValueError("class labels must be non-empty")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.entries]


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic corpus.

    class_bands, when given, lists one band set per class; when empty a
    default plan is derived: band centers spread geometrically across
    freq_range so that neighboring classes overlap but remain separable.
    """

    n_classes: int = 10
    samples_per_class: int = 10
    sample_rate: float = 4000.0
    duration: float = 0.25
    rng_seed: int = 0
    freq_range: tuple[float, float] = (10.0, 900.0)
    class_bands: tuple[tuple[Band, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n_classes < 1 or self.samples_per_class < 1:
            raise ValueError("class and sample counts must be >= 1")
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError("sample_rate must be positive")
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValueError("duration must be positive")
        if self.duration * self.sample_rate < 64:
            raise ValueError("duration * sample_rate must be at least 64 samples")
        lo, hi = self.freq_range
        if not 0 < lo < hi:
            raise ValueError("freq_range must be increasing and positive")
        if hi >= self.sample_rate / 2:
            raise ValueError("freq_range must stay below the Nyquist frequency")
        bands = tuple(
            tuple((float(c), float(w), float(g)) for c, w, g in per_class)
            for per_class in self.class_bands
        )
        if bands and len(bands) != self.n_classes:
            raise ValueError("class_bands must list one band set per class")
        for per_class in bands:
            if not per_class:
                raise ValueError("every class needs at least one band")
            for center, width, gain in per_class:
                if center <= 0 or width <= 0 or gain <= 0:
                    raise ValueError("band parameters must be positive")
        object.__setattr__(self, "class_bands", bands)
        object.__setattr__(self, "freq_range", (float(lo), float(hi)))

    def resolved_bands(self) -> tuple[tuple[Band, ...], ...]:
        if self.class_bands:
            return self.class_bands
        return default_band_plan(self.n_classes, self.freq_range)


def default_band_plan(
    n_classes: int, freq_range: tuple[float, float] = (10.0, 900.0)
) -> tuple[tuple[Band, ...], ...]:
    """Chained class bands at the low end plus a shared masker band.

    Class identity lives in two overlapping bands on a geometric grid over
    the lower sixth of freq_range; every class also carries the same
    strong noise band near the top of the range.  The masker dominates raw
    per-sample energy without carrying class information, so the corpus is
    separable but not trivially so under plain Euclidean distances.
    """
    lo, hi = freq_range
    grid = np.geomspace(lo, hi / 6.0, n_classes + 1)
    masker = (float(0.55 * hi), float(0.17 * hi), 1.0)
    plan = []
    for c in range(n_classes):
        plan.append(
            (
                (float(grid[c]), float(0.4 * grid[c]), 1.0),
                (float(grid[c + 1]), float(0.4 * grid[c + 1]), 0.8),
                masker,
            )
        )
    return tuple(plan)


def synth_corpus(spec: SynthSpec) -> Dataset:
    """Generate a labeled corpus of band-noise recordings."""
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))
    n = round(spec.duration * spec.sample_rate)
    freqs = np.fft.rfftfreq(n, 1.0 / spec.sample_rate)
    bands = spec.resolved_bands()
    entries = []
    for c in range(spec.n_classes):
        label = f"class{c:02d}"
        for _ in range(spec.samples_per_class):
            axes = np.zeros((n, 3))
            for center, width, gain in bands[c]:
                white = rng.standard_normal(n)
                window = np.exp(-((freqs - center) ** 2) / (2.0 * width**2))
                shaped = np.fft.irfft(np.fft.rfft(white) * window, n)
                mix = rng.standard_normal(3)
                while np.linalg.norm(mix) < 1e-12:
                    mix = rng.standard_normal(3)
                mix /= np.linalg.norm(mix)
                axes += gain * shaped[:, None] * mix[None, :]
            entries.append((label, Signal(samples=axes, sample_rate=spec.sample_rate)))
    return Dataset(entries=tuple(entries), provenance=f"synth(rng_seed={spec.rng_seed})")


# ---------------------------------------------------------------------------
# recordings on disk


def save_signal(path, signal: Signal) -> None:
    path = Path(path)
    rows = "\n".join(
        f"{s[0]:.12g},{s[1]:.12g},{s[2]:.12g}" for s in signal.samples
    )
    path.write_text(
        f"{_RATE_PREFIX}{signal.sample_rate:.12g}\n{rows}\n", encoding="ascii"
    )


def load_signal(path) -> Signal:
    path = Path(path)
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if not header.startswith(_RATE_PREFIX):
            raise ValueError(
                f"{path}: first line must be '{_RATE_PREFIX}<float>', got {header!r}"
            )
        try:
            sample_rate = float(header[len(_RATE_PREFIX) :])
        except ValueError as exc:
            raise ValueError(f"{path}: unparseable sample rate in header") from exc
        samples = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'ax,ay,az', got {line!r}")
            try:
                triple = [float(p) for p in parts]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unparseable value") from exc
            if not all(np.isfinite(triple)):
                raise ValueError(f"{path}:{lineno}: non-finite sample value")
            samples.append(triple)
    try:
        return Signal(samples=np.asarray(samples, dtype=np.float64), sample_rate=sample_rate)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_dataset(dataset: Dataset, root) -> None:
    """Write ``root/<label>/<index>.csv``, one file per entry."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    counters: dict[str, int] = {}
    for label, signal in dataset.entries:
        idx = counters.get(label, 0)
        counters[label] = idx + 1
        class_dir = root / label
        class_dir.mkdir(exist_ok=True)
        save_signal(class_dir / f"{idx:03d}.csv", signal)


def load_dataset(root) -> Dataset:
    """Ingest a ``root/<class_name>/<sample>.csv`` tree, sorted by path."""
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"{root}: not a directory")
    class_dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not class_dirs:
        raise ValueError(f"{root}: contains no class directories")
    entries = []
    for class_dir in class_dirs:
        for file in sorted(class_dir.glob("*.csv")):
            entries.append((class_dir.name, load_signal(file)))
    if not entries:
        raise ValueError(f"{root}: class directories contain no .csv recordings")
    return Dataset(entries=tuple(entries), provenance=str(root))


# ---------------------------------------------------------------------------
# feature CSV


def write_features_csv(path, features: np.ndarray, labels: Sequence[str]) -> None:
    """Header ``label,a1,...,aN``; one row per sample, 12 significant digits."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[0] != len(labels):
        raise ValueError("labels and features disagree in length")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"a{j}" for j in range(1, features.shape[1] + 1)])
        for label, row in zip(labels, features):
            writer.writerow([label] + [f"{v:.12g}" for v in row])


def read_features_csv(path) -> tuple[np.ndarray, list[str]]:
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty feature file") from None
        if len(header) < 2 or header[0] != "label":
            raise ValueError(f"{path}: expected header 'label,a1,...'")
        dim = len(header) - 1
        labels, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise ValueError(f"{path}:{lineno}: expected {dim + 1} columns")
            labels.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unparseable value") from exc
    if not rows:
        raise ValueError(f"{path}: no feature rows")
    return np.asarray(rows, dtype=np.float64), labels


# ---------------------------------------------------------------------------
# synthesis spec files (TOML)

_SYNTH_KEYS = {
    "n_classes",
    "samples_per_class",
    "sample_rate",
    "duration",
    "rng_seed",
    "freq_range",
    "class_bands",
}


def load_synth_spec(path) -> SynthSpec:
    """Read a SynthSpec from a TOML key-value file; unknown keys are errors."""
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"{path}: invalid TOML: {exc}") from exc
    unknown = set(raw) - _SYNTH_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs: dict = {}
    for key in ("n_classes", "samples_per_class", "rng_seed"):
        if key in raw:
            kwargs[key] = int(raw[key])
    for key in ("sample_rate", "duration"):
        if key in raw:
            kwargs[key] = float(raw[key])
    if "freq_range" in raw:
        lo, hi = raw["freq_range"]
        kwargs["freq_range"] = (float(lo), float(hi))
    if "class_bands" in raw:
        kwargs["class_bands"] = tuple(
            tuple((float(c), float(w), float(g)) for c, w, g in per_class)
            for per_class in raw["class_bands"]
        )
    try:
        return SynthSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from exc
