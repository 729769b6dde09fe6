"""Labelled (frequency, amplitude) data: feature extraction, synthetic
generators for benign and attack emissions, stratified splitting and CSV
persistence.

Feature matrices are ``(n, 2)`` float arrays with columns
``[frequency_hz, amplitude]``; labels are ``0`` (benign) / ``1`` (attack).
"""

import csv
import enum
import hashlib
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import ModulationConfig, NoiseModel, Payload, amplify, apply_noise, modulate
from .errors import ParseError, SplitError

DATASET_HEADER = ("frequency_hz", "amplitude", "label")

FREQUENCY, AMPLITUDE = 0, 1


class Label(enum.IntEnum):
    BENIGN = 0
    ATTACK = 1

    @property
    def text(self):
        return self.name.lower()

    @classmethod
    def parse(cls, text):
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown label {text!r}") from None


class FeatureVector(NamedTuple):
    frequency: float
    amplitude: float


class LabeledSample(NamedTuple):
    features: FeatureVector
    label: Label


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64, copy=True).reshape(-1, 2)
        y = np.array(self.labels, dtype=np.int8, copy=True).reshape(-1)
        if x.shape[0] != y.shape[0]:
            raise ValueError("features and labels differ in length")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        if np.any(x[:, AMPLITUDE] < 0):
            raise ValueError("amplitudes must be >= 0")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 (benign) or 1 (attack)")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @classmethod
    def from_samples(cls, samples):
        samples = list(samples)
        x = [tuple(s.features) for s in samples]
        y = [int(s.label) for s in samples]
        return cls(np.array(x, dtype=np.float64).reshape(-1, 2), y)

    @classmethod
    def concat(cls, *parts):
        return cls(np.concatenate([p.features for p in parts]),
                   np.concatenate([p.labels for p in parts]))

    def __len__(self):
        return self.labels.size

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels))

    @property
    def samples(self):
        return [LabeledSample(FeatureVector(float(f), float(a)), Label(int(c)))
                for (f, a), c in zip(self.features, self.labels)]

    def class_counts(self):
        return {label: int(np.count_nonzero(self.labels == label)) for label in Label}

    def subset(self, index):
        return Dataset(self.features[index], self.labels[index])

    def digest(self):
        """SHA-256 of the canonical CSV text."""
        return hashlib.sha256(to_csv_text(self).encode()).hexdigest()


@dataclass(frozen=True)
class GeneratorConfig:
    n_benign: int = 1000
    n_attack: int = 1000
    benign_frequency_min: float = 800e6
    benign_frequency_max: float = 900e6
    benign_amplitude_mean: float = 1.0
    benign_amplitude_std: float = 0.25
    modulation: ModulationConfig = field(default_factory=ModulationConfig)
    noise: NoiseModel = field(
        default_factory=lambda: NoiseModel(amplitude_sigma=0.2, frequency_jitter_sigma=2e6))
    payload_bits: int = 32
    # None means one bit period
    window: int | None = None
    seed: int = 42

    def __post_init__(self):
        if self.n_benign < 0 or self.n_attack < 0:
            raise ValueError("sample counts must be >= 0")
        if not self.benign_frequency_min < self.benign_frequency_max:
            raise ValueError("benign frequency range is empty")
        if not self.benign_amplitude_std >= 0:
            raise ValueError("benign_amplitude_std must be >= 0")
        if self.payload_bits < 1:
            raise ValueError("payload_bits must be >= 1")
        if self.window is not None and self.window < 1:
            raise ValueError("window must be >= 1")

    @property
    def feature_window(self):
        return self.modulation.samples_per_bit if self.window is None else self.window

    def _streams(self):
        benign, attack = np.random.SeedSequence(self.seed).spawn(2)
        return benign, attack


def extract_features(trace, window):
    """Mean frequency and mean amplitude of consecutive ``window``-sample blocks.

    A trailing partial block is dropped.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    m = len(trace) // window
    if m == 0:
        return np.empty((0, 2))
    cut = m * window
    freq = trace.frequency[:cut].reshape(m, window).mean(axis=1)
    amp = trace.amplitude[:cut].reshape(m, window).mean(axis=1)
    return np.column_stack([freq, amp])


def generate_benign(config):
    """Broadband noise floor: uniform frequency, clamped Gaussian amplitude."""
    rng = np.random.default_rng(config._streams()[0])
    n = config.n_benign
    freq = rng.uniform(config.benign_frequency_min, config.benign_frequency_max, n)
    if config.benign_amplitude_std > 0:
        amp = rng.normal(config.benign_amplitude_mean, config.benign_amplitude_std, n)
    else:
        amp = np.full(n, float(config.benign_amplitude_mean))
    amp = np.maximum(amp, 0.0)
    return Dataset(np.column_stack([freq, amp]), np.full(n, Label.BENIGN))


def generate_attack(config):
    """Features of simulated GSMem bursts carrying random payloads."""
    n = config.n_attack
    if n == 0:
        return Dataset(np.empty((0, 2)), np.empty(0))
    rng = np.random.default_rng(config._streams()[1])
    window = config.feature_window
    blocks, have = [], 0
    while have < n:
        payload = Payload(rng.integers(0, 2, config.payload_bits))
        noise_seed = int(rng.integers(0, 2**63))
        trace = amplify(modulate(payload, config.modulation), config.modulation)
        trace = apply_noise(trace, config.noise, noise_seed)
        feats = extract_features(trace, window)
        if feats.shape[0] == 0:
            raise ValueError("feature window longer than one payload burst")
        blocks.append(feats)
        have += feats.shape[0]
    x = np.concatenate(blocks)[:n]
    return Dataset(x, np.full(n, Label.ATTACK))


def generate(config):
    """Benign block followed by attack block."""
    return Dataset.concat(generate_benign(config), generate_attack(config))


def split(dataset, train_fraction, seed):
    """Stratified random split, returned as ``(train, test)``.

    Each class contributes ``round(train_fraction * count)`` samples to the
    training part, kept between 1 and ``count - 1``.  Both parts keep the
    original row order.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    take = np.zeros(len(dataset), dtype=bool)
    for label in Label:
        idx = np.flatnonzero(dataset.labels == label)
        if idx.size < 2:
            raise SplitError(f"class {label.text} has {idx.size} sample(s); need at least 2")
        k = math.floor(train_fraction * idx.size + 0.5)
        k = min(max(k, 1), idx.size - 1)
        take[rng.permutation(idx)[:k]] = True
    return dataset.subset(take), dataset.subset(~take)


def split_digest(train, test):
    h = hashlib.sha256()
    h.update(train.digest().encode())
    h.update(b"|")
    h.update(test.digest().encode())
    return h.hexdigest()


def to_csv_text(dataset):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DATASET_HEADER)
    for (f, a), c in zip(dataset.features.tolist(), dataset.labels.tolist()):
        w.writerow((repr(f), repr(a), Label(c).text))
    return buf.getvalue()


def write_csv(dataset, path):
    with open(path, "w", newline="") as fh:
        fh.write(to_csv_text(dataset))


def read_csv(path):
    x, y = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != DATASET_HEADER:
            raise ParseError(f"expected header {','.join(DATASET_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", path, lineno)
            try:
                f, a = float(row[0]), float(row[1])
                label = Label.parse(row[2])
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
            if not (math.isfinite(f) and math.isfinite(a)) or a < 0:
                raise ParseError("features must be finite with amplitude >= 0", path, lineno)
            x.append((f, a))
            y.append(int(label))
    return Dataset(np.array(x, dtype=np.float64).reshape(-1, 2), np.array(y, dtype=np.int8))
