"""Simulated GSMem transmitter and receiver.

The launcher turns bytes into a bit string, keys a GSM-band carrier on and
off (binary amplitude-shift keying), and boosts the emission by driving
several memory channels at once.  The receiver averages the amplitude over
each bit period and slices at the midpoint of the two expected levels.

Only the amplitude envelope of the carrier is modelled: each sample records
the instantaneous frequency and envelope amplitude, not the RF waveform.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import FramingError, ParseError

GSM850_CARRIER_HZ = 850e6

TRACE_HEADER = ("time_s", "frequency_hz", "amplitude")


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Payload:
    """Ordered bit string, most significant bit of each byte first."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.size == 0:
            raise ValueError("payload must be a non-empty 1-D bit sequence")
        if not np.all((bits == 0) | (bits == 1)):
            raise ValueError("payload bits must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(bits, np.uint8))

    def __len__(self):
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, Payload):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"Payload({''.join(map(str, self.bits.tolist()))})"


@dataclass(frozen=True)
class ModulationConfig:
    carrier_frequency: float = GSM850_CARRIER_HZ
    bit_duration: float = 1e-3
    sample_rate: float = 4000.0
    amplitude_high: float = 1.5
    amplitude_low: float = 1.0
    channel_count: int = 2
    per_channel_gain: float = 1.0

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be > 0")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if not (self.amplitude_high > self.amplitude_low >= 0):
            raise ValueError("need amplitude_high > amplitude_low >= 0")
        if self.bit_duration * self.sample_rate < 1 - 1e-9:
            raise ValueError("bit_duration * sample_rate must be >= 1")
        if int(self.channel_count) != self.channel_count or self.channel_count < 1:
            raise ValueError("channel_count must be an integer >= 1")
        if not self.per_channel_gain >= 0:
            raise ValueError("per_channel_gain must be >= 0")

    @property
    def samples_per_bit(self):
        # the epsilon absorbs products like 0.29 * 100 == 28.999999999999996
        return max(1, math.floor(self.bit_duration * self.sample_rate + 1e-9))

    @property
    def gain(self):
        """Linear multichannel gain ``1 + g * (n - 1)``."""
        return 1.0 + self.per_channel_gain * (self.channel_count - 1)

    @property
    def threshold(self):
        return self.gain * (self.amplitude_high + self.amplitude_low) / 2.0


@dataclass(frozen=True)
class NoiseModel:
    amplitude_sigma: float = 0.0
    frequency_jitter_sigma: float = 0.0

    def __post_init__(self):
        if not (self.amplitude_sigma >= 0 and self.frequency_jitter_sigma >= 0):
            raise ValueError("noise sigmas must be >= 0")


@dataclass(frozen=True, eq=False)
class EmissionTrace:
    """Uniformly sampled (time, frequency, amplitude) record."""

    time: np.ndarray
    frequency: np.ndarray
    amplitude: np.ndarray
    sample_rate: float

    def __post_init__(self):
        t = _frozen(self.time, np.float64)
        f = _frozen(self.frequency, np.float64)
        a = _frozen(self.amplitude, np.float64)
        if not (t.ndim == f.ndim == a.ndim == 1 and t.size == f.size == a.size):
            raise ValueError("trace columns must be 1-D and of equal length")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if np.any(a < 0):
            raise ValueError("amplitudes must be >= 0")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "frequency", f)
        object.__setattr__(self, "amplitude", a)

    def __len__(self):
        return self.time.size

    def __eq__(self, other):
        if not isinstance(other, EmissionTrace):
            return NotImplemented
        return (self.sample_rate == other.sample_rate
                and np.array_equal(self.time, other.time)
                and np.array_equal(self.frequency, other.frequency)
                and np.array_equal(self.amplitude, other.amplitude))

    def replace(self, *, frequency=None, amplitude=None):
        return EmissionTrace(
            self.time,
            self.frequency if frequency is None else frequency,
            self.amplitude if amplitude is None else amplitude,
            self.sample_rate,
        )


def encode_payload(data):
    """Expand bytes into a MSB-first bit string."""
    raw = bytes(data)
    if not raw:
        raise ValueError("cannot encode an empty byte sequence")
    return Payload(np.unpackbits(np.frombuffer(raw, dtype=np.uint8)))


def modulate(payload, config):
    """B-ASK: hold ``amplitude_high`` for a 1 and ``amplitude_low`` for a 0."""
    spb = config.samples_per_bit
    levels = np.where(payload.bits == 1, config.amplitude_high, config.amplitude_low)
    amplitude = np.repeat(levels.astype(np.float64), spb)
    n = amplitude.size
    return EmissionTrace(
        time=np.arange(n, dtype=np.float64) / config.sample_rate,
        frequency=np.full(n, float(config.carrier_frequency)),
        amplitude=amplitude,
        sample_rate=config.sample_rate,
    )


def amplify(trace, config):
    return trace.replace(amplitude=trace.amplitude * config.gain)


def apply_noise(trace, noise, seed):
    """Additive Gaussian amplitude noise (clamped at zero) and frequency jitter.

    The amplitude draws come first, then the frequency draws, from one
    generator seeded with ``seed``.
    """
    rng = np.random.default_rng(seed)
    n = len(trace)
    amplitude = trace.amplitude
    frequency = trace.frequency
    if noise.amplitude_sigma > 0:
        amplitude = np.maximum(amplitude + rng.normal(0.0, noise.amplitude_sigma, n), 0.0)
    if noise.frequency_jitter_sigma > 0:
        frequency = frequency + rng.normal(0.0, noise.frequency_jitter_sigma, n)
    return trace.replace(frequency=frequency, amplitude=amplitude)


def demodulate(trace, config):
    spb = config.samples_per_bit
    n = len(trace)
    if n == 0 or n % spb:
        raise FramingError(
            f"trace of {n} samples is not a positive multiple of {spb} samples per bit")
    means = trace.amplitude.reshape(-1, spb).mean(axis=1)
    return Payload((means > config.threshold).astype(np.uint8))


def bit_error_rate(sent, received):
    if len(sent) != len(received):
        raise ValueError(f"payload lengths differ: {len(sent)} vs {len(received)}")
    return float(np.count_nonzero(sent.bits != received.bits)) / len(sent)


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for t, f, a in zip(trace.time.tolist(), trace.frequency.tolist(),
                           trace.amplitude.tolist()):
            w.writerow((repr(t), repr(f), repr(a)))


def read_trace_csv(path, sample_rate):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
            raise ParseError(f"expected header {','.join(TRACE_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", path, lineno)
            try:
                rows.append(tuple(float(v) for v in row))
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
    arr = np.array(rows, dtype=np.float64).reshape(-1, 3)
    return EmissionTrace(arr[:, 0], arr[:, 1], arr[:, 2], sample_rate)
