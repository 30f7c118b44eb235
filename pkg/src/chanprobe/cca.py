"""Synthetic traffic and mini-slot CCA measurement simulation.

Traffic is piecewise-stationary: each channel follows a schedule of
(start_round, busy_probability) segments, and a measurement draws one
independent busy/idle bit per mini-slot at the active probability.  All
randomness comes from the counter-based Philox generator keyed by
(seed, channel, round), so every matrix entry is reproducible on its own,
in any evaluation order, on any platform.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class MeasurementTiming:
    """One channel-measurement epoch: dwell time T split into mini-slots."""

    duration_ms: float = 100.0
    minislot_us: float = 100.0

    def __post_init__(self):
        if not self.duration_ms > 0:
            raise ConfigError(f"duration_ms must be positive, got {self.duration_ms}")
        if not self.minislot_us > 0:
            raise ConfigError(f"minislot_us must be positive, got {self.minislot_us}")
        if n_of_T(self) < 1:
            raise ConfigError(
                f"measurement of {self.duration_ms} ms holds no whole "
                f"{self.minislot_us} us mini-slot"
            )


def n_of_T(timing: MeasurementTiming) -> int:
    """Number of mini-slots in one measurement of length T."""
    return int(timing.duration_ms * 1000.0 // timing.minislot_us)


@dataclass(frozen=True)
class RawMeasurement:
    """One CCA measurement: the busy fraction of ``n_samples`` mini-slots."""

    channel: int
    round: int
    busy_fraction: float
    n_samples: int

    def __post_init__(self):
        if not 0.0 <= self.busy_fraction <= 1.0:
            raise ValueError(f"busy_fraction {self.busy_fraction} outside [0, 1]")


@dataclass(frozen=True)
class TrafficModel:
    """Per-channel regime schedules plus the RNG seed.

    ``segments[ch]`` lists (start_round, busy_probability) pairs for 1-based
    channel ``ch``, sorted by start round, first segment starting at round 0.
    A segment stays active until the next one starts.
    """

    seed: int
    channels: int
    segments: dict[int, tuple[tuple[int, float], ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.channels < 1:
            raise ConfigError(f"channel count must be >= 1, got {self.channels}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        for ch in range(1, self.channels + 1):
            segs = self.segments.get(ch)
            if not segs:
                raise ConfigError(f"channel {ch} has no regime segments")
            if segs[0][0] != 0:
                raise ConfigError(
                    f"channel {ch}: first segment starts at round {segs[0][0]}, must be 0"
                )
            starts = [s[0] for s in segs]
            if any(b <= a for a, b in zip(starts, starts[1:])):
                raise ConfigError(f"channel {ch}: segment start rounds must be increasing")
            for start, p in segs:
                if not 0.0 <= p <= 1.0:
                    raise ConfigError(
                        f"channel {ch}: busy probability {p} at round {start} outside [0, 1]"
                    )
        extra = set(self.segments) - set(range(1, self.channels + 1))
        if extra:
            raise ConfigError(f"regime entries for unknown channels: {sorted(extra)}")

    def busy_probability(self, channel: int, round: int) -> float:
        """Active regime probability for (channel, round)."""
        _check_channel(channel, self.channels)
        if round < 0:
            raise ValueError(f"round must be non-negative, got {round}")
        segs = self.segments[channel]
        idx = bisect_right([s[0] for s in segs], round) - 1
        return segs[idx][1]

    @classmethod
    def from_dict(cls, cfg: dict) -> "TrafficModel":
        """Build from the JSON config shape:

        {"seed": u64, "channels": M,
         "regimes": [{"channel": n, "segments": [[start_round, p], ...]}]}
        """
        try:
            seed = int(cfg["seed"])
            channels = int(cfg["channels"])
            regimes = cfg["regimes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"traffic config missing or malformed field: {exc}") from exc
        segments: dict[int, tuple[tuple[int, float], ...]] = {}
        for entry in regimes:
            try:
                ch = int(entry["channel"])
                segs = tuple((int(s[0]), float(s[1])) for s in entry["segments"])
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise ConfigError(f"malformed regime entry {entry!r}") from exc
            if ch in segments:
                raise ConfigError(f"duplicate regime entry for channel {ch}")
            segments[ch] = segs
        return cls(seed=seed, channels=channels, segments=segments)

    @classmethod
    def from_json(cls, path: str) -> "TrafficModel":
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read traffic config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(cfg)

    @classmethod
    def default(cls, channels: int, seed: int) -> "TrafficModel":
        """Deterministic fallback model when no config or trace is supplied.

        Each channel gets a base load spread over [0.08, 0.92] plus one or two
        regime switches, all drawn from a seed-keyed stream disjoint from the
        measurement streams.
        """
        rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, 2**32]))
        segments: dict[int, tuple[tuple[int, float], ...]] = {}
        levels = np.linspace(0.08, 0.92, channels)
        rng.shuffle(levels)
        switch_rounds = np.arange(8, 45)
        for ch in range(1, channels + 1):
            segs = [(0, float(levels[ch - 1]))]
            n_switches = int(rng.integers(1, 3))
            for switch in sorted(rng.choice(switch_rounds, size=n_switches, replace=False)):
                segs.append((int(switch), float(rng.uniform(0.05, 0.95))))
            segments[ch] = tuple(segs)
        return cls(seed=seed, channels=channels, segments=segments)


class LoadMatrix:
    """Ground-truth and pre-measured load planes both algorithms replay.

    Shapes are (rounds, channels); column j holds 1-based channel j+1.  The
    measured plane is generated once up front so that any algorithm probing
    the same (round, channel) observes the same value.
    """

    def __init__(self, true_load: np.ndarray, measured_load: np.ndarray):
        true_load = np.asarray(true_load, dtype=float)
        measured_load = np.asarray(measured_load, dtype=float)
        if true_load.shape != measured_load.shape or true_load.ndim != 2:
            raise ValueError(
                f"plane shapes differ or are not 2-D: {true_load.shape} vs {measured_load.shape}"
            )
        for name, plane in (("true", true_load), ("measured", measured_load)):
            if np.any(np.isnan(plane)) or plane.min() < 0.0 or plane.max() > 1.0:
                raise ValueError(f"{name} plane has entries outside [0, 1]")
        true_load.setflags(write=False)
        measured_load.setflags(write=False)
        self.true_load = true_load
        self.measured_load = measured_load

    @property
    def rounds(self) -> int:
        return self.true_load.shape[0]

    @property
    def channels(self) -> int:
        return self.true_load.shape[1]

    def true(self, round: int, channel: int) -> float:
        _check_channel(channel, self.channels)
        return float(self.true_load[round, channel - 1])

    def measured(self, round: int, channel: int) -> float:
        _check_channel(channel, self.channels)
        return float(self.measured_load[round, channel - 1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, LoadMatrix):
            return NotImplemented
        return np.array_equal(self.true_load, other.true_load) and np.array_equal(
            self.measured_load, other.measured_load
        )


def _check_channel(channel: int, channels: int) -> None:
    if not 1 <= channel <= channels:
        raise ValueError(f"channel {channel} outside 1..{channels}")


def _entry_rng(seed: int, channel: int, round: int) -> np.random.Generator:
    # Counter layout gives every (channel, round) its own 2^128-draw block,
    # and the slot index simply advances the counter inside the block.
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, round, channel]))


def measure(
    model: TrafficModel, channel: int, round: int, timing: MeasurementTiming
) -> RawMeasurement:
    """Simulate one CCA measurement: n(T) busy/idle bits at the regime rate."""
    p = model.busy_probability(channel, round)
    n = n_of_T(timing)
    busy = int(np.count_nonzero(_entry_rng(model.seed, channel, round).random(n) < p))
    return RawMeasurement(channel=channel, round=round, busy_fraction=busy / n, n_samples=n)


def generate_matrix(
    model: TrafficModel, rounds: int, timing: MeasurementTiming
) -> LoadMatrix:
    """Pre-generate the full true and measured planes for a replay run."""
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1, got {rounds}")
    m = model.channels
    true = np.empty((rounds, m))
    meas = np.empty((rounds, m))
    for t in range(rounds):
        for ch in range(1, m + 1):
            true[t, ch - 1] = model.busy_probability(ch, t)
            meas[t, ch - 1] = measure(model, ch, t, timing).busy_fraction
    return LoadMatrix(true, meas)


__all__ = [
    "MeasurementTiming",
    "RawMeasurement",
    "TrafficModel",
    "LoadMatrix",
    "n_of_T",
    "measure",
    "generate_matrix",
]
