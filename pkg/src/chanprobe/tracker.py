"""Per-channel measurement histories, smoothing, and load estimates.

Raw busy fractions can jump a lot between consecutive measurements of the
same channel, so the tracker keeps a moving-average smoothed series alongside
the raw window and feeds the smoothed one to the GP by default.  One window
length serves both the smoother and the GP history.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .cca import RawMeasurement
from .gpr import PRIOR, KernelParams, Posterior, posterior


class OrderingError(ValueError):
    """A measurement or query arrived at or before an already-recorded round."""


class ChannelHistory:
    """Sliding raw and smoothed windows for one channel."""

    def __init__(self, channel: int, window: int):
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.channel = channel
        self.window = window
        self.raw: deque[RawMeasurement] = deque(maxlen=window)
        self.smoothed: deque[tuple[int, float]] = deque(maxlen=window)

    @property
    def count(self) -> int:
        return len(self.raw)

    @property
    def last_round(self) -> int | None:
        return self.smoothed[-1][0] if self.smoothed else None

    def record(self, m: RawMeasurement) -> None:
        """Append a measurement and its moving-average smoothed sample."""
        if m.channel != self.channel:
            raise ValueError(f"measurement for channel {m.channel} fed to channel {self.channel}")
        if self.last_round is not None and m.round <= self.last_round:
            raise OrderingError(
                f"channel {self.channel}: round {m.round} not after recorded round {self.last_round}"
            )
        self.raw.append(m)
        avg = sum(x.busy_fraction for x in self.raw) / len(self.raw)
        self.smoothed.append((m.round, avg))

    def benchmark_estimate(self) -> float:
        """Plain average of the raw window; 0 when nothing was measured yet."""
        if not self.raw:
            return 0.0
        return sum(x.busy_fraction for x in self.raw) / len(self.raw)


@dataclass(frozen=True)
class EstimateVector:
    """Per-channel GP posteriors plus benchmark estimates at one query round."""

    round: int
    posteriors: tuple[Posterior, ...]
    benchmarks: tuple[float, ...]

    @property
    def channels(self) -> int:
        return len(self.posteriors)

    def posterior(self, channel: int) -> Posterior:
        return self.posteriors[channel - 1]

    def benchmark(self, channel: int) -> float:
        return self.benchmarks[channel - 1]


class LoadTracker:
    """Histories for all channels with a single writer per round.

    ``smooth_input=False`` feeds raw busy fractions to the GP instead of the
    moving-average series (ablation toggle).
    """

    def __init__(self, channels: int, window: int, smooth_input: bool = True):
        if channels < 1:
            raise ValueError(f"channels must be >= 1, got {channels}")
        self.channels = channels
        self.window = window
        self.smooth_input = smooth_input
        self.histories = [ChannelHistory(ch, window) for ch in range(1, channels + 1)]

    def history(self, channel: int) -> ChannelHistory:
        return self.histories[channel - 1]

    def record(self, m: RawMeasurement) -> None:
        self.history(m.channel).record(m)

    def min_count(self) -> int:
        return min(h.count for h in self.histories)

    def estimate_all(self, round: int, params: KernelParams = KernelParams()) -> EstimateVector:
        """GP posterior and benchmark estimate for every channel at ``round``.

        The query round must lie strictly after everything recorded so far.
        """
        posts = []
        benches = []
        for h in self.histories:
            if h.last_round is not None and round <= h.last_round:
                raise OrderingError(
                    f"query round {round} not after channel {h.channel} round {h.last_round}"
                )
            if h.count == 0:
                posts.append(PRIOR)
            else:
                if self.smooth_input:
                    series = list(h.smoothed)
                else:
                    series = [(m.round, m.busy_fraction) for m in h.raw]
                posts.append(posterior(series, round, params))
            benches.append(h.benchmark_estimate())
        return EstimateVector(round=round, posteriors=tuple(posts), benchmarks=tuple(benches))
