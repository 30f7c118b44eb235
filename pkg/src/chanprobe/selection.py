"""Channel-set selection policies and operating-channel switching.

Three measurement policies:

* ``weight_product``: rank by uncertainty times estimated load, take the top K
* ``variance_only``: rank by posterior variance alone, take the top K
* ``benchmark_mavg``: take the K channels whose moving-average load looks lowest

Ties break the same way everywhere: primary score, then higher posterior
variance, then lower channel index, so runs are fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .gpr import Posterior
from .tracker import EstimateVector

POLICIES = ("weight_product", "variance_only", "benchmark_mavg")

#: short spellings accepted anywhere a policy is named
POLICY_ALIASES = {
    "weight": "weight_product",
    "variance": "variance_only",
    "benchmark": "benchmark_mavg",
}


def canonical_policy(name: str) -> str:
    """Expand a short policy alias; full names pass through unchanged."""
    return POLICY_ALIASES.get(name, name)


@dataclass(frozen=True)
class SwitchDecision:
    """Outcome of one operating-channel decision."""

    previous: int
    chosen: int

    @property
    def switched(self) -> bool:
        return self.previous != self.chosen


def exhaustive_select(loads: Sequence[float]) -> int:
    """Channel (1-based) with the minimum load; ties go to the lowest index."""
    if len(loads) == 0:
        raise ValueError("cannot select from an empty load vector")
    best = min(range(len(loads)), key=lambda i: (loads[i], i))
    return best + 1


def weight(p: Posterior) -> float:
    """Measurement priority: posterior variance times the clamped mean."""
    return p.variance * p.clamped_mean


def select_set(estimates: EstimateVector, k: int, policy: str) -> tuple[int, ...]:
    """Pick the K channels to measure this round, returned in channel order."""
    m = estimates.channels
    if not 1 <= k <= m:
        raise ValueError(f"K must be in 1..{m}, got {k}")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}, expected one of {POLICIES}")

    channels = range(1, m + 1)
    var = {ch: estimates.posterior(ch).variance for ch in channels}
    if policy == "weight_product":
        key = lambda ch: (-weight(estimates.posterior(ch)), -var[ch], ch)
    elif policy == "variance_only":
        key = lambda ch: (-var[ch], ch)
    else:  # benchmark_mavg: probe where the average load looks lowest
        key = lambda ch: (estimates.benchmark(ch), -var[ch], ch)
    ranked = sorted(channels, key=key)
    return tuple(sorted(ranked[:k]))


def choose_operating_channel(
    measured: Mapping[int, float], current: int, stay_on_tie: bool = True
) -> SwitchDecision:
    """Pick the minimum-load channel among those just measured.

    With ``stay_on_tie`` (default), the incumbent keeps the channel when its
    measured load ties the minimum, avoiding a switch that buys nothing.
    """
    if not measured:
        raise ValueError("no measured channels to choose from")
    low = min(measured.values())
    if stay_on_tie and current in measured and measured[current] == low:
        chosen = current
    else:
        chosen = min(ch for ch, load in measured.items() if load == low)
    return SwitchDecision(previous=current, chosen=chosen)


def bootstrap_schedule(channels: int, k: int, round: int) -> tuple[int, ...]:
    """Cold-start block for ``round``: K channels, advancing cyclically.

    Round r covers channels ((r*K) mod M)+1 onward, so after
    ceil(window*M/K) rounds every channel holds ``window`` samples.
    """
    if not 1 <= k <= channels:
        raise ValueError(f"K must be in 1..{channels}, got {k}")
    if round < 0:
        raise ValueError(f"round must be non-negative, got {round}")
    start = (round * k) % channels
    block = [(start + i) % channels + 1 for i in range(k)]
    return tuple(sorted(block))


def bootstrap_length(channels: int, k: int, window: int) -> int:
    """Bootstrap rounds needed before every channel holds ``window`` samples."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if not 1 <= k <= channels:
        raise ValueError(f"K must be in 1..{channels}, got {k}")
    return -(-window * channels // k)
