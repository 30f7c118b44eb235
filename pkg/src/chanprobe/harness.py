"""Replay harness: exhaustive and selective scans over a shared LoadMatrix.

Both algorithms consult the same pre-generated measured plane, so a cell's
value never depends on who probes it.  Averages are finite-horizon: the
selected-load averages (L1, L2) and error averages run over the replayed
rounds, with bootstrap rounds excluded from the selective averages by default
(they still count toward cost).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cca import LoadMatrix, MeasurementTiming, RawMeasurement, n_of_T
from .errors import ConfigError
from .gpr import KernelParams
from .selection import (
    POLICIES,
    bootstrap_length,
    bootstrap_schedule,
    choose_operating_channel,
    exhaustive_select,
    select_set,
)
from .tracker import LoadTracker

#: operating channel before the first round of any run
INITIAL_CHANNEL = 1


@dataclass(frozen=True)
class RoundRecord:
    """Decisions and outcomes of one measurement round."""

    round: int
    measured_set: tuple[int, ...]
    chosen: int
    chosen_load: float
    true_min: float
    switched: bool
    bootstrap: bool
    cumulative_cost_ms: float
    #: per-channel |estimate - true load|, None for the exhaustive scan
    err_true: tuple[float, ...] | None = None
    #: per-channel |estimate - realized window average|, None for exhaustive
    err_avg: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ExperimentSummary:
    """One run's headline numbers."""

    policy: str
    k: int
    window: int | None
    rounds: int
    avg_selected_load: float
    cost_ms: float
    switches: int
    err_true: float | None = None
    err_avg: float | None = None


def realized_window_average(matrix: LoadMatrix, round: int, channel: int, window: int) -> float:
    """Average of the last ``window`` measured values up to and including ``round``.

    This is the moving-average ground truth an estimator is predicting at
    ``round``; its own data always ends strictly earlier.
    """
    lo = max(0, round - window + 1)
    col = matrix.measured_load[lo : round + 1, channel - 1]
    return float(col.mean())


def per_channel_errors(
    estimates: Sequence[float], matrix: LoadMatrix, round: int, window: int
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Absolute estimation errors vs true load and vs the realized window average."""
    if len(estimates) != matrix.channels:
        raise ValueError(f"expected {matrix.channels} estimates, got {len(estimates)}")
    err_true = tuple(
        abs(est - matrix.true(round, ch)) for ch, est in enumerate(estimates, start=1)
    )
    err_avg = tuple(
        abs(est - realized_window_average(matrix, round, ch, window))
        for ch, est in enumerate(estimates, start=1)
    )
    return err_true, err_avg


def run_exhaustive(
    matrix: LoadMatrix, timing: MeasurementTiming
) -> tuple[list[RoundRecord], ExperimentSummary]:
    """Measure every channel every round and operate on the per-round argmin."""
    m = matrix.channels
    all_channels = tuple(range(1, m + 1))
    cost_per_round = timing.duration_ms * m
    records: list[RoundRecord] = []
    current = INITIAL_CHANNEL
    total = 0.0
    switches = 0
    cum = 0.0
    for t in range(matrix.rounds):
        row = [matrix.measured(t, ch) for ch in all_channels]
        chosen = exhaustive_select(row)
        switched = chosen != current
        switches += switched
        current = chosen
        total += row[chosen - 1]
        cum += cost_per_round
        records.append(
            RoundRecord(
                round=t,
                measured_set=all_channels,
                chosen=chosen,
                chosen_load=row[chosen - 1],
                true_min=float(matrix.true_load[t].min()),
                switched=switched,
                bootstrap=False,
                cumulative_cost_ms=cum,
            )
        )
    summary = ExperimentSummary(
        policy="exhaustive",
        k=m,
        window=None,
        rounds=matrix.rounds,
        avg_selected_load=total / matrix.rounds,
        cost_ms=cost_per_round,
        switches=switches,
    )
    return records, summary


def run_selective(
    matrix: LoadMatrix,
    timing: MeasurementTiming,
    k: int,
    window: int,
    policy: str,
    params: KernelParams = KernelParams(),
    include_bootstrap: bool = False,
    stay_on_tie: bool = True,
    smooth_input: bool = True,
) -> tuple[list[RoundRecord], ExperimentSummary]:
    """Measure only K channels per round, picked by ``policy``.

    Rounds start with a deterministic round-robin bootstrap until every
    channel holds ``window`` samples; afterwards the policy ranks channels
    from the tracker's estimates.  Cost counts every round; the L2 and error
    averages skip bootstrap rounds unless ``include_bootstrap`` is set.
    """
    m = matrix.channels
    if not 1 <= k <= m:
        raise ConfigError(f"K must be in 1..{m}, got {k}")
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}, expected one of {POLICIES}")
    boot_rounds = bootstrap_length(m, k, window)
    if not include_bootstrap and matrix.rounds <= boot_rounds:
        raise ConfigError(
            f"{matrix.rounds} rounds never leave the {boot_rounds}-round bootstrap; "
            f"raise --rounds or include bootstrap rounds in the averages"
        )

    n_samples = n_of_T(timing)
    cost_per_round = timing.duration_ms * k
    tracker = LoadTracker(m, window, smooth_input=smooth_input)
    records: list[RoundRecord] = []
    current = INITIAL_CHANNEL
    switches = 0
    cum = 0.0
    for t in range(matrix.rounds):
        estimates = tracker.estimate_all(t, params)
        in_bootstrap = tracker.min_count() < window
        if in_bootstrap:
            cset = bootstrap_schedule(m, k, t)
        else:
            cset = select_set(estimates, k, policy)
        measured = {ch: matrix.measured(t, ch) for ch in cset}
        for ch in cset:
            tracker.record(
                RawMeasurement(channel=ch, round=t, busy_fraction=measured[ch], n_samples=n_samples)
            )
        decision = choose_operating_channel(measured, current, stay_on_tie=stay_on_tie)
        switches += decision.switched
        current = decision.chosen
        if policy == "benchmark_mavg":
            point_estimates = estimates.benchmarks
        else:
            point_estimates = tuple(p.clamped_mean for p in estimates.posteriors)
        err_true, err_avg = per_channel_errors(point_estimates, matrix, t, window)
        cum += cost_per_round
        records.append(
            RoundRecord(
                round=t,
                measured_set=cset,
                chosen=decision.chosen,
                chosen_load=measured[decision.chosen],
                true_min=float(matrix.true_load[t].min()),
                switched=decision.switched,
                bootstrap=in_bootstrap,
                cumulative_cost_ms=cum,
                err_true=err_true,
                err_avg=err_avg,
            )
        )

    eligible = [r for r in records if include_bootstrap or not r.bootstrap]
    err_true_avg, err_avg_avg = estimation_error(eligible)
    summary = ExperimentSummary(
        policy=policy,
        k=k,
        window=window,
        rounds=matrix.rounds,
        avg_selected_load=sum(r.chosen_load for r in eligible) / len(eligible),
        cost_ms=cost_per_round,
        switches=switches,
        err_true=err_true_avg,
        err_avg=err_avg_avg,
    )
    return records, summary


def estimation_error(records: Sequence[RoundRecord]) -> tuple[float, float]:
    """Mean absolute estimation error over rounds and channels.

    Returns (error vs true load, error vs realized window average).
    """
    rows = [r for r in records if r.err_true is not None]
    if not rows:
        raise ValueError("no records carrying estimation errors")
    n = sum(len(r.err_true) for r in rows)
    return (
        sum(sum(r.err_true) for r in rows) / n,
        sum(sum(r.err_avg) for r in rows) / n,
    )


def sweep(
    matrix: LoadMatrix,
    timing: MeasurementTiming,
    k_values: Sequence[int],
    w_values: Sequence[int],
    policies: Sequence[str],
    params: KernelParams = KernelParams(),
    include_bootstrap: bool = False,
    stay_on_tie: bool = True,
    smooth_input: bool = True,
) -> dict:
    """Cross-product of selective runs plus the single exhaustive row.

    Returns the results-payload fragment {"exhaustive": ..., "runs": [...]},
    rows keyed and ordered by (K, w, policy).
    """
    if len(k_values) == 0 or len(w_values) == 0:
        raise ConfigError("K and window ranges must be non-empty")
    _, ex = run_exhaustive(matrix, timing)
    runs = []
    for k in k_values:
        for w in w_values:
            for policy in policies:
                _, s = run_selective(
                    matrix,
                    timing,
                    k=k,
                    window=w,
                    policy=policy,
                    params=params,
                    include_bootstrap=include_bootstrap,
                    stay_on_tie=stay_on_tie,
                    smooth_input=smooth_input,
                )
                runs.append(summary_row(s))
    return {
        "exhaustive": {"L1": ex.avg_selected_load, "c1_ms": ex.cost_ms},
        "runs": runs,
    }


def summary_row(s: ExperimentSummary) -> dict:
    """Selective-run summary as a results-JSON row."""
    return {
        "K": s.k,
        "w": s.window,
        "policy": s.policy,
        "L2": s.avg_selected_load,
        "c2_ms": s.cost_ms,
        "err_true": s.err_true,
        "err_avg": s.err_avg,
        "switches": s.switches,
    }


def results_payload(config: dict, body: dict) -> dict:
    """Full results document: config echo plus exhaustive and selective rows."""
    return {"config": config, "exhaustive": body["exhaustive"], "runs": body["runs"]}


def make_config(
    *,
    channels: int,
    rounds: int,
    timing: MeasurementTiming,
    seed: int | None,
    source: str,
    params: KernelParams,
    include_bootstrap: bool,
    stay_on_tie: bool,
    smooth_input: bool,
) -> dict:
    """Config echo embedded in every results document."""
    return {
        "channels": channels,
        "rounds": rounds,
        "duration_ms": timing.duration_ms,
        "minislot_us": timing.minislot_us,
        "seed": seed,
        "source": source,
        "lengthscale": params.lengthscale,
        "include_bootstrap": include_bootstrap,
        "stay_on_tie": stay_on_tie,
        "smooth_input": smooth_input,
    }


def round_records_csv(records: Sequence[RoundRecord]) -> str:
    """Per-round CSV for plotting (one row per round, LF endings)."""
    lines = ["round,bootstrap,measured_set,chosen,chosen_load,true_min,switched,cum_cost_ms"]
    for r in records:
        cset = " ".join(str(ch) for ch in r.measured_set)
        lines.append(
            f"{r.round},{int(r.bootstrap)},{cset},{r.chosen},{r.chosen_load!r},"
            f"{r.true_min!r},{int(r.switched)},{r.cumulative_cost_ms!r}"
        )
    return "\n".join(lines) + "\n"
