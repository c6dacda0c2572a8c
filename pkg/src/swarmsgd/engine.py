"""Simulation engine for asynchronous swarm descent and its baseline.

Three schemes share one timing model in which every gradient sample
takes an exponentially distributed time with a common mean:

- ``swarm_event_driven``: each thread updates the moment its own sample
  finishes; pending completions live in a priority queue keyed by fire
  time, with thread id breaking exact ties.
- ``swarm_global_tick``: statistically equivalent shortcut justified by
  memorylessness of the exponential clock; a single global clock fires
  with the minimum-of-N rate and a uniformly chosen thread updates.
- ``centralized``: all threads sample at the shared iterate and a batch
  step is applied once the slowest sample arrives, so each step costs
  the maximum of N exponential durations.

Updates move a thread down its sampled gradient and, for the swarm
schemes, toward its graph neighbors with a configurable attraction
strength. Virtual time, not update count, is the cost measure the
schemes are compared on.
"""
from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from . import objective as obj
from . import topology
from .randomness import make_rng

SCHEME_SWARM = "swarm_event_driven"
SCHEME_GLOBAL_TICK = "swarm_global_tick"
SCHEME_CENTRALIZED = "centralized"
SCHEMES = (SCHEME_SWARM, SCHEME_GLOBAL_TICK, SCHEME_CENTRALIZED)

TRACE_CSV_HEADER = "k,t,U,Vbar,f_gap,grad_norm_sq"


class EngineInvariantError(RuntimeError):
    """An internal simulation invariant was violated."""


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one simulation run.

    Exactly which horizon fields are set decides when the run ends: it
    stops at ``max_updates`` global updates or when the next event
    would pass ``max_virtual_time``, whichever comes first. At least
    one horizon is required. ``threshold`` arms first-crossing
    detection on the squared error of the swarm mean (gradient norm
    squared when no optimum is known); ``capture_mean_at`` stores the
    swarm mean right before the listed update indices.
    """

    n_threads: int
    step_size: float
    attraction: float
    mean_sample_time: float
    seed: int
    scheme: str = SCHEME_SWARM
    max_updates: int | None = None
    max_virtual_time: float | None = None
    record_every: int = 100
    threshold: float | None = None
    stop_at_threshold: bool = False
    track_running_average: bool = False
    capture_mean_at: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.n_threads < 1:
            raise ValueError(f"need at least one thread, got {self.n_threads}")
        if self.step_size <= 0.0:
            raise ValueError(f"step size must be positive, got {self.step_size}")
        if self.attraction < 0.0:
            raise ValueError(f"attraction must be nonnegative, got {self.attraction}")
        if self.mean_sample_time <= 0.0:
            raise ValueError(
                f"mean sampling time must be positive, got {self.mean_sample_time}"
            )
        if (self.max_updates is None) == (self.max_virtual_time is None):
            raise ValueError(
                "exactly one horizon is required: set max_updates or max_virtual_time"
            )
        if self.max_updates is not None and self.max_updates < 1:
            raise ValueError(f"max_updates must be positive, got {self.max_updates}")
        if self.max_virtual_time is not None and self.max_virtual_time <= 0.0:
            raise ValueError(
                f"max_virtual_time must be positive, got {self.max_virtual_time}"
            )
        if self.record_every < 1:
            raise ValueError(f"record_every must be positive, got {self.record_every}")
        if self.threshold is not None and self.threshold <= 0.0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.stop_at_threshold and self.threshold is None:
            raise ValueError("stop_at_threshold requires a threshold")
        if any(k < 0 for k in self.capture_mean_at):
            raise ValueError("capture_mean_at indices must be nonnegative")


@dataclass
class SwarmState:
    """Mutable state of a swarm run: thread positions, the virtual
    clock, per-thread update counts, and the pending-event queue of
    (fire_time, thread_id) pairs."""

    positions: np.ndarray
    virtual_clock: float
    per_thread_update_counts: np.ndarray
    event_queue: list[tuple[float, int]]
    global_update_count: int = 0


def next_event(state: SwarmState) -> tuple[float, int]:
    """Pop the earliest pending completion; thread id breaks ties."""
    if not state.event_queue:
        raise EngineInvariantError("event queue is empty")
    return heapq.heappop(state.event_queue)


@dataclass
class CentralState:
    """Mutable state of a centralized run: the shared iterate, the
    virtual clock, and the number of batch steps applied."""

    position: np.ndarray
    virtual_clock: float
    update_count: int = 0


@dataclass(frozen=True)
class TraceRecord:
    k: int
    t: float
    U: float
    Vbar: float
    f_gap: float
    grad_norm_sq: float


@dataclass(frozen=True)
class RunSummary:
    T_hit: float | None
    threshold: float | None
    final_U: float
    final_Vbar: float
    final_f_gap: float
    final_grad_norm_sq: float
    seed: int
    scheme: str
    n_updates: int
    n_samples: int
    virtual_time: float
    wall_time: float
    hit_update: int | None
    per_thread_update_counts: tuple[int, ...] | None


@dataclass
class Trace:
    records: list[TraceRecord]
    summary: RunSummary
    running_average: np.ndarray | None = None
    captured_means: dict[int, np.ndarray] = field(default_factory=dict)


class _TraceBuilder:
    """Shared recording, crossing detection, and summary assembly."""

    def __init__(self, config, spec, x_star, on_record):
        self.config = config
        self.spec = spec
        self.x_star = x_star
        self.on_record = on_record
        self.records: list[TraceRecord] = []
        self.last_recorded_k = -1
        self.T_hit: float | None = None
        self.hit_update: int | None = None
        self.running = metrics.RunningAverage() if config.track_running_average else None
        self.capture_set = frozenset(config.capture_mean_at)
        self.captured: dict[int, np.ndarray] = {}
        self.started = time.perf_counter()

    def record(self, k: int, t: float, positions: np.ndarray) -> None:
        if k == self.last_recorded_k:
            return
        snap = metrics.snapshot(positions, self.spec, self.x_star)
        self.records.append(
            TraceRecord(
                k=k,
                t=t,
                U=snap.U,
                Vbar=snap.Vbar,
                f_gap=snap.f_gap,
                grad_norm_sq=snap.grad_norm_sq,
            )
        )
        self.last_recorded_k = k
        if self.on_record is not None:
            self.on_record(k, t, positions)

    def pre_update(self, k: int, mean: np.ndarray) -> None:
        """Book-keeping on the state right before update k -> k+1."""
        if self.running is not None:
            self.running.push(mean)
        if k in self.capture_set:
            self.captured[k] = np.array(mean)

    def crossing_metric(self, mean: np.ndarray) -> float:
        if self.x_star is not None:
            diff = mean - self.x_star
            return float(diff @ diff)
        g = obj.grad_exact(self.spec, mean)
        return float(g @ g)

    def check_crossing(self, k: int, t: float, positions, mean) -> bool:
        """Record a first threshold crossing; True means stop now."""
        if self.T_hit is not None:
            return False
        if self.crossing_metric(mean) <= self.config.threshold:
            self.T_hit = t
            self.hit_update = k
            self.record(k, t, positions)
            return self.config.stop_at_threshold
        return False

    def finish(
        self,
        k: int,
        t: float,
        positions: np.ndarray,
        n_samples: int,
        per_thread_counts: np.ndarray | None,
    ) -> Trace:
        self.record(k, t, positions)
        final = self.records[-1]
        summary = RunSummary(
            T_hit=self.T_hit,
            threshold=self.config.threshold,
            final_U=final.U,
            final_Vbar=final.Vbar,
            final_f_gap=final.f_gap,
            final_grad_norm_sq=final.grad_norm_sq,
            seed=self.config.seed,
            scheme=self.config.scheme,
            n_updates=k,
            n_samples=n_samples,
            virtual_time=t,
            wall_time=time.perf_counter() - self.started,
            hit_update=self.hit_update,
            per_thread_update_counts=(
                None if per_thread_counts is None else tuple(int(c) for c in per_thread_counts)
            ),
        )
        running = None
        if self.running is not None and self.running.value is not None:
            running = self.running.value.copy()
        return Trace(
            records=self.records,
            summary=summary,
            running_average=running,
            captured_means=self.captured,
        )


def _initial_positions(config: RunConfig, dim: int, init: np.ndarray | None) -> np.ndarray:
    if init is None:
        return np.zeros((config.n_threads, dim))
    X = np.array(init, dtype=float)
    if X.shape != (config.n_threads, dim):
        raise ValueError(
            f"init has shape {X.shape}, expected ({config.n_threads}, {dim})"
        )
    return X


def _require_scheme(config: RunConfig, scheme: str) -> None:
    if config.scheme != scheme:
        raise ValueError(f"config.scheme is {config.scheme!r}, expected {scheme!r}")


def run_swarm(
    config: RunConfig,
    graph: topology.Graph,
    spec: obj.ObjectiveSpec,
    init: np.ndarray | None = None,
    on_record=None,
) -> Trace:
    """Event-driven swarm run over an interaction graph."""
    _require_scheme(config, SCHEME_SWARM)
    if config.n_threads < 2:
        raise ValueError("swarm schemes need at least two threads")
    if graph.n_vertices != config.n_threads:
        raise ValueError(
            f"graph has {graph.n_vertices} vertices for {config.n_threads} threads"
        )
    N = config.n_threads
    gamma = config.step_size
    a = config.attraction
    mean_time = config.mean_sample_time
    rng = make_rng(config.seed)
    X = _initial_positions(config, spec.dim, init)
    x_star = obj.optimum(spec)

    state = SwarmState(
        positions=X,
        virtual_clock=0.0,
        per_thread_update_counts=np.zeros(N, dtype=np.int64),
        event_queue=[],
    )
    # The first fire time of a thread is the duration of the sample it
    # starts computing at t = 0.
    for i in range(N):
        heapq.heappush(state.event_queue, (rng.exponential(mean_time), i))

    neighbor_lists = [np.flatnonzero(graph.adjacency[i]) for i in range(N)]
    degrees = graph.degrees.astype(float)

    builder = _TraceBuilder(config, spec, x_star, on_record)
    builder.record(0, 0.0, X)

    sum_vec = X.sum(axis=0)
    inv_n = 1.0 / N
    n_samples = 0
    max_updates = config.max_updates
    max_virtual_time = config.max_virtual_time
    record_every = config.record_every
    threshold_active = config.threshold is not None
    need_pre = config.track_running_average or bool(builder.capture_set)

    while True:
        k = state.global_update_count
        if max_updates is not None and k >= max_updates:
            break
        fire_time, i = next_event(state)
        if fire_time < state.virtual_clock:
            raise EngineInvariantError("event fires before the current clock")
        if max_virtual_time is not None and fire_time > max_virtual_time:
            break
        if need_pre:
            builder.pre_update(k, sum_vec * inv_n)
        state.virtual_clock = fire_time

        sample = obj.sample_gradient(spec, X[i], mean_time, rng)
        n_samples += 1
        delta = -sample.g
        if a > 0.0:
            delta = delta - a * (degrees[i] * X[i] - X[neighbor_lists[i]].sum(axis=0))
        delta *= gamma
        X[i] += delta
        sum_vec += delta
        state.per_thread_update_counts[i] += 1
        state.global_update_count = k = k + 1
        heapq.heappush(state.event_queue, (fire_time + sample.sampling_time, i))

        stop = False
        if threshold_active:
            stop = builder.check_crossing(k, fire_time, X, sum_vec * inv_n)
        if k % record_every == 0:
            builder.record(k, fire_time, X)
        if stop:
            break

    return builder.finish(
        state.global_update_count,
        state.virtual_clock,
        X,
        n_samples,
        state.per_thread_update_counts,
    )


def run_swarm_global_tick(
    config: RunConfig,
    graph: topology.Graph,
    spec: obj.ObjectiveSpec,
    init: np.ndarray | None = None,
    on_record=None,
) -> Trace:
    """Global-tick swarm run.

    Inter-update gaps are exponential with mean ``mean_sample_time / N``
    and the updating thread is uniform, which matches the event-driven
    scheme in distribution. Per update the stream is consumed in the
    order: gap, thread index, gradient sample.
    """
    _require_scheme(config, SCHEME_GLOBAL_TICK)
    if config.n_threads < 2:
        raise ValueError("swarm schemes need at least two threads")
    if graph.n_vertices != config.n_threads:
        raise ValueError(
            f"graph has {graph.n_vertices} vertices for {config.n_threads} threads"
        )
    N = config.n_threads
    gamma = config.step_size
    a = config.attraction
    tick_mean = config.mean_sample_time / N
    rng = make_rng(config.seed)
    X = _initial_positions(config, spec.dim, init)
    x_star = obj.optimum(spec)

    neighbor_lists = [np.flatnonzero(graph.adjacency[i]) for i in range(N)]
    degrees = graph.degrees.astype(float)
    counts = np.zeros(N, dtype=np.int64)

    builder = _TraceBuilder(config, spec, x_star, on_record)
    builder.record(0, 0.0, X)

    sum_vec = X.sum(axis=0)
    inv_n = 1.0 / N
    clock = 0.0
    k = 0
    n_samples = 0
    max_updates = config.max_updates
    max_virtual_time = config.max_virtual_time
    record_every = config.record_every
    threshold_active = config.threshold is not None
    need_pre = config.track_running_average or bool(builder.capture_set)

    while True:
        if max_updates is not None and k >= max_updates:
            break
        tick_time = clock + rng.exponential(tick_mean)
        if max_virtual_time is not None and tick_time > max_virtual_time:
            break
        if need_pre:
            builder.pre_update(k, sum_vec * inv_n)
        clock = tick_time
        i = int(rng.integers(N))

        g = obj.noisy_gradient(spec, X[i], rng)
        n_samples += 1
        delta = -g
        if a > 0.0:
            delta = delta - a * (degrees[i] * X[i] - X[neighbor_lists[i]].sum(axis=0))
        delta *= gamma
        X[i] += delta
        sum_vec += delta
        counts[i] += 1
        k += 1

        stop = False
        if threshold_active:
            stop = builder.check_crossing(k, clock, X, sum_vec * inv_n)
        if k % record_every == 0:
            builder.record(k, clock, X)
        if stop:
            break

    return builder.finish(k, clock, X, n_samples, counts)


def run_centralized(
    config: RunConfig,
    spec: obj.ObjectiveSpec,
    init: np.ndarray | None = None,
    on_record=None,
) -> Trace:
    """Synchronized batch baseline.

    Every step draws one gradient sample per thread at the shared
    iterate and applies their average; the step duration is the maximum
    of the N sampling times, so a step of the baseline is exactly one
    synchronized round. ``init`` is the shared start point of shape
    (dim,). Per step the stream order is: N gradient samples, then N
    sampling durations.
    """
    _require_scheme(config, SCHEME_CENTRALIZED)
    N = config.n_threads
    gamma = config.step_size
    mean_time = config.mean_sample_time
    rng = make_rng(config.seed)
    if init is None:
        x = np.zeros(spec.dim)
    else:
        x = np.array(init, dtype=float)
        if x.shape != (spec.dim,):
            raise ValueError(f"init has shape {x.shape}, expected ({spec.dim},)")
    x_star = obj.optimum(spec)
    state = CentralState(position=x, virtual_clock=0.0)

    builder = _TraceBuilder(config, spec, x_star, on_record)
    builder.record(0, 0.0, x[None, :])

    clock = 0.0
    k = 0
    n_samples = 0
    max_updates = config.max_updates
    max_virtual_time = config.max_virtual_time
    record_every = config.record_every
    threshold_active = config.threshold is not None
    need_pre = config.track_running_average or bool(builder.capture_set)

    while True:
        if max_updates is not None and k >= max_updates:
            break
        G = obj.noisy_gradients(spec, np.broadcast_to(x, (N, spec.dim)), rng)
        durations = rng.exponential(mean_time, size=N)
        step_time = clock + float(durations.max())
        if max_virtual_time is not None and step_time > max_virtual_time:
            # The batch is still in flight at the horizon; its samples
            # never arrive and are not counted.
            break
        if need_pre:
            builder.pre_update(k, x)
        clock = step_time
        n_samples += N
        x += gamma * -G.mean(axis=0)
        k += 1
        state.virtual_clock = clock
        state.update_count = k

        stop = False
        if threshold_active:
            stop = builder.check_crossing(k, clock, x[None, :], x)
        if k % record_every == 0:
            builder.record(k, clock, x[None, :])
        if stop:
            break

    return builder.finish(k, clock, x[None, :], n_samples, None)


def write_trace_csv(trace: Trace, path: str) -> None:
    """Write trace records with full float round-trip precision."""
    lines = [TRACE_CSV_HEADER]
    for r in trace.records:
        lines.append(f"{r.k},{r.t!r},{r.U!r},{r.Vbar!r},{r.f_gap!r},{r.grad_norm_sq!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path: str) -> list[TraceRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRACE_CSV_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"malformed trace row {line!r}")
            records.append(
                TraceRecord(
                    k=int(parts[0]),
                    t=float(parts[1]),
                    U=float(parts[2]),
                    Vbar=float(parts[3]),
                    f_gap=float(parts[4]),
                    grad_norm_sq=float(parts[5]),
                )
            )
    return records


def _json_safe(v: float | None) -> float | None:
    if v is None:
        return None
    return None if math.isnan(v) else float(v)


def summary_json_dict(summary: RunSummary) -> dict:
    """JSON form of a run summary.

    Wall-clock time is deliberately left out so rerunning a seed yields
    byte-identical files; NaN metrics become null.
    """
    return {
        "T_hit": _json_safe(summary.T_hit),
        "threshold": summary.threshold,
        "final_U": _json_safe(summary.final_U),
        "final_Vbar": _json_safe(summary.final_Vbar),
        "final_f_gap": _json_safe(summary.final_f_gap),
        "final_grad_norm_sq": _json_safe(summary.final_grad_norm_sq),
        "seed": summary.seed,
        "scheme": summary.scheme,
        "n_updates": summary.n_updates,
        "n_samples": summary.n_samples,
        "virtual_time": summary.virtual_time,
        "hit_update": summary.hit_update,
        "per_thread_update_counts": (
            None
            if summary.per_thread_update_counts is None
            else list(summary.per_thread_update_counts)
        ),
    }


def write_summary_json(summary: RunSummary, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_json_dict(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
