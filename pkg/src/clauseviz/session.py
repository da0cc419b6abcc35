"""Consumer orchestration: event log, playback, frames, relayout control.

The event log is append-only with periodic state checkpoints (graph +
heat snapshots every C events), which makes seek O(C): restore the
nearest checkpoint at or below the target and replay forward.  The tick
loop is the only mutator of graph/heat state; ingest only appends to the
log and rendering reads immutable FrameStates.
"""

from __future__ import annotations

import enum
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from queue import Queue
from typing import Optional, Tuple

import numpy as np

from . import wire
from .contraction import ContractionHierarchy, build_hierarchy, single_level
from .graph import GraphState, ReductionKind, WeightFunction, WeightedGraph
from .heat import HeatConfig, HeatMode, HeatState, make_heat_state
from .layout import LayoutConfig, Positions, layout, relayout_from_session
from .model import ClauseEvent, CnfFormula, EventKind, canonicalize
from .kernels import IMPLEMENTATION

log = logging.getLogger("clauseviz.session")

DEFAULT_CHECKPOINT_INTERVAL = 10000
SPILL_BLOCK = 4096


class OutOfRange(IndexError):
    pass


class AlreadyRunning(RuntimeError):
    pass


class PlaybackStatus(enum.Enum):
    PLAYING = "playing"
    PAUSED = "paused"
    ENDED = "ended"


@dataclass
class SessionConfig:
    reduction: ReductionKind = ReductionKind.RING
    weight_fn: WeightFunction = WeightFunction.INVERSE_SIZE_MINUS_ONE
    heat: HeatConfig = field(default_factory=HeatConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    contract_target: int = 30000
    seed: int = 0
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL
    frame_rate: float = 30.0
    chunk_policy: object = "drain"  # "drain" or an int (events per frame)
    ram_budget_events: Optional[int] = None  # spill to disk beyond this
    spill_dir: Optional[str] = None

    def describe(self) -> dict:
        """JSON-friendly echo of the configuration (for manifests/state)."""
        return {
            "reduction": self.reduction.value,
            "weight_fn": self.weight_fn.value,
            "heat_mode": self.heat.mode.value,
            "heat_k": self.heat.k,
            "palette": [list(c) for c in self.heat.palette],
            "layout_iterations": self.layout.iterations,
            "layout_theta": self.layout.theta,
            "layout_cooling": self.layout.cooling,
            "attraction_scale": self.layout.attraction_scale,
            "contract_target": self.contract_target,
            "seed": self.seed,
            "checkpoint_interval": self.checkpoint_interval,
            "frame_rate": self.frame_rate,
            "chunk_policy": (self.chunk_policy if isinstance(self.chunk_policy, str)
                             else int(self.chunk_policy)),
            "kernels": IMPLEMENTATION,
        }


class EventLog:
    """Append-only clause event log; assigns dense sequence numbers at ingest.

    With a RAM budget, older events spill to a wire-format file in blocks;
    they are transparently read back for seeks and scratch replays.
    Tautological clauses are stored as clause None (still holding their
    sequence number); on spill they round-trip through a minimal (1, -1)
    tautology encoding, which preserves their replay semantics.
    """

    def __init__(self, ram_budget_events: Optional[int] = None,
                 spill_dir: Optional[str] = None):
        self._events: list = []
        self._ram_start = 0
        self._total = 0
        self._lock = threading.Lock()
        self.closed = False
        self.close_reason: Optional[str] = None
        self._budget = ram_budget_events
        self._block = max(1, min(SPILL_BLOCK, ram_budget_events or SPILL_BLOCK))
        self._spill_dir = spill_dir
        self._spill_fp = None
        self._spill_index: list = []  # (start_seq, count, offset, nbytes)
        self._block_cache: Tuple[int, list] = (-1, [])

    def __len__(self) -> int:
        return self._total

    def append(self, kind: EventKind, literals) -> ClauseEvent:
        clause = canonicalize(literals)
        with self._lock:
            event = ClauseEvent(kind, clause, self._total)
            self._events.append(event)
            self._total += 1
            if self._budget is not None and len(self._events) > self._budget:
                self._spill_oldest()
        return event

    def ingest(self, kind: EventKind, literals) -> ClauseEvent:  # EventSink
        return self.append(kind, literals)

    def producer_connected(self, num_variables_hint: int) -> None:  # EventSink
        self.closed = False
        self.close_reason = None

    def producer_done(self, reason: str) -> None:  # EventSink
        self.close(reason)

    def close(self, reason: str = "closed") -> None:
        self.closed = True
        self.close_reason = reason

    def get(self, index: int) -> ClauseEvent:
        if not 0 <= index < self._total:
            raise OutOfRange(f"event index {index} out of range")
        if index >= self._ram_start:
            return self._events[index - self._ram_start]
        return self._load_block(index)[index % self._block]

    def iter_range(self, start: int, stop: int):
        for i in range(start, stop):
            yield self.get(i)

    # -- spill machinery ---------------------------------------------------

    def _spill_path(self) -> str:
        d = self._spill_dir or "."
        os.makedirs(d, exist_ok=True)
        return os.path.join(d, "clauseviz-events.spill")

    def _spill_oldest(self) -> None:
        while len(self._events) >= (self._budget or 0) + self._block:
            block = self._events[:self._block]
            if self._spill_fp is None:
                self._spill_fp = open(self._spill_path(), "wb")
            payload = bytearray()
            for ev in block:
                lits = (1, -1) if ev.clause is None else ev.clause
                payload += wire.encode_clause_message(ev.kind, lits)
            offset = self._spill_fp.tell()
            self._spill_fp.write(payload)
            self._spill_fp.flush()
            self._spill_index.append((self._ram_start, len(block), offset,
                                      len(payload)))
            del self._events[:self._block]
            self._ram_start += len(block)

    def _load_block(self, index: int):
        block_no = index // self._block
        cached_no, cached = self._block_cache
        if cached_no == block_no:
            return cached
        start_seq, count, offset, nbytes = self._spill_index[block_no]
        with open(self._spill_path(), "rb") as fp:
            fp.seek(offset)
            data = fp.read(nbytes)
        events = []
        for i, msg in enumerate(wire.decode_all(data)):
            kind = (EventKind.ADD if msg.kind is wire.MessageKind.ADD
                    else EventKind.DELETE)
            events.append(ClauseEvent(kind, canonicalize(msg.literals),
                                      start_seq + i))
        self._block_cache = (block_no, events)
        return events


@dataclass
class FrameState:
    """Everything one rendered frame needs; arrays indexed by coarse node id-1."""

    frame_index: int
    cursor: int
    status: str
    layout_rev: int
    node_ids: np.ndarray
    positions: np.ndarray  # (m, 2) in the unit box
    heats: np.ndarray      # (m,)
    member_counts: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    stats: dict

    def to_json(self, include_geometry: bool = True) -> dict:
        body = {
            "type": "frame",
            "frame_index": self.frame_index,
            "cursor": self.cursor,
            "status": self.status,
            "layout_rev": self.layout_rev,
            "heat": [round(float(h), 6) for h in self.heats],
            "edge_w": [round(float(w), 9) for w in self.edge_w],
            "stats": self.stats,
        }
        if include_geometry:
            body["nodes"] = {
                "id": [int(i) for i in self.node_ids],
                "x": [float(x) for x in self.positions[:, 0]],
                "y": [float(y) for y in self.positions[:, 1]],
                "members": [int(m) for m in self.member_counts],
            }
            body["edges"] = {
                "u": [int(u) for u in self.edge_u],
                "v": [int(v) for v in self.edge_v],
            }
        return body


class _CoarseView:
    """Live coarse projection of the fine graph through the hierarchy.

    Maintained incrementally from per-event edge deltas; variables that
    appear after the hierarchy was built become fresh singleton supernodes
    placed deterministically until the next relayout.
    """

    def __init__(self, hierarchy: ContractionHierarchy, fine: WeightedGraph):
        self.proj = hierarchy.projection_array().copy()
        self.num_top = hierarchy.top.num_nodes
        self.members = hierarchy.member_counts().astype(np.int64)
        if len(self.members) < self.num_top + 1:
            self.members = np.resize(self.members, self.num_top + 1)
        self.edges: dict = {}
        for (u, v), w in fine.edges.items():
            self._bump(u, v, w)

    def _ensure_var(self, var: int) -> None:
        if var < len(self.proj):
            return
        old = len(self.proj)
        grown = np.zeros(var + 1, dtype=np.int64)
        grown[:old] = self.proj
        for v in range(old, var + 1):
            self.num_top += 1
            grown[v] = self.num_top
        self.proj = grown
        extra = np.ones(self.num_top + 1 - len(self.members), dtype=np.int64)
        self.members = np.concatenate([self.members, extra])

    def _bump(self, u: int, v: int, dw: float) -> None:
        self._ensure_var(max(u, v))
        cu = int(self.proj[u])
        cv = int(self.proj[v])
        if cu == cv:
            return
        key = (cu, cv) if cu < cv else (cv, cu)
        w = self.edges.get(key, 0.0) + dw
        if w <= 1e-9:
            self.edges.pop(key, None)
        else:
            self.edges[key] = w

    def apply_deltas(self, deltas) -> None:
        for (u, v), dw in deltas:
            self._bump(u, v, dw)

    def edge_arrays(self):
        items = sorted(self.edges.items())
        eu = np.fromiter((k[0] for k, _ in items), dtype=np.int64, count=len(items))
        ev = np.fromiter((k[1] for k, _ in items), dtype=np.int64, count=len(items))
        ew = np.fromiter((w for _, w in items), dtype=np.float64, count=len(items))
        return eu, ev, ew

    def aggregate(self, fine_values: np.ndarray) -> np.ndarray:
        n = min(len(fine_values), len(self.proj)) - 1
        sums = np.bincount(self.proj[1:n + 1], weights=fine_values[1:n + 1],
                           minlength=self.num_top + 1)
        counts = np.bincount(self.proj[1:n + 1], minlength=self.num_top + 1)
        out = np.zeros(self.num_top + 1, dtype=np.float64)
        nz = counts > 0
        out[nz] = sums[nz] / counts[nz]
        return out


def _hash_position(var: int) -> Tuple[float, float]:
    # deterministic placeholder position for variables born mid-stream
    h1 = (var * 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
    h2 = (h1 * 0xBF58476D1CE4E5B9) & ((1 << 64) - 1)
    return ((h1 >> 11) / 9007199254740992.0, (h2 >> 11) / 9007199254740992.0)


class Session:
    """A single visualization run over a formula plus an event log."""

    def __init__(self, formula: CnfFormula, config: SessionConfig,
                 event_log: Optional[EventLog] = None):
        self.config = config
        self.formula = formula
        self.log = event_log if event_log is not None else EventLog(
            config.ram_budget_events, config.spill_dir)
        self.graph_state = GraphState.build_initial(
            formula, config.reduction, config.weight_fn)
        self.heat_state: HeatState = make_heat_state(config.heat)
        self._heat_rev = 0
        base = self.graph_state.graph.copy()
        if base.num_nodes > config.contract_target:
            self.hierarchy = build_hierarchy(base, config.contract_target,
                                             seed=config.seed)
        else:
            self.hierarchy = single_level(base)
        self.positions = layout(self.hierarchy.top, config.layout) \
            if self.hierarchy.top.num_nodes else Positions(np.zeros((0, 2)))
        self.layout_rev = 0
        self.view = _CoarseView(self.hierarchy, self.graph_state.graph)
        self.status = PlaybackStatus.PAUSED
        self.cursor = 0
        self.frame_index = 0
        self._checkpoints: dict = {}
        self._relayout_thread: Optional[threading.Thread] = None
        self._swap_lock = threading.Lock()
        self.notifications: Queue = Queue()
        self._stats_events = 0
        self._stats_t0 = time.monotonic()
        self._last_frame: Optional[FrameState] = None
        self._save_checkpoint(0)

    # -- checkpointing -----------------------------------------------------

    def _save_checkpoint(self, index: int) -> None:
        self._checkpoints[index] = {
            "graph": self.graph_state.snapshot(),
            "heat": self.heat_state.copy(),
            "heat_rev": self._heat_rev,
        }

    def _restore_checkpoint(self, index: int) -> None:
        snap = self._checkpoints[index]
        self.graph_state.restore(snap["graph"])
        if snap["heat_rev"] == self._heat_rev:
            self.heat_state = snap["heat"].copy()
        else:
            # heat config changed since this checkpoint was cut: heat is a
            # pure function of the prefix, so replay it alone
            state = make_heat_state(self.config.heat)
            for ev in self.log.iter_range(0, index):
                state.apply(ev)
            self.heat_state = state
        self.cursor = index
        self._rebuild_view()

    def _rebuild_view(self) -> None:
        self.view = _CoarseView(self.hierarchy, self.graph_state.graph)

    # -- event application -------------------------------------------------

    def _apply_one(self, event: ClauseEvent) -> None:
        deltas = self.graph_state.apply_event(event)
        if deltas:
            self.view.apply_deltas(deltas)
        elif event.clause and event.kind is EventKind.ADD:
            # no edge deltas but an added clause may introduce fresh variables
            top = -event.clause[-1] if event.clause[-1] < 0 else event.clause[-1]
            self.view._ensure_var(top)
        self.heat_state.apply(event)
        done = event.sequence + 1
        if done % self.config.checkpoint_interval == 0 \
                and done not in self._checkpoints:
            self._save_checkpoint(done)

    def _advance(self, count: int) -> None:
        for ev in self.log.iter_range(self.cursor, self.cursor + count):
            self._apply_one(ev)
        self.cursor += count
        self._stats_events += count

    # -- playback ----------------------------------------------------------

    def play(self) -> None:
        self.status = PlaybackStatus.PLAYING

    def pause(self) -> None:
        if self.status is not PlaybackStatus.ENDED:
            self.status = PlaybackStatus.PAUSED

    def stop(self) -> "FrameState":
        """Pause and rewind to the start of the proof."""
        self.status = PlaybackStatus.PAUSED
        return self.seek(0)

    def tick(self) -> FrameState:
        """Advance one frame's worth of events (chunk policy) and snapshot."""
        if self.status is not PlaybackStatus.PLAYING:
            if self._last_frame is None:
                self._last_frame = self._make_frame()
            return self._last_frame
        available = len(self.log) - self.cursor
        if self.config.chunk_policy == "drain":
            chunk = available
        else:
            chunk = min(int(self.config.chunk_policy), available)
        if chunk:
            self._advance(chunk)
        self.frame_index += 1
        if self.log.closed and self.cursor == len(self.log):
            self.status = PlaybackStatus.ENDED
        frame = self._make_frame()
        self._last_frame = frame
        return frame

    def seek(self, target: int) -> FrameState:
        """Jump to an event index; state matches a from-scratch replay."""
        if not 0 <= target <= len(self.log):
            raise OutOfRange(f"seek target {target} outside [0, {len(self.log)}]")
        if target == self.cursor:
            frame = self._make_frame()
            self._last_frame = frame
            return frame
        if target < self.cursor:
            candidates = [i for i in self._checkpoints if i <= target]
            self._restore_checkpoint(max(candidates))
        self._advance(target - self.cursor)
        if self.status is PlaybackStatus.ENDED and target < len(self.log):
            self.status = PlaybackStatus.PAUSED
        frame = self._make_frame()
        self._last_frame = frame
        return frame

    def step(self, n: int) -> FrameState:
        target = self.cursor + n
        if not 0 <= target <= len(self.log):
            raise OutOfRange(f"step by {n} leaves [0, {len(self.log)}]")
        return self.seek(target)

    # -- relayout ----------------------------------------------------------

    def trigger_relayout(self, block: bool = False) -> None:
        """Recompute positions with proof-adjusted weights; async by default."""
        if self._relayout_thread is not None and self._relayout_thread.is_alive():
            raise AlreadyRunning("a relayout is already running")
        self.pause()
        clone = GraphState(self.graph_state.graph.num_nodes,
                           self.config.reduction, self.config.weight_fn)
        clone.restore(self.graph_state.snapshot())
        old_hierarchy = self.hierarchy
        old_positions = self.positions

        def work():
            positions, hierarchy = relayout_from_session(
                clone, old_hierarchy, old_positions, self.config.layout,
                self.config.contract_target)
            with self._swap_lock:
                self.positions = positions
                self.hierarchy = hierarchy
                self.layout_rev += 1
                self._rebuild_view()
                self._last_frame = None
            self.notifications.put({"type": "relayout_done",
                                    "layout_rev": self.layout_rev})

        if block:
            work()
        else:
            self._relayout_thread = threading.Thread(
                target=work, name="clauseviz-relayout", daemon=True)
            self._relayout_thread.start()

    def relayout_running(self) -> bool:
        t = self._relayout_thread
        return t is not None and t.is_alive()

    def set_heat_config(self, heat: HeatConfig) -> None:
        """Swap heat mode/k/palette; heat state is replayed from the prefix."""
        self.config.heat = heat
        self._heat_rev += 1
        state = make_heat_state(heat)
        for ev in self.log.iter_range(0, self.cursor):
            state.apply(ev)
        self.heat_state = state
        self._last_frame = None

    # -- frames and state ----------------------------------------------------

    def _make_frame(self) -> FrameState:
        with self._swap_lock:
            num_vars = self.graph_state.graph.num_nodes
            fine = self.heat_state.values(num_vars)
            heats = self.view.aggregate(fine)[1:]
            eu, ev, ew = self.view.edge_arrays()
            m = self.view.num_top
            xy = np.zeros((m, 2), dtype=np.float64)
            have = min(m, self.positions.num_nodes)
            xy[:have] = self.positions.xy[:have]
            for node in range(have + 1, m + 1):
                xy[node - 1] = _hash_position(node)
            elapsed = time.monotonic() - self._stats_t0
            stats = {
                "events_per_second": (self._stats_events / elapsed
                                      if elapsed > 0 else 0.0),
                "log_length": len(self.log),
                "unknown_deletes": self.graph_state.unknown_deletes,
                "live_clauses": sum(self.graph_state.multiset.values()),
                "kernels": IMPLEMENTATION,
            }
            return FrameState(
                frame_index=self.frame_index,
                cursor=self.cursor,
                status=self.status.value,
                layout_rev=self.layout_rev,
                node_ids=np.arange(1, m + 1, dtype=np.int64),
                positions=xy,
                heats=heats,
                member_counts=self.view.members[1:].copy(),
                edge_u=eu, edge_v=ev, edge_w=ew,
                stats=stats,
            )

    def current_frame(self) -> FrameState:
        if self._last_frame is None:
            self._last_frame = self._make_frame()
        return self._last_frame

    def get_state(self) -> dict:
        return {
            "status": self.status.value,
            "cursor": self.cursor,
            "log_length": len(self.log),
            "log_closed": self.log.closed,
            "frame_index": self.frame_index,
            "layout_rev": self.layout_rev,
            "relayout_running": self.relayout_running(),
            "checkpoint_interval": self.config.checkpoint_interval,
            "checkpoints": sorted(self._checkpoints),
            "num_top_nodes": self.view.num_top,
            "unknown_deletes": self.graph_state.unknown_deletes,
            "config": self.config.describe(),
        }


class SessionRunner:
    """Drives ticks at the configured frame rate on a dedicated thread.

    Commands submitted from other threads (the control API) run between
    ticks on the loop thread, so the tick loop stays the only mutator and
    no frame ever mixes two cursors.
    """

    def __init__(self, session: Session):
        self.session = session
        self._commands: Queue = Queue()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop,
                                        name="clauseviz-ticks", daemon=True)
        self.frame_listeners: list = []

    def start(self) -> "SessionRunner":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5)

    def submit(self, fn, timeout: float = 30.0):
        """Run fn() on the loop thread; returns its result (or raises)."""
        done = threading.Event()
        box: dict = {}

        def task():
            try:
                box["result"] = fn()
            except BaseException as exc:  # propagated to the caller
                box["error"] = exc
            done.set()

        self._commands.put(task)
        if not done.wait(timeout):
            raise TimeoutError("session command timed out")
        if "error" in box:
            raise box["error"]
        return box.get("result")

    def _loop(self) -> None:
        interval = 1.0 / self.session.config.frame_rate
        next_tick = time.monotonic()
        while not self._stop.is_set():
            while not self._commands.empty():
                self._commands.get()()
            frame = self.session.tick()
            for listener in list(self.frame_listeners):
                try:
                    listener(frame)
                except Exception:
                    log.exception("frame listener failed")
            next_tick += interval
            delay = next_tick - time.monotonic()
            if delay > 0:
                self._stop.wait(delay)
            else:
                next_tick = time.monotonic()
