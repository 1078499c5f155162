"""Memory-side timing engine: L2 cache, latency control, bandwidth throttle.

Requests are line-granular.  A set-associative write-allocate/write-back L2
sits in front of main memory.  Hits complete ``l2_hit_cycles`` after lookup
and bypass the throttle.  Misses are granted by a window limiter that admits
at most ``bw_numerator`` requests per ``bw_denominator``-cycle window
(windows are fixed and consecutive from the cycle the configuration took
effect) and complete exactly ``l2_hit_cycles + base_memory_latency +
extra_latency`` cycles after their grant, fully pipelined: a later grant
never waits on an earlier completion.  Dirty evictions consume limiter
grants like any other write.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class MemoryConfigError(ValueError):
    pass


@dataclass
class MemoryConfig:
    """Cache geometry plus latency/bandwidth knobs."""

    line_size: int = 64
    l2_size: int = 256 * 1024
    l2_ways: int = 8
    l2_hit_cycles: int = 10
    base_memory_latency: int = 50
    extra_latency: int = 0
    bw_numerator: int = 1
    bw_denominator: int = 1

    def __post_init__(self):
        ls = self.line_size
        if ls <= 0 or ls & (ls - 1):
            raise MemoryConfigError(f"line_size must be a power of two, got {ls}")
        if self.l2_ways < 1 or self.l2_size % (ls * self.l2_ways):
            raise MemoryConfigError("l2_size must be divisible by line_size * l2_ways")
        if self.bw_numerator < 1 or self.bw_denominator < 1:
            raise MemoryConfigError("bandwidth numerator and denominator must be >= 1")
        if self.extra_latency < 0:
            raise MemoryConfigError("extra_latency must be >= 0")
        if self.l2_hit_cycles < 0 or self.base_memory_latency < 0:
            raise MemoryConfigError("latencies must be >= 0")

    @property
    def n_sets(self) -> int:
        return self.l2_size // (self.line_size * self.l2_ways)


@dataclass
class RequestBatch:
    """Deduplicated, line-aligned addresses issued by one instruction."""

    line_addresses: np.ndarray  # line-aligned byte addresses
    kind: str                   # "read" | "write"
    start_cycle: int


class MemoryModel:
    """Timing engine owned by exactly one simulation instance.

    Set ``log_requests=True`` to record one ``(issued, line_addr, kind,
    hit|miss, grant, completion)`` tuple per line access (hits have
    ``grant == issued``).
    """

    def __init__(self, config: MemoryConfig | None = None, log_requests: bool = False):
        self.config = config or MemoryConfig()
        self.line_shift = self.config.line_size.bit_length() - 1
        self._sets: list[dict[int, bool]] = [dict() for _ in range(self.config.n_sets)]
        self._n_sets = self.config.n_sets
        self._ways = self.config.l2_ways
        # limiter state: windows are counted from `_anchor`
        self._anchor = 0
        self._window_used: dict[int, int] = {}
        self._cursor_window = 0
        self.last_grant_cycle = 0
        self.request_log: list | None = [] if log_requests else None
        # running statistics (cheap, always on)
        self.n_hits = 0
        self.n_misses = 0
        self.n_writebacks = 0

    # -- reconfiguration ------------------------------------------------------

    def configure_extra_latency(self, cycles: int) -> None:
        """Change the programmable miss latency; applies to later misses only."""
        if cycles < 0:
            raise MemoryConfigError("extra_latency must be >= 0")
        self.config.extra_latency = cycles

    def configure_bandwidth(self, numerator: int, denominator: int,
                            at_cycle: int | None = None) -> None:
        """Re-anchor the request windows to `at_cycle` with a new num/den."""
        if numerator < 1 or denominator < 1:
            raise MemoryConfigError("bandwidth numerator and denominator must be >= 1")
        self.config.bw_numerator = numerator
        self.config.bw_denominator = denominator
        self._anchor = self.last_grant_cycle if at_cycle is None else at_cycle
        self._window_used = {}
        self._cursor_window = 0

    # -- cache internals --------------------------------------------------------

    def probe(self, line: int) -> bool:
        """True if `line` is resident (no state change)."""
        return line in self._sets[line % self._n_sets]

    def commit_hit(self, line: int, kind: str, at: int) -> None:
        """Refresh LRU for a hit found via probe(); logs the access."""
        s = self._sets[line % self._n_sets]
        dirty = s.pop(line)
        s[line] = dirty or kind == "write"
        self.n_hits += 1
        if self.request_log is not None:
            self.request_log.append(
                (at, line << self.line_shift, kind, "hit", at, at + self.config.l2_hit_cycles))

    def _grant(self, at: int) -> int:
        """Earliest cycle >= `at` at which the limiter admits one request.

        Window occupancy is tracked per window index; a request that lands
        in a full window is pushed to the next window with capacity (the
        search jumps to the furthest window already in use, which keeps the
        scan amortized O(1) under saturation).
        """
        cfg = self.config
        if at < self._anchor:
            at = self._anchor
        w = (at - self._anchor) // cfg.bw_denominator
        used = self._window_used
        num = cfg.bw_numerator
        if used.get(w, 0) >= num:
            if w < self._cursor_window:
                w = self._cursor_window
            while used.get(w, 0) >= num:
                w += 1
        if w > self._cursor_window:
            self._cursor_window = w
        used[w] = used.get(w, 0) + 1
        grant = max(at, self._anchor + w * cfg.bw_denominator)
        if grant > self.last_grant_cycle:
            self.last_grant_cycle = grant
        return grant

    def _miss(self, line: int, kind: str, at: int) -> int:
        cfg = self.config
        s = self._sets[line % self._n_sets]
        if len(s) >= self._ways:
            victim = next(iter(s))
            if s.pop(victim):  # dirty eviction pays a write grant
                wb_grant = self._grant(at)
                self.n_writebacks += 1
                if self.request_log is not None:
                    self.request_log.append(
                        (at, victim << self.line_shift, "write", "miss", wb_grant,
                         wb_grant + cfg.l2_hit_cycles + cfg.base_memory_latency + cfg.extra_latency))
        s[line] = kind == "write"
        grant = self._grant(at)
        completion = grant + cfg.l2_hit_cycles + cfg.base_memory_latency + cfg.extra_latency
        self.n_misses += 1
        if self.request_log is not None:
            self.request_log.append(
                (at, line << self.line_shift, kind, "miss", grant, completion))
        return completion

    # -- request entry points ------------------------------------------------

    def issue_lines(self, lines: np.ndarray, kind: str, at: int) -> int:
        """Process line numbers (addr >> line_shift) at cycle `at`.

        Returns the max completion cycle over the batch; `at` for an empty
        batch.
        """
        completion = at
        hit_done = at + self.config.l2_hit_cycles
        for line in lines.tolist():
            if self.probe(line):
                self.commit_hit(line, kind, at)
                if hit_done > completion:
                    completion = hit_done
            else:
                done = self._miss(line, kind, at)
                if done > completion:
                    completion = done
        return completion

    def issue_requests(self, batch: RequestBatch) -> int:
        """Batch interface over issue_lines for line-aligned byte addresses."""
        if batch.kind not in ("read", "write"):
            raise ValueError(f"bad request kind {batch.kind!r}")
        lines = np.asarray(batch.line_addresses, dtype=np.int64) >> self.line_shift
        return self.issue_lines(lines, batch.kind, batch.start_cycle)

    # -- log export --------------------------------------------------------------

    def write_log_csv(self, path) -> None:
        """Dump the request trace; column order is stable for replay tools."""
        if self.request_log is None:
            raise ValueError("request logging was not enabled")
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["cycle_issued", "line_address", "kind", "result",
                        "grant_cycle", "completion_cycle"])
            for issued, addr, kind, result, grant, completion in self.request_log:
                w.writerow([issued, f"0x{addr:x}", kind, result, grant, completion])
