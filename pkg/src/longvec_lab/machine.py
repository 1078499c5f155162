"""Functional + timing model of a scalar core with a long-vector unit.

The vector unit executes an intrinsics-level API (loads/stores, gathers,
scatters, elementwise ALU ops, reductions, mask ops, compress) over a
configurable number of lanes and a runtime-adjustable maximum vector length.
Every operation is functionally exact (64-bit elements) and charges an
integer number of cycles.

Timing model
------------
The core issues instructions in order.  Vector ALU ops and reductions charge
``issue overhead + occupancy`` at the issue pointer (occupancy is
``ceil(vl/lanes)`` plus a lane-tree term for reductions).  Vector memory
instructions charge only issue overhead; their completion times come from the
memory model and are tracked per produced value, so dependent arithmetic is
timed against data readiness while independent instructions keep issuing.
Run-ahead is bounded: at most ``vector_queue_depth`` vector instructions may
be in flight, and issuing past that limit stalls the issue pointer until the
oldest completes.  Setting ``vector_queue_depth=1`` recovers a fully
serialized unit.

The scalar side is a simple in-order pipe: ALU ops charge
``scalar_op_cycles``, every load/store performs a cache lookup charging
``l2_hit_cycles``, and at most ``scalar_outstanding_misses`` load misses may
be in flight before the pipe blocks.  Scalar stores retire through a store
buffer and do not block.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .memory import MemoryModel


class SimError(Exception):
    """Base class for simulation errors."""


class ConfigError(SimError):
    """Invalid machine or memory configuration."""


class VectorLengthError(SimError):
    """Operand length does not match the vector length in force."""


class OutOfBoundsError(SimError):
    """Access outside the simulated address space."""


WORD_BYTES = 8

_VALU_OPS = ("add", "sub", "mul", "fmadd", "min", "max",
             "cmp-lt", "cmp-eq", "and", "or", "shift")
_REDUCE_OPS = ("sum", "max", "min", "or")


@dataclass
class MachineConfig:
    """Static parameters of the emulated core and its vector unit."""

    hardware_vlmax: int = 256       # 64-bit elements per vector register
    lanes: int = 8
    scalar_outstanding_misses: int = 2
    scalar_op_cycles: int = 1
    vector_issue_overhead: int = 1
    vector_queue_depth: int = 512   # bounded run-ahead, in instructions
    address_space_words: int = 1 << 23  # 64 MiB of simulated memory

    def __post_init__(self):
        v = self.hardware_vlmax
        if v < 8 or v > 256 or v & (v - 1):
            raise ConfigError(f"hardware_vlmax must be a power of two in [8, 256], got {v}")
        if self.lanes < 1 or v % self.lanes:
            raise ConfigError(f"lanes must be >= 1 and divide hardware_vlmax, got {self.lanes}")
        if self.scalar_outstanding_misses < 1:
            raise ConfigError("scalar_outstanding_misses must be >= 1")
        if self.scalar_op_cycles < 0 or self.vector_issue_overhead < 0:
            raise ConfigError("cycle costs must be non-negative")
        if self.vector_queue_depth < 1:
            raise ConfigError("vector_queue_depth must be >= 1")


@dataclass
class VecValue:
    """A vector of 64-bit elements plus the cycle at which it is ready."""

    data: np.ndarray
    ready: int = 0

    @property
    def length(self) -> int:
        return len(self.data)


@dataclass
class MaskValue:
    """A boolean vector produced by compare ops."""

    data: np.ndarray
    ready: int = 0

    @property
    def length(self) -> int:
        return len(self.data)

    def popcount(self) -> int:
        return int(np.count_nonzero(self.data))


class AddressSpace:
    """Flat word-addressed backing store with a bump allocator.

    Addresses are byte addresses, always 8-byte aligned; allocations are
    cache-line aligned so distinct arrays never share a line.  Host-side
    reads/writes (array setup, result extraction) are untimed.
    """

    def __init__(self, n_words: int, line_bytes: int = 64):
        self.words = np.zeros(n_words, dtype=np.int64)
        self.limit = n_words * WORD_BYTES
        self._line = line_bytes
        self._next = 0

    def alloc(self, n_words: int) -> int:
        base = self._next
        end = base + n_words * WORD_BYTES
        if end > self.limit:
            raise OutOfBoundsError(f"address space exhausted ({end} > {self.limit} bytes)")
        self._next = -(-end // self._line) * self._line
        return base

    def alloc_f64(self, values) -> int:
        arr = np.asarray(values, dtype=np.float64)
        base = self.alloc(arr.size)
        self.write_f64(base, arr)
        return base

    def alloc_i64(self, values) -> int:
        arr = np.asarray(values, dtype=np.int64)
        base = self.alloc(arr.size)
        self.write_i64(base, arr)
        return base

    def write_f64(self, addr: int, values) -> None:
        arr = np.asarray(values, dtype=np.float64)
        w = addr // WORD_BYTES
        self.words[w:w + arr.size] = arr.view(np.int64)

    def write_i64(self, addr: int, values) -> None:
        arr = np.asarray(values, dtype=np.int64)
        w = addr // WORD_BYTES
        self.words[w:w + arr.size] = arr

    def read_f64(self, addr: int, n: int) -> np.ndarray:
        w = addr // WORD_BYTES
        return self.words[w:w + n].view(np.float64).copy()

    def read_i64(self, addr: int, n: int) -> np.ndarray:
        w = addr // WORD_BYTES
        return self.words[w:w + n].copy()


class VectorContext:
    """One simulation instance's core state: VL, cycle counter, issue queues.

    A context plus its MemoryModel form a single-threaded simulation
    instance; distinct instances are independent.
    """

    def __init__(self, config: MachineConfig | None = None,
                 space: AddressSpace | None = None, line_bytes: int = 64):
        self.config = config or MachineConfig()
        self.space = space or AddressSpace(self.config.address_space_words, line_bytes)
        self.effective_vlmax = self.config.hardware_vlmax
        self.vl = self.config.hardware_vlmax
        self.cycle = 0
        self.op_counts: dict[str, int] = {}
        self._inflight: deque[int] = deque()
        self._scalar_misses: deque[int] = deque()
        self._lane_shift = None  # unused; lanes need not be a power of two

    # -- bookkeeping -------------------------------------------------------

    def _count(self, name: str) -> None:
        self.op_counts[name] = self.op_counts.get(name, 0) + 1

    def _issue_vector(self, occupancy: int) -> int:
        """Advance the issue pointer for one vector instruction.

        Blocks on the run-ahead window first, then charges issue overhead
        plus `occupancy` cycles.  Returns the cycle after the charge.
        """
        q = self._inflight
        if len(q) >= self.config.vector_queue_depth:
            done = q.popleft()
            if done > self.cycle:
                self.cycle = done
        self.cycle += self.config.vector_issue_overhead + occupancy
        return self.cycle

    def _retire(self, completion: int) -> None:
        self._inflight.append(completion)

    def _occupancy(self, vl: int) -> int:
        return -(-vl // self.config.lanes)

    def _check_len(self, v, what: str = "operand") -> None:
        if v.length != self.vl:
            raise VectorLengthError(f"{what} length {v.length} != vl {self.vl}")

    # -- vector length control ---------------------------------------------

    def set_max_vl(self, new_max: int) -> int:
        """Lower (or restore) the effective maximum vector length."""
        if new_max < 1 or new_max > self.config.hardware_vlmax:
            raise ConfigError(
                f"max vl {new_max} outside [1, {self.config.hardware_vlmax}]")
        self.effective_vlmax = new_max
        if self.vl > new_max:
            self.vl = new_max
        self.cycle += self.config.scalar_op_cycles  # control-register write
        self._count("set_max_vl")
        return new_max

    def set_vl(self, avl: int) -> int:
        """Request a vector length; returns min(avl, effective_vlmax)."""
        if avl < 0:
            raise VectorLengthError(f"requested vl {avl} is negative")
        t = self._issue_vector(0)
        self.vl = min(avl, self.effective_vlmax)
        self._retire(t)
        self._count("set_vl")
        return self.vl

    # -- vector construction ------------------------------------------------

    def vbroadcast(self, value) -> VecValue:
        """Splat a scalar across the active vector length."""
        t = self._issue_vector(self._occupancy(self.vl))
        dtype = np.float64 if isinstance(value, float) else np.int64
        self._retire(t)
        self._count("vbroadcast")
        return VecValue(np.full(self.vl, value, dtype=dtype), t)

    def vindex(self, start: int, step: int = 1) -> VecValue:
        """Produce [start, start+step, ...] over the active vector length."""
        t = self._issue_vector(self._occupancy(self.vl))
        data = start + step * np.arange(self.vl, dtype=np.int64)
        self._retire(t)
        self._count("vindex")
        return VecValue(data, t)

    # -- vector ALU ----------------------------------------------------------

    def valu(self, op: str, a, b=None, mask: MaskValue | None = None,
             acc: VecValue | None = None):
        """Elementwise vector op; cmp-* return a MaskValue.

        `b` may be a VecValue, a MaskValue (for and/or on masks), or a
        scalar.  With a mask, inactive elements pass `a` through.  `fmadd`
        computes a*b + acc.
        """
        if op not in _VALU_OPS:
            raise ValueError(f"unknown vector op {op!r}")
        self._check_len(a)
        ready = a.ready
        if isinstance(b, (VecValue, MaskValue)):
            self._check_len(b)
            bd = b.data
            ready = max(ready, b.ready)
        else:
            bd = b
        if mask is not None:
            self._check_len(mask, "mask")
            ready = max(ready, mask.ready)
        if acc is not None:
            self._check_len(acc, "accumulator")
            ready = max(ready, acc.ready)

        t = self._issue_vector(self._occupancy(self.vl))
        ready = max(ready, t)
        ad = a.data

        if op == "add":
            out = ad + bd
        elif op == "sub":
            out = ad - bd
        elif op == "mul":
            out = ad * bd
        elif op == "fmadd":
            if acc is None:
                raise ValueError("fmadd requires acc")
            out = ad * bd + acc.data
        elif op == "min":
            out = np.minimum(ad, bd)
        elif op == "max":
            out = np.maximum(ad, bd)
        elif op == "cmp-lt":
            out = ad < bd
        elif op == "cmp-eq":
            out = ad == bd
        elif op == "and":
            out = ad & bd
        elif op == "or":
            out = ad | bd
        else:  # shift: arithmetic right shift by scalar amount
            out = ad >> bd

        self._retire(ready)
        self._count("valu")
        if op.startswith("cmp"):
            return MaskValue(out, ready)
        if mask is not None:
            out = np.where(mask.data, out, ad)
        if isinstance(a, MaskValue) and op in ("and", "or"):
            return MaskValue(out.astype(bool), ready)
        return VecValue(out, ready)

    def vreduce(self, op: str, a: VecValue, init=None):
        """Reduce all vl elements to a scalar.

        Functional order is strict element order with an optional carry-in
        (`init`), so results are identical for every vector length; the
        charged cost still models a lane tree:
        issue + ceil(vl/lanes) + ceil(log2(max(lanes, 2))).
        """
        if op not in _REDUCE_OPS:
            raise ValueError(f"unknown reduction {op!r}")
        self._check_len(a)
        if self.vl == 0 and op != "sum":
            raise VectorLengthError(f"reduction {op!r} over an empty vector")
        tree = math.ceil(math.log2(max(self.config.lanes, 2)))
        t = self._issue_vector(self._occupancy(self.vl) + tree)
        self._retire(max(t, a.ready))
        self._count("vreduce")

        data = a.data
        if op == "sum":
            total = np.float64(0.0) if init is None else np.float64(init)
            if data.dtype == np.int64:
                total = int(init or 0)
                for x in data:
                    total += int(x)
                return total
            for x in data:
                total += x
            return float(total)
        if op == "or":
            out = np.int64(0 if init is None else init)
            for x in data:
                out |= x
            return int(out)
        red = np.min(data) if op == "min" else np.max(data)
        if init is not None:
            red = min(red, init) if op == "min" else max(red, init)
        return red.item()

    def vcompress(self, a: VecValue, mask: MaskValue) -> VecValue:
        """Pack mask-true elements of `a`, in order; length = popcount."""
        self._check_len(a)
        self._check_len(mask, "mask")
        t = self._issue_vector(self._occupancy(self.vl))
        ready = max(t, a.ready, mask.ready)
        self._retire(ready)
        self._count("vcompress")
        return VecValue(a.data[mask.data].copy(), ready)

    def vslidedown(self, a: VecValue, offset: int) -> VecValue:
        """Take vl elements of `a` starting at `offset` (register slide)."""
        if offset < 0 or offset + self.vl > a.length:
            raise VectorLengthError(
                f"slide [{offset}, {offset + self.vl}) outside source of length {a.length}")
        t = self._issue_vector(self._occupancy(self.vl))
        ready = max(t, a.ready)
        self._retire(ready)
        self._count("vslidedown")
        return VecValue(a.data[offset:offset + self.vl].copy(), ready)

    # -- vector memory -------------------------------------------------------

    def _element_addrs(self, base: int, idx: VecValue | None) -> np.ndarray:
        if idx is None:
            addrs = base + WORD_BYTES * np.arange(self.vl, dtype=np.int64)
        else:
            self._check_len(idx, "index vector")
            addrs = base + WORD_BYTES * idx.data
        if self.vl and (addrs.min() < 0 or addrs.max() + WORD_BYTES > self.space.limit):
            raise OutOfBoundsError("vector access outside simulated address space")
        return addrs

    def vload(self, mem: MemoryModel, base: int, idx: VecValue | None = None,
              as_float: bool = True) -> VecValue:
        """Unit-stride load (idx=None) or gather (idx = element offsets).

        Unit stride requests ceil(vl*8/line) lines; a gather requests one
        line per element after dedup of identical lines.
        """
        t = self._issue_vector(0)
        self._count("vload")
        if self.vl == 0:
            self._retire(t)
            return VecValue(np.empty(0, dtype=np.float64 if as_float else np.int64), t)
        addrs = self._element_addrs(base, idx)
        arrival = t if idx is None else max(t, idx.ready)
        lines = np.unique(addrs >> mem.line_shift)
        completion = mem.issue_lines(lines, "read", arrival)
        words = self.space.words[addrs // WORD_BYTES]
        data = words.view(np.float64) if as_float else words
        self._retire(completion)
        return VecValue(data.copy(), completion)

    def vstore(self, mem: MemoryModel, base: int, value: VecValue,
               idx: VecValue | None = None) -> None:
        """Unit-stride store or scatter; mirrors vload's request accounting.

        Store data readiness does not delay the requests (store-buffer
        semantics); scatter index readiness does.
        """
        self._check_len(value, "store data")
        t = self._issue_vector(0)
        self._count("vstore")
        if self.vl == 0:
            self._retire(t)
            return
        addrs = self._element_addrs(base, idx)
        arrival = t if idx is None else max(t, idx.ready)
        lines = np.unique(addrs >> mem.line_shift)
        completion = mem.issue_lines(lines, "write", arrival)
        words = value.data if value.data.dtype == np.int64 else value.data.view(np.int64)
        windex = addrs // WORD_BYTES
        if idx is not None and len(np.unique(windex)) != len(windex):
            for w, v in zip(windex.tolist(), words.tolist()):  # last write wins
                self.space.words[w] = v
        else:
            self.space.words[windex] = words
        self._retire(completion)

    # -- scalar side ----------------------------------------------------------

    def _scalar_access(self, mem: MemoryModel, addr: int, kind: str) -> None:
        if addr < 0 or addr + WORD_BYTES > self.space.limit:
            raise OutOfBoundsError(f"scalar access at {addr:#x} out of bounds")
        line = addr >> mem.line_shift
        if mem.probe(line):
            hit_at = self.cycle
            mem.commit_hit(line, kind, hit_at)
            self.cycle = hit_at + mem.config.l2_hit_cycles
            return
        if kind == "read":
            q = self._scalar_misses
            if len(q) >= self.config.scalar_outstanding_misses:
                done = q.popleft()
                if done > self.cycle:
                    self.cycle = done
            completion = mem.issue_lines(np.array([line]), kind, self.cycle)
            q.append(completion)
        else:
            # store buffer: traffic is issued but the pipe does not wait
            mem.issue_lines(np.array([line]), kind, self.cycle)
        self.cycle += mem.config.l2_hit_cycles

    def scalar_load(self, mem: MemoryModel, addr: int, as_float: bool = True):
        self._scalar_access(mem, addr, "read")
        self.op_counts["scalar_load"] = self.op_counts.get("scalar_load", 0) + 1
        word = self.space.words[addr // WORD_BYTES]
        return float(word.view(np.float64)) if as_float else int(word)

    def scalar_store(self, mem: MemoryModel, addr: int, value) -> None:
        self._scalar_access(mem, addr, "write")
        self.op_counts["scalar_store"] = self.op_counts.get("scalar_store", 0) + 1
        w = addr // WORD_BYTES
        if isinstance(value, float):
            self.space.words[w] = np.float64(value).view(np.int64)
        else:
            self.space.words[w] = value

    def scalar_op(self, op: str, a, b):
        """One scalar ALU/FPU op; charges scalar_op_cycles."""
        self.cycle += self.config.scalar_op_cycles
        self.op_counts["scalar_op"] = self.op_counts.get("scalar_op", 0) + 1
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        if op == "div":
            return a / b
        if op == "min":
            return min(a, b)
        if op == "max":
            return max(a, b)
        if op == "cmp-lt":
            return a < b
        if op == "cmp-eq":
            return a == b
        raise ValueError(f"unknown scalar op {op!r}")

    # -- end of run -----------------------------------------------------------

    def finalize(self, mem: MemoryModel) -> int:
        """Account for work still in flight and return the final cycle count.

        Waits for outstanding scalar load misses and for the memory system's
        last granted request; vector values produced but never consumed are
        treated as retired by the decoupled unit.
        """
        while self._scalar_misses:
            done = self._scalar_misses.popleft()
            if done > self.cycle:
                self.cycle = done
        if mem.last_grant_cycle > self.cycle:
            self.cycle = mem.last_grant_cycle
        return self.cycle


@dataclass
class Simulation:
    """Bundle of one context and its memory model."""

    ctx: VectorContext
    mem: MemoryModel

    @classmethod
    def create(cls, machine: MachineConfig | None = None, memory=None) -> "Simulation":
        from .memory import MemoryConfig
        mcfg = memory or MemoryConfig()
        machine = machine or MachineConfig()
        ctx = VectorContext(machine, line_bytes=mcfg.line_size)
        return cls(ctx=ctx, mem=MemoryModel(mcfg))

    def cycles(self) -> int:
        return self.ctx.finalize(self.mem)
