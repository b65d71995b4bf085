"""Block-pipelined transmission through the cascade.

In block b relay i forwards the index it decoded at the end of block b-1,
so the source message of block b reaches the sink at the end of block b+m.
Every node derives the downstream allocations it must avoid from its own
history of forwarded indices; nothing is shared between nodes except the
channel.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .channel import CascadeTopology, network_block, render
from .coding import (CodebookSpec, SlotAllocation, TwoSourceSpec, allocation_chain,
                     check_half_duplex, decode_at_node, encode_relay, encode_source,
                     optimize_slot_counts, two_source_allocation, two_source_decode,
                     two_source_decode_source, two_source_encode, two_source_encode_source)
from .errors import DomainError, IntegrityError, ZeroErrorViolation

MAX_TRACE_SYMBOLS = 10**6


@dataclass
class NodeState:
    node_index: int
    decoded_history: list[int] = field(default_factory=list)
    current_allocation: SlotAllocation | None = None


@dataclass
class ExperimentConfig:
    spec: CodebookSpec | TwoSourceSpec
    blocks: int
    seed: int = 0
    message_source: str = "random"  # random | exhaustive | explicit
    messages: Sequence[int] | None = None
    relay_messages: Sequence[int] | None = None
    trace: bool = False

    def __post_init__(self):
        m = 1 if isinstance(self.spec, TwoSourceSpec) else self.spec.m
        if self.blocks <= m:
            raise DomainError(f"need more than m={m} blocks, got {self.blocks}")
        if self.message_source not in ("random", "exhaustive", "explicit"):
            raise DomainError(f"unknown message source {self.message_source!r}")
        if self.message_source == "explicit" and self.messages is None:
            raise DomainError("explicit message source needs a message list")


@dataclass
class TransmissionReport:
    messages_sent: int
    messages_correct: int
    achieved_rate_bits_per_use: float
    block_length: int
    blocks: int
    relays: int
    delivery_blocks: list[int] = field(default_factory=list)
    relay_messages_sent: int | None = None
    relay_messages_correct: int | None = None
    relay_rate_bits_per_use: float | None = None
    per_block_trace: list[str] | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.relay_messages_sent is None:
            for key in ("relay_messages_sent", "relay_messages_correct", "relay_rate_bits_per_use"):
                d.pop(key)
        if self.per_block_trace is None:
            d.pop("per_block_trace")
        return d


def _draw(count: int, k: int, cfg: ExperimentConfig, rng: random.Random, explicit) -> list[int]:
    if cfg.message_source == "explicit" and explicit is not None:
        msgs = [int(w) for w in explicit]
        if len(msgs) < k:
            raise DomainError(f"explicit list has {len(msgs)} messages, {k} needed")
        msgs = msgs[:k]
        if any(not 0 <= w < count for w in msgs):
            raise DomainError("explicit message outside the message space")
        return msgs
    if cfg.message_source == "exhaustive":
        return [j % count for j in range(k)]
    return [rng.randrange(count) for _ in range(k)]


def _check_trace_budget(cfg: ExperimentConfig, n: int, rows: int) -> None:
    if cfg.trace and n * cfg.blocks > MAX_TRACE_SYMBOLS:
        raise DomainError(f"trace of {n * cfg.blocks} symbols per node exceeds {MAX_TRACE_SYMBOLS}")


def run_pipeline(cfg: ExperimentConfig) -> TransmissionReport:
    spec = cfg.spec
    if not isinstance(spec, CodebookSpec):
        raise DomainError("run_pipeline needs a single-source CodebookSpec")
    n, m, B = spec.n, spec.m, cfg.blocks
    _check_trace_budget(cfg, n, m + 1)
    topo = CascadeTopology(m, spec.model)
    count = spec.message_count
    rng = random.Random(cfg.seed)
    fresh = _draw(count, B - m, cfg, rng, cfg.messages)
    # the source keeps sending index 0 once the B - m messages are out
    source_msgs = fresh + [0] * m

    # histories start with m cold-start zeros; history[-1 - j] is the index
    # relay i + j forwards in the current block
    source = NodeState(0, [0] * m)
    relays = [NodeState(i, [0] * m) for i in range(1, m + 1)]
    sink_out: list[int] = []
    delivery: list[int] = []
    rows = [[] for _ in range(m + 1)] if cfg.trace else None

    for b in range(1, B + 1):
        blocks = [None] * (m + 1)
        allocs: list[SlotAllocation | None] = [None] * (m + 2)
        allocs[m + 1] = SlotAllocation(n, ())
        for node in reversed(relays):
            i = node.node_index
            fwd = tuple(node.decoded_history[-1 - j] for j in range(m - i + 1))
            z_next = allocation_chain(spec, i + 1, fwd[1:])
            if z_next != allocs[i + 1]:
                raise IntegrityError(f"relay {i} mispredicts relay {i + 1}'s allocation in block {b}")
            blocks[i] = encode_relay(fwd[0], i, z_next, spec)
            node.current_allocation = allocs[i] = allocation_chain(spec, i, fwd)
        w0 = source_msgs[b - 1]
        ahead = tuple(source.decoded_history[-1 - j] for j in range(m))
        z1 = allocation_chain(spec, 1, ahead)
        if z1 != allocs[1]:
            raise IntegrityError(f"source mispredicts relay 1's allocation in block {b}")
        blocks[0] = encode_source(w0, z1, spec)
        if rows is not None:
            check_half_duplex(blocks, allocs)
            for r, blk in zip(rows, blocks):
                r.append(render(blk))

        received = network_block(blocks, topo)

        source.decoded_history.append(w0)
        for node in relays:
            i = node.node_index
            node.decoded_history.append(decode_at_node(received[i - 1], allocs[i], spec, i))
        w_sink = decode_at_node(received[m], allocs[m + 1], spec, m + 1)
        if b > m:
            sink_out.append(w_sink)
            delivery.append(b)

    correct = sum(a == b for a, b in zip(fresh, sink_out))
    rate = math.log2(count) * (B - m) / (n * B)
    report = TransmissionReport(
        messages_sent=len(fresh), messages_correct=correct, achieved_rate_bits_per_use=rate,
        block_length=n, blocks=B, relays=m, delivery_blocks=delivery,
        per_block_trace=["".join(r) for r in rows] if rows is not None else None)
    if correct != len(fresh):
        raise ZeroErrorViolation(f"{len(fresh) - correct} of {len(fresh)} messages decoded wrongly", report)
    return report


def run_two_source(cfg: ExperimentConfig) -> TransmissionReport:
    """Source and relay 1 both send; the relay re-encodes last block's w0 with a fresh w1."""
    spec = cfg.spec
    if not isinstance(spec, TwoSourceSpec):
        raise DomainError("run_two_source needs a TwoSourceSpec")
    n, B = spec.n, cfg.blocks
    _check_trace_budget(cfg, n, 2)
    topo = CascadeTopology(1)
    rng = random.Random(cfg.seed)
    fresh0 = _draw(spec.w0_count, B - 1, cfg, rng, cfg.messages)
    fresh1 = _draw(spec.w1_count, B, cfg, rng, cfg.relay_messages)
    source_msgs = fresh0 + [0]

    relay = NodeState(1, [0])
    last_sent = 0
    got0, got1, delivery = [], [], []
    rows = [[], []] if cfg.trace else None
    for b in range(1, B + 1):
        fwd = relay.decoded_history[-1]
        z1 = two_source_allocation(fwd, spec)
        relay.current_allocation = z1
        relay_block = two_source_encode(fwd, fresh1[b - 1], spec)
        # the source tracks relay 1's allocation from its own previous message
        z1_src = two_source_allocation(last_sent, spec)
        if z1_src != z1:
            raise IntegrityError(f"source mispredicts the relay allocation in block {b}")
        w0 = source_msgs[b - 1]
        src_block = two_source_encode_source(w0, z1_src, spec)
        if rows is not None:
            check_half_duplex([src_block, relay_block], [None, z1])
            rows[0].append(render(src_block))
            rows[1].append(render(relay_block))
        y1, y2 = network_block([src_block, relay_block], topo)
        last_sent = w0
        relay.decoded_history.append(two_source_decode_source(y1, z1, spec))
        d0, d1 = two_source_decode(y2, spec)
        got1.append(d1)
        if b > 1:
            got0.append(d0)
            delivery.append(b)

    ok0 = sum(a == b for a, b in zip(fresh0, got0))
    ok1 = sum(a == b for a, b in zip(fresh1, got1))
    r0 = math.log2(spec.w0_count) * (B - 1) / (n * B)
    r1 = math.log2(spec.w1_count) / n
    report = TransmissionReport(
        messages_sent=len(fresh0), messages_correct=ok0, achieved_rate_bits_per_use=r0,
        block_length=n, blocks=B, relays=1, delivery_blocks=delivery,
        relay_messages_sent=len(fresh1), relay_messages_correct=ok1, relay_rate_bits_per_use=r1,
        per_block_trace=["".join(r) for r in rows] if rows is not None else None)
    if ok0 != len(fresh0) or ok1 != len(fresh1):
        raise ZeroErrorViolation("two-source run decoded a message wrongly", report)
    return report


@dataclass
class SweepRow:
    n: int
    n_counts: tuple[int, ...]
    rate_bits: float
    capacity_bits: float
    gap_bits: float
    achieved_rate_bits: float
    monotone: bool


def sweep_rates(n_values: Sequence[int], m: int, model=None, seed: int = 0,
                blocks_factor: int = 10) -> list[SweepRow]:
    """Optimized code rate against capacity for several block lengths.

    Each row's code is run through the pipeline at B = blocks_factor * m
    blocks to confirm it decodes without error.  ``monotone`` is False
    where the gap failed to shrink (integer effects).
    """
    from .capacity import solve_cascade
    from .channel import RelayModel

    model = model or RelayModel.TERNARY
    cap = solve_cascade(m, model).capacity_bits
    rows: list[SweepRow] = []
    for n in n_values:
        spec = optimize_slot_counts(n, m, model)
        B = max(blocks_factor * m, m + 1)
        rep = run_pipeline(ExperimentConfig(spec, B, seed=seed))
        gap = cap - spec.rate
        mono = not rows or gap <= rows[-1].gap_bits
        rows.append(SweepRow(n, spec.n_counts, spec.rate, cap, gap, rep.achieved_rate_bits_per_use, mono))
    return rows
