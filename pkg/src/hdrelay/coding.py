"""Zero-error slot-allocation code for the relay cascade.

Relay i sends n_i binary symbols per block; which slots carry them is
itself part of the message.  Relay i only uses slots where relay i+1 is
listening, so its allocation ranges over C(n - n_{i+1}, n_i) subsets of
the free slots.  The source writes base-3 digits (base 2 under the binary
model) on the n - n_1 slots where relay 1 listens.

Messages are plain integers.  A relay index w is split as

    w = allocation_rank * 2**n_i + payload

where allocation_rank enumerates the allocations in lexicographic order
and payload is written MSB first on the allocated slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .channel import N, RelayModel, Symbol
from .errors import DomainError, IntegrityError

MAX_BLOCK = 4096
_BITS = (Symbol.ZERO, Symbol.ONE)
_DIGITS = (Symbol.ZERO, Symbol.ONE, Symbol.N)


@dataclass(frozen=True)
class SlotAllocation:
    n: int
    positions: tuple[int, ...] = ()

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise DomainError(f"positions must be strictly increasing: {pos}")
        if pos and (pos[0] < 0 or pos[-1] >= self.n):
            raise DomainError(f"positions out of range for n={self.n}: {pos}")
        object.__setattr__(self, "positions", pos)

    @property
    def k(self) -> int:
        return len(self.positions)

    @cached_property
    def _taken(self) -> frozenset:
        return frozenset(self.positions)

    @cached_property
    def _free(self) -> tuple[int, ...]:
        taken = self._taken
        return tuple(i for i in range(self.n) if i not in taken)

    def complement(self) -> tuple[int, ...]:
        return self._free

    def __contains__(self, slot: int) -> bool:
        return slot in self._taken


def rank_allocation(a: SlotAllocation) -> int:
    """Lexicographic rank of a k-subset of range(n)."""
    n, k = a.n, a.k
    if k == 0:
        return 0
    chosen = set(a.positions)
    rank = 0
    r = k
    binom = math.comb(n - 1, k - 1)  # C(n-1-x, r-1) at x = 0
    for x in range(n):
        a_ = n - 1 - x
        b_ = r - 1
        if x in chosen:
            r -= 1
            if r == 0:
                break
            binom = binom * b_ // a_
        else:
            rank += binom
            binom = binom * (a_ - b_) // a_
    return rank


def unrank_allocation(rank: int, n: int, k: int) -> SlotAllocation:
    if not 0 <= k <= n:
        raise DomainError(f"cannot choose {k} slots out of {n}")
    total = math.comb(n, k)
    if not 0 <= rank < total:
        raise DomainError(f"rank {rank} outside [0, C({n},{k}) = {total})")
    if k == 0:
        return SlotAllocation(n, ())
    out = []
    r = k
    binom = math.comb(n - 1, k - 1)
    for x in range(n):
        a_ = n - 1 - x
        b_ = r - 1
        if rank < binom:
            out.append(x)
            r -= 1
            if r == 0:
                break
            binom = binom * b_ // a_
        else:
            rank -= binom
            binom = binom * (a_ - b_) // a_
    return SlotAllocation(n, tuple(out))


def embed_allocation(s: SlotAllocation, z_next: SlotAllocation) -> SlotAllocation:
    """Map effective-slot positions onto the block slots left free by ``z_next``."""
    free = z_next.complement()
    if s.n != len(free):
        raise DomainError(f"allocation over {s.n} effective slots, but {len(free)} are free")
    return SlotAllocation(z_next.n, tuple(free[p] for p in s.positions))


def _bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - j)) & 1 for j in range(width)]


def _from_bits(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


def _digits(value: int, base: int, width: int) -> list[int]:
    out = [0] * width
    for j in range(width - 1, -1, -1):
        value, out[j] = divmod(value, base)
    return out


@dataclass(frozen=True)
class CodebookSpec:
    """Block length, relay count and per-relay binary-symbol budgets."""

    n: int
    m: int
    n_counts: tuple[int, ...]
    model: RelayModel = RelayModel.TERNARY

    def __post_init__(self):
        counts = tuple(int(c) for c in self.n_counts)
        object.__setattr__(self, "n_counts", counts)
        if not 1 <= self.n <= MAX_BLOCK:
            raise DomainError(f"block length {self.n} outside 1..{MAX_BLOCK}")
        if self.m < 1 or len(counts) != self.m:
            raise DomainError(f"need {self.m} slot counts, got {len(counts)}")
        for i in range(1, self.m + 1):
            ni, nxt = self.count(i), self.count(i + 1)
            if not 0 <= ni <= self.n - nxt:
                raise DomainError(f"n_{i}={ni} must lie in [0, n - n_{i + 1}] = [0, {self.n - nxt}]")
            if self.model is RelayModel.BINARY and i < self.m and ni != self.n - nxt:
                raise DomainError("binary model: relay i < m must fill every slot where relay i+1 listens "
                                  f"(n_{i} = n - n_{i + 1} = {self.n - nxt})")

    def count(self, i: int) -> int:
        """n_i for relays 1..m; the sink (i = m+1) never transmits."""
        return 0 if i == self.m + 1 else self.n_counts[i - 1]

    @property
    def source_base(self) -> int:
        return 2 if self.model is RelayModel.BINARY else 3

    def node_capacity(self, i: int) -> int:
        """Number of distinct blocks node i can send."""
        if i == 0:
            return self.source_base ** (self.n - self.count(1))
        return 2 ** self.count(i) * math.comb(self.n - self.count(i + 1), self.count(i))

    @property
    def message_count(self) -> int:
        return _message_count(self)

    @property
    def rate(self) -> float:
        return math.log2(self.message_count) / self.n

    def term_rates(self) -> list[float]:
        """Per-node rates log2(node_capacity)/n; the code rate is their minimum."""
        return [math.log2(self.node_capacity(i)) / self.n for i in range(self.m + 1)]

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "n_counts": list(self.n_counts), "model": self.model.value}


@lru_cache(maxsize=4096)
def _message_count(spec: CodebookSpec) -> int:
    return min(spec.node_capacity(i) for i in range(spec.m + 1))


def relay_allocation(w: int, i: int, z_next: SlotAllocation, spec: CodebookSpec) -> SlotAllocation:
    """Full-block allocation z_i used by relay i to send index w."""
    ni, nxt = spec.count(i), spec.count(i + 1)
    rank = w >> ni
    s = unrank_allocation(rank, spec.n - nxt, ni)
    return embed_allocation(s, z_next)


@lru_cache(maxsize=65536)
def allocation_chain(spec: CodebookSpec, i: int, forwarded: tuple[int, ...]) -> SlotAllocation:
    """z_i given the indices forwarded by relays i..m in the current block.

    ``forwarded[0]`` is relay i's index, ``forwarded[-1]`` relay m's.
    For i = m + 1 (the sink) the allocation is empty.
    """
    if i == spec.m + 1:
        return SlotAllocation(spec.n, ())
    if len(forwarded) != spec.m - i + 1:
        raise DomainError("need one forwarded index per relay i..m")
    z_next = allocation_chain(spec, i + 1, forwarded[1:])
    return relay_allocation(forwarded[0], i, z_next, spec)


def encode_relay(w: int, i: int, z_next: SlotAllocation, spec: CodebookSpec) -> tuple[Symbol, ...]:
    """Block sent by relay i forwarding index w while relay i+1 uses ``z_next``."""
    if not 1 <= i <= spec.m:
        raise DomainError(f"relay index {i} outside 1..{spec.m}")
    if z_next.k != spec.count(i + 1) or z_next.n != spec.n:
        raise DomainError(f"downstream allocation must hold {spec.count(i + 1)} of {spec.n} slots")
    if not 0 <= w < spec.node_capacity(i):
        raise DomainError(f"index {w} outside relay {i} codebook of size {spec.node_capacity(i)}")
    ni = spec.count(i)
    z = relay_allocation(w, i, z_next, spec)
    block = [N] * spec.n
    for slot, bit in zip(z.positions, _bits(w & ((1 << ni) - 1), ni)):
        block[slot] = _BITS[bit]
    return tuple(block)


def encode_source(w0: int, z1: SlotAllocation, spec: CodebookSpec) -> tuple[Symbol, ...]:
    """Source block: digits of w0 on the slots where relay 1 listens, N elsewhere."""
    if z1.k != spec.count(1) or z1.n != spec.n:
        raise DomainError(f"relay 1 allocation must hold {spec.count(1)} of {spec.n} slots")
    return _encode_source(w0, z1, spec.source_base, spec.node_capacity(0))


def _encode_source(w0: int, z1: SlotAllocation, base: int, capacity: int) -> tuple[Symbol, ...]:
    if not 0 <= w0 < capacity:
        raise DomainError(f"source index {w0} outside [0, {capacity})")
    free = z1.complement()
    block = [N] * z1.n
    for slot, d in zip(free, _digits(w0, base, len(free))):
        block[slot] = _DIGITS[d]
    return tuple(block)


def _listening(received: Sequence[Symbol], own_alloc: SlotAllocation) -> list[Symbol]:
    if len(received) != own_alloc.n:
        raise IntegrityError(f"received {len(received)} symbols, expected {own_alloc.n}")
    return [received[j] for j in own_alloc.complement()]


def _decode_source(heard: Sequence[Symbol], base: int, limit: int) -> int:
    value = 0
    for sym in heard:
        d = sym.index
        if d >= base:
            raise IntegrityError("silent slot inside a binary source codeword")
        value = value * base + d
    if value >= limit:
        raise IntegrityError(f"decoded source index {value} outside [0, {limit})")
    return value


def _decode_relay(heard: Sequence[Symbol], ni: int) -> int:
    positions = [j for j, s in enumerate(heard) if s is not N]
    if len(positions) != ni:
        raise IntegrityError(f"expected {ni} binary symbols from upstream relay, heard {len(positions)}")
    rank = rank_allocation(SlotAllocation(len(heard), tuple(positions)))
    payload = _from_bits([heard[j].index for j in positions])
    return (rank << ni) | payload


def decode_at_node(received: Sequence[Symbol], own_alloc: SlotAllocation, spec: CodebookSpec,
                   node: int) -> int:
    """Recover the index sent by node - 1 from node's received block.

    ``own_alloc`` is the receiving node's own block allocation (empty for
    the sink); only slots outside it carry upstream symbols.
    """
    if not 1 <= node <= spec.m + 1:
        raise DomainError(f"receiving node {node} outside 1..{spec.m + 1}")
    if own_alloc.k != spec.count(node):
        raise IntegrityError(f"node {node} allocation holds {own_alloc.k} slots, the codebook expects {spec.count(node)}")
    heard = _listening(received, own_alloc)
    if node == 1:
        return _decode_source(heard, spec.source_base, spec.node_capacity(0))
    w = _decode_relay(heard, spec.count(node - 1))
    if w >= spec.node_capacity(node - 1):
        raise IntegrityError(f"decoded index {w} outside relay {node - 1} codebook")
    return w


def check_half_duplex(blocks: Sequence[Sequence[Symbol]], allocations: Sequence[SlotAllocation]) -> None:
    """Relay i sends binary symbols exactly on z_i, and z_i avoids z_{i+1}.

    ``blocks`` and ``allocations`` are indexed by relay 1..m (index 0 unused
    in ``allocations``; blocks[0] is the source).
    """
    m = len(blocks) - 1
    for i in range(1, m + 1):
        busy = tuple(j for j, s in enumerate(blocks[i]) if s is not N)
        if busy != allocations[i].positions:
            raise IntegrityError(f"relay {i} transmits outside its allocation")
        if i < m and set(allocations[i].positions) & set(allocations[i + 1].positions):
            raise IntegrityError(f"relays {i} and {i + 1} transmit in the same slot")


# -- slot-count optimization -------------------------------------------------------

def optimize_slot_counts(n: int, m: int, model: RelayModel = RelayModel.TERNARY) -> CodebookSpec:
    """Integer budgets n_1..n_m maximizing the minimum per-node rate.

    Backward dynamic program: the term of relay i depends only on
    (n_i, n_{i+1}), so V_i(a) = max_b min(T(a, b), V_{i+1}(b)).
    """
    if not 1 <= n <= MAX_BLOCK:
        raise DomainError(f"block length {n} outside 1..{MAX_BLOCK}")
    if not 1 <= m <= 16:
        raise DomainError(f"relay count {m} outside 1..16")
    binary = model is RelayModel.BINARY
    lf = np.concatenate(([0.0], np.cumsum(np.log2(np.arange(1, n + 1, dtype=float)))))
    a = np.arange(n + 1)
    neg = -np.inf

    def relay_terms(rows: np.ndarray, forced: bool) -> np.ndarray:
        # T[a, b] = a + log2 C(n - b, a), feasible iff a <= n - b
        b = np.arange(n + 1)
        free = n - b[None, :]
        A = rows[:, None]
        ok = A <= free
        if forced:
            ok = A == free
        with np.errstate(invalid="ignore"):
            t = A + lf[np.maximum(free, 0)] - lf[A] - lf[np.maximum(free - A, 0)]
        return np.where(ok, t, neg)

    value = a + lf[n] - lf[a] - lf[n - a]  # V_m(a) = T(a, 0)
    choices = []
    for i in range(m - 1, 0, -1):
        forced = binary
        best = np.empty(n + 1)
        arg = np.empty(n + 1, dtype=np.int64)
        for start in range(0, n + 1, 512):
            rows = a[start:start + 512]
            cand = np.minimum(relay_terms(rows, forced), value[None, :])
            arg[start:start + 512] = np.argmax(cand, axis=1)
            best[start:start + 512] = cand[np.arange(len(rows)), arg[start:start + 512]]
        choices.append(arg)
        value = best
    source_term = (n - a) * (1.0 if binary else math.log2(3.0))
    total = np.minimum(source_term, value)
    n1 = int(np.argmax(total))
    counts = [n1]
    for arg in reversed(choices):
        counts.append(int(arg[counts[-1]]))
    return CodebookSpec(n, m, tuple(counts), model)


# -- two sources (m = 1, relay source r = 1) ------------------------------------------

@dataclass(frozen=True)
class TwoSourceSpec:
    """Single relay that forwards w0 and adds its own w1.

    The allocation plus k0 payload bits carry w0; the other n_1 - k0 bits carry w1.
    """

    n: int
    n_1: int
    k0: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BLOCK:
            raise DomainError(f"block length {self.n} outside 1..{MAX_BLOCK}")
        if not 0 <= self.n_1 <= self.n:
            raise DomainError(f"n_1={self.n_1} outside [0, {self.n}]")
        if not 0 <= self.k0 <= self.n_1:
            raise DomainError(f"k0={self.k0} outside [0, n_1={self.n_1}]")

    @property
    def w0_count(self) -> int:
        return min(3 ** (self.n - self.n_1), 2 ** self.k0 * math.comb(self.n, self.n_1))

    @property
    def w1_count(self) -> int:
        return 2 ** (self.n_1 - self.k0)

    @property
    def rates(self) -> tuple[float, float]:
        return math.log2(self.w0_count) / self.n, (self.n_1 - self.k0) / self.n

    def as_codebook(self) -> CodebookSpec:
        """Single-source view of the same budgets (the k0 = n_1 endpoint)."""
        return CodebookSpec(self.n, 1, (self.n_1,))

    def to_dict(self) -> dict:
        return {"n": self.n, "n_1": self.n_1, "k0": self.k0}


def two_source_allocation(w0: int, spec: TwoSourceSpec) -> SlotAllocation:
    return unrank_allocation(w0 >> spec.k0, spec.n, spec.n_1)


def two_source_encode(w0: int, w1: int, spec: TwoSourceSpec) -> tuple[Symbol, ...]:
    """Relay block carrying (w0, w1): first k0 binary slots hold w0's low bits."""
    if not 0 <= w0 < spec.w0_count:
        raise DomainError(f"w0={w0} outside [0, {spec.w0_count})")
    if not 0 <= w1 < spec.w1_count:
        raise DomainError(f"w1={w1} outside [0, {spec.w1_count})")
    z = two_source_allocation(w0, spec)
    bits = _bits(w0 & ((1 << spec.k0) - 1), spec.k0) + _bits(w1, spec.n_1 - spec.k0)
    block = [N] * spec.n
    for slot, bit in zip(z.positions, bits):
        block[slot] = _BITS[bit]
    return tuple(block)


def two_source_decode(received: Sequence[Symbol], spec: TwoSourceSpec) -> tuple[int, int]:
    """Sink side: the relay block heard directly over all n slots."""
    if len(received) != spec.n:
        raise IntegrityError(f"received {len(received)} symbols, expected {spec.n}")
    positions = [j for j, s in enumerate(received) if s is not N]
    if len(positions) != spec.n_1:
        raise IntegrityError(f"expected {spec.n_1} binary symbols, heard {len(positions)}")
    rank = rank_allocation(SlotAllocation(spec.n, tuple(positions)))
    bits = [received[j].index for j in positions]
    w0 = (rank << spec.k0) | _from_bits(bits[:spec.k0])
    w1 = _from_bits(bits[spec.k0:])
    if w0 >= spec.w0_count:
        raise IntegrityError(f"decoded w0={w0} outside [0, {spec.w0_count})")
    return w0, w1


def two_source_encode_source(w0: int, z1: SlotAllocation, spec: TwoSourceSpec) -> tuple[Symbol, ...]:
    if z1.k != spec.n_1 or z1.n != spec.n:
        raise DomainError("relay allocation does not match the codebook budgets")
    if not 0 <= w0 < spec.w0_count:
        raise DomainError(f"w0={w0} outside [0, {spec.w0_count})")
    return _encode_source(w0, z1, 3, 3 ** (spec.n - spec.n_1))


def two_source_decode_source(received: Sequence[Symbol], own_alloc: SlotAllocation,
                             spec: TwoSourceSpec) -> int:
    """Relay side: recover w0 from the source block heard in its listening slots."""
    return _decode_source(_listening(received, own_alloc), 3, spec.w0_count)
