"""Deterministic half-duplex relay cascade.

Each relay either transmits a binary symbol, in which case it only hears
itself, or stays silent (N) and hears its upstream neighbour.  The sink
hears the last relay directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConstraintViolation, DomainError


class Symbol(enum.Enum):
    ZERO = "0"
    ONE = "1"
    N = "N"

    @property
    def index(self) -> int:
        return _INDEX[self]

    @classmethod
    def from_index(cls, i: int) -> "Symbol":
        return _BY_INDEX[i]

    @classmethod
    def parse(cls, ch: str) -> "Symbol":
        try:
            return cls(ch)
        except ValueError:
            raise DomainError(f"not a channel symbol: {ch!r}") from None

    def __str__(self):
        return self.value


_INDEX = {Symbol.ZERO: 0, Symbol.ONE: 1, Symbol.N: 2}
_BY_INDEX = (Symbol.ZERO, Symbol.ONE, Symbol.N)
N = Symbol.N


class RelayModel(enum.Enum):
    TERNARY = "ternary"
    BINARY = "binary"


@dataclass(frozen=True)
class CascadeTopology:
    m: int
    model: RelayModel = RelayModel.TERNARY
    relay_source: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("a cascade needs at least one relay")
        if self.relay_source is not None and not 1 <= self.relay_source <= self.m:
            raise DomainError(f"relay source {self.relay_source} not in 1..{self.m}")


def relay_output(x_prev: Symbol, x_self: Symbol, model: RelayModel = RelayModel.TERNARY) -> Symbol:
    if x_self is N:
        if x_prev is N and model is RelayModel.BINARY:
            raise ConstraintViolation("(N, N) input pair is excluded under the binary model")
        return x_prev
    return x_self


def network_use(x: Sequence[Symbol], topo: CascadeTopology) -> tuple[Symbol, ...]:
    """One channel use: inputs X_0..X_m to received symbols Y_1..Y_{m+1}."""
    if len(x) != topo.m + 1:
        raise DomainError(f"expected {topo.m + 1} inputs, got {len(x)}")
    ys = [relay_output(x[i - 1], x[i], topo.model) for i in range(1, topo.m + 1)]
    ys.append(x[topo.m])
    return tuple(ys)


def hop_block(prev_block: Sequence[Symbol], self_block: Sequence[Symbol],
              model: RelayModel = RelayModel.TERNARY) -> tuple[Symbol, ...]:
    """Slot-wise ``relay_output`` over a whole block."""
    if len(prev_block) != len(self_block):
        raise DomainError("blocks of unequal length")
    if model is RelayModel.BINARY:
        for a, b in zip(prev_block, self_block):
            if a is N and b is N:
                raise ConstraintViolation("(N, N) input pair is excluded under the binary model")
    return tuple(a if b is N else b for a, b in zip(prev_block, self_block))


def network_block(blocks: Sequence[Sequence[Symbol]], topo: CascadeTopology) -> list[tuple[Symbol, ...]]:
    """Run ``network_use`` over every slot of a block at once.

    ``blocks[i]`` is node i's transmitted block; returns the received
    blocks of nodes 1..m+1.
    """
    if len(blocks) != topo.m + 1:
        raise DomainError(f"expected {topo.m + 1} blocks, got {len(blocks)}")
    out = [hop_block(blocks[i - 1], blocks[i], topo.model) for i in range(1, topo.m + 1)]
    out.append(tuple(blocks[topo.m]))
    return out


def render(block: Iterable[Symbol]) -> str:
    return "".join(s.value for s in block)


def parse_block(text: str) -> tuple[Symbol, ...]:
    return tuple(Symbol.parse(ch) for ch in text)
