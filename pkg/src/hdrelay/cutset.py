"""Brute-force cut-set evaluation for short cascades.

Every cut value is an entropy of symbols that are deterministic functions
of the channel inputs, so it can be computed exactly by pushing each of the
3^(m+1) input tuples through the network and aggregating probability mass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .capacity import ChainDistribution
from .channel import CascadeTopology, RelayModel, Symbol, network_use
from .errors import DomainError, ValidationError
from .info import MASS_TOL, SILENT, EdgeDistribution, cut_entropy_output_given_self

MAX_SINGLE = 5
MAX_TWO_SOURCE = 4
TOL = 1e-9


@lru_cache(maxsize=None)
def _state_tables(m: int):
    """All input tuples (rows) and the received symbols they induce."""
    topo = CascadeTopology(m, RelayModel.TERNARY)
    xs = np.array(list(itertools.product(range(3), repeat=m + 1)), dtype=np.int64)
    ys = np.empty((len(xs), m + 1), dtype=np.int64)
    for row, x in enumerate(xs):
        out = network_use([Symbol.from_index(int(v)) for v in x], topo)
        ys[row] = [s.index for s in out]
    xs.setflags(write=False)
    ys.setflags(write=False)
    return xs, ys


@dataclass(frozen=True, eq=False)
class FullJointPmf:
    """Joint pmf of (X_0, ..., X_m) as a flat table over the 3^(m+1) tuples."""

    m: int
    prob: np.ndarray
    markov: bool = True

    def __post_init__(self):
        arr = np.asarray(self.prob, dtype=float).ravel()
        if arr.size != 3 ** (self.m + 1):
            raise ValidationError("table size does not match m")
        if np.any(arr < 0) or abs(math.fsum(arr.tolist()) - 1.0) > MASS_TOL:
            raise ValidationError("joint table is not a pmf")
        arr.setflags(write=False)
        object.__setattr__(self, "prob", arr)

    @classmethod
    def unchecked_table(cls, table: np.ndarray) -> "FullJointPmf":
        """Wrap an arbitrary (possibly non-Markov) joint; used for negative controls."""
        table = np.asarray(table, dtype=float)
        m = table.ndim - 1
        return cls(m, table.ravel(), markov=False)

    def table(self) -> np.ndarray:
        return self.prob.reshape((3,) * (self.m + 1))

    def pair_marginal(self, i: int) -> np.ndarray:
        """p(X_{i-1}, X_i) as a 3x3 array."""
        t = self.table()
        axes = tuple(a for a in range(self.m + 1) if a not in (i - 1, i))
        return t.sum(axis=axes)

    def __getitem__(self, x: Sequence[Symbol]) -> float:
        idx = tuple(s.index for s in x)
        return float(self.table()[idx])


def materialize(chain: ChainDistribution) -> FullJointPmf:
    """Expand p(x_0) prod p(x_i | x_{i-1}) into a full table."""
    m = chain.m
    if m > MAX_SINGLE:
        raise DomainError(f"materialize supports m <= {MAX_SINGLE}, got {m}")
    table = chain.edges[0].p.copy()
    for e in chain.edges[1:]:
        rows = e.p.sum(axis=1)
        cond = np.divide(e.p, rows[:, None], out=np.zeros_like(e.p), where=rows[:, None] > 0)
        table = table[..., None] * cond.reshape((1,) * (table.ndim - 1) + (3, 3))
    return FullJointPmf(m, table.ravel())


def _entropy_of_keys(prob: np.ndarray, cols: list[np.ndarray]) -> float:
    if not cols:
        return 0.0
    key = np.zeros(len(prob), dtype=np.int64)
    for c in cols:
        key = key * 3 + c
    mass = np.bincount(key, weights=prob, minlength=3 ** len(cols))
    mass = mass[mass > 0]
    return max(math.fsum((-mass * np.log2(mass)).tolist()), 0.0)


def conditional_entropy(joint: FullJointPmf, ys: Iterable[int] = (), xs_given: Iterable[int] = (),
                        xs: Iterable[int] = ()) -> float:
    """H(Y_ys, X_xs | X_given) where Y indices are 1..m+1 and X indices 0..m."""
    X, Y = _state_tables(joint.m)
    given = [X[:, i] for i in sorted(set(xs_given))]
    target = [Y[:, i - 1] for i in sorted(set(ys))] + [X[:, i] for i in sorted(set(xs))]
    return _entropy_of_keys(joint.prob, given + target) - _entropy_of_keys(joint.prob, given)


def cut_value_single_source(joint: FullJointPmf, S: Iterable[int]) -> float:
    """H(Y_S, Y_{m+1} | X_S) for a cut S of relay indices."""
    S = sorted(set(S))
    if any(not 1 <= i <= joint.m for i in S):
        raise DomainError(f"cut members must be relays 1..{joint.m}: {S}")
    return conditional_entropy(joint, ys=S + [joint.m + 1], xs_given=S)


def cut_mutual_information(joint: FullJointPmf, S: Iterable[int]) -> float:
    """I(X_0, X_{S^c}; Y_S, Y_{m+1} | X_S), evaluated as a generic conditional MI."""
    S = sorted(set(S))
    comp = [0] + [i for i in range(1, joint.m + 1) if i not in S]
    X, Y = _state_tables(joint.m)
    A = [X[:, i] for i in comp]
    B = [Y[:, i - 1] for i in S + [joint.m + 1]]
    C = [X[:, i] for i in S]
    p = joint.prob
    return (_entropy_of_keys(p, A + C) + _entropy_of_keys(p, B + C)
            - _entropy_of_keys(p, A + B + C) - _entropy_of_keys(p, C))


def ascending_sets(m: int) -> list[tuple[int, ...]]:
    """The empty cut followed by {m}, {m-1, m}, ..., {1, ..., m}."""
    return [()] + [tuple(range(l, m + 1)) for l in range(m, 0, -1)]


def _power_set(items: Sequence[int]):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


@dataclass
class Violation:
    kind: str
    subset: list[int]
    lhs: float
    rhs: float
    chain_params: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "chain_params": self.chain_params,
                "subset": self.subset, "lhs": self.lhs, "rhs": self.rhs}


@dataclass
class VerificationReport:
    trials: int
    violations: list[Violation] = field(default_factory=list)
    checked_subsets: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"trials": self.trials, "checked_subsets": self.checked_subsets,
                "violations": [v.to_dict() for v in self.violations]}


def random_chain(m: int, rng: np.random.Generator, sparsity: float = 0.3) -> ChainDistribution:
    """Random Markov chain: Dirichlet source pmf and transition rows.

    Entries are knocked out with probability ``sparsity`` so that boundary
    distributions (zeros, deterministic rows) get exercised too.
    """
    def row():
        v = rng.dirichlet(np.ones(3))
        mask = rng.random(3) < sparsity
        if mask.all():
            mask[rng.integers(3)] = False
        v[mask] = 0.0
        return v / v.sum()

    marg = row()
    edges = []
    for _ in range(m):
        T = np.array([row() for _ in range(3)])
        P = marg[:, None] * T
        P = P / P.sum()
        edges.append(EdgeDistribution(P))
        marg = P.sum(axis=0)
    return ChainDistribution(tuple(edges))


def ascending_violations(joint: FullJointPmf, chain_params=None, tol: float = TOL) -> tuple[list[Violation], int]:
    """Compare the brute-force minimum cut with the ascending family."""
    m = joint.m
    params = chain_params if chain_params is not None else []
    values = {S: cut_value_single_source(joint, S) for S in _power_set(range(1, m + 1))}
    out = []
    asc = ascending_sets(m)
    min_all_set = min(values, key=values.get)
    min_asc = min(values[S] for S in asc)
    if values[min_all_set] < min_asc - tol:
        out.append(Violation("minimality", list(min_all_set), values[min_all_set], min_asc, params))
    # ascending sets collapse to H(Y_l | X_l) and H(Y_{m+1})
    for S in asc:
        if S:
            l = S[0]
            simple = cut_entropy_output_given_self(EdgeDistribution(joint.pair_marginal(l)))
        else:
            simple = conditional_entropy(joint, ys=[m + 1])
        if abs(values[S] - simple) > tol:
            out.append(Violation("simplification", list(S), values[S], simple, params))
    return out, len(values)


def verify_ascending_minimality(chain: ChainDistribution, trials: int, seed: int) -> VerificationReport:
    m = chain.m
    if m > MAX_SINGLE:
        raise DomainError(f"brute force supports m <= {MAX_SINGLE}")
    rng = np.random.default_rng(seed)
    report = VerificationReport(trials=trials)
    for chain_k in itertools.chain([chain], (random_chain(m, rng) for _ in range(trials))):
        found, count = ascending_violations(materialize(chain_k), chain_k.to_list())
        report.violations.extend(found)
        report.checked_subsets += count
    return report


# -- two sources ---------------------------------------------------------------

@dataclass
class TwoSourceBounds:
    R0_bound: float
    Rr_bound: float
    sum_bound: float
    R0_terms: list[float]
    Rr_terms: list[float]
    sum_terms: list[float]

    def to_dict(self) -> dict:
        return {"R0_bound": self.R0_bound, "Rr_bound": self.Rr_bound, "sum_bound": self.sum_bound}


def _sum_rate_terms(joint: FullJointPmf, r: int) -> dict[tuple, float]:
    """Ascending-family cut values keyed by (i, k); i = None / k = m+1 mark empty halves.

    (i, k): S^d = {i..r-1}, S^u = {k..m}.  The value is
    H(Y_i|X_i) + H(Y_k|X_{r-1}, X_k) with the conventions that the first
    term vanishes and X_{r-1} drops out when S^d is empty, and X_k drops
    out when k = m + 1 (the sink).
    """
    m = joint.m
    terms = {}
    downs = [None] + list(range(1, r))
    for i in downs:
        first = 0.0 if i is None else conditional_entropy(joint, ys=[i], xs_given=[i])
        for k in range(r + 1, m + 2):
            given = [] if i is None else [r - 1]
            if k <= m:
                given.append(k)
            terms[(i, k)] = first + conditional_entropy(joint, ys=[k], xs_given=given)
    return terms


def two_source_bounds(joint: FullJointPmf, r: int) -> TwoSourceBounds:
    """Individual and sum-rate cut-set bounds for sources at node 0 and relay r."""
    m = joint.m
    if not 1 <= r <= m:
        raise DomainError(f"relay source {r} outside 1..{m}")
    r0_terms = [conditional_entropy(joint, ys=[i], xs_given=[i]) for i in range(1, m + 1)]
    rr_terms = [conditional_entropy(joint, ys=[i], xs_given=[r - 1] + ([i] if i <= m else []))
                for i in range(r + 1, m + 2)]
    sum_terms = list(_sum_rate_terms(joint, r).values())
    return TwoSourceBounds(min(r0_terms), min(rr_terms), min(sum_terms), r0_terms, rr_terms, sum_terms)


def two_source_violations(joint: FullJointPmf, r: int, chain_params=None, tol: float = TOL):
    m = joint.m
    params = chain_params if chain_params is not None else []
    down = list(range(1, r))
    up = list(range(r + 1, m + 1))
    values = {}
    for Sd in _power_set(down):
        for Su in _power_set(up):
            S = Sd + Su
            values[S] = cut_value_single_source(joint, S)
    asc = {}
    for i in [None] + down:
        for k in range(r + 1, m + 2):
            Sd = () if i is None else tuple(range(i, r))
            Su = tuple(range(k, m + 1))
            asc[(i, k)] = Sd + Su
    out = []
    min_all = min(values, key=values.get)
    min_asc = min(values[S] for S in asc.values())
    if values[min_all] < min_asc - tol:
        out.append(Violation("minimality", list(min_all), values[min_all], min_asc, params))
    decomposition = _sum_rate_terms(joint, r)
    for key, S in asc.items():
        if abs(values[S] - decomposition[key]) > tol:
            out.append(Violation("decomposition", list(S), values[S], decomposition[key], params))
    bound = two_source_bounds(joint, r).sum_bound
    if abs(bound - values[min_all]) > tol:
        out.append(Violation("sum_bound", list(min_all), bound, values[min_all], params))
    return out, len(values)


def verify_two_source_ascending(chain: ChainDistribution, r: int, trials: int, seed: int) -> VerificationReport:
    m = chain.m
    if m > MAX_TWO_SOURCE:
        raise DomainError(f"two-source brute force supports m <= {MAX_TWO_SOURCE}")
    if not 1 <= r <= m:
        raise DomainError(f"relay source {r} outside 1..{m}")
    rng = np.random.default_rng(seed)
    report = VerificationReport(trials=trials)
    for chain_k in itertools.chain([chain], (random_chain(m, rng) for _ in range(trials))):
        found, count = two_source_violations(materialize(chain_k), r, chain_k.to_list())
        report.violations.extend(found)
        report.checked_subsets += count
    return report
