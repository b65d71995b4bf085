"""Zero-error capacity of a half-duplex relay cascade.

The capacity is the largest achievable minimum over the cuts

    H(Y_1|X_1), ..., H(Y_m|X_m), H(Y_{m+1})

taken over Markov input chains X_0 -> X_1 -> ... -> X_m.  The default
solver restricts every edge to the support {0N, 1N, NN, N0, N1} with the
0/1 symmetry p_0N = p_1N, p_N0 = p_N1 and a uniform source given a
listening first relay.  Under that restriction the whole chain is fixed by
u_i = P(X_i = 0) = P(X_i = 1), i = 1..m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _numeric
from .channel import RelayModel
from .errors import DomainError, SolverError, ValidationError
from .info import (LOG2_3, SILENT, EdgeDistribution, _entropy_unchecked,
                   binary_entropy, cut_entropy_output_given_self, entropy)

CONSISTENCY_TOL = 1e-7
T_TOL = 1e-9
MAX_ITER = 100_000
MAX_RELAYS = 64


@dataclass(frozen=True)
class ChainDistribution:
    """Pairwise pmfs p(X_{i-1}, X_i), i = 1..m, of a Markov input chain."""

    edges: tuple[EdgeDistribution, ...]

    def __post_init__(self):
        edges = tuple(self.edges)
        if not edges:
            raise ValidationError("a chain needs at least one edge")
        for i in range(len(edges) - 1):
            left = edges[i].self_marginal
            right = edges[i + 1].prev_marginal
            if np.max(np.abs(left - right)) > CONSISTENCY_TOL:
                raise ValidationError(
                    f"edges {i + 1} and {i + 2} disagree on the X_{i + 1} marginal: "
                    f"{left.tolist()} vs {right.tolist()}")
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def binary(self) -> bool:
        return all(e.binary for e in self.edges)

    def marginal(self, i: int) -> np.ndarray:
        """pmf of X_i, i = 0..m."""
        if i == 0:
            return self.edges[0].prev_marginal
        return self.edges[i - 1].self_marginal

    def to_list(self) -> list[list[float]]:
        return [e.to_list() for e in self.edges]


@dataclass
class CapacityResult:
    capacity_bits: float
    chain: ChainDistribution
    cut_values: list[float]
    solver_iterations: int
    model: RelayModel = RelayModel.TERNARY
    method: str = "optimize"
    params: list[float] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.chain.m

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "relays": self.m,
            "method": self.method,
            "capacity_bits": self.capacity_bits,
            "cut_values": list(self.cut_values),
            "edges": self.chain.to_list(),
            "solver_iterations": self.solver_iterations,
        }


def cut_values(chain: ChainDistribution) -> list[float]:
    """The m + 1 cut entropies; the last is H(Y_{m+1}) = H(X_m)."""
    values = [cut_entropy_output_given_self(e) for e in chain.edges]
    last = chain.marginal(chain.m)
    values.append(entropy(last / last.sum()))
    return values


def _result(chain, model, method, iterations, params=()) -> CapacityResult:
    cuts = cut_values(chain)
    return CapacityResult(min(cuts), chain, cuts, iterations, model, method, list(params))


# -- restricted parametrization ------------------------------------------------

def _edge(p0n: float, pn0: float, pnn: float, binary: bool) -> EdgeDistribution:
    arr = np.zeros((3, 3))
    arr[0, SILENT] = arr[1, SILENT] = p0n
    arr[SILENT, 0] = arr[SILENT, 1] = pn0
    arr[SILENT, SILENT] = pnn
    if binary:
        arr[SILENT, SILENT] = 0.0
    return EdgeDistribution(arr, binary=binary)


def chain_from_params(u: Sequence[float], model: RelayModel = RelayModel.TERNARY,
                      source_uniform: bool = True, u0: float | None = None) -> ChainDistribution:
    """Chain with P(X_i = 0) = P(X_i = 1) = u[i-1] on the restricted support.

    With ``source_uniform`` the source splits a listening slot of relay 1
    uniformly over its alphabet ({0, 1, N} ternary, {0, 1} binary);
    otherwise ``u0`` = P(X_0 = 0) is taken as given.
    """
    binary = model is RelayModel.BINARY
    u = [float(x) for x in u]
    if not u:
        raise DomainError("need at least one relay parameter")
    if source_uniform:
        quiet = 1.0 - 2.0 * u[0]
        a0 = quiet / 2.0 if binary else quiet / 3.0
    else:
        if u0 is None:
            raise DomainError("u0 required when the source is not uniform")
        a0 = float(u0)
    prev = [a0] + u[:-1]
    edges = []
    for x, y in zip(prev, u):
        nn = 1.0 - 2.0 * x - 2.0 * y
        if nn < 0.0:
            if nn < -1e-12:
                raise DomainError(f"infeasible parameters: u_prev={x}, u={y}")
            nn = 0.0
        if binary:
            if abs(nn) > 1e-12:
                raise DomainError("binary model needs u_prev + u = 1/2 on every edge")
            nn = 0.0
        edges.append(_edge(x, y, nn, binary))
    return ChainDistribution(tuple(edges))


def _source_cut(y: float, binary: bool) -> float:
    quiet = max(1.0 - 2.0 * y, 0.0)
    return quiet if binary else quiet * LOG2_3


def _relay_cut(x: float, y: float) -> float:
    # p(X_i = N) * H(X_{i-1} | X_i = N) on the restricted support
    quiet = 1.0 - 2.0 * y
    if quiet <= 0.0:
        return 0.0
    nn = max(quiet - 2.0 * x, 0.0)
    x = max(x, 0.0)
    acc = 0.0
    if x > 0.0:
        acc -= 2.0 * x * math.log2(x / quiet)
    if nn > 0.0:
        acc -= nn * math.log2(nn / quiet)
    return acc


def _sink_cut(y: float) -> float:
    return _entropy_unchecked((y, y, max(1.0 - 2.0 * y, 0.0)))


def param_cut_values(u: Sequence[float], model: RelayModel) -> list[float]:
    binary = model is RelayModel.BINARY
    cuts = [_source_cut(u[0], binary)]
    for x, y in zip(u[:-1], u[1:]):
        cuts.append((1.0 - 2.0 * y) if binary else _relay_cut(x, y))
    cuts.append(_sink_cut(u[-1]))
    return cuts


def _stage_interval(lo: float, hi: float, t: float, binary: bool):
    """Feasible values of u_i given u_{i-1} in [lo, hi] and relay cut >= t."""
    if binary:
        a, b = 0.5 - hi, min(0.5 - lo, (1.0 - t) / 2.0)
        return (max(a, 0.0), b) if a <= b else None

    def h(y):
        top = min(hi, 0.5 - y)
        if top < lo:
            return -math.inf
        x = min(max((1.0 - 2.0 * y) / 3.0, lo), top)
        return _relay_cut(x, y)

    y_max = 0.5 - lo
    peak, value = _numeric.golden_max(h, 0.0, y_max)
    if value < t:
        return None
    g = lambda y: h(y) - t
    left = 0.0 if g(0.0) >= 0 else _numeric.bisect_root(g, 0.0, peak)
    right = y_max if g(y_max) >= 0 else _numeric.bisect_root(g, peak, y_max)
    # bisection may land a hair outside the feasible set
    while left < peak and g(left) < 0:
        left = min(peak, left + 1e-15 + 1e-13 * abs(left))
    while right > peak and g(right) < 0:
        right = max(peak, right - 1e-15 - 1e-13 * abs(right))
    return left, right


def _feasible(t: float, m: int, binary: bool):
    """Forward interval propagation; returns the intervals or None."""
    cap = 1.0 if binary else LOG2_3
    if t > cap:
        return None
    intervals = [(0.0, max(0.0, (1.0 - t / cap) / 2.0))]
    for _ in range(1, m):
        nxt = _stage_interval(*intervals[-1], t, binary)
        if nxt is None:
            return None
        intervals.append(nxt)
    lo, hi = intervals[-1]
    if _sink_cut(min(max(1.0 / 3.0, lo), hi)) < t:
        return None
    return intervals


def _backtrack(intervals, binary: bool) -> list[float]:
    lo, hi = intervals[-1]
    u = [min(max(1.0 / 3.0, lo), hi)]
    for lo, hi in reversed(intervals[:-1]):
        y = u[0]
        if binary:
            x = 0.5 - y
        else:
            x = min(max((1.0 - 2.0 * y) / 3.0, lo), min(hi, 0.5 - y))
        u.insert(0, x)
    return u


@lru_cache(maxsize=256)
def _solve_restricted(m: int, model: RelayModel, tol: float, max_iter: int):
    binary = model is RelayModel.BINARY
    t_lo, t_hi = 0.0, (1.0 if binary else LOG2_3)
    best = _feasible(t_lo, m, binary)
    iterations = 0
    while t_hi - t_lo > tol:
        if iterations >= max_iter:
            raise SolverError(f"bisection did not reach tolerance {tol} in {max_iter} iterations",
                              best=_backtrack(best, binary))
        iterations += 1
        t = 0.5 * (t_lo + t_hi)
        found = _feasible(t, m, binary)
        if found is None:
            t_hi = t
        else:
            t_lo, best = t, found
    return tuple(_backtrack(best, binary)), iterations


def solve_cascade(m: int, model: RelayModel = RelayModel.TERNARY, *, restricted: bool = True,
                  tol: float = T_TOL, max_iter: int = MAX_ITER, seed: int = 0,
                  warm_start: bool = True) -> CapacityResult:
    """Maximize the minimum cut value over input chains of an m-relay cascade.

    The restricted solver bisects on the level t; each feasibility test
    propagates the interval of admissible u_i forward along the chain
    (every cut is concave, so each interval is exact) and the final chain
    is read off backwards.  ``restricted=False`` runs the full-support
    cross-check instead (SLSQP over unrestricted edge pmfs; with
    ``warm_start=False`` it starts only from random Markov chains).
    """
    if not 1 <= m <= MAX_RELAYS:
        raise DomainError(f"relay count {m} outside 1..{MAX_RELAYS}")
    if not restricted:
        return _solve_full_support(m, model, seed=seed, warm_start=warm_start)
    try:
        u, iterations = _solve_restricted(m, model, tol, max_iter)
    except SolverError as exc:
        best = _result(chain_from_params(exc.best, model), model, "optimize", max_iter, exc.best)
        raise SolverError(str(exc), best=best) from None
    return _result(chain_from_params(u, model), model, "optimize", iterations, u)


def solve_single_relay(model: RelayModel = RelayModel.TERNARY) -> CapacityResult:
    """Closed-form m = 1 solution.

    With q = p(X_1 = N) the two cuts are q log2 3 (q for the binary model)
    and H_b(q) + 1 - q; the capacity sits where they cross.
    """
    binary = model is RelayModel.BINARY
    rate = 1.0 if binary else LOG2_3
    f = lambda q: q * rate - binary_entropy(q) - (1.0 - q)
    lo = 0.5 if binary else 1.0 / 3.0
    q = _numeric.bisect_root(f, lo, 1.0, tol=1e-15)
    chain = chain_from_params([(1.0 - q) / 2.0], model)
    return _result(chain, model, "closed-form", 0, [(1.0 - q) / 2.0])


def closed_form(m: int, model: RelayModel = RelayModel.TERNARY) -> CapacityResult:
    """Closed-form capacities: m = 1, and the binary time-sharing value for m >= 2."""
    if m == 1:
        return solve_single_relay(model)
    if model is RelayModel.BINARY:
        u = [0.25] * m
        return _result(chain_from_params(u, model), model, "closed-form", 0, u)
    raise DomainError("no closed form for ternary cascades with more than one relay")


def infinite_cascade_chain(m: int) -> ChainDistribution:
    """Every edge puts 1/6 on 0N, 1N, N0, N1 and 1/3 on NN."""
    if m < 1:
        raise DomainError("need at least one relay")
    edge = _edge(1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, False)
    return ChainDistribution((edge,) * m)


def project_params(u: Sequence[float], model: RelayModel) -> list[float]:
    """Clip parameters back into the restricted polytope."""
    u = [min(max(float(x), 0.0), 0.5) for x in u]
    if model is RelayModel.BINARY:
        return [u[0] if i % 2 == 0 else 0.5 - u[0] for i in range(len(u))]
    for i in range(1, len(u)):
        if u[i - 1] + u[i] > 0.5:
            u[i] = 0.5 - u[i - 1]
    return u


# -- full-support cross-check --------------------------------------------------

def _solve_full_support(m: int, model: RelayModel, seed: int = 0, starts: int = 4,
                        warm_start: bool = True) -> CapacityResult:
    from scipy.optimize import minimize

    binary = model is RelayModel.BINARY
    if m > 8:
        raise DomainError("full-support optimizer is limited to m <= 8")
    base = _solve_restricted(m, model, T_TOL, MAX_ITER)[0]
    base_chain = chain_from_params(base, model)
    nv = 9 * m + 1
    eps = 1e-12

    def unpack(z):
        return np.maximum(z[:-1], 0.0).reshape(m, 3, 3)

    def cut_terms(P):
        out = []
        for i in range(m):
            col = P[i][:, SILENT]
            s = col.sum()
            out.append(0.0 if s <= 0 else float(-np.sum(col[col > 0] * np.log2(col[col > 0] / s))))
        marg = P[-1].sum(axis=0)
        out.append(float(-np.sum(marg[marg > 0] * np.log2(marg[marg > 0]))))
        return np.array(out)

    def cut_jac(P):
        J = np.zeros((m + 1, nv))
        for i in range(m):
            col = np.maximum(P[i][:, SILENT], eps)
            s = col.sum()
            for a in range(3):
                J[i, 9 * i + 3 * a + SILENT] = -math.log2(col[a] / s)
        marg = np.maximum(P[-1].sum(axis=0), eps)
        for a in range(3):
            for b in range(3):
                J[m, 9 * (m - 1) + 3 * a + b] = -math.log2(marg[b]) - 1.0 / math.log(2.0)
        return J

    def eq_cons(z):
        P = unpack(z)
        out = [P[0].sum() - 1.0]
        for i in range(m - 1):
            out.extend((P[i].sum(axis=0) - P[i + 1].sum(axis=1)).tolist())
        return np.array(out)

    def eq_jac(z):
        rows = [np.r_[np.ones(9), np.zeros(nv - 9)]]
        for i in range(m - 1):
            for b in range(3):
                row = np.zeros(nv)
                for a in range(3):
                    row[9 * i + 3 * a + b] += 1.0
                    row[9 * (i + 1) + 3 * b + a] -= 1.0
                rows.append(row)
        return np.array(rows)

    ineq = {"type": "ineq",
            "fun": lambda z: cut_terms(unpack(z)) - z[-1],
            "jac": lambda z: cut_jac(unpack(z)) - np.r_[np.zeros(nv - 1), 1.0][None, :]}
    eq = {"type": "eq", "fun": eq_cons, "jac": eq_jac}
    bounds = [(0.0, 1.0)] * (nv - 1) + [(0.0, 2.0)]
    if binary:
        for i in range(m):
            bounds[9 * i + 3 * SILENT + SILENT] = (0.0, 0.0)
    objective = lambda z: -z[-1]
    objective_jac = lambda z: np.r_[np.zeros(nv - 1), -1.0]

    rng = np.random.default_rng(seed)
    best_z, best_val = None, -math.inf
    for k in range(starts):
        P0 = np.array([e.p for e in base_chain.edges])
        if not warm_start:
            P0 = _random_markov(m, rng, binary)
        elif k:
            # mix towards a random Markov chain to leave the restricted face
            noise = _random_markov(m, rng, binary)
            lam = 0.05 * k if k < starts - 1 else 1.0
            P0 = (1 - lam) * P0 + lam * noise
        z0 = np.r_[P0.ravel(), 0.0]
        z0[-1] = max(cut_terms(P0).min() - 1e-3, 0.0)
        res = minimize(objective, z0, jac=objective_jac, method="SLSQP", bounds=bounds,
                       constraints=[ineq, eq], options={"maxiter": 500, "ftol": 1e-12})
        P = unpack(res.x)
        P = P / P[0].sum()
        val = cut_terms(P).min()
        if val > best_val and np.max(np.abs(eq_cons(np.r_[P.ravel(), 0.0]))) < 1e-7:
            best_val, best_z = val, P
    if best_z is None:
        raise SolverError("full-support optimizer found no consistent chain")
    edges = []
    for i in range(m):
        P = best_z[i].copy()
        if binary:
            P[SILENT, SILENT] = 0.0
        P = P / P.sum()
        edges.append(EdgeDistribution(P, binary=binary))
    try:
        chain = ChainDistribution(tuple(edges))
    except ValidationError:
        chain = ChainDistribution(tuple(_repair(edges, binary)))
    return _result(chain, model, "full-support", 0)


def _random_markov(m: int, rng: np.random.Generator, binary: bool) -> np.ndarray:
    marg = rng.dirichlet(np.ones(3))
    out = []
    for _ in range(m):
        T = rng.dirichlet(np.ones(3), size=3)
        if binary:
            T[SILENT, SILENT] = 0.0
            T[SILENT] /= T[SILENT].sum()
        P = marg[:, None] * T
        out.append(P)
        marg = P.sum(axis=0)
    return np.array(out)


def _repair(edges, binary):
    """Rebuild a chain by forward propagation of conditionals so marginals match exactly."""
    out = [edges[0]]
    for e in edges[1:]:
        marg = out[-1].self_marginal
        rows = e.p.sum(axis=1, keepdims=True)
        T = np.divide(e.p, rows, out=np.full_like(e.p, 1.0 / 3.0), where=rows > 0)
        if binary:
            T[SILENT, SILENT] = 0.0
            T[SILENT] /= T[SILENT].sum()
        out.append(EdgeDistribution(marg[:, None] * T, binary=binary))
    return out
