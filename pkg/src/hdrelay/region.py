"""Rate region of the cascade with a second source at relay r.

Node 0 sends at r0 and relay r injects its own stream at r1.  For one
relay the outer bound is the piecewise curve of ``outer_boundary_single_relay``;
above a source-rate threshold the slot-allocation code meets it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ._numeric import bisect_root
from .channel import RelayModel
from .errors import DomainError
from .info import LOG2_3, binary_entropy, entropy

CURVE_LABELS = ("outer_bound", "sum_cap_line", "achievable_finite_n", "achievable_asymptotic")
CORNER_R0 = LOG2_3 / 3.0


@dataclass(frozen=True)
class RatePoint:
    r0: float
    r1: float

    def __post_init__(self):
        if self.r0 < 0 or self.r1 < 0:
            raise DomainError(f"rates must be non-negative, got ({self.r0}, {self.r1})")


@dataclass(frozen=True)
class RegionCurve:
    points: tuple[RatePoint, ...]
    label: str

    def __post_init__(self):
        if self.label not in CURVE_LABELS:
            raise DomainError(f"unknown curve label {self.label!r}")
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if any(b.r0 <= a.r0 for a, b in zip(pts, pts[1:])):
            raise DomainError("r0 must be strictly increasing along a curve")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([p.r0 for p in self.points]), np.array([p.r1 for p in self.points]))

    def rows(self) -> list[tuple[float, float, str]]:
        return [(p.r0, p.r1, self.label) for p in self.points]


@lru_cache(maxsize=1)
def single_relay_capacity() -> float:
    from .capacity import solve_single_relay
    return solve_single_relay(RelayModel.TERNARY).capacity_bits


def outer_boundary_single_relay(r0: float) -> float:
    """Largest r1 allowed by the cut-set bound at source rate r0 (one relay, r = 1)."""
    r0 = float(r0)
    cap = single_relay_capacity()
    if r0 < 0 or r0 > cap:
        raise DomainError(f"r0={r0} outside [0, C={cap:.6f}]")
    if r0 <= CORNER_R0:
        return LOG2_3 - r0
    q = r0 / LOG2_3
    return binary_entropy(q) + (1.0 - q) - r0


def outer_bound_curve(points: int = 100) -> RegionCurve:
    """Outer bound sampled on [0, C] with the corner point always included."""
    cap = single_relay_capacity()
    r0s = set(np.linspace(0.0, cap, max(points, 2)).tolist())
    if points > 1:
        r0s.add(CORNER_R0)
    pts = [RatePoint(r, max(outer_boundary_single_relay(r), 0.0)) for r in sorted(r0s)]
    return RegionCurve(tuple(pts), "outer_bound")


def sum_cap_line() -> RegionCurve:
    return RegionCurve((RatePoint(0.0, LOG2_3), RatePoint(LOG2_3, 0.0)), "sum_cap_line")


@dataclass(frozen=True)
class Threshold:
    beta: float
    r0_min: float
    r1_at_threshold: float

    def to_dict(self) -> dict:
        return {"beta": self.beta, "r0_min": self.r0_min, "r1_at_threshold": self.r1_at_threshold}


def _segment_beta(t: float) -> float:
    # (1 - b) log2 3 = t b + H_b(b) has one root in (0, 1/2): the left side
    # minus the right side is strictly decreasing there
    f = lambda b: (1.0 - b) * LOG2_3 - t * b - binary_entropy(b)
    return bisect_root(f, 1e-15, 0.5, tol=1e-15)


def sum_capacity_threshold() -> Threshold:
    """Smallest source rate at which the code attains the sum-rate bound."""
    beta = _segment_beta(0.0)
    return Threshold(beta, (1.0 - beta) * LOG2_3, beta)


def achievable_segment(t_steps: int) -> RegionCurve:
    """Asymptotic rates of the two-source code as the w0 share t of relay bits goes 0 -> 1."""
    if t_steps < 2:
        raise DomainError("need at least two t steps")
    pts = []
    for t in np.linspace(0.0, 1.0, t_steps):
        b = _segment_beta(float(t))
        pts.append(RatePoint((1.0 - b) * LOG2_3, max((1.0 - t) * b, 0.0)))
    return RegionCurve(tuple(pts), "achievable_asymptotic")


# -- finite block length ------------------------------------------------------------

def finite_n_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All (r0, r1) pairs reachable by two-source codes of block length n."""
    if not 8 <= n <= 4096:
        raise DomainError(f"block length {n} outside 8..4096")
    r0s, r1s = [], []
    for n1 in range(1, n):
        lc = math.log2(math.comb(n, n1))
        k0 = np.arange(n1 + 1, dtype=float)
        w0 = np.minimum((n - n1) * LOG2_3, k0 + lc)
        r0s.append(w0 / n)
        r1s.append((n1 - k0) / n)
    return np.concatenate(r0s), np.concatenate(r1s)


def pareto_frontier(r0: np.ndarray, r1: np.ndarray) -> list[tuple[float, float]]:
    """Non-dominated points, r0 increasing; equal r1 keeps the larger r0."""
    order = np.lexsort((-r1, -r0))
    out = []
    best = -math.inf
    for j in order:
        if r1[j] > best:
            out.append((float(r0[j]), float(r1[j])))
            best = r1[j]
    return out[::-1]


def finite_n_achievable(n: int) -> RegionCurve:
    r0, r1 = finite_n_points(n)
    return RegionCurve(tuple(RatePoint(a, b) for a, b in pareto_frontier(r0, r1)), "achievable_finite_n")


def staircase(curve: RegionCurve, grid: Sequence[float]) -> np.ndarray:
    """Best r1 reachable at each r0 on ``grid`` (a code may always drop r0); -inf past the end."""
    r0, r1 = curve.arrays()
    # suffix maximum of r1 over points with r0 >= g
    suf = np.maximum.accumulate(r1[::-1])[::-1]
    idx = np.searchsorted(r0, np.asarray(grid, dtype=float) - 1e-15, side="left")
    out = np.full(len(idx), -math.inf)
    ok = idx < len(r0)
    out[ok] = suf[idx[ok]]
    return out


@dataclass
class DominanceReport:
    grid_points: int
    flagged: int
    worst_deficit: float

    @property
    def fraction(self) -> float:
        return self.flagged / self.grid_points


def compare_frontiers(lower: RegionCurve, upper: RegionCurve, grid_points: int = 2000,
                      slack: float = 1e-9) -> DominanceReport:
    """Count grid points where ``upper`` fails to reach ``lower``."""
    grid = np.linspace(0.0, single_relay_capacity(), grid_points)
    a, b = staircase(lower, grid), staircase(upper, grid)
    with np.errstate(invalid="ignore"):
        deficit = np.where(np.isfinite(a), a - b, -math.inf)
    bad = deficit > slack
    worst = float(deficit[bad].max()) if bad.any() else 0.0
    return DominanceReport(grid_points, int(bad.sum()), worst)


# -- relay-rate check on the upper interval ---------------------------------------------

def relay_bound_slack(r0: float) -> float:
    """H(X_1|X_0) minus the boundary value, at the input that attains the boundary.

    On the upper interval the bound is met by P(X_1 = N) = q = r0/log2 3,
    binary relay symbols uniform and a uniform source while relay 1 listens.
    The individual relay bound R1 <= H(X_1|X_0) is inactive iff this is >= 0.
    """
    cap = single_relay_capacity()
    if not CORNER_R0 <= r0 <= cap:
        raise DomainError(f"r0={r0} outside the upper interval [{CORNER_R0:.6f}, {cap:.6f}]")
    q = max(1.0 / 3.0, r0 / LOG2_3)
    busy = (1.0 - q) / 2.0  # p_N0 = p_N1
    src = q / 3.0          # p_0N = p_1N = p_NN
    p_silent = 2.0 * busy + src
    h = p_silent * entropy(np.array([busy, busy, src]) / p_silent)
    return h - outer_boundary_single_relay(r0)


# -- general cascades ------------------------------------------------------------------------

def _chain(z: np.ndarray):
    from .capacity import chain_from_params
    u = np.clip(np.asarray(z, dtype=float), 0.0, 0.5)
    for i in range(1, len(u)):
        u[i] = min(u[i], 0.5 - u[i - 1])
    return chain_from_params(u[1:], RelayModel.TERNARY, source_uniform=False, u0=u[0])


def _bounds(z: np.ndarray, r: int):
    from .cutset import materialize, two_source_bounds
    return two_source_bounds(materialize(_chain(z)), r)


def _pentagon_corner(b, lam: float) -> tuple[float, float]:
    a, c, s = b.R0_bound, b.Rr_bound, b.sum_bound
    if lam >= 0.5:
        x0 = min(a, s)
        return x0, max(min(c, s - x0), 0.0)
    x1 = min(c, s)
    return max(min(a, s - x1), 0.0), x1


def _scalarized(lam: float, r: int, starts: list[np.ndarray]) -> tuple[float, float, np.ndarray]:
    m1 = len(starts[0])
    # epigraph form: variables (u_0..u_m, x0, x1)
    def obj(v):
        return -(lam * v[m1] + (1.0 - lam) * v[m1 + 1])

    def cons(v):
        b = _bounds(v[:m1], r)
        x0, x1 = v[m1], v[m1 + 1]
        return np.array([t - x0 for t in b.R0_terms] + [t - x1 for t in b.Rr_terms]
                        + [t - x0 - x1 for t in b.sum_terms])

    lin = [{"type": "ineq", "fun": (lambda v, i=i: 0.5 - v[i - 1] - v[i])} for i in range(1, m1)]
    bnds = [(0.0, 0.5)] * m1 + [(0.0, 2.0), (0.0, 2.0)]
    best = None
    for z0 in starts:
        x0, x1 = _pentagon_corner(_bounds(z0, r), lam)
        v0 = np.concatenate([z0, [x0, x1]])
        res = minimize(obj, v0, method="SLSQP", bounds=bnds,
                       constraints=lin + [{"type": "ineq", "fun": cons}],
                       options={"maxiter": 300, "ftol": 1e-12})
        # re-evaluate the corner at the returned chain so the point is a true bound value
        z = np.clip(res.x[:m1], 0.0, 0.5)
        c0, c1 = _pentagon_corner(_bounds(z, r), lam)
        val = lam * c0 + (1.0 - lam) * c1
        if best is None or val > best[0]:
            best = (val, (c0, c1), z)
    return best[1][0], best[1][1], best[2]


def _endpoint_starts(m: int, r: int) -> list[np.ndarray]:
    from .capacity import solve_cascade
    cap = solve_cascade(m).params
    full = np.array([(1.0 - 2.0 * cap[0]) / 3.0] + list(cap))
    # relay r alone: node r-1 stays silent, relays r..m run the (m - r)-relay optimum
    alone = np.zeros(m + 1)
    if r < m:
        sub = solve_cascade(m - r).params
        alone[r] = (1.0 - 2.0 * sub[0]) / 3.0
        alone[r + 1:] = sub
    else:
        alone[r] = 1.0 / 3.0
    return [full, alone, 0.5 * (full + alone)]


def relay_source_capacity(m: int, r: int) -> float:
    """Largest r1 when node 0 is idle: relay r drives an (m - r)-relay cascade."""
    from .capacity import solve_cascade
    return LOG2_3 if r == m else solve_cascade(m - r).capacity_bits


def general_region_bound(m: int, r: int, grid: int = 11) -> RegionCurve:
    """Trace the cut-set outer boundary of (r0, r1) by weighted-sum scalarization."""
    if not 1 <= r <= m <= 3:
        raise DomainError(f"need 1 <= r <= m <= 3, got m={m}, r={r}")
    if grid < 2:
        raise DomainError("need at least two weights")
    starts = _endpoint_starts(m, r)
    pts = []
    # weights kept off 0 and 1 so both coordinates are pushed to the boundary
    for lam in np.linspace(1e-3, 1.0 - 1e-3, grid):
        x0, x1, z = _scalarized(float(lam), r, starts)
        starts = [z] + starts[:3]
        pts.append((x0, x1))
    r1_top = max(p[1] for p in pts)
    r0_top = max(p[0] for p in pts)
    pts += [(0.0, r1_top), (r0_top, 0.0)]
    front = pareto_frontier(np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))
    return RegionCurve(tuple(RatePoint(max(a, 0.0), max(b, 0.0)) for a, b in front), "outer_bound")
