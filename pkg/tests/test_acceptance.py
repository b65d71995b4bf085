"""One test per acceptance criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are repeated in the terminal summary either way.
"""

import itertools
import math
import random
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from hdrelay.capacity import _solve_restricted, cut_values, infinite_cascade_chain, solve_cascade, solve_single_relay
from hdrelay.channel import RelayModel
from hdrelay.coding import CodebookSpec, TwoSourceSpec, optimize_slot_counts
from hdrelay.cutset import verify_ascending_minimality, verify_two_source_ascending
from hdrelay.errors import DomainError
from hdrelay.info import LOG2_3, binary_entropy
from hdrelay.region import (CORNER_R0, compare_frontiers, finite_n_achievable, outer_boundary_single_relay,
                            single_relay_capacity, sum_capacity_threshold)
from hdrelay.simulator import ExperimentConfig, run_pipeline, run_two_source

T, B = RelayModel.TERNARY, RelayModel.BINARY


def report(num, ok, detail):
    line = f"CRITERION {num}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_single_relay_ternary():
    _solve_restricted.cache_clear()
    t = time.perf_counter()
    res = solve_cascade(1, T)
    dt = time.perf_counter() - t
    e = res.chain.edges[0]
    ok = (abs(res.capacity_bits - 1.1389) <= 1e-3
          and all(abs(e[k] - 0.2395) <= 1e-3 for k in ("0N", "1N", "NN"))
          and all(abs(e[k] - 0.1407) <= 1e-3 for k in ("N0", "N1")) and dt < 1.0)
    report(1, ok, f"C={res.capacity_bits:.6f}, p0N={e['0N']:.4f}, pNN={e['NN']:.4f}, pN0={e['N0']:.4f}, "
                  f"{dt:.3f}s")


def test_criterion_02_single_relay_binary():
    _solve_restricted.cache_clear()
    t = time.perf_counter()
    c = solve_cascade(1, B).capacity_bits
    dt = time.perf_counter() - t
    report(2, abs(c - 0.8295) <= 1e-3 and dt < 1.0, f"C={c:.6f}, {dt:.3f}s")


def test_criterion_03_infinite_cascade():
    worst = 0.0
    for m in range(1, 33):
        vals = cut_values(infinite_cascade_chain(m))
        worst = max(worst, max(abs(v - 1.0) for v in vals[:m]))
    caps = [solve_cascade(m, T).capacity_bits for m in range(1, 33)]
    bounded = all(1.0 < c <= 1.1390 for c in caps)
    monotone = all(b <= a + 1e-12 for a, b in zip(caps, caps[1:]))
    report(3, worst <= 1e-9 and bounded and monotone,
           f"max |cut-1| = {worst:.1e} for m<=32, C(1..32) in ({min(caps):.6f}, {max(caps):.6f}], "
           f"non-increasing={monotone}")


def test_criterion_04_binary_cascades():
    caps = {m: solve_cascade(m, B).capacity_bits for m in range(2, 11)}
    worst = max(abs(c - 0.5) for c in caps.values())
    report(4, worst <= 1e-6, f"max |C-0.5| = {worst:.1e} for m=2..10")


def test_criterion_05_region_boundary():
    corner = outer_boundary_single_relay(CORNER_R0)
    ok_corner = abs(CORNER_R0 - 0.52832) <= 1e-5 and abs(corner - 1.05664) <= 1e-5
    ok_corner &= abs(CORNER_R0 - LOG2_3 / 3) <= 1e-6 and abs(corner - 2 * LOG2_3 / 3) <= 1e-6
    xs = np.linspace(0, CORNER_R0, 101)
    slope = np.diff([outer_boundary_single_relay(x) for x in xs]) / np.diff(xs)
    ok_slope = np.allclose(slope, -1.0, atol=1e-9)
    eps = 1e-12
    jump = abs((outer_boundary_single_relay(CORNER_R0 - eps) - eps) - (outer_boundary_single_relay(CORNER_R0 + eps) + eps))
    end = outer_boundary_single_relay(single_relay_capacity())
    ok = ok_corner and ok_slope and jump <= 1e-9 and abs(end) <= 3e-4 and abs(single_relay_capacity() - 1.1389) <= 3e-4
    report(5, ok, f"corner=({CORNER_R0:.6f}, {corner:.6f}), slope -1 ok={ok_slope}, jump={jump:.1e}, "
                  f"r1(C)={end:.1e}")


def test_criterion_06_zero_error_coding():
    t = time.perf_counter()
    specs = msgs = 0
    for model in RelayModel:
        for n in range(1, 11):
            for m in (1, 2, 3):
                for counts in itertools.product(range(n + 1), repeat=m):
                    try:
                        spec = CodebookSpec(n, m, counts, model)
                    except DomainError:
                        continue
                    rep = run_pipeline(ExperimentConfig(spec, spec.message_count + m, message_source="exhaustive"))
                    assert rep.messages_correct == rep.messages_sent == spec.message_count
                    specs += 1
                    msgs += spec.message_count
    big = optimize_slot_counts(640, 1)
    rep = run_pipeline(ExperimentConfig(big, 10_000 + 1, seed=2024))
    dt = time.perf_counter() - t
    ok = rep.messages_correct == rep.messages_sent == 10_000 and dt < 60
    report(6, ok, f"{specs} specs / {msgs} messages exhaustive, n=640: {rep.messages_correct}/10000, {dt:.1f}s")


def test_criterion_07_rate_convergence():
    cap = solve_single_relay().capacity_bits
    ns = [8, 16, 64, 256, 640]
    rates = [optimize_slot_counts(n, 1).rate for n in ns]
    gaps = [cap - r for r in rates]
    ok = rates[-1] >= 1.12 and gaps[-1] <= 0.02 and all(b < a for a, b in zip(gaps, gaps[1:]))
    report(7, ok, "rates " + ", ".join(f"n={n}:{r:.4f}" for n, r in zip(ns, rates)))


def _frontier_configs(n, points):
    """Recover (n_1, k0) for given frontier points by exhaustive search."""
    out = []
    for p in points:
        for n1 in range(1, n):
            lc = math.log2(math.comb(n, n1))
            k0 = n1 - round(p.r1 * n)
            if 0 <= k0 <= n1 and abs(min((n - n1) * LOG2_3, k0 + lc) / n - p.r0) < 1e-12:
                out.append(TwoSourceSpec(n, n1, k0))
                break
    return out


def test_criterion_08_finite_frontier():
    n = 640
    front = finite_n_achievable(n)
    worst = max(p.r1 - outer_boundary_single_relay(p.r0) for p in front.points)
    picks = [front.points[len(front.points) * k // 4] for k in (1, 2, 3)]
    specs = _frontier_configs(n, picks)
    errors = 0
    for spec, p in zip(specs, picks):
        r0, r1 = spec.rates
        assert abs(r0 - p.r0) < 1e-12 and abs(r1 - p.r1) < 1e-12
        rep = run_two_source(ExperimentConfig(spec, 20, seed=8))
        errors += (rep.messages_sent - rep.messages_correct) + (rep.relay_messages_sent - rep.relay_messages_correct)
    small = compare_frontiers(finite_n_achievable(8), front)
    ok = worst <= 1e-9 and len(specs) == 3 and errors == 0 and small.flagged == 0
    report(8, ok, f"containment max excess {worst:.1e}, 3 frontier points simulated with {errors} errors, "
                  f"n=8 frontier inside n=640")


@pytest.mark.xfail(strict=True, reason="integer granularity between non-nested block lengths; see the decisions ledger")
def test_criterion_08b_frontier_monotone_in_n():
    seq = [8, 16, 32, 64, 128, 256, 512, 640]
    curves = {n: finite_n_achievable(n) for n in seq}
    worst = None
    for a, b in zip(seq, seq[1:]):
        rep = compare_frontiers(curves[a], curves[b])
        if worst is None or rep.fraction > worst[2]:
            worst = (a, b, rep.fraction, rep.worst_deficit)
    a, b, frac, deficit = worst
    report("8b", frac < 0.02, f"worst pair n={a}->{b}: {frac:.1%} of grid points flagged, deficit <= {deficit:.2e}")


def test_criterion_09_cutset_oracle():
    t = time.perf_counter()
    viol = 0
    cases = 0
    for m in range(1, 6):
        rep = verify_ascending_minimality(solve_cascade(m).chain, trials=200, seed=100 + m)
        viol += len(rep.violations)
        cases += 1
    for m in range(1, 5):
        for r in range(1, m + 1):
            rep = verify_two_source_ascending(solve_cascade(m).chain, r, trials=200, seed=200 + 10 * m + r)
            viol += len(rep.violations)
            cases += 1
    dt = time.perf_counter() - t
    report(9, viol == 0 and dt < 120, f"{cases} cases x 201 chains, {viol} violations, {dt:.1f}s")


def test_criterion_10_threshold():
    th = sum_capacity_threshold()
    on_boundary = abs(outer_boundary_single_relay(th.r0_min) - th.r1_at_threshold)
    sum_rate = abs(th.r0_min + th.r1_at_threshold - (binary_entropy(1 - th.beta) + th.beta))
    ok = on_boundary <= 1e-6 and sum_rate <= 1e-6 and 0.3 < th.beta < 0.5
    report(10, ok, f"beta={th.beta:.6f}, r0_min={th.r0_min:.6f}, boundary gap {on_boundary:.1e}, "
                   f"sum-rate gap {sum_rate:.1e}")
