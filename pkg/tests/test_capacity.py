import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hdrelay.capacity import (ChainDistribution, chain_from_params, closed_form, cut_values,
                              infinite_cascade_chain, project_params, solve_cascade, solve_single_relay)
from hdrelay.channel import RelayModel
from hdrelay.cutset import ascending_sets, cut_value_single_source, materialize
from hdrelay.errors import DomainError, SolverError, ValidationError
from hdrelay.info import EdgeDistribution

T, B = RelayModel.TERNARY, RelayModel.BINARY


def test_single_relay_ternary_values():
    res = solve_single_relay(T)
    e = res.chain.edges[0]
    assert res.capacity_bits == pytest.approx(1.1389, abs=1e-3)
    for key in ("0N", "1N", "NN"):
        assert e[key] == pytest.approx(0.2395, abs=1e-3)
    for key in ("N0", "N1"):
        assert e[key] == pytest.approx(0.1407, abs=1e-3)
    # the two cuts cross at the optimum
    assert res.cut_values[0] == pytest.approx(res.cut_values[1], abs=1e-9)


def test_single_relay_binary_value():
    res = solve_single_relay(B)
    assert res.capacity_bits == pytest.approx(0.8295, abs=1e-3)
    assert res.chain.edges[0]["NN"] == 0.0


@pytest.mark.parametrize("model", [T, B])
def test_optimizer_matches_closed_form_single_relay(model):
    assert solve_cascade(1, model).capacity_bits == pytest.approx(closed_form(1, model).capacity_bits, abs=1e-8)


@pytest.mark.parametrize("m", [2, 3, 4, 6, 10])
def test_binary_cascades_half_bit(m):
    assert solve_cascade(m, B).capacity_bits == pytest.approx(0.5, abs=1e-6)
    assert closed_form(m, B).capacity_bits == pytest.approx(0.5, abs=1e-12)


def test_no_closed_form_for_long_ternary():
    with pytest.raises(DomainError):
        closed_form(2, T)


@pytest.mark.parametrize("m", [1, 2, 5, 16, 32])
def test_infinite_cascade_assignment_one_bit(m):
    vals = cut_values(infinite_cascade_chain(m))
    assert all(v == pytest.approx(1.0, abs=1e-9) for v in vals[1:m])
    # relay cuts see a uniform source while listening
    assert all(v == pytest.approx(1.0, abs=1e-9) for v in vals[:m])


def test_ternary_capacity_decreases_towards_one_bit():
    caps = [solve_cascade(m).capacity_bits for m in range(1, 9)]
    assert all(1.0 < c <= 1.1390 for c in caps)
    assert all(b <= a + 1e-12 for a, b in zip(caps, caps[1:]))


def _grid_max_m1():
    # independent oracle: sweep the single parameter, evaluate both cuts on the
    # full joint, then resweep finely around the coarse optimum
    def level(u):
        j = materialize(chain_from_params([u]))
        return min(cut_value_single_source(j, S) for S in ascending_sets(1))

    coarse = max(np.linspace(0.0, 0.5, 501), key=level)
    fine = np.linspace(max(coarse - 2e-3, 0.0), min(coarse + 2e-3, 0.5), 4001)
    return max(level(u) for u in fine)


def test_restricted_solver_against_grid_search():
    c = solve_cascade(1).capacity_bits
    g = _grid_max_m1()
    assert g <= c + 1e-9
    assert g >= c - 1e-4


def test_two_relay_solver_against_grid_search():
    c = solve_cascade(2).capacity_bits
    best, arg = 0.0, None
    for u1, u2 in itertools.product(np.linspace(0, 0.5, 51), repeat=2):
        if u1 + u2 > 0.5:
            continue
        j = materialize(chain_from_params([u1, u2]))
        v = min(cut_value_single_source(j, S) for S in ascending_sets(2))
        if v > best:
            best, arg = v, (u1, u2)
    # refine around the coarse optimum
    for u1, u2 in itertools.product(np.linspace(arg[0] - 0.01, arg[0] + 0.01, 41),
                                    np.linspace(arg[1] - 0.01, arg[1] + 0.01, 41)):
        if u1 < 0 or u2 < 0 or u1 + u2 > 0.5:
            continue
        j = materialize(chain_from_params([u1, u2]))
        best = max(best, min(cut_value_single_source(j, S) for S in ascending_sets(2)))
    assert best <= c + 1e-9
    assert best >= c - 2e-4


@pytest.mark.parametrize("m", [1, 2, 3])
def test_full_support_cold_start_agrees(m):
    full = solve_cascade(m, restricted=False, warm_start=False, seed=1)
    assert full.capacity_bits == pytest.approx(solve_cascade(m).capacity_bits, abs=1e-6)


def test_result_shape():
    res = solve_cascade(3)
    d = res.to_dict()
    assert set(d) == {"model", "relays", "method", "capacity_bits", "cut_values", "edges", "solver_iterations"}
    assert d["relays"] == 3 and len(d["edges"]) == 3 and len(d["cut_values"]) == 4
    assert min(d["cut_values"]) == pytest.approx(d["capacity_bits"], abs=1e-8)


def test_solver_reports_best_on_budget_exhaustion():
    with pytest.raises(SolverError) as info:
        solve_cascade(3, max_iter=3)
    best = info.value.best
    assert 0 < best.capacity_bits <= solve_cascade(3).capacity_bits


def test_relay_count_domain():
    with pytest.raises(DomainError):
        solve_cascade(0)


def test_chain_consistency_enforced():
    a = EdgeDistribution(np.full((3, 3), 1 / 9))
    b = chain_from_params([0.2]).edges[0]
    with pytest.raises(ValidationError):
        ChainDistribution((a, b))


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_cut_values_equal_brute_force_ascending_cuts(seed, m):
    rng = np.random.default_rng(seed)
    u = project_params(rng.uniform(0, 0.5, m), T)
    chain = chain_from_params(u)
    j = materialize(chain)
    brute = [cut_value_single_source(j, tuple(range(l, m + 1))) for l in range(1, m + 1)]
    brute.append(cut_value_single_source(j, ()))
    assert np.allclose(cut_values(chain), brute, atol=1e-9)
    assert min(cut_values(chain)) <= solve_cascade(m).capacity_bits + 1e-9


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=6), st.sampled_from([T, B]))
def test_projection_lands_in_polytope(u, model):
    p = project_params(u, model)
    if model is B:
        assert all(abs(a + b - 0.5) < 1e-12 for a, b in zip(p, p[1:]))
    chain_from_params(p, model)  # must not raise
