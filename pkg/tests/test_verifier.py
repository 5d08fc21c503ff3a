import numpy as np
import pytest

from polyverify.arrangement import build_arrangement, traverse_regions
from polyverify.geometry import DegenerateInputError, DimensionError, LinearFunctional, Polytope
from polyverify.instances import random_problem, random_shallow, random_tll
from polyverify.network import Layer, ReluNetwork, TllComponent, TllNetwork
from polyverify.oracle import exhaustive_verify, sample_falsify
from polyverify.tolerances import current
from polyverify.verifier import (
    InternalInvariantError,
    UnsupportedArchitecture,
    VerificationProblem,
    _total_order,
    active_affine_shallow,
    active_affine_tll,
    evaluate,
    switching_functionals_shallow,
    switching_functionals_tll,
    verify,
)

from conftest import interval, lf


# -- switching functionals -----------------------------------------------------------------


def test_shallow_switching_rows():
    net = ReluNetwork([Layer([[1.0], [-1.0]], [0.0, 1.0], True), Layer([[1.0, 1.0]], [0.0], False)])
    fs = switching_functionals_shallow(net)
    assert [(f.w.tolist(), f.c) for f in fs] == [([1.0], 0.0), ([-1.0], 1.0)]


def test_shallow_switching_count():
    net = random_shallow(np.random.default_rng(0), 5, 3)
    assert len(switching_functionals_shallow(net)) == 5


def test_duplicate_neurons_dedup_in_arrangement():
    net = ReluNetwork([Layer([[1.0], [2.0]], [-1.0, -2.0], True), Layer([[1.0, 1.0]], [0.0], False)])
    fs = switching_functionals_shallow(net)
    a = build_arrangement(fs, seed=0)
    assert len(fs) == 2 and len(a) == 1
    assert a.index_map[0][0] == a.index_map[1][0]


def test_shallow_switching_rejects_deep():
    deep = ReluNetwork([Layer([[1.0]], [0], True), Layer([[1.0]], [0], True), Layer([[1.0]], [0], False)])
    with pytest.raises(UnsupportedArchitecture):
        switching_functionals_shallow(deep)


def test_tll_switching_counts():
    rng = np.random.default_rng(0)
    assert len(switching_functionals_tll(random_tll(rng, 2, 2, 2, 1))) == 1
    assert len(switching_functionals_tll(random_tll(rng, 3, 2, 2, 2))) == 6


def test_abs_tll_switching_is_origin(abs_tll):
    (f,) = switching_functionals_tll(abs_tll)
    assert f.w.tolist() == [2.0] and f.c == 0.0


# -- active affine recovery ----------------------------------------------------------------


def test_relu_active_affine(relu_x):
    a = build_arrangement(switching_functionals_shallow(relu_x), base_point=[1.0])
    pos = a.encode_point([2.0])
    neg = a.encode_point([-2.0])
    assert active_affine_shallow(relu_x, pos, a)([3.0])[0] == 3.0
    assert active_affine_shallow(relu_x, neg, a)([3.0])[0] == 0.0


def test_abs_tll_active_affine(abs_tll):
    a = build_arrangement(switching_functionals_tll(abs_tll), base_point=[-1.0])
    right = active_affine_tll(abs_tll, a.encode_point([1.0]), a)
    left = active_affine_tll(abs_tll, a.encode_point([-1.0]), a)
    assert right.W.tolist() == [[1.0]]
    assert left.W.tolist() == [[-1.0]]


def _check_affine_fidelity(net, functionals, active, seed):
    a = build_arrangement(functionals, seed=seed)
    worst = 0.0

    def visit(r, g):
        nonlocal worst
        err = np.max(np.abs(active(net, r, a)(g.witness) - evaluate(net, g.witness)))
        worst = max(worst, err)

    traverse_regions(a, visit)
    return worst


@pytest.mark.parametrize("seed", range(10))
def test_shallow_affine_fidelity(seed):
    rng = np.random.default_rng(seed)
    net = random_shallow(rng, int(rng.integers(1, 7)), int(rng.integers(1, 4)), int(rng.integers(1, 3)))
    assert _check_affine_fidelity(net, switching_functionals_shallow(net), active_affine_shallow, seed) <= 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_tll_affine_fidelity(seed):
    rng = np.random.default_rng(seed)
    t = random_tll(rng, int(rng.integers(2, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
    assert _check_affine_fidelity(t, switching_functionals_tll(t), active_affine_tll, seed) <= 1e-9


def test_parallel_local_functions_have_constant_order():
    t = TllNetwork([TllComponent([[1.0], [1.0], [-1.0]], [0.0, 2.0, 0.0], [[0, 1], [2]])])
    fs = switching_functionals_tll(t)
    assert len(fs) == 2  # the parallel pair never crosses
    assert _check_affine_fidelity(t, fs, active_affine_tll, 0) <= 1e-9


def test_cyclic_order_detected():
    with pytest.raises(InternalInvariantError):
        _total_order(3, {(0, 1): True, (1, 2): True, (0, 2): False})


def test_total_order_ascending():
    assert _total_order(3, {(0, 1): True, (0, 2): True, (1, 2): False}) == [1, 2, 0]


# -- verify ------------------------------------------------------------------------------------


def test_relu_unsat(relu_x):
    v = verify(VerificationProblem(relu_x, interval(-1, 1), interval(0, 0.5)))
    assert v.status == "UNSAT"
    assert v.witness[0] == pytest.approx(1.0, abs=1e-9)
    assert v.margin == pytest.approx(0.5, abs=1e-9)


def test_relu_sat(relu_x):
    assert verify(VerificationProblem(relu_x, interval(-1, 1), interval(-0.1, 1.1))).status == "SAT"


def test_abs_tll_sat_and_unsat(abs_tll):
    assert verify(VerificationProblem(abs_tll, interval(-2, 2), interval(-0.5, 2.5))).status == "SAT"
    v = verify(VerificationProblem(abs_tll, interval(-2, 2), interval(-0.5, 1.5)))
    assert v.status == "UNSAT"
    assert abs(v.witness[0]) > 1.5
    assert v.margin == pytest.approx(0.5, abs=1e-9)


def test_exhaustive_collects_every_violation(abs_tll):
    v = verify(VerificationProblem(abs_tll, interval(-2, 2), interval(-0.5, 1.5)), exhaustive=True)
    assert {round(abs(x.witness[0]), 9) for x in v.violations} == {2.0}
    assert len(v.violations) == 2


def test_empty_output_polytope_is_unsat(relu_x):
    empty = Polytope([lf([1.0], 0.0), lf([-1.0], 1.0)])
    assert verify(VerificationProblem(relu_x, interval(-1, 1), empty)).status == "UNSAT"


def test_unbounded_input_rejected(relu_x):
    with pytest.raises(DegenerateInputError):
        verify(VerificationProblem(relu_x, Polytope([lf([1.0], -1.0)]), interval(0, 1)))


def test_flat_input_rejected(relu_x):
    with pytest.raises(DegenerateInputError):
        verify(VerificationProblem(relu_x, interval(0.5, 0.5), interval(0, 1)))


def test_dimension_mismatch_rejected(relu_x):
    with pytest.raises(DimensionError):
        verify(VerificationProblem(relu_x, Polytope.box([0, 0], [1, 1]), interval(0, 1)))


def test_deep_network_rejected():
    deep = ReluNetwork([Layer([[1.0]], [0], True), Layer([[1.0]], [0], True), Layer([[1.0]], [0], False)])
    with pytest.raises(UnsupportedArchitecture):
        verify(VerificationProblem(deep, interval(-1, 1), interval(0, 1)))


def test_marginal_optimum_reported_sat(relu_x):
    v = verify(VerificationProblem(relu_x, interval(-1, 1), interval(0, 1 - 5e-10)))
    assert v.status == "SAT" and v.marginal >= 1


def test_neuron_on_input_boundary():
    # neuron hyperplane x = 1 coincides with the P_x facet x <= 1
    net = ReluNetwork([Layer([[1.0]], [-1.0], True), Layer([[1.0]], [0.0], False)])
    assert verify(VerificationProblem(net, interval(-1, 1), interval(-0.1, 0.1))).status == "SAT"


@pytest.mark.parametrize("seed", range(8))
def test_unsat_witness_revalidates(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, random_shallow(rng, 4, 2, 2), spread=(-0.3, -0.1))
    v = verify(p)
    assert v.status == "UNSAT"
    y = evaluate(p.network, v.witness)
    assert p.output_polytope.constraints[v.constraint_index](y) > current().feas
    assert p.input_polytope.contains(v.witness)


@pytest.mark.parametrize("seed", range(6))
def test_scaling_output_constraints_keeps_verdict(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, random_shallow(rng, 4, 2))
    scaled = Polytope([LinearFunctional(7.5 * f.w, 7.5 * f.c) for f in p.output_polytope.constraints])
    q = VerificationProblem(p.network, p.input_polytope, scaled)
    assert verify(p).status == verify(q).status


@pytest.mark.parametrize("seed", range(5))
def test_coverage_of_input_polytope(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, random_tll(rng, 3, 2, 2), spread=(0.5, 1.0))
    v = verify(p, exhaustive=True, record_regions=True)
    feas = current().feas
    for x in rng.uniform(-1, 1, size=(200, 2)):
        assert any(np.all(g.closure.values(x) <= feas) for g in v.kept_regions)


@pytest.mark.parametrize("seed", range(10))
def test_agrees_with_oracles(seed):
    rng = np.random.default_rng(100 + seed)
    if seed % 2:
        net = random_tll(rng, 3, 2, 2, 1)
    else:
        net = random_shallow(rng, 4, 2, 1)
    p = random_problem(rng, net)
    v = verify(p)
    assert v.status == exhaustive_verify(p).status
    if sample_falsify(p, trials=500) is not None:
        assert v.status == "UNSAT"


def test_threaded_verify_matches_serial(abs_tll):
    p = VerificationProblem(abs_tll, interval(-2, 2), interval(-0.5, 1.5))
    a, b = verify(p, workers=1), verify(p, workers=3)
    assert a.status == b.status and np.array_equal(a.witness, b.witness)


def test_verdict_report_fields(relu_x):
    d = verify(VerificationProblem(relu_x, interval(-1, 1), interval(0, 0.5))).to_dict()
    for key in ("status", "witness", "constraint_index", "margin", "regions_traversed", "regions_verified", "lp_calls", "wall_time_ms"):
        assert key in d
