"""Instance families: frozen values, validation, generators, JSON roundtrip."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subpar import (CoverageInstance, CutInstance, MultilinearQuadraticInstance,
                    NonNegativityViolation, dump_instance, generate_random_instance,
                    load_instance)
from subpar.instances import (check_nonnegative_exhaustive, check_submodular_exhaustive,
                              instance_from_json_dict)
from subpar.oracles import all_subsets_matrix


# -- cut ---------------------------------------------------------------------

def test_cut_k2_frozen(k2):
    # by hand: crossing edges of the single unit edge
    assert list(k2.evaluate_batch(all_subsets_matrix(2))) == [0.0, 1.0, 1.0, 0.0]


def test_cut_triangle_frozen(triangle):
    vals = triangle.evaluate_batch(all_subsets_matrix(3))
    assert list(vals) == [0.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 0.0]


def test_cut_quadratic_form_matches_edge_count():
    # independent oracle: literal sum of w over edges with one endpoint inside
    rng = np.random.default_rng(0)
    inst = generate_random_instance("cut", 9, 4)
    m = rng.random((200, 9)) < 0.5
    direct = np.zeros(200)
    for u, v, w in inst.edges:
        direct += w * (m[:, u] != m[:, v])
    assert np.abs(inst.evaluate_batch(m) - direct).max() < 1e-10


def test_cut_symmetry():
    inst = generate_random_instance("cut", 7, 2)
    table = inst.evaluate_batch(all_subsets_matrix(7))
    assert np.abs(table - table[::-1]).max() < 1e-12   # f(S) = f(N \ S)


def test_cut_empty_edges_is_zero():
    inst = CutInstance(4, [])
    assert inst.evaluate_batch(all_subsets_matrix(4)).max() == 0.0


def test_cut_rejects_bad_edges():
    with pytest.raises(AssertionError):
        CutInstance(3, [(0, 0, 1.0)])           # self loop
    with pytest.raises(AssertionError):
        CutInstance(3, [(0, 3, 1.0)])           # endpoint out of range
    with pytest.raises(AssertionError):
        CutInstance(3, [(0, 1, -1.0)])          # negative weight


# -- coverage ------------------------------------------------------------------

def test_coverage_frozen(tiny_coverage):
    # hand-computed: w = (1,2,3), covers 0->{0,1}, 1->{1,2}, costs (0.5, 1)
    vals = tiny_coverage.evaluate_batch(all_subsets_matrix(2))
    assert list(vals) == [0.0, 2.5, 4.0, 4.5]


def test_coverage_rejects_negative_function():
    with pytest.raises(NonNegativityViolation):
        CoverageInstance(2, 1, {0: [0], 1: [0]}, weights=[1.0], costs=[5.0, 5.0])


def test_coverage_large_n_requires_zero_costs():
    covers = {u: [u % 5] for u in range(21)}
    with pytest.raises(NonNegativityViolation):
        CoverageInstance(21, 5, covers, weights=np.ones(5), costs=np.full(21, 0.1))
    inst = CoverageInstance(21, 5, covers, weights=np.ones(5), costs=np.zeros(21))
    full = np.ones((1, 21), dtype=bool)
    assert inst.evaluate_batch(full)[0] == 5.0


def test_coverage_submodular_nonneg_exhaustive(tiny_coverage):
    assert check_submodular_exhaustive(tiny_coverage) >= -1e-12
    assert check_nonnegative_exhaustive(tiny_coverage) >= 0.0


# -- quadratic -----------------------------------------------------------------

def test_quadratic_frozen(frozen_quad):
    q = frozen_quad
    assert q.value([0.5, 0.5]) == 0.75
    assert list(q.gradient([0.5, 0.5])) == [0.5, 0.5]
    assert list(q.evaluate_batch(all_subsets_matrix(2))) == [0.0, 1.0, 1.0, 1.0]
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.3, 0.8]])
    want = [0.0, 1.0, 0.3 + 0.8 - 0.24]
    assert np.abs(q.value_batch(X) - want).max() < 1e-12


def test_quadratic_validation():
    with pytest.raises(AssertionError):
        MultilinearQuadraticInstance(2, 0.0, [1, 1], [[0, -1], [-0.5, 0]])   # asymmetric
    with pytest.raises(AssertionError):
        MultilinearQuadraticInstance(2, 0.0, [1, 1], [[0.1, -1], [-1, 0]])   # diag != 0
    with pytest.raises(AssertionError):
        MultilinearQuadraticInstance(2, 0.0, [1, 1], [[0, 1], [1, 0]])       # positive entry


def test_quadratic_negative_vertex_rejected_unless_unvalidated():
    # F(1,1) = 0.2 + 0.2 - 1 < 0
    with pytest.raises(NonNegativityViolation):
        MultilinearQuadraticInstance(2, 0.0, [0.2, 0.2], [[0, -1], [-1, 0]])
    q = MultilinearQuadraticInstance(2, 0.0, [0.2, 0.2], [[0, -1], [-1, 0]],
                                     validate=False)
    assert q.value([1.0, 1.0]) == pytest.approx(-0.6)


def test_quadratic_gradient_batch_matches_single():
    q = generate_random_instance("quadratic", 5, 1)
    X = np.random.default_rng(2).random((6, 5))
    G = q.gradient_batch(X)
    for i in range(6):
        assert np.abs(G[i] - q.gradient(X[i])).max() < 1e-12


# -- generators ------------------------------------------------------------------

def test_generators_deterministic():
    for kind in ("cut", "coverage", "quadratic"):
        a = generate_random_instance(kind, 6, 3)
        b = generate_random_instance(kind, 6, 3)
        assert a.to_json_dict() == b.to_json_dict()


def test_generator_unknown_kind():
    with pytest.raises(ValueError):
        generate_random_instance("parity", 4, 0)


@settings(max_examples=20, deadline=None)
@given(kind=st.sampled_from(["cut", "coverage"]), n=st.integers(2, 8),
       seed=st.integers(0, 10 ** 6))
def test_generated_instances_are_submodular_nonneg(kind, n, seed):
    inst = generate_random_instance(kind, n, seed)
    assert check_submodular_exhaustive(inst) >= -1e-9
    assert check_nonnegative_exhaustive(inst) >= -1e-12


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 10 ** 6))
def test_generated_quadratics_nonneg_dr(n, seed):
    q = generate_random_instance("quadratic", n, seed)
    assert check_nonnegative_exhaustive(q) >= -1e-12
    # vertex restriction of a zero-diagonal non-positive quadratic is submodular
    assert check_submodular_exhaustive(q) >= -1e-9


# -- JSON --------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["cut", "coverage", "quadratic"])
def test_json_roundtrip(tmp_path, kind):
    inst = generate_random_instance(kind, 5, 7)
    p = tmp_path / "i.json"
    dump_instance(inst, p)
    back, box = load_instance(p)
    assert box is None
    assert back.to_json_dict() == inst.to_json_dict()
    table = all_subsets_matrix(5)
    assert np.abs(back.evaluate_batch(table) - inst.evaluate_batch(table)).max() < 1e-12


def test_json_roundtrip_with_box(tmp_path):
    inst = generate_random_instance("quadratic", 3, 1)
    p = tmp_path / "b.json"
    dump_instance(inst, p, box=(np.zeros(3), np.full(3, 2.0)))
    back, box = load_instance(p)
    lower, upper = box
    assert list(lower) == [0.0] * 3 and list(upper) == [2.0] * 3


def test_boxed_quadratic_json_skips_unit_cube_validation(write_instance):
    # negative on a unit-cube vertex, but declared over a box: loads fine
    d = {"kind": "quadratic", "n": 2, "c": 0.0, "h": [0.2, 0.2],
         "H": [[0.0, -1.0], [-1.0, 0.0]], "lower": [0.0, 0.0], "upper": [0.5, 0.5]}
    inst, box = load_instance(write_instance(d))
    assert box is not None
    assert inst.value([0.25, 0.25]) > 0


def test_json_unknown_kind():
    with pytest.raises(ValueError):
        instance_from_json_dict({"kind": "mystery", "n": 2})
