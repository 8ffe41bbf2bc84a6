import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgraph.errors import MultiBlock, NotCP, TraceConstraintViolated, ValidationError
from qgraph.qadj import (
    QuantumGraph,
    adjoint_graph,
    check_cp,
    check_schur_idempotent,
    choi_matrix,
    classical_graph,
    complete_graph,
    epsilon_vector,
    kraus_rank,
    main_example,
    quantum_sinks,
    quantum_sources,
    range_ideal,
    rank_one_graph,
    trivial_graph,
    validate_graph,
)
from qgraph.qspace import QuantumSpace

from conftest import graph, random_delta_form, rank_one_on


def _families():
    sp = random_delta_form(np.random.default_rng(0), [1, 2])
    main = main_example(2)
    return {
        "complete": complete_graph(sp),
        "trivial": trivial_graph(sp),
        "rank_one": rank_one_on([2, 1]),
        "classical": classical_graph([[0, 1, 1], [1, 0, 0], [1, 1, 1]]),
        "main_example": main,
        "matrix": QuantumGraph(main.space, np.array(main.matrix)),
    }


@pytest.mark.parametrize("kind", ["complete", "trivial", "rank_one", "classical", "main_example", "matrix"])
def test_builtin_families_validate(kind):
    G = _families()[kind]
    chk = check_schur_idempotent(G)
    assert chk.passed and chk.residual < 1e-9
    assert check_cp(G)
    assert validate_graph(G)["cp"]


def test_schur_check_returns_python_bool():
    assert type(check_schur_idempotent(graph("main_1")).passed) is bool


@settings(max_examples=20, deadline=None)
@given(sizes=st.lists(st.integers(1, 2), min_size=1, max_size=3), seed=st.integers(0, 9999))
def test_complete_graph_on_random_delta_forms(sizes, seed):
    G = complete_graph(random_delta_form(np.random.default_rng(seed), sizes))
    assert check_schur_idempotent(G)
    assert check_cp(G)


def _schur_product_oracle(M):
    # commutative case: quantum Schur idempotence is entrywise idempotence
    return bool(np.all(M * M == M))


def test_classical_iff_zero_one_on_random_matrices():
    rng = np.random.default_rng(2024)
    for trial in range(20):
        d = int(rng.integers(1, 6))
        M = rng.integers(0, 2, size=(d, d))
        if trial % 2:
            M[rng.integers(d), rng.integers(d)] = rng.choice([2, 3, -1])
        zero_one = bool(np.all(np.isin(M, (0, 1))))
        raw = QuantumGraph(QuantumSpace.tracial([1] * d), M.T.astype(complex))
        assert bool(check_schur_idempotent(raw)) == _schur_product_oracle(M) == zero_one
        if zero_one:
            G = classical_graph(M)
            assert check_schur_idempotent(G) and check_cp(G)
        else:
            with pytest.raises(ValidationError):
                classical_graph(M)


def test_classical_convention_rows_are_out_neighbours():
    G = classical_graph([[0, 1], [0, 0]])
    # A(e_1) = e_2: vertex 1 points at vertex 2
    assert np.allclose(G.apply([1, 0]), [0, 1])


def test_kraus_ranks():
    assert kraus_rank(complete_graph(QuantumSpace.tracial([2]))) == 4
    assert kraus_rank(complete_graph(QuantumSpace.tracial([3]))) == 9
    assert kraus_rank(trivial_graph(QuantumSpace.tracial([2]))) == 1
    assert kraus_rank(graph("rank_one_M2")) == 1


def test_kraus_rank_errors():
    with pytest.raises(MultiBlock):
        kraus_rank(graph("main_1"))
    sp = QuantumSpace.tracial([2])
    with pytest.raises(NotCP):
        kraus_rank(QuantumGraph(sp, -np.eye(4)))


def test_choi_of_identity_is_rank_one_projection_multiple():
    C = choi_matrix(trivial_graph(QuantumSpace.tracial([2])))
    assert np.linalg.matrix_rank(C) == 1
    assert np.allclose(C, C.conj().T)


def test_non_cp_map_fails_validation():
    sp = QuantumSpace.tracial([2])
    # transpose map is positive but not completely positive
    T = np.zeros((4, 4))
    for p, q in ((0, 0), (1, 2), (2, 1), (3, 3)):
        T[q, p] = 1.0
    assert not check_cp(QuantumGraph(sp, T))


def test_rank_one_trace_constraint():
    sp = QuantumSpace.tracial([2])
    with pytest.raises(TraceConstraintViolated):
        rank_one_graph(sp, [np.eye(2) * 3])
    # T = 1 satisfies the constraint for any delta-form and gives the identity
    G = rank_one_graph(sp, [np.eye(2)])
    assert np.allclose(G.matrix, np.eye(4))


def test_main_example_sources_sinks():
    G = main_example(1)
    assert quantum_sources(G) == set()
    assert quantum_sinks(G) == {2}
    assert range_ideal(G) == frozenset({0, 1})


def test_main_example_epsilon_n1():
    eps = epsilon_vector(main_example(1))
    # the classical edges of the main example: 1->1, 1->2, 2->1, 2->2, 3->1
    assert np.allclose(eps.real, [[1, 1, 0], [1, 1, 0], [1, 0, 0]])


def test_main_example_epsilon_matches_closed_form():
    n = 2
    G = main_example(n)
    sp = G.space
    expected = np.zeros((sp.dim, sp.dim))
    for i in range(n):
        for j in range(n):
            for a, b in ((0, 0), (1, 0), (2, 0), (0, 1), (1, 1)):
                expected[sp.blocks.index(a, i, j), sp.blocks.index(b, j, i)] += 1.0 / n
    assert np.allclose(epsilon_vector(G), expected)


def test_adjoint_graph_is_quantum_graph():
    G = adjoint_graph(main_example(1))
    assert check_schur_idempotent(G) and check_cp(G)
    assert quantum_sources(G) == {2}


def test_graph_shape_validation():
    sp = QuantumSpace.tracial([2])
    with pytest.raises(ValidationError):
        QuantumGraph(sp, np.eye(3))
    with pytest.raises(ValidationError):
        QuantumGraph(sp, np.full((4, 4), np.nan))
