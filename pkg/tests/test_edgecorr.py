import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgraph.edgecorr import (
    Ideal,
    StructuredFamily,
    aperiodicity_report,
    build_edge_correspondence,
    classify_ideals,
    condition_s_certificate,
    family_phi,
    family_phi_direct,
    family_vector,
    from_level0,
    is_hereditary,
    is_minimal,
    is_non_returning,
    is_saturated,
    katsura_ideal,
    periodic_at,
    phi_compacts_check,
    predicted_dim,
    revalidate_witness,
    scan_saturated_hereditary,
)
from qgraph.errors import BudgetExceeded, NotFull, ZeroCorrespondence, ZeroVector
from qgraph.fock import brute_force_return
from qgraph.qadj import (
    QuantumGraph,
    classical_graph,
    complete_graph,
    epsilon_vector,
    range_ideal,
    trivial_graph,
)
from qgraph.qspace import QuantumSpace, adjoint_map

from conftest import BUILDERS, corr, graph, random_delta_form

ALL = sorted(BUILDERS)


def _random_vec(rng, r):
    return rng.normal(size=r) + 1j * rng.normal(size=r)


# -- construction -------------------------------------------------------------

def test_dim_trivial_equals_dim_b():
    for name in ("trivial_C3", "trivial_M2"):
        assert corr(name).dim == graph(name).space.dim


def test_dim_complete_equals_dim_b_squared():
    for name in ("complete_C2", "complete_M2", "complete_M2M2"):
        assert corr(name).dim == graph(name).space.dim ** 2


def test_dim_main_example_matches_spanning_rank():
    G = graph("main_1")
    sp = G.space
    eps = epsilon_vector(G)
    # independent oracle: rank of {e_i eps e_j} as plain vectors of C^3 (x) C^3
    span = [(sp.left_mul_matrix(sp.basis_vector(p)) @ eps @ sp.right_mul_matrix(sp.basis_vector(q)).T)
            .reshape(-1) for p in range(sp.dim) for q in range(sp.dim)]
    assert np.linalg.matrix_rank(np.array(span)) == 5
    assert corr("main_1").dim == 5


def test_zero_graph_has_no_correspondence():
    sp = QuantumSpace.tracial([1, 1])
    with pytest.raises(ZeroCorrespondence):
        build_edge_correspondence(QuantumGraph(sp, np.zeros((2, 2))))


@pytest.mark.parametrize("name", ALL)
def test_basis_is_orthonormal(name):
    E = corr(name)
    assert np.allclose(E.gram, np.eye(E.dim), atol=1e-10)


# -- inner product ------------------------------------------------------------

def test_epsilon_norm_complete_is_one():
    E = corr("complete_M2")
    assert np.allclose(E.inner_product(E.epsilon, E.epsilon), E.space.unit())


def test_main_example_epsilon_times_last_block_vanishes():
    E = corr("main_1")
    sp = E.space
    p3 = sp.central_projection(2)
    assert np.allclose(E.right_act(E.epsilon, p3), 0)
    assert np.allclose(E.formula_inner(sp.unit(), p3, sp.unit(), p3), 0)


@pytest.mark.parametrize("name", ["main_1", "complete_M2", "trivial_C3", "main_2"])
def test_module_inner_matches_formula_and_ambient(name, rng):
    E = corr(name)
    sp = E.space
    for _ in range(5):
        x1, y1, x2, y2 = (sp.random_element(rng) for _ in range(4))
        xi, eta = E.generator(x1, y1), E.generator(x2, y2)
        formula = E.formula_inner(x1, y1, x2, y2)
        assert np.allclose(E.inner_product(xi, eta), formula, atol=1e-9)
        assert np.allclose(E.ambient_inner_product(xi, eta), formula, atol=1e-9)


@pytest.mark.parametrize("name", ["main_1", "complete_C2", "trivial_C3"])
def test_inner_product_well_defined_on_null_combinations(name, rng):
    E = corr(name)
    sp = E.space
    D = sp.dim
    eps = epsilon_vector(E.graph)
    gens = [(sp.basis_vector(p), sp.basis_vector(q)) for p in range(D) for q in range(D)]
    amb = np.array([(sp.left_mul_matrix(x) @ eps @ sp.right_mul_matrix(y).T).reshape(-1)
                    for x, y in gens]).T
    _, s, vh = np.linalg.svd(amb)
    null = vh[int(np.sum(s > 1e-10 * s[0])):].conj().T
    formula = np.array([[E.formula_inner(x1, y1, x2, y2) for (x2, y2) in gens] for (x1, y1) in gens])
    for _ in range(100):
        c = null @ _random_vec(rng, null.shape[1])
        vals = np.einsum("k,klr->lr", np.conj(c), formula)
        assert np.max(np.abs(vals), initial=0.0) < 1e-9


@pytest.mark.parametrize("name", ["main_1", "complete_M2", "main_2"])
def test_inner_product_positive(name, rng):
    E = corr(name)
    sp = E.space
    for _ in range(5):
        xi = _random_vec(rng, E.dim)
        for blk in sp.to_blocks(E.inner_product(xi, xi)):
            assert np.allclose(blk, blk.conj().T)
            assert np.linalg.eigvalsh((blk + blk.conj().T) / 2).min() > -1e-10


@pytest.mark.parametrize("name", ["main_1", "complete_M2", "trivial_C3"])
def test_actions_and_module_axioms(name, rng):
    E = corr(name)
    sp = E.space
    xi, eta = _random_vec(rng, E.dim), _random_vec(rng, E.dim)
    x, y = sp.random_element(rng), sp.random_element(rng)
    assert np.allclose(E.left_act(sp.unit(), xi), xi)
    assert np.allclose(E.left_act(sp.product(x, y), xi), E.left_act(x, E.left_act(y, xi)))
    assert np.allclose(E.right_act(xi, sp.product(x, y)), E.right_act(E.right_act(xi, x), y))
    assert np.allclose(E.module.left_act(x, xi), E.left_act(x, xi))
    ip = E.inner_product
    assert np.allclose(ip(E.left_act(x, xi), eta), ip(xi, E.left_act(sp.star(x), eta)))
    assert np.allclose(ip(E.right_act(xi, y), eta), sp.product(sp.star(y), ip(xi, eta)))
    assert np.allclose(ip(xi, E.right_act(eta, y)), sp.product(ip(xi, eta), y))


@pytest.mark.parametrize("name", ALL)
def test_inner_product_ideal_is_range_ideal(name):
    assert corr(name).inner_ideal_blocks() == range_ideal(graph(name))


@pytest.mark.parametrize("name", ALL)
def test_left_kernel_is_complement_of_adjoint_range(name):
    G = graph(name)
    sp = G.space
    Astar = adjoint_map(sp, G.matrix)
    support = set()
    for p in range(sp.dim):
        support |= sp.block_support(Astar[:, p])
    assert corr(name).left_kernel_blocks() == set(range(sp.d)) - support


@pytest.mark.parametrize("name", ["trivial_C3", "complete_C2", "main_1", "main_2", "complete_M2"])
def test_phi_equals_sum_of_rank_ones(name):
    assert phi_compacts_check(corr(name)) < 1e-9


# -- tensor powers ------------------------------------------------------------

def test_tensor_dims_complete():
    E = corr("complete_C2")
    assert [E.powers.dim(k) for k in range(4)] == [2, 4, 8, 16]


def test_tensor_dims_trivial_stable():
    E = corr("trivial_C3")
    assert [E.powers.dim(k) for k in range(5)] == [3] * 5


@pytest.mark.parametrize("name", ["main_1", "main_2", "complete_M2", "trivial_M2", "classical_golden"])
def test_predicted_dims_match(name):
    E = corr(name)
    for n in range(1, 4):
        assert predicted_dim(E, n) == E.powers.dim(n)


def test_tensor_level_cap():
    E = corr("trivial_C3")
    with pytest.raises(BudgetExceeded):
        E.powers.level(E.powers.max_level + 1)


@pytest.mark.parametrize("name", ["main_1", "complete_C2", "main_2"])
def test_partial_inner_full_contraction_is_inner_product(name, rng):
    E = corr(name)
    P = E.powers
    for m in (1, 2, 3):
        xi = _random_vec(rng, P.dim(m))
        got = from_level0(E.space, E.partial_inner(m, xi, m, xi))
        assert np.allclose(got, P.level(m).inner(xi, xi), atol=1e-9)


@pytest.mark.parametrize("name", ["main_1", "complete_C2"])
def test_tensor_is_associative_and_balanced(name, rng):
    E = corr(name)
    P = E.powers
    sp = E.space
    a, b = _random_vec(rng, E.dim), _random_vec(rng, E.dim)
    z = _random_vec(rng, P.dim(1))
    left = P.tensor(2, P.tensor(1, a, 1, b), 1, z)
    right = P.tensor(1, a, 2, P.tensor(1, b, 1, z))
    assert np.allclose(left, right)
    x = sp.random_element(rng)
    assert np.allclose(P.tensor(1, E.right_act(a, x), 1, z), P.tensor(1, a, 1, E.left_act(x, z)))


@pytest.mark.parametrize("name", ["main_1", "complete_C2"])
def test_tensor_inner_recursion(name, rng):
    E = corr(name)
    P = E.powers
    a1, a2 = _random_vec(rng, E.dim), _random_vec(rng, E.dim)
    z1, z2 = _random_vec(rng, P.dim(1)), _random_vec(rng, P.dim(1))
    X2 = P.level(2)
    lhs = X2.inner(P.tensor(1, a1, 1, z1), P.tensor(1, a2, 1, z2))
    rhs = P.level(1).inner(z1, P.level(1).left_act(E.inner_product(a1, a2), z2))
    assert np.allclose(lhs, rhs)


# -- non-returning vectors and structured families ----------------------------

def test_sink_family_non_returning():
    E = corr("main_1")
    xi = family_vector(E, StructuredFamily.sink(2), 2)
    assert is_non_returning(E, xi, 2).value


def test_pair_family_non_returning():
    E = corr("main_1")
    xi = family_vector(E, StructuredFamily.pair(0, 1), 2)
    assert is_non_returning(E, xi, 2).value


def test_complete_epsilon_square_returns():
    E = corr("complete_C2")
    ee = E.powers.tensor(1, E.epsilon, 1, E.epsilon)
    assert not is_non_returning(E, ee, 2).value


def test_level_too_small_flag():
    E = corr("main_1")
    res = is_non_returning(E, E.epsilon, 1)
    assert res.value and "LevelTooSmall" in res.flags


def test_non_faithful_flag():
    G = classical_graph([[0, 0], [1, 1]])
    E = build_edge_correspondence(G)
    xi = E.powers.tensor(1, E.epsilon, 1, E.epsilon)
    assert "not_faithful_sufficient_only" in is_non_returning(E, xi, 2).flags


@pytest.mark.parametrize("name", ["main_1", "complete_C2"])
def test_non_returning_agrees_with_fock_refuter(name, rng):
    E = corr(name)
    sp = E.space
    fams = [StructuredFamily.pair(0, 1), StructuredFamily.pair(1, 0)]
    if name == "main_1":
        fams.append(StructuredFamily.sink(2))
    for k in range(20):
        m = 2 + k % 2
        if k < 10:
            xi = _random_vec(rng, E.powers.dim(m))
        else:
            fam = fams[k % len(fams)]
            try:
                base = family_vector(E, fam, m)
            except ValueError:
                continue
            xi = E.powers.level(m).right_act(base, sp.random_element(rng))
        res = is_non_returning(E, xi, m)
        brute = brute_force_return(E, xi, m)
        scale = float(np.vdot(xi, xi).real)
        assert res.value == (brute <= 1e-9 * scale)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("fam,src,dst", [((0, 1), 0, 1), ((1, 0), 1, 0), ((2, 0), 2, 0)])
def test_pair_family_phi_case_table(n, fam, src, dst, rng):
    E = corr(f"main_{n}")
    sp = E.space
    x = sp.random_element(rng)
    blocks = [np.zeros((n, n), dtype=complex) for _ in range(3)]
    blocks[dst] = sp.to_blocks(x)[src]
    for m in (1, 2, 5):
        phi = family_phi(E, StructuredFamily.pair(*fam), m)
        assert np.allclose(phi @ x, sp.from_blocks(blocks))
        assert sp.norm(phi @ sp.unit()) == pytest.approx(1.0)


@pytest.mark.parametrize("name", ["main_1", "main_2"])
def test_family_phi_matches_tensor_computation(name):
    E = corr(name)
    for fam in (StructuredFamily.pair(0, 1), StructuredFamily.pair(1, 0),
                StructuredFamily.pair(2, 0), StructuredFamily.sink(2)):
        for m in (1, 2, 3):
            assert np.allclose(family_phi(E, fam, m), family_phi_direct(E, fam, m), atol=1e-9)


def test_family_phi_zero_vector():
    E = corr("main_1")
    with pytest.raises(ZeroVector):
        family_phi(E, StructuredFamily.pair(0, 2), 2)


def test_family_validation():
    with pytest.raises(ValueError):
        StructuredFamily.pair(1, 1)
    with pytest.raises(ValueError):
        family_vector(corr("main_1"), StructuredFamily.sink(0), 2)


@pytest.mark.parametrize("name", ["main_1", "main_2"])
def test_condition_s_main_example(name):
    cert = condition_s_certificate(corr(name), m_max=8)
    assert cert.certified
    fams = {(e.family.kind, e.family.a, e.family.b) for e in cert.evidence}
    assert fams == {("pair", 0, 1), ("pair", 1, 0), ("pair", 2, 0)}
    images = {e.block: e.image_blocks for e in cert.evidence}
    assert images == {0: [1], 1: [0], 2: [0]}


def test_condition_s_trivial_not_certified():
    E = build_edge_correspondence(trivial_graph(QuantumSpace.tracial([1, 1])))
    assert not condition_s_certificate(E).certified


def test_condition_s_single_block_not_certified():
    assert not condition_s_certificate(corr("complete_M2")).certified


# -- ideals -------------------------------------------------------------------

def test_katsura_ideals():
    assert katsura_ideal(corr("main_1")) == Ideal.of(0, 1, 2)
    assert katsura_ideal(corr("complete_C2")) == Ideal.of(0, 1)
    G = classical_graph([[0, 0, 0], [1, 1, 1], [1, 1, 1]])
    assert katsura_ideal(build_edge_correspondence(G)) == Ideal.of(1, 2)


def test_minimality():
    assert is_minimal(corr("complete_C2")).minimal
    assert is_minimal(corr("complete_M2")).minimal
    res = is_minimal(corr("trivial_C3"))
    assert not res.minimal and len(res.witness.blocks) == 1
    with pytest.raises(NotFull):
        is_minimal(corr("main_1"))


@pytest.mark.parametrize("name", ["main_1", "main_2"])
def test_main_example_ideal_classification(name):
    E = corr(name)
    table = {c.ideal: (c.hereditary, c.saturated) for c in classify_ideals(E)}
    for I in (Ideal.of(0), Ideal.of(1), Ideal.of(2), Ideal.of(0, 2), Ideal.of(1, 2)):
        assert not table[I][0]
    assert table[Ideal.of(0, 1)] == (True, False)
    assert scan_saturated_hereditary(E) == []
    whole = Ideal.of(0, 1, 2)
    assert is_hereditary(E, whole) and is_saturated(E, whole)


# -- periodicity --------------------------------------------------------------

def test_trivial_periodic_at_one():
    E = corr("trivial_C3")
    rep = aperiodicity_report(E, 3)
    assert rep.label() == "PERIODIC_AT(1)"
    assert revalidate_witness(E, rep.witness)
    # the witness is epsilon rescaled to have inner product one
    w = rep.witness.witness
    assert np.allclose(E.inner_product(w, w), E.space.unit())
    assert abs(np.vdot(w, E.epsilon)) == pytest.approx(np.linalg.norm(w) * np.linalg.norm(E.epsilon))


def test_main_example_aperiodic_by_sink():
    rep = aperiodicity_report(corr("main_1"), 3)
    assert rep.status == "APERIODIC_CERTIFIED"
    assert "sink" in rep.reason


def test_complete_no_period_dimension_count():
    rep = aperiodicity_report(corr("complete_C2"), 3)
    assert rep.status == "NO_PERIOD_UP_TO_N"
    assert rep.reason == "dimension count"
    assert rep.dims == {0: 2, 1: 4, 2: 8, 3: 16}


def test_classical_cycle_is_periodic():
    E = build_edge_correspondence(classical_graph([[0, 1, 0], [0, 0, 1], [1, 0, 0]]))
    assert not periodic_at(E, 1) and not periodic_at(E, 2)
    chk = periodic_at(E, 3)
    assert chk and revalidate_witness(E, chk)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 1000))
def test_periodic_at_seed_independent(seed):
    E = corr("trivial_M2")
    assert periodic_at(E, 1, seed=seed).status == "PERIODIC"
