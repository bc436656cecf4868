import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nboxsim.errors import MeasurementError, PointerBasisError, ZeroProbabilityOutcome
from nboxsim.hilbert import basis_state, complement_projector, max_abs, projector_from_span, rank_one_projector
from nboxsim.measurement import (
    DensityMatrix,
    ProjectiveMeasurement,
    UpdateSemantics,
    are_compatible,
    born_distribution,
    born_term,
    branch_weights,
    dephase,
    is_refinement,
    lueders_update,
    mixture_update,
    validate_measurement,
)
from nboxsim.nbox import (
    NBoxScenario,
    all_boxes_measurement,
    indistinguishable_measurement,
    open_box_measurement,
)

S2, S3 = NBoxScenario(2), NBoxScenario(3)
BOX_BASIS3 = np.eye(3)


def not_box(s, i):
    return open_box_measurement(s, i)[f"not-box-{i}"]


# -- born_distribution -----------------------------------------------------------


def test_all_boxes_uniform_on_initial():
    d = born_distribution(S2.initial, all_boxes_measurement(S2))
    assert d.probs == pytest.approx((1 / 3,) * 3, abs=1e-15)


def test_open_box_on_initial():
    d = born_distribution(S2.initial, open_box_measurement(S2, 1))
    assert d.labels == ("box-1", "not-box-1")
    assert d.probs == pytest.approx((1 / 3, 2 / 3), abs=1e-15)


def test_eigenstate_is_deterministic():
    d = born_distribution(basis_state(3, 1), open_box_measurement(S2, 1))
    assert d.probs == (1.0, 0.0)


def test_born_on_density_matches_pure():
    m = indistinguishable_measurement(S3, 2)
    pure = born_distribution(S3.final, m)
    mixed = born_distribution(DensityMatrix.from_state(S3.final), m)
    assert mixed.probs == pytest.approx(pure.probs, abs=1e-12)


def test_born_rejects_non_measurement():
    with pytest.raises(MeasurementError):
        born_distribution(S2.initial, [rank_one_projector(basis_state(3, 1))])


# -- lueders_update --------------------------------------------------------------


def test_lueders_not_box_n2():
    state, prob = lueders_update(S2.initial, not_box(S2, 1))
    np.testing.assert_allclose(state, np.array([0, 1, 1]) / math.sqrt(2), atol=1e-15)
    assert prob == pytest.approx(2 / 3, abs=1e-15)


def test_lueders_fixed_point():
    state, prob = lueders_update(basis_state(3, 1), rank_one_projector(basis_state(3, 1)))
    np.testing.assert_array_equal(state, basis_state(3, 1))
    assert prob == 1.0


def test_lueders_not_box_n3():
    state, prob = lueders_update(S3.initial, not_box(S3, 1))
    np.testing.assert_allclose(state, np.array([0, 1, 1, 1]) / math.sqrt(3), atol=1e-15)
    assert prob == pytest.approx(3 / 4, abs=1e-15)


def test_lueders_zero_probability():
    with pytest.raises(ZeroProbabilityOutcome):
        lueders_update(basis_state(3, 2), rank_one_projector(basis_state(3, 1)))


def test_lueders_phase_convention():
    psi = np.array([0, 1j, 1j, 0]) / math.sqrt(2)
    state, _ = lueders_update(psi, not_box(S3, 1))
    assert state[1].imag == 0 and state[1].real > 0


# -- mixture_update --------------------------------------------------------------


def test_mixture_not_box_n2():
    rho, prob = mixture_update(S2.initial, not_box(S2, 1), BOX_BASIS3)
    np.testing.assert_allclose(rho.matrix, np.diag([0, 0.5, 0.5]), atol=1e-15)
    assert prob == pytest.approx(2 / 3, abs=1e-15)


def test_mixture_single_branch():
    rho, prob = mixture_update(basis_state(3, 2), not_box(S2, 1), BOX_BASIS3)
    np.testing.assert_allclose(rho.matrix, np.diag([0, 1, 0]), atol=1e-15)
    assert prob == 1.0


def test_mixture_not_box_n3():
    rho, prob = mixture_update(S3.initial, not_box(S3, 1), np.eye(4))
    np.testing.assert_allclose(rho.matrix, np.diag([0, 1 / 3, 1 / 3, 1 / 3]), atol=1e-15)
    assert prob == pytest.approx(3 / 4, abs=1e-15)


def test_mixture_raw_branch_weights():
    subset, weights = branch_weights(S2.initial, not_box(S2, 1), BOX_BASIS3)
    assert subset.tolist() == [1, 2]
    assert weights == pytest.approx([1 / 3, 1 / 3], abs=1e-15)


def test_mixture_rejects_unaligned_range():
    u = indistinguishable_measurement(S2, 1)["uniform-rest"]
    with pytest.raises(PointerBasisError):
        mixture_update(S2.initial, u, BOX_BASIS3)


def test_mixture_zero_probability():
    with pytest.raises(ZeroProbabilityOutcome):
        mixture_update(basis_state(3, 1), not_box(S2, 1), BOX_BASIS3)


def test_mixture_accepts_rotated_pointer_basis():
    # pointer basis {e1, (e2+e3)/sqrt2, (e2-e3)/sqrt2}: uniform-rest is aligned with it
    b = np.array([[1, 0, 0], [0, 1, 1], [0, 1, -1]], dtype=float).T
    b[:, 1:] /= math.sqrt(2)
    rho, prob = mixture_update(S2.initial, indistinguishable_measurement(S2, 1)["uniform-rest"], b)
    assert prob == pytest.approx(2 / 3, abs=1e-15)
    np.testing.assert_allclose(rho.matrix, np.outer(b[:, 1], b[:, 1]), atol=1e-15)


def test_semantics_validation():
    with pytest.raises(PointerBasisError):
        UpdateSemantics("mixture")
    with pytest.raises(PointerBasisError):
        UpdateSemantics.mixture(np.ones((3, 3)))
    with pytest.raises(ValueError):
        UpdateSemantics("pure", np.eye(3))
    assert UpdateSemantics.computational("mixture", 3).pointer_basis.shape == (3, 3)


# -- invariants over random states -----------------------------------------------


def random_state(d):
    return arrays(
        np.complex128, d, elements=st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False)
    ).filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


def measurements_for(n):
    s = NBoxScenario(n)
    out = [all_boxes_measurement(s)]
    for i in range(1, n + 1):
        out += [open_box_measurement(s, i), indistinguishable_measurement(s, i)]
    return out


state_and_measurement = st.integers(2, 5).flatmap(
    lambda n: st.tuples(random_state(n + 1), st.sampled_from(measurements_for(n)))
)


@given(state_and_measurement)
def test_born_distribution_normalized(sm):
    psi, m = sm
    d = born_distribution(psi, m)
    assert abs(sum(d.probs) - 1) <= 1e-9
    assert all(p >= 0 for p in d.probs)


@given(state_and_measurement)
def test_lueders_probability_is_born_term_exactly(sm):
    psi, m = sm
    d = born_distribution(psi, m)
    for label, p in zip(m.labels, m.projectors):
        if d[label] < 1e-12:
            continue
        _, prob = lueders_update(psi, p)
        assert prob == d[label]


@given(state_and_measurement)
def test_pure_updates_recompose_dephased_density(sm):
    psi, m = sm
    total = np.zeros((m.dim, m.dim), dtype=complex)
    for p in m.projectors:
        if born_term(psi, p) < 1e-12:
            continue
        state, prob = lueders_update(psi, p)
        total += prob * np.outer(state, state.conj())
    assert max_abs(total - dephase(psi, m)) <= 1e-9


@given(st.integers(2, 5).flatmap(lambda n: st.tuples(random_state(n + 1), st.integers(1, n))))
def test_mixture_density_is_unit_trace_and_diagonal(case):
    psi, i = case
    s = NBoxScenario(psi.shape[0] - 1)
    p = not_box(s, i)
    if born_term(psi, p) < 1e-12:
        return
    rho, _ = mixture_update(psi, p, np.eye(s.dim))
    assert abs(np.trace(rho.matrix).real - 1) <= 1e-9
    assert max_abs(rho.matrix - np.diag(np.diag(rho.matrix))) <= 1e-12


@pytest.mark.parametrize("n", range(2, 9))
def test_lueders_on_initial_gives_residual_vector(n):
    s = NBoxScenario(n)
    for i in range(1, n + 1):
        state, _ = lueders_update(s.initial, not_box(s, i))
        expected = np.ones(s.dim)
        expected[i - 1] = 0
        np.testing.assert_allclose(state, expected / math.sqrt(n), rtol=0, atol=1e-12)


# -- refinement ------------------------------------------------------------------


def test_all_boxes_refines_open_box():
    r = is_refinement(open_box_measurement(S2, 1), all_boxes_measurement(S2))
    assert r
    assert r.partition == {"box-1": ("box-1",), "not-box-1": ("box-2", "box-3")}


def test_indistinguishable_refines_open_box():
    r = is_refinement(open_box_measurement(S2, 1), indistinguishable_measurement(S2, 1))
    assert r
    assert r.partition == {"box-1": ("box-1",), "not-box-1": ("uniform-rest", "remainder")}


def test_all_boxes_does_not_refine_indistinguishable():
    r = is_refinement(indistinguishable_measurement(S2, 1), all_boxes_measurement(S2))
    assert not r and r.partition is None


@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.sampled_from(measurements_for(n)),
                                                     st.sampled_from(measurements_for(n)))))
def test_mutual_refinement_means_same_family(pair):
    a, b = pair
    if is_refinement(a, b) and is_refinement(b, a):
        mats_a = sorted((p.matrix for p in a.projectors), key=lambda m: tuple(np.round(m.real, 9).ravel()))
        mats_b = sorted((p.matrix for p in b.projectors), key=lambda m: tuple(np.round(m.real, 9).ravel()))
        assert len(mats_a) == len(mats_b)
        for x, y in zip(mats_a, mats_b):
            assert max_abs(x - y) <= 1e-9


# -- compatibility ---------------------------------------------------------------


def test_open_box_pairs_compatible():
    assert are_compatible(open_box_measurement(S2, 1), open_box_measurement(S2, 2))


def test_all_boxes_vs_indistinguishable_incompatible():
    assert not are_compatible(all_boxes_measurement(S2), indistinguishable_measurement(S2, 1))


@pytest.mark.parametrize("m", measurements_for(3), ids=repr)
def test_compatible_with_itself(m):
    assert are_compatible(m, m)


# -- validate_measurement --------------------------------------------------------


def test_valid_family_has_tiny_defects():
    d = validate_measurement(all_boxes_measurement(S2))
    assert d.completeness <= 1e-12 and d.orthogonality <= 1e-12
    assert max(d.idempotence) <= 1e-12 and d.ok()


def test_duplicate_projector_defects():
    p1 = rank_one_projector(basis_state(3, 1))
    d = validate_measurement([p1, p1])
    assert d.orthogonality == pytest.approx(1)
    assert d.completeness >= 1
    assert not d.ok()


def test_incomplete_family_defect():
    d = validate_measurement([rank_one_projector(basis_state(3, 1))])
    assert d.completeness == pytest.approx(1)


def test_measurement_constructor_rejects_bad_families():
    p1 = rank_one_projector(basis_state(3, 1))
    with pytest.raises(MeasurementError):
        ProjectiveMeasurement([p1], ["a"])
    with pytest.raises(MeasurementError):
        ProjectiveMeasurement([p1, complement_projector(p1)], ["a", "a"])
    with pytest.raises(MeasurementError):
        ProjectiveMeasurement([p1, complement_projector(p1)], ["a"])


def test_custom_rotated_measurement():
    r = projector_from_span([np.array([1, 1, 0])])
    m = ProjectiveMeasurement([r, complement_projector(r)], ["r", "not-r"])
    assert not are_compatible(m, open_box_measurement(S2, 1))
