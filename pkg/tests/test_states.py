import json
import math

import numpy as np
import pytest

from tritangle import (
    CBasis,
    DimensionError,
    InvalidBasis,
    InvalidState,
    amp_index,
    apply_c_basis,
    build_m,
    canonical_state,
    make_state,
    random_c_basis,
    random_pure,
    reduced_ab,
    slice_phi,
    state_from_json,
    state_to_json,
    two_copy,
)
from tritangle.errors import DomainError

from oracles import partial_trace_c


def test_make_state_ghz_already_normalized():
    amp = np.zeros(8)
    amp[0] = amp[7] = 1 / math.sqrt(2)
    s = make_state(amp, 2)
    assert not s.renormalized
    assert np.isclose(np.linalg.norm(s.amp), 1.0, atol=1e-12)


def test_make_state_renormalizes_with_warning():
    amp = np.zeros(8)
    amp[0] = 2.0
    s = make_state(amp, 2)
    assert s.renormalized
    assert np.isclose(s.amp[0], 1.0)
    assert np.allclose(s.amp[1:], 0.0)


def test_make_state_rejects_zero_vector():
    with pytest.raises(InvalidState):
        make_state(np.zeros(12), 3)


def test_make_state_rejects_wrong_length():
    with pytest.raises(DimensionError):
        make_state(np.ones(7), 2)


def test_canonical_ghz_amplitudes():
    s = canonical_state("ghz")
    assert np.isclose(s.amp[0], 1 / math.sqrt(2))
    assert np.isclose(s.amp[7], 1 / math.sqrt(2))
    assert np.allclose(np.delete(s.amp, [0, 7]), 0.0)


def test_canonical_w_amplitudes():
    s = canonical_state("w")
    idx = [amp_index(0, 0, 1, 2), amp_index(0, 1, 0, 2), amp_index(1, 0, 0, 2)]
    assert np.allclose(s.amp[idx], 1 / math.sqrt(3))


def test_generalized_ghz_at_quarter_pi_is_ghz():
    assert np.allclose(
        canonical_state("gghz", theta=math.pi / 4).amp, canonical_state("ghz").amp
    )


def test_generalized_ghz_rejects_bad_angle():
    with pytest.raises(DomainError):
        canonical_state("gghz", theta=2.0)
    with pytest.raises(DomainError):
        canonical_state("gghz")


def test_random_pure_deterministic():
    a = random_pure(2, seed=7)
    b = random_pure(2, seed=7)
    assert np.array_equal(a.amp, b.amp)


def test_random_pure_normalized():
    s = random_pure(5, seed=1)
    assert abs(np.linalg.norm(s.amp) - 1.0) < 1e-12


def test_random_pure_haar_first_moment():
    # Haar: E|amp_0|^2 = 1/(4n); check the sample mean over 1000 seeds
    vals = np.array([abs(random_pure(2, seed).amp[0]) ** 2 for seed in range(1, 1001)])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - 1 / 8) < 3 * se


@pytest.mark.parametrize(
    "name,k,expected",
    [
        ("ghz", 0, [1 / math.sqrt(2), 0, 0, 0]),
        ("ghz", 1, [0, 0, 0, 1 / math.sqrt(2)]),
        ("w", 1, [1 / math.sqrt(3), 0, 0, 0]),
    ],
)
def test_slice_phi_read_off(name, k, expected):
    assert np.allclose(slice_phi(canonical_state(name), k).v, expected)


def test_slice_phi_out_of_range():
    with pytest.raises(DimensionError):
        slice_phi(canonical_state("ghz"), 2)


def test_reduced_ab_ghz():
    rho = reduced_ab(canonical_state("ghz")).m
    assert np.allclose(rho, np.diag([0.5, 0, 0, 0.5]), atol=1e-12)


def test_reduced_ab_product_is_rank_one():
    rho = reduced_ab(canonical_state("product")).m
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.allclose(rho, expected, atol=1e-12)


def test_reduced_ab_matches_dense_partial_trace():
    s = random_pure(3, seed=5)
    rho = reduced_ab(s)
    assert np.allclose(rho.m, partial_trace_c(s.amp, 3), atol=1e-12)
    assert abs(np.trace(rho.m) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(rho.m).min() > -1e-12


def test_apply_c_basis_identity_noop():
    s = random_pure(4, seed=3)
    out = apply_c_basis(s, CBasis(q=np.eye(4, dtype=complex)))
    assert np.allclose(out.amp, s.amp, atol=1e-14)


def test_apply_c_basis_transform_law():
    # contract: build_m(apply_c_basis(s, Q)) == Q^T M Q
    s = random_pure(5, seed=11)
    b = random_c_basis(5, seed=4)
    m = build_m(s).m
    mt = build_m(apply_c_basis(s, b)).m
    assert np.abs(mt - b.q.T @ m @ b.q).max() < 1e-12


def test_apply_c_basis_preserves_reduced_state():
    s = random_pure(3, seed=9)
    b = random_c_basis(3, seed=2)
    assert np.abs(reduced_ab(apply_c_basis(s, b)).m - reduced_ab(s).m).max() < 1e-12


def test_apply_c_basis_hadamard_diagonalizes_ghz():
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    mt = build_m(apply_c_basis(canonical_state("ghz"), CBasis(q=h))).m
    assert abs(mt[0, 1]) < 1e-12
    assert np.allclose(np.abs(np.diag(mt)), [0.5, 0.5], atol=1e-12)


def test_non_unitary_basis_rejected():
    with pytest.raises(InvalidBasis):
        CBasis(q=np.array([[1.0, 0.5], [0.0, 1.0]], dtype=complex))


def test_two_copy_product_is_unit_basis_vector():
    p = canonical_state("product")
    out = two_copy(p, p)
    assert out.n == 16
    assert np.isclose(out.amp[0], 1.0)
    assert np.allclose(out.amp[1:], 0.0)


def test_two_copy_norm_and_dim():
    s = random_pure(3, seed=8)
    out = two_copy(s, s)
    assert out.amp.size == 16 * 9
    assert abs(np.linalg.norm(out.amp) - 1.0) < 1e-12


def test_two_copy_mismatched_n():
    with pytest.raises(DimensionError):
        two_copy(random_pure(2, 0), random_pure(3, 0))


def test_json_round_trip():
    s = random_pure(3, seed=17)
    again = state_from_json(state_to_json(s))
    assert again.n == 3
    assert np.allclose(again.amp, s.amp, atol=1e-15)


def test_json_rejects_wrong_length():
    text = json.dumps({"n": 2, "amplitudes": [[1.0, 0.0]] * 7})
    with pytest.raises(DimensionError):
        state_from_json(text)


def test_json_rejects_non_finite():
    text = json.dumps({"n": 1, "amplitudes": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1e400, 0.0]]})
    # json turns 1e400 into Infinity on some encoders; build the string manually
    text = text.replace("1e+400", "Infinity").replace("1e400", "Infinity")
    with pytest.raises(InvalidState):
        state_from_json(text)


def test_json_rejects_malformed():
    with pytest.raises(InvalidState):
        state_from_json("{not json")
    with pytest.raises(InvalidState):
        state_from_json(json.dumps({"n": 2}))
    with pytest.raises(InvalidState):
        state_from_json(json.dumps({"n": 0, "amplitudes": []}))
