import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kickedrotor.params import (
    DistributionRecord,
    EnergyRecord,
    ParameterError,
    QuantumState,
    RotorParams,
    Variant,
    index_of,
    m_grid,
    validate,
)

finite_k = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)
finite_tau = st.floats(min_value=1e-300, max_value=1e6, allow_nan=False, allow_infinity=False)
periods = st.one_of(st.none(), st.integers(min_value=1, max_value=10**6))


@st.composite
def rotor_params(draw):
    M = draw(periods)
    variant = Variant.PLAIN_KR if M is None else draw(st.sampled_from(list(Variant)))
    return validate(RotorParams(draw(finite_k), draw(finite_tau), M, variant))


def test_fig1_parameters_are_valid():
    p = validate(RotorParams(4.0, 2.0, 50, Variant.MKR_SIGN_FLIP))
    assert p.kappa == 8.0


def test_kick_free_limit_is_valid():
    p = validate(RotorParams(0.0, 1.0, 1))
    assert p.kappa == 0.0


@pytest.mark.parametrize("kw, msg", [
    (dict(k=5.0, tau=-1.0, M=2), "tau must be positive"),
    (dict(k=5.0, tau=0.0, M=2), "tau must be positive"),
    (dict(k=-1.0, tau=1.0), "k must be non-negative"),
    (dict(k=1.0, tau=1.0, M=0), "M must be >= 1"),
    (dict(k=1.0, tau=1.0, M=2.5), "integer"),
    (dict(k=float("nan"), tau=1.0), "finite"),
    (dict(k=1.0, tau=1.0, variant=Variant.MKR_D_OPERATOR), "finite sign-flip period"),
    (dict(k=1.0, tau=1.0, M=2, variant="BOGUS"), "unknown variant"),
])
def test_validation_errors(kw, msg):
    with pytest.raises(ParameterError, match=msg):
        validate(RotorParams(**kw))


def test_from_kappa_uses_unit_tau():
    p = RotorParams.from_kappa(5.0, 2, Variant.MKR_SIGN_FLIP)
    assert (p.k, p.tau, p.kappa) == (5.0, 1.0, 5.0)


@given(rotor_params())
def test_validate_is_idempotent(p):
    assert validate(validate(p)) == validate(p)


@given(rotor_params())
def test_json_round_trip_is_bit_exact(p):
    q = RotorParams.from_json(p.to_json())
    assert q == p
    assert np.float64(q.k).tobytes() == np.float64(p.k).tobytes()
    assert np.float64(q.tau).tobytes() == np.float64(p.tau).tobytes()


@given(rotor_params())
def test_keyvalue_round_trip_is_bit_exact(p):
    assert RotorParams.from_keyvalue(p.to_keyvalue()) == p


def test_kappa_is_derived_not_read():
    d = RotorParams(4.0, 2.0).to_dict()
    assert d["kappa"] == 8.0
    d["kappa"] = 123.0
    assert RotorParams.from_dict(d).kappa == 8.0


def test_infinite_period_serializes_as_inf():
    p = RotorParams(4.0, 2.0)
    assert json.loads(p.to_json())["M"] == "inf"
    assert "M=inf" in p.to_keyvalue()


def test_grid_helpers():
    m = m_grid(4)
    assert m.tolist() == [-4, -3, -2, -1, 0, 1, 2, 3]
    assert index_of(0, 4) == 4
    assert index_of(-4, 4) == 0
    with pytest.raises(IndexError):
        index_of(4, 4)


def test_quantum_state_is_immutable():
    s = QuantumState.basis(2, 8)
    assert s.amplitudes[index_of(2, 8)] == 1.0
    assert s.norm() == 1.0
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0
    with pytest.raises(ValueError):
        QuantumState(np.zeros(5), 8)


def test_from_coefficients_normalizes():
    s = QuantumState.from_coefficients({1: 1.0, -1: 1.0}, 8)
    assert s.norm() == pytest.approx(1.0, abs=1e-15)


def test_record_invariants():
    with pytest.raises(ValueError):
        DistributionRecord(np.array([0.5, -0.1, 0.6, 0.0]), 0)
    with pytest.raises(ValueError):
        EnergyRecord(3, -1.0)
    rec = DistributionRecord(np.array([0.0, 1.0]), 7)
    assert rec.m_max == 1 and rec.m.tolist() == [-1, 0]
