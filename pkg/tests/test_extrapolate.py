"""Unit tests for sequences, the Neville recursion, barycentric tableaus, and the work model."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parex.extrapolate import (
    SubdividingSequence,
    aitken_neville,
    barycentric_extrapolate,
    build_barycentric_tableau,
    neville_table,
    sequence_values,
    stage_count,
)


def test_sequence_values_frozen():
    assert sequence_values(SubdividingSequence("harmonic"), 6) == [1, 2, 3, 4, 5, 6]
    assert sequence_values(SubdividingSequence("romberg"), 5) == [1, 2, 4, 8, 16]
    assert sequence_values(SubdividingSequence("bulirsch"), 8) == [1, 2, 3, 4, 6, 8, 12, 16]
    assert sequence_values(SubdividingSequence("harmonic", 4), 3) == [4, 8, 12]


def test_sequence_errors():
    with pytest.raises(ValueError):
        sequence_values(SubdividingSequence("harmonic"), 0)
    with pytest.raises(ValueError):
        sequence_values(SubdividingSequence("fib"), 3)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["harmonic", "romberg", "bulirsch"]), st.integers(1, 4), st.integers(2, 20))
def test_sequences_strictly_increasing(kind, multiple, count):
    vals = sequence_values(SubdividingSequence(kind, multiple), count)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v % multiple == 0 for v in vals)


def test_neville_two_row_identities():
    # with nodes n = (1, 2): power 1 gives T22 = 2 T21 - T11,
    # power 2 gives T22 = T21 + (T21 - T11) / 3
    t11, t21 = 1.0, 1.6
    t_kk, t_sub = aitken_neville([np.array([t11]), np.array([t21])], [1, 2], power=1)
    assert t_kk[0] == pytest.approx(2 * t21 - t11, rel=1e-15)
    assert t_sub[0] == t21
    t_kk, _ = aitken_neville([np.array([t11]), np.array([t21])], [1, 2], power=2)
    assert t_kk[0] == pytest.approx(t21 + (t21 - t11) / 3.0, rel=1e-15)


def test_neville_single_row():
    t_kk, t_sub = aitken_neville([np.array([2.5])], [1], power=2)
    assert t_kk[0] == t_sub[0] == 2.5


def test_neville_table_shape():
    table = neville_table([np.array([float(i)]) for i in range(4)], [1, 2, 3, 4], power=1)
    assert [len(row) for row in table] == [1, 2, 3, 4]


def test_barycentric_coefficients_frozen():
    # power 2, harmonic nodes x = (1, 1/4): c = (-1/3, 4/3)
    tab = build_barycentric_tableau(SubdividingSequence("harmonic"), power=2, n_max=2)
    np.testing.assert_allclose(tab.coefficients[1], [-1.0 / 3.0, 4.0 / 3.0], rtol=1e-14)
    # power 1: c = (-1, 2), the classical Richardson pair
    tab = build_barycentric_tableau(SubdividingSequence("harmonic"), power=1, n_max=2)
    np.testing.assert_allclose(tab.coefficients[1], [-1.0, 2.0], rtol=1e-14)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(["harmonic", "romberg", "bulirsch"]),
    st.sampled_from([1, 2, 4]),
    st.sampled_from([1, 2]),
    st.integers(1, 10),
)
def test_barycentric_rows_sum_to_one(kind, multiple, power, k):
    tab = build_barycentric_tableau(SubdividingSequence(kind, multiple), power, n_max=10)
    assert np.sum(tab.coefficients[k - 1]) == pytest.approx(1.0, abs=1e-11)
    # equivalent statement: constant data extrapolates to the constant
    const = barycentric_extrapolate(tab, k, np.full((k, 2), 3.25))
    np.testing.assert_allclose(const, 3.25, atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8), st.sampled_from([1, 2]))
def test_barycentric_matches_neville(seed, k, power):
    seq = SubdividingSequence("harmonic")
    n_values = sequence_values(seq, k)
    column = list(np.random.default_rng(seed).normal(size=(k, 3)))
    tab = build_barycentric_tableau(seq, power, n_max=k)
    bary = barycentric_extrapolate(tab, k, column)
    nev, _ = aitken_neville(column, n_values, power)
    np.testing.assert_allclose(bary, nev, rtol=1e-11, atol=1e-11)


def test_barycentric_range_checks():
    tab = build_barycentric_tableau(SubdividingSequence("harmonic"), 2, n_max=3)
    with pytest.raises(ValueError):
        barycentric_extrapolate(tab, 4, np.ones((4, 1)))
    with pytest.raises(ValueError):
        barycentric_extrapolate(tab, 3, np.ones((2, 1)))


def test_stage_count_frozen():
    harmonic = sequence_values(SubdividingSequence("harmonic"), 4)
    # explicit budgets rows 1..k+1 at n_j + 1 each: (1+1)+(2+1)+(3+1)+(4+1)
    assert stage_count("explicit", harmonic, 3) == 14.0
    doubled = sequence_values(SubdividingSequence("harmonic", 2), 4)
    assert stage_count("explicit", doubled, 3) == 24.0
    # implicit budgets rows 1..k at 2 n_j + 1 each plus the Jacobian:
    # (2+1)+(4+1)+(6+1) + 1 = 16
    assert stage_count("implicit", harmonic, 3) == 16.0
    assert stage_count("implicit", harmonic, 3, jac_cost=4.0) == 19.0


def test_stage_count_errors():
    with pytest.raises(ValueError):
        stage_count("explicit", [1, 2, 3], 3)  # needs k + 1 values
    with pytest.raises(ValueError):
        stage_count("implicit", [1, 2], 3)
    with pytest.raises(ValueError):
        stage_count("rosenbrock", [1, 2, 3], 2)
