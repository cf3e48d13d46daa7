import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cayley_qmc.algebra import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DiagOp,
    PauliOp,
    ProductObservable,
    diagonal_part,
    format_observable,
    normalized_trace,
    parse_observable,
    product_diagonal_part,
)
from cayley_qmc.errors import ParamError, SupportError
from cayley_qmc.tree import VertexCoord

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
pauli = st.builds(PauliOp, cplx, cplx, cplx, cplx)


def V(*path):
    return VertexCoord(tuple(path))


@pytest.mark.parametrize(
    "a, expected",
    [
        (SIGMA_X, DiagOp(0, 0)),
        (PauliOp(2, 5, 0, 3), DiagOp(5, -1)),
        (IDENTITY, DiagOp(1, 1)),
    ],
)
def test_diagonal_part_examples(a, expected):
    assert diagonal_part(a) == expected


@pytest.mark.parametrize("d, tr", [(DiagOp(1, -1), 0), (DiagOp(1, 1), 1), (DiagOp(3, 1), 2)])
def test_normalized_trace_examples(d, tr):
    assert normalized_trace(d) == tr


def test_pauli_matrices():
    for op, m in [(SIGMA_X, [[0, 1], [1, 0]]), (SIGMA_Y, [[0, -1j], [1j, 0]]), (SIGMA_Z, [[1, 0], [0, -1]])]:
        np.testing.assert_array_equal(op.matrix(), np.array(m))
    assert PauliOp.from_label("z") == SIGMA_Z
    with pytest.raises(ParamError):
        PauliOp.from_label("Q")


@given(pauli)
def test_matrix_round_trip(a):
    b = PauliOp.from_matrix(a.matrix())
    np.testing.assert_allclose(b.coeffs, a.coeffs, rtol=1e-12, atol=1e-12)


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False), min_size=4, max_size=4))
def test_decomposition_reconstructs_matrix(entries):
    m = np.array(entries, dtype=complex).reshape(2, 2)
    np.testing.assert_allclose(PauliOp.from_matrix(m).matrix(), m, atol=1e-9)


@given(pauli)
def test_diagonal_part_is_idempotent_and_trace_preserving(a):
    d = diagonal_part(a)
    dd = diagonal_part(d.to_pauli())
    assert dd.dp == pytest.approx(d.dp, rel=1e-12, abs=1e-12)
    assert dd.dm == pytest.approx(d.dm, rel=1e-12, abs=1e-12)
    assert normalized_trace(d) == pytest.approx(normalized_trace(a), abs=1e-9)


@given(pauli, pauli, finite)
def test_diagonal_part_linear(a, b, c):
    lhs = diagonal_part(a + c * b)
    rhs_p = diagonal_part(a).dp + c * diagonal_part(b).dp
    rhs_m = diagonal_part(a).dm + c * diagonal_part(b).dm
    assert lhs.dp == pytest.approx(rhs_p, rel=1e-9, abs=1e-6)
    assert lhs.dm == pytest.approx(rhs_m, rel=1e-9, abs=1e-6)


@given(st.tuples(finite, finite), st.tuples(finite, finite))
def test_diag_multiplication_componentwise(x, y):
    a, b = DiagOp(*x), DiagOp(*y)
    assert a * b == b * a == DiagOp(x[0] * y[0], x[1] * y[1])
    np.testing.assert_allclose((a * b).matrix(), a.matrix() @ b.matrix())


def test_diag_conversions():
    d = DiagOp.from_pauli(0.5, 0.25)
    assert (d.dp, d.dm) == (0.75, 0.25)
    assert (d.a0, d.a3) == (0.5, 0.25)
    assert d.is_positive and not DiagOp(1, 0).is_positive
    assert DiagOp(4, 9).sqrt() == DiagOp(2, 3)
    with pytest.raises(ParamError):
        DiagOp(-1, 1).sqrt()


@settings(max_examples=50)
@given(st.lists(pauli, min_size=1, max_size=3))
def test_product_trace_factorizes(ops):
    sites = [V(1), V(2), V(1, 1)][: len(ops)]
    a = ProductObservable(dict(zip(sites, ops)))
    dim = 2 ** len(sites)
    assert a.trace() == pytest.approx(np.trace(a.matrix(sites)) / dim, rel=1e-9, abs=1e-6)


def test_product_diagonal_part_examples():
    x, y = V(1), V(2)
    assert product_diagonal_part(ProductObservable({x: SIGMA_Z})).sites == {x: SIGMA_Z}
    red = product_diagonal_part(ProductObservable({x: SIGMA_X, y: SIGMA_Z}))
    assert red.sites[x] == PauliOp() and red.sites[y] == SIGMA_Z
    assert product_diagonal_part(ProductObservable({})).sites == {}


def test_observable_text_form():
    a = parse_observable("1.1:Z,2:I", volume=2)
    assert a.sites == {V(1, 1): SIGMA_Z, V(2): IDENTITY}
    assert a.volume == 2
    assert format_observable(a) == "1.1:Z,2:I"
    assert parse_observable("").sites == {}
    for bad in ("1.1", "1.1:Q", "1:Z,1:X"):
        with pytest.raises(ParamError):
            parse_observable(bad)
    with pytest.raises(SupportError):
        parse_observable("1.1.1:Z", volume=2)


def test_product_matrix_ordering():
    sites = [V(1), V(2)]
    a = ProductObservable({V(1): SIGMA_Z, V(2): SIGMA_X})
    np.testing.assert_array_equal(a.matrix(sites), np.kron(SIGMA_Z.matrix(), SIGMA_X.matrix()))
    labels = list(itertools.product("IXYZ", repeat=2))
    assert len({str(parse_observable(f"1:{p},2:{q}")) for p, q in labels}) == 16
