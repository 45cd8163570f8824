import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symgauge import grid as g
from symgauge.errors import ConstraintViolationError, GridMismatchError, InvalidFieldError, UnsolvableOnTorusError
from symgauge.grid import Grid, ScalarField, VectorField

BACKENDS = ["spectral", "central2"]


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((3, 8, 8), (1, 1, 1))
    with pytest.raises(ValueError):
        Grid((9, 8, 8), (1, 1, 1), "spectral")
    with pytest.raises(ValueError):
        Grid((8, 8), (1, -1))
    with pytest.raises(ValueError):
        Grid((8, 8), (1, 1), "fourier")
    Grid((9, 8, 8), (1, 1, 1), "central2")


def test_field_validation_and_arithmetic():
    gr = Grid.cube(8)
    with pytest.raises(InvalidFieldError):
        ScalarField(gr, np.zeros((8, 8)))
    with pytest.raises(InvalidFieldError):
        ScalarField(gr, np.full(gr.shape, np.nan))
    a = gr.scalar(lambda x, y, z: np.sin(x))
    b = gr.scalar(lambda x, y, z: np.cos(y))
    np.testing.assert_allclose((a + b - b).data, a.data, atol=1e-15)
    np.testing.assert_allclose((2 * a).data, 2 * a.data)
    with pytest.raises(GridMismatchError):
        a + ScalarField(Grid.cube(8, length=1.0), np.zeros(gr.shape))


@pytest.mark.parametrize("backend", BACKENDS)
def test_derivatives_match_analytic_symbols(backend):
    # oracle: d/dx sin(kx) = k_eff cos(kx), with k_eff = k (spectral) or sin(kh)/h (central)
    gr = Grid((16, 12, 8), (2 * np.pi, 3.0, 5.0), backend)
    x, y, z = gr.coords()
    k = 2 * np.pi * np.array([3, 2, 1]) / np.array(gr.lengths)
    h = np.array(gr.spacing)
    keff = k if backend == "spectral" else np.sin(k * h) / h
    f = gr.scalar(lambda x, y, z: np.sin(k[0] * x) * np.cos(k[1] * y) * np.sin(k[2] * z))
    expect = np.stack([
        keff[0] * np.cos(k[0] * x) * np.cos(k[1] * y) * np.sin(k[2] * z),
        -keff[1] * np.sin(k[0] * x) * np.sin(k[1] * y) * np.sin(k[2] * z),
        keff[2] * np.sin(k[0] * x) * np.cos(k[1] * y) * np.cos(k[2] * z),
    ])
    np.testing.assert_allclose(g.grad(f).data, expect, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_identities_to_roundoff(backend):
    gr = Grid.cube(16, backend=backend)
    rng = np.random.default_rng(1)
    v = g.random_vector(gr, rng, kmax=7)
    w = g.random_scalar(gr, rng, kmax=7)
    assert g.div(g.curl(v)).norm_inf() < 1e-12
    assert g.curl(g.grad(w)).norm_inf() < 1e-12
    cc = g.curl_curl(v).data
    np.testing.assert_allclose(cc, g.grad(g.div(v)).data - g.laplacian(v).data, atol=1e-11)
    np.testing.assert_allclose(g.laplacian(w).data, g.div(g.grad(w)).data, atol=1e-11)


@pytest.mark.parametrize("backend", BACKENDS)
def test_inverse_operators(backend):
    gr = Grid.cube(16, backend=backend)
    rng = np.random.default_rng(2)
    w = g.random_scalar(gr, rng, kmax=6)
    u = g.inv_laplacian(w)
    np.testing.assert_allclose(g.laplacian(u).data, w.data, atol=1e-12)
    assert abs(u.mean()) < 1e-14
    b = g.curl(g.random_vector(gr, rng, kmax=6))
    S = g.inv_curl(b)
    np.testing.assert_allclose(g.curl(S).data, b.data, atol=1e-12)
    assert g.div(S).norm_inf() < 1e-12


def test_inverse_operator_errors():
    gr = Grid.cube(8)
    with pytest.raises(UnsolvableOnTorusError) as info:
        g.inv_laplacian(gr.scalar(lambda x, y, z: 1.0 + np.sin(x)))
    assert info.value.mean == pytest.approx(1.0)
    with pytest.raises(ConstraintViolationError):
        g.inv_curl(gr.vector(lambda x, y, z: (np.sin(x), 0 * x, 0 * x)))
    with pytest.raises(UnsolvableOnTorusError):
        g.inv_curl(gr.vector(lambda x, y, z: (1 + 0 * x, 0 * x, 0 * x)))


def test_inner_and_norms():
    gr = Grid.cube(16, length=2.0)
    f = gr.scalar(lambda x, y, z: np.sin(np.pi * x))
    # integral of sin^2 over the box = volume / 2
    assert g.inner(f, f) == pytest.approx(gr.volume / 2, rel=1e-12)
    assert f.norm_l2() == pytest.approx(np.sqrt(gr.volume / 2), rel=1e-12)


def test_low_dimensional_grid():
    gr = Grid((32,), (2 * np.pi,))
    f = gr.scalar(lambda x: np.sin(2 * x))
    np.testing.assert_allclose(g.grad(f).data[0], 2 * np.cos(2 * gr.coords()[0]), atol=1e-12)
    np.testing.assert_allclose(g.grad(f).data[1:], 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.sampled_from(BACKENDS))
def test_operators_are_linear(seed, alpha, backend):
    gr = Grid.cube(8, backend=backend)
    rng = np.random.default_rng(seed)
    u, v = g.random_vector(gr, rng), g.random_vector(gr, rng)
    lhs = g.curl(u + alpha * v).data
    rhs = g.curl(u).data + alpha * g.curl(v).data
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
