import numpy as np
import pytest

from symgauge import grid as g
from symgauge import maxwell as mx
from symgauge.eb_reference import plane_wave_fields, plane_wave_state, relative_l2
from symgauge.errors import (
    ConstraintViolationError,
    FeatureNotEnabledError,
    GridMismatchError,
    StepSizeError,
    UnsolvableOnTorusError,
)
from symgauge.grid import Grid, ScalarField

BACKENDS = ["spectral", "central2"]


def random_state(grid, seed=0, kmax=3):
    rng = np.random.default_rng(seed)
    return mx.ExtendedState.consistent(g.random_vector(grid, rng, kmax), g.random_vector(grid, rng, kmax),
                                       g.random_scalar(grid, rng, kmax))


def directional(H, s, name, delta, eps=1e-6):
    plus = H(s.replace(**{name: getattr(s, name) + eps * delta}))
    minus = H(s.replace(**{name: getattr(s, name) - eps * delta}))
    return (plus - minus) / (2 * eps)


def test_step_size_limits():
    gr = Grid.cube(16)
    with pytest.raises(StepSizeError):
        mx.check_step(gr, 0.0)
    with pytest.raises(StepSizeError) as info:
        mx.check_step(gr, 2 * mx.stability_limit(gr))
    assert info.value.bound == pytest.approx(gr.h_min / np.pi)
    assert mx.stability_limit(gr.with_backend("central2")) == pytest.approx(gr.h_min / np.sqrt(3))


def test_inconsistent_state_rejected():
    gr = Grid.cube(8)
    s = random_state(gr)
    with pytest.raises(ConstraintViolationError):
        mx.ExtendedState(s.A, s.Y, gr.zeros_scalar(), s.W, lorentz_consistent=True)
    with pytest.raises(GridMismatchError):
        mx.ExtendedState(s.A, s.Y, Grid.cube(8, length=1.0).zeros_scalar(), s.W)


@pytest.mark.parametrize("backend", BACKENDS)
def test_rhs_is_hamiltonian_gradient(backend):
    # oracle: finite-difference variation of H against the canonical equations
    gr = Grid.cube(8, backend=backend)
    s = random_state(gr, 3)
    rhs = mx.rhs_extended(s)
    rng = np.random.default_rng(4)
    dv, ds = g.random_vector(gr, rng), g.random_scalar(gr, rng)
    H = mx.hamiltonian_extended
    assert directional(H, s, "Y", dv) == pytest.approx(g.inner(rhs.A, dv), rel=1e-7)
    assert directional(H, s, "A", dv) == pytest.approx(-g.inner(rhs.Y, dv), rel=1e-7)
    assert directional(H, s, "W", ds) == pytest.approx(g.inner(rhs.eta, ds), rel=1e-7, abs=1e-9)
    assert directional(H, s, "eta", ds) == pytest.approx(-g.inner(rhs.W, ds), rel=1e-7)


@pytest.mark.parametrize("backend", BACKENDS)
def test_lorentz_residual_conserved(backend):
    gr = Grid.cube(16, backend=backend)
    s = random_state(gr, 5)
    dt = 0.2 * gr.h_min
    final, hist = mx.evolve_extended(s, dt, 300, lorentz_every=1)
    assert hist.shape == (301, 2)
    assert np.max(hist[:, 1]) < 1e-11 * s.scale()
    assert mx.lorentz_residual(final).norm_inf() < 1e-11 * s.scale()


def test_evolve_matches_repeated_steps():
    gr = Grid.cube(8)
    s = random_state(gr, 6)
    dt = 0.1 * gr.h_min
    seen = []
    a, _ = mx.evolve_extended(s, dt, 20, observe=lambda n, st: seen.append(n), every=5)
    b = s
    for _ in range(20):
        b = mx.step_extended(b, dt)
    assert seen == [0, 5, 10, 15, 20]
    for x, y in zip(a.arrays(), b.arrays()):
        np.testing.assert_allclose(x, y, atol=1e-13)
    assert a.time == pytest.approx(20 * dt)


def test_time_reversal_by_momentum_flip():
    gr = Grid.cube(8)
    s = random_state(gr, 7)
    dt = 0.1 * gr.h_min
    fwd, _ = mx.evolve_extended(s, dt, 50)
    flipped = fwd.replace(Y=-fwd.Y, W=-fwd.W)
    back, _ = mx.evolve_extended(flipped, dt, 50)
    np.testing.assert_allclose(back.A.data, s.A.data, atol=1e-12)
    np.testing.assert_allclose(-back.Y.data, s.Y.data, atol=1e-12)
    np.testing.assert_allclose(back.eta.data, s.eta.data, atol=1e-12)


def test_gauge_invariance_of_fields():
    gr = Grid.cube(8)
    s = random_state(gr, 8)
    psi = g.random_scalar(gr, np.random.default_rng(9))
    t = mx.gauge_transform(s, psi)
    E1, B1 = mx.fields_from_extended(s)
    E2, B2 = mx.fields_from_extended(t)
    np.testing.assert_allclose(B1.data, B2.data, atol=1e-12)
    np.testing.assert_allclose(E1.data, E2.data)
    np.testing.assert_allclose(mx.momentum_map(s).data, mx.momentum_map(t).data)


def test_plane_wave_second_order_convergence():
    gr = Grid.cube(16)
    k, pol = [1, 1, 0], [0, 0, 1]
    _, s0 = plane_wave_state(gr, k, 1.0, pol)
    T = 2 * np.pi / np.linalg.norm(k)
    errs = []
    for nsteps in (100, 200):
        s, _ = mx.evolve_extended(s0, T / nsteps, nsteps)
        _, E, B = plane_wave_fields(gr, k, 1.0, pol, s.time)
        errs.append(relative_l2(mx.fields_from_extended(s), (E, B)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_source_checks():
    gr = Grid.cube(8)
    with pytest.raises(UnsolvableOnTorusError):
        mx.SourceSpec(gr, lambda t: np.ones(gr.shape), lambda t: np.zeros((3,) + gr.shape))
    x = gr.coords()[0]
    with pytest.raises(ConstraintViolationError):
        # rho changes in time, J = 0: continuity fails
        mx.SourceSpec(gr, lambda t: np.sin(x) * np.cos(t) + 0 * gr.zeros_scalar().data,
                      lambda t: np.zeros((3,) + gr.shape))
    src = mx.SourceSpec.oscillating_pair(Grid.cube(16))
    assert abs(src.rho_at(0.3).mean()) < 1e-14


def test_reduced_rhs_is_hamiltonian_gradient():
    gr = Grid.cube(8)
    rng = np.random.default_rng(10)
    src = mx.SourceSpec.static_charge(g.laplacian(g.random_scalar(gr, rng)))
    s = mx.reduced_state(src, B=g.curl(g.random_vector(gr, rng)), eta=g.random_scalar(gr, rng),
                         W=g.random_scalar(gr, rng))
    s = s.replace(S=g.inv_curl(s.B) + g.curl(g.random_vector(gr, rng)) * 0.1)
    rhs = mx.rhs_reduced(s)
    dv, ds = g.curl(g.random_vector(gr, rng)), g.random_scalar(gr, rng)
    H = mx.hamiltonian_reduced
    assert directional(H, s, "B", dv) == pytest.approx(g.inner(rhs.S, dv), rel=1e-7)
    assert directional(H, s, "S", dv) == pytest.approx(-g.inner(rhs.B, dv), rel=1e-7)
    assert directional(H, s, "eta", ds) == pytest.approx(-g.inner(rhs.W, ds), rel=1e-7)
    assert directional(H, s, "W", ds) == pytest.approx(g.inner(rhs.eta, ds), rel=1e-7)


def test_reduced_gauss_exact_and_a_track():
    gr = Grid.cube(16)
    src = mx.SourceSpec.oscillating_pair(gr)
    s = mx.reduced_state(src)
    assert (g.div(s.A) - s.eta).norm_inf() < 1e-13
    dt = 0.1 * gr.h_min
    for _ in range(100):
        s = mx.step_reduced(s, src, dt)
        gauss = (g.div(s.E) - src.rho_at(s.time)).norm_inf()
        assert gauss < 1e-12
    assert mx.reduced_lorentz_residual(s).norm_inf() < 1e-12
    assert g.div(s.B).norm_inf() < 1e-12


def test_reduced_plane_wave_accuracy():
    # vacuum reduced system: E = curl S with S = inv_curl(E); analytic wave as oracle
    gr = Grid.cube(16)
    k, pol = [0, 1, 0], [1, 0, 0]
    _, E, B = plane_wave_fields(gr, k, 1.0, pol)
    src = mx.SourceSpec.vacuum(gr)
    s = mx.ReducedSourcedState(g.inv_curl(E), B, gr.zeros_scalar(), gr.zeros_scalar(), gr.zeros_vector())
    np.testing.assert_allclose(s.E.data, E.data, atol=1e-13)
    n = 400
    for _ in range(n):
        s = mx.step_reduced(s, src, 2 * np.pi / n)
    _, E1, B1 = plane_wave_fields(gr, k, 1.0, pol, s.time)
    assert relative_l2((s.E, s.B), (E1, B1)) < 1e-3


def test_wave_residuals_need_a_track():
    gr = Grid.cube(8)
    src = mx.SourceSpec.vacuum(gr)
    s = mx.reduced_state(src, a_track=False)
    with pytest.raises(FeatureNotEnabledError):
        mx.wave_residuals([s, s, s], src)
    with pytest.raises(FeatureNotEnabledError):
        mx.reduced_lorentz_residual(s)


def test_maxwell_residuals_on_exact_wave():
    # oracle: analytic fields at t and t + dt; midpoint residuals are O(dt^2)
    gr = Grid.cube(16)
    k, pol = [1, 0, 0], [0, 1, 0]
    dt = 1e-3
    _, E0, B0 = plane_wave_fields(gr, k, 1.0, pol, 0.0)
    _, E1, B1 = plane_wave_fields(gr, k, 1.0, pol, dt)
    res = mx.maxwell_residuals(E1, B1, gr.zeros_scalar(), gr.zeros_vector(), E0, B0, dt)
    assert res.faraday < 1e-6 and res.ampere < 1e-6
    assert res.gauss < 1e-12 and res.divB < 1e-12
