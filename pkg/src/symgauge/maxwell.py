"""Canonical Hamiltonian electrodynamics on a periodic grid.

Two formulations are provided.

Extended vacuum system, canonical variables ``(A, Y; eta, W)`` with pairing
``dY^dA + dW^deta`` and Hamiltonian::

    H = 1/2 [ |Y - grad W|^2 + |curl A|^2 + |eta|^2 ]

    dA/dt = Y - grad W          dY/dt = -curl curl A
    deta/dt = div(Y - grad W)   dW/dt = -eta

Because ``dA/dt`` and ``deta/dt`` share the factor ``Y - grad W``, the Lorentz
residual ``div A - eta`` (which equals ``dW/dt + div A``) is a constant of the
motion. The kick-drift-kick leapfrog below keeps it constant to roundoff.

Reduced sourced system, variables ``(S, B; eta, W)`` plus a source field ``F``
with ``div F = rho``::

    H = 1/2 [ |curl S + F + grad W|^2 + |B|^2 + |eta|^2 ]

    dS/dt = B                       dB/dt = -curl(curl S + F + grad W)
    deta/dt = -div(curl S + F + grad W) = -rho - lap W       dW/dt = -eta

The electric field is reconstructed as ``E = curl S + F`` and ``dF/dt = -J``.

Sign conventions: ``Y = -E`` and ``eta = div A`` at consistent initialization,
so that ``dW/dt + div A = div A - eta``.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import InitVar, dataclass
from typing import Callable, Optional

import numpy as np

from . import grid as g
from .errors import (
    ConstraintViolationError,
    FeatureNotEnabledError,
    GridMismatchError,
    StepSizeError,
    UnsolvableOnTorusError,
)
from .grid import Grid, ScalarField, VectorField, field_scale

LORENTZ_CONSTRUCTION_TOL = 1e-8
DIVB_CONSTRUCTION_TOL = 1e-8
GAUSS_CONSTRUCTION_TOL = 1e-8


# --------------------------------------------------------------------------- step size


def stability_limit(grid: Grid) -> float:
    """Largest admissible time step.

    ``h_min / sqrt(d)`` for central differences and ``h_min / pi`` for the
    spectral backend. Both sit below the leapfrog limit ``2 / omega_max``.
    """
    if grid.backend == "central2":
        return grid.h_min / np.sqrt(grid.ndim)
    return grid.h_min / np.pi


def check_step(grid: Grid, dt: float) -> None:
    if not np.isfinite(dt) or dt <= 0:
        raise StepSizeError(f"time step must be positive, got dt={dt}")
    bound = stability_limit(grid)
    if dt > bound * (1 + 1e-12):
        raise StepSizeError(
            f"dt={dt:.6g} exceeds the stability bound {bound:.6g} for the {grid.backend} backend",
            bound=bound,
        )


# --------------------------------------------------------------------------- extended system


@dataclass(frozen=True, eq=False)
class ExtendedState:
    """Point ``(A, Y; eta, W)`` of the extended vacuum phase space.

    With ``lorentz_consistent=True`` the constructor verifies
    ``|div A - eta|_inf < 1e-8 * scale``.
    """

    A: VectorField
    Y: VectorField
    eta: ScalarField
    W: ScalarField
    time: float = 0.0
    lorentz_consistent: bool = False

    def __post_init__(self):
        gr = self.A.grid
        for name in ("Y", "eta", "W"):
            if getattr(self, name).grid != gr:
                raise GridMismatchError(f"ExtendedState.{name} lives on a different grid than A")
        if self.lorentz_consistent:
            res = lorentz_residual(self).norm_inf()
            if res > LORENTZ_CONSTRUCTION_TOL * self.scale():
                raise ConstraintViolationError(
                    f"state flagged Lorentz-consistent but |div A - eta|_inf = {res:.3e}", measured=res
                )

    @classmethod
    def consistent(cls, A: VectorField, Y: VectorField, W: ScalarField, time=0.0):
        """Build a Lorentz-consistent state by setting ``eta = div A``."""
        return cls(A, Y, g.div(A), W, time, lorentz_consistent=True)

    @classmethod
    def zeros(cls, grid: Grid):
        return cls(grid.zeros_vector(), grid.zeros_vector(), grid.zeros_scalar(), grid.zeros_scalar(), 0.0, True)

    @property
    def grid(self) -> Grid:
        return self.A.grid

    @property
    def Y_tilde(self) -> VectorField:
        """Shifted momentum ``Y + grad W``."""
        return self.Y + g.grad(self.W)

    def scale(self) -> float:
        return field_scale(self.A, self.Y, self.eta, self.W)

    def arrays(self):
        return self.A.data, self.Y.data, self.eta.data, self.W.data

    def replace(self, **changes):
        kw = dict(A=self.A, Y=self.Y, eta=self.eta, W=self.W, time=self.time)
        kw.update(changes)
        return ExtendedState(**kw)


ExtendedTangent = namedtuple("ExtendedTangent", "A Y eta W")


def hamiltonian_vacuum(A: VectorField, Y: VectorField) -> float:
    """``1/2 [ (Y,Y) + (curl A, curl A) + (div A, div A) ]``."""
    if A.grid != Y.grid:
        raise GridMismatchError("A and Y live on different grids")
    cA = g.curl(A)
    dA = g.div(A)
    return 0.5 * (g.inner(Y, Y) + g.inner(cA, cA) + g.inner(dA, dA))


def hamiltonian_extended(s: ExtendedState) -> float:
    kin = s.Y - g.grad(s.W)
    cA = g.curl(s.A)
    return 0.5 * (g.inner(kin, kin) + g.inner(cA, cA) + g.inner(s.eta, s.eta))


def rhs_extended(s: ExtendedState) -> ExtendedTangent:
    """Time derivatives ``(A', Y', eta', W')`` of the extended system."""
    kin = s.Y - g.grad(s.W)
    return ExtendedTangent(kin, -g.curl_curl(s.A), g.div(kin), -s.eta)


def _kick(ops, A, Y, eta, W, h):
    # momentum update from V(A, eta) = |curl A|^2/2 + |eta|^2/2
    return Y - h * ops.curl_curl(A), W - h * eta


def _drift(ops, A, Y, eta, W, h):
    # position update from T(Y, W) = |Y - grad W|^2/2; one shared increment
    kin = Y - ops.grad(W)
    return A + h * kin, eta + h * ops.div(kin)


def _kdk(ops, A, Y, eta, W, dt):
    Y, W = _kick(ops, A, Y, eta, W, 0.5 * dt)
    A, eta = _drift(ops, A, Y, eta, W, dt)
    Y, W = _kick(ops, A, Y, eta, W, 0.5 * dt)
    return A, Y, eta, W


def _wrap_extended(grid, A, Y, eta, W, time):
    return ExtendedState(
        VectorField(grid, A), VectorField(grid, Y), ScalarField(grid, eta), ScalarField(grid, W), time
    )


def step_extended(s: ExtendedState, dt: float) -> ExtendedState:
    """One kick-drift-kick leapfrog step."""
    check_step(s.grid, dt)
    A, Y, eta, W = _kdk(s.grid.ops, *s.arrays(), dt)
    return _wrap_extended(s.grid, A, Y, eta, W, s.time + dt)


def evolve_extended(
    s: ExtendedState,
    dt: float,
    steps: int,
    observe: Optional[Callable[[int, ExtendedState], None]] = None,
    every: int = 1,
    lorentz_every: int = 0,
):
    """Advance ``steps`` leapfrog steps.

    ``observe(n, state)`` is called for ``n = 0`` and every ``every`` steps with
    a synchronized state. When ``lorentz_every > 0`` the L-infinity Lorentz
    residual is recorded after every ``lorentz_every``-th step; consecutive
    kicks are fused between observations, which changes nothing but roundoff.

    Returns ``(final_state, lorentz_history)`` where the history is an array
    of ``(step, residual)`` rows.
    """
    check_step(s.grid, dt)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    ops = s.grid.ops
    A, Y, eta, W = s.arrays()
    history = []
    if lorentz_every:
        history.append((0, float(np.max(np.abs(ops.div(A) - eta)))))
    if observe is not None:
        observe(0, s)
    half = 0.5 * dt
    pending = False  # True when Y, W lag by a half kick
    for n in range(1, steps + 1):
        if pending:
            Y, W = _kick(ops, A, Y, eta, W, dt)
        else:
            Y, W = _kick(ops, A, Y, eta, W, half)
        A, eta = _drift(ops, A, Y, eta, W, dt)
        pending = True
        if lorentz_every and n % lorentz_every == 0:
            history.append((n, float(np.max(np.abs(ops.div(A) - eta)))))
        if n == steps or (observe is not None and n % every == 0):
            Y, W = _kick(ops, A, Y, eta, W, half)
            pending = False
            if observe is not None and n % every == 0:
                observe(n, _wrap_extended(s.grid, A, Y, eta, W, s.time + n * dt))
    final = _wrap_extended(s.grid, A, Y, eta, W, s.time + steps * dt)
    return final, np.array(history).reshape(-1, 2)


def fields_from_extended(s: ExtendedState):
    """``(E, B) = (-Y, curl A)``."""
    return -s.Y, g.curl(s.A)


def gauge_transform(s: ExtendedState, psi: ScalarField) -> ExtendedState:
    """``A -> A + grad psi``; ``Y``, ``eta`` and ``W`` are untouched."""
    if psi.grid != s.grid:
        raise GridMismatchError("gauge function lives on a different grid")
    return s.replace(A=s.A + g.grad(psi))


def momentum_map(s: ExtendedState) -> ScalarField:
    """Gauge momentum map ``-div Y`` (= div E, the Gauss-law charge density)."""
    return -g.div(s.Y)


def lorentz_residual(s: ExtendedState) -> ScalarField:
    """``div A - eta``; along the flow this is ``dW/dt + div A``."""
    return g.div(s.A) - s.eta


# --------------------------------------------------------------------------- sources


def _as_scalar(grid, value):
    return value if isinstance(value, ScalarField) else ScalarField(grid, np.broadcast_to(value, grid.shape))


def _as_vector(grid, value):
    return value if isinstance(value, VectorField) else VectorField(grid, value)


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """Time-dependent charge and current densities.

    ``rho(t)`` and ``J(t)`` may return fields or raw arrays. Construction checks,
    at ``check_times``, that the mean charge vanishes and that centered time
    differences satisfy ``|d rho/dt + div J|_inf < 1e-6 * scale``.
    """

    grid: Grid
    rho: Callable[[float], object]
    J: Callable[[float], object]
    check_times: tuple = (0.0, 0.31, 1.07, 2.9)
    static: bool = False
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        if validate:
            self.check()

    def rho_at(self, t) -> ScalarField:
        return _as_scalar(self.grid, self.rho(t))

    def J_at(self, t) -> VectorField:
        return _as_vector(self.grid, self.J(t))

    def check(self, delta=1e-4, mean_tol=1e-10, continuity_tol=1e-6):
        ops = self.grid.ops
        for t in self.check_times:
            rho = self.rho_at(t)
            J = self.J_at(t)
            scale = field_scale(rho, J)
            if abs(rho.mean()) > mean_tol * scale:
                raise UnsolvableOnTorusError(
                    f"net charge must vanish on the torus; mean rho({t}) = {rho.mean():.3e}", mean=rho.mean()
                )
            drho = (self.rho_at(t + delta).data - self.rho_at(t - delta).data) / (2 * delta)
            defect = float(np.max(np.abs(drho + ops.div(J.data))))
            if defect > continuity_tol * scale:
                raise ConstraintViolationError(
                    f"continuity violated at t={t}: |d rho/dt + div J|_inf = {defect:.3e}", measured=defect
                )

    @classmethod
    def vacuum(cls, grid):
        z = np.zeros(grid.shape)
        zv = np.zeros((3,) + grid.shape)
        return cls(grid, lambda t: z, lambda t: zv, static=True)

    @classmethod
    def static_charge(cls, rho0: ScalarField):
        zv = np.zeros((3,) + rho0.grid.shape)
        return cls(rho0.grid, lambda t: rho0, lambda t: zv, static=True)

    @classmethod
    def oscillating_pair(cls, grid, separation=None, width=None, charge=1.0, omega=1.0, loop_current=0.5):
        """Neutral pair of Gaussian charges whose charge oscillates as ``cos(omega t)``.

        ``J`` carries the longitudinal current ``omega sin(omega t) grad lap^-1 rho0``
        demanded by continuity plus a divergence-free loop current
        ``loop_current * sin(omega t) * curl(m)`` that radiates.
        """
        ops = grid.ops
        centre = [L / 2 for L in grid.lengths]
        sep = separation if separation is not None else grid.lengths[0] / 4
        w = width if width is not None else 3 * grid.h_min
        x = grid.coords()

        def blob(shift):
            r2 = 0.0
            for axis, xa in enumerate(x):
                c = centre[axis] + (shift if axis == 0 else 0.0)
                d = (xa - c + grid.lengths[axis] / 2) % grid.lengths[axis] - grid.lengths[axis] / 2
                r2 = r2 + d * d
            return np.exp(-r2 / (2 * w * w))

        raw = np.broadcast_to(blob(sep / 2) - blob(-sep / 2), grid.shape)
        # project onto zero-mean, null-mode-free data so every inverse is exact
        rho0 = ops.lap(ops.inv_lap(raw))
        rho0 = charge * rho0 / np.max(np.abs(rho0))
        jl = ops.grad(ops.inv_lap(rho0))
        m = np.zeros((3,) + grid.shape)
        m[2] = np.broadcast_to(blob(0.0), grid.shape)
        jt = ops.curl(m)
        jt = jt / max(np.max(np.abs(jt)), 1e-300)

        def rho(t):
            return rho0 * np.cos(omega * t)

        def J(t):
            return omega * np.sin(omega * t) * jl + loop_current * np.sin(omega * t) * jt

        return cls(grid, rho, J)


# --------------------------------------------------------------------------- reduced system


@dataclass(frozen=True, eq=False)
class ReducedSourcedState:
    """Point ``(S, B; eta, W)`` of the reduced phase space plus source field ``F``.

    ``A`` is an optional diagnostic track integrating ``dA/dt = -E - grad W``;
    it never feeds back into the dynamics.
    """

    S: VectorField
    B: VectorField
    eta: ScalarField
    W: ScalarField
    F: VectorField
    time: float = 0.0
    A: Optional[VectorField] = None
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        gr = self.S.grid
        for name in ("B", "eta", "W", "F", "A"):
            f = getattr(self, name)
            if f is not None and f.grid != gr:
                raise GridMismatchError(f"ReducedSourcedState.{name} lives on a different grid than S")
        if validate:
            divb = g.div(self.B).norm_inf()
            if divb > DIVB_CONSTRUCTION_TOL * self.scale():
                raise ConstraintViolationError(f"div B must vanish; |div B|_inf = {divb:.3e}", measured=divb)

    @property
    def grid(self) -> Grid:
        return self.S.grid

    @property
    def E(self) -> VectorField:
        """Electric field ``curl S + F``."""
        return g.curl(self.S) + self.F

    def scale(self) -> float:
        return field_scale(self.S, self.B, self.eta, self.W, self.F, self.A)

    def replace(self, **changes):
        kw = dict(S=self.S, B=self.B, eta=self.eta, W=self.W, F=self.F, time=self.time, A=self.A)
        kw.update(changes)
        return ReducedSourcedState(**kw, validate=False)


ReducedTangent = namedtuple("ReducedTangent", "S B eta W")


def init_F_from_charge(rho: ScalarField) -> VectorField:
    """Longitudinal source field ``grad lap^-1 rho``, so that ``div F = rho``."""
    return g.grad(g.inv_laplacian(rho))


def reconstruct_S_from_B(B: VectorField) -> VectorField:
    return g.inv_curl(B)


def reduced_state(src: SourceSpec, t0=0.0, B=None, W=None, eta=None, a_track=True) -> ReducedSourcedState:
    """Initial reduced state for sources ``src``.

    Defaults: ``B = 0``, ``W = -lap^-1 rho(t0)`` (the Coulomb potential),
    ``eta = 0``. ``S = inv_curl(B)``; the A-track starts at
    ``S + grad lap^-1 eta`` so that ``curl A = B`` and ``div A = eta``.
    """
    grid = src.grid
    rho = src.rho_at(t0)
    B = B if B is not None else grid.zeros_vector()
    W = W if W is not None else -g.inv_laplacian(rho)
    eta = eta if eta is not None else grid.zeros_scalar()
    S = g.inv_curl(B)
    A = S + g.grad(g.inv_laplacian(eta)) if a_track else None
    return ReducedSourcedState(S, B, eta, W, init_F_from_charge(rho), t0, A)


def hamiltonian_reduced(s: ReducedSourcedState) -> float:
    e = g.curl(s.S) + s.F + g.grad(s.W)
    return 0.5 * (g.inner(e, e) + g.inner(s.B, s.B) + g.inner(s.eta, s.eta))


def rhs_reduced(s: ReducedSourcedState) -> ReducedTangent:
    e = g.curl(s.S) + s.F + g.grad(s.W)
    return ReducedTangent(s.B, -g.curl(e), -g.div(e), -s.eta)


def _advance_F(ops, F, src, t, dt):
    """Midpoint rule on ``dF/dt = -J`` followed by a longitudinal projection
    that restores ``div F = rho(t + dt)``; the correction is the O(dt^3)
    continuity defect of the midpoint quadrature."""
    if src.static:
        return F
    pred = F - dt * src.J_at(t + 0.5 * dt).data
    rho_next = src.rho_at(t + dt).data
    return pred + ops.grad(ops.inv_lap(rho_next - ops.div(pred)))


def step_reduced(s: ReducedSourcedState, src: SourceSpec, dt: float) -> ReducedSourcedState:
    """Strang splitting: half curl-flow, full kinetic flow, half curl-flow.

    curl-flow of ``|curl S + F + grad W|^2/2`` moves ``B`` and ``eta`` with
    ``S, W`` frozen; kinetic flow of ``|B|^2/2 + |eta|^2/2`` moves ``S`` and
    ``W`` with ``B, eta`` frozen. Both are exact. ``F`` takes its value at
    the start of the step in the first half and at the end in the second.
    """
    grid = s.grid
    if src.grid != grid:
        raise GridMismatchError("sources live on a different grid")
    check_step(grid, dt)
    ops = grid.ops
    S, B, eta, W, F = s.S.data, s.B.data, s.eta.data, s.W.data, s.F.data
    half = 0.5 * dt

    e1 = ops.curl(S) + F + ops.grad(W)
    B = B - half * ops.curl(e1)
    eta = eta - half * ops.div(e1)

    S = S + dt * B
    W = W - dt * eta

    F = _advance_F(ops, F, src, s.time, dt)
    e2 = ops.curl(S) + F + ops.grad(W)
    B = B - half * ops.curl(e2)
    eta = eta - half * ops.div(e2)

    A = None
    if s.A is not None:
        A = VectorField(grid, s.A.data - half * (e1 + e2))
    return ReducedSourcedState(
        VectorField(grid, S), VectorField(grid, B), ScalarField(grid, eta), ScalarField(grid, W),
        VectorField(grid, F), s.time + dt, A, validate=False,
    )


def reduced_lorentz_residual(s: ReducedSourcedState) -> ScalarField:
    if s.A is None:
        raise FeatureNotEnabledError("the Lorentz residual of the reduced system needs the A-track")
    return g.div(s.A) - s.eta


# --------------------------------------------------------------------------- residuals

MaxwellResiduals = namedtuple("MaxwellResiduals", "ampere faraday gauss divB")


def maxwell_residuals(E, B, rho, J, E_prev, B_prev, dt) -> MaxwellResiduals:
    """L2 norms of the four Maxwell residuals between two snapshots ``dt`` apart.

    Ampere ``(E - E_prev)/dt - curl B_mid + J`` and Faraday ``(B - B_prev)/dt +
    curl E_mid`` use midpoint averages; ``J`` should be the current at the
    midpoint. Gauss ``div E - rho`` and ``div B`` are evaluated at the later
    snapshot.
    """
    g._require_same_grid(E, B, rho, J, E_prev, B_prev)
    if not dt > 0:
        raise StepSizeError(f"dt must be positive, got {dt}")
    ops = E.grid.ops
    E_mid = 0.5 * (E.data + E_prev.data)
    B_mid = 0.5 * (B.data + B_prev.data)
    amp = (E.data - E_prev.data) / dt - ops.curl(B_mid) + J.data
    far = (B.data - B_prev.data) / dt + ops.curl(E_mid)
    gauss = ops.div(E.data) - rho.data
    divb = ops.div(B.data)
    vol = E.grid.cell_volume

    def l2(a):
        return float(np.sqrt(np.sum(a * a) * vol))

    return MaxwellResiduals(l2(amp), l2(far), l2(gauss), l2(divb))


WaveResiduals = namedtuple("WaveResiduals", "scalar vector")


def wave_residuals(window, src: SourceSpec) -> WaveResiduals:
    """L2 norms of ``W'' - lap W - rho`` and ``A'' - lap A - J`` at the middle
    of three equally spaced reduced states, by centered second differences."""
    prev, cur, nxt = window
    for st in window:
        if st.A is None:
            raise FeatureNotEnabledError("wave_residuals needs the A-track enabled")
    dt = cur.time - prev.time
    if not dt > 0 or abs((nxt.time - cur.time) - dt) > 1e-9 * max(1.0, abs(dt)):
        raise StepSizeError("window states must be equally spaced in time")
    ops = cur.grid.ops
    rho = src.rho_at(cur.time).data
    J = src.J_at(cur.time).data
    w_res = (nxt.W.data - 2 * cur.W.data + prev.W.data) / dt**2 - ops.lap(cur.W.data) - rho
    a_res = (nxt.A.data - 2 * cur.A.data + prev.A.data) / dt**2 - ops.lap(cur.A.data) - J
    vol = cur.grid.cell_volume
    return WaveResiduals(
        float(np.sqrt(np.sum(w_res**2) * vol)), float(np.sqrt(np.sum(a_res**2) * vol))
    )


# --------------------------------------------------------------------------- diagnostics rows

DIAGNOSTIC_COLUMNS = ("t", "H", "lorentz", "gauss", "divB", "faraday", "ampere")


def extended_diagnostics(prev: ExtendedState, cur: ExtendedState, rho0: ScalarField, dt: float) -> dict:
    """One diagnostics row for the vacuum extended system.

    ``gauss`` measures the drift of the momentum map from its initial value
    ``rho0``; Faraday/Ampere use the midpoint residuals with ``J = 0``.
    """
    E, B = fields_from_extended(cur)
    row = {"t": cur.time, "H": hamiltonian_extended(cur), "lorentz": lorentz_residual(cur).norm_inf()}
    if prev is None:
        res = MaxwellResiduals(0.0, 0.0, (g.div(E) - rho0).norm_l2(), g.div(B).norm_l2())
    else:
        Ep, Bp = fields_from_extended(prev)
        res = maxwell_residuals(E, B, rho0, cur.grid.zeros_vector(), Ep, Bp, dt)
    row.update(gauss=res.gauss, divB=res.divB, faraday=res.faraday, ampere=res.ampere)
    return row


def reduced_diagnostics(prev: Optional[ReducedSourcedState], cur: ReducedSourcedState, src: SourceSpec) -> dict:
    E = cur.E
    rho = src.rho_at(cur.time)
    lor = reduced_lorentz_residual(cur).norm_inf() if cur.A is not None else float("nan")
    row = {"t": cur.time, "H": hamiltonian_reduced(cur), "lorentz": lor}
    if prev is None:
        res = MaxwellResiduals(0.0, 0.0, (g.div(E) - rho).norm_l2(), g.div(cur.B).norm_l2())
    else:
        dt = cur.time - prev.time
        J = src.J_at(prev.time + 0.5 * dt)
        res = maxwell_residuals(E, cur.B, rho, J, prev.E, prev.B, dt)
    row.update(gauss=res.gauss, divB=res.divB, faraday=res.faraday, ampere=res.ampere)
    return row
