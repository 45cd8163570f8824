"""Textbook first-order E-B leapfrog, used only to cross-check the canonical solvers.

Fields are collocated on the same grid and differentiated with the same
operators as the Hamiltonian solvers, so any disagreement comes from the
time integration alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as g
from .errors import ConstraintViolationError, GridMismatchError, InvalidPolarizationError
from .grid import Grid, VectorField, field_scale
from .maxwell import ExtendedState, check_step


@dataclass(frozen=True, eq=False)
class EBState:
    """Electric and magnetic fields.

    With ``staggered=True``, ``B`` is stored at ``time - dt/2`` for the step
    size the state was staggered with; otherwise ``E`` and ``B`` are both at
    ``time``.
    """

    E: VectorField
    B: VectorField
    time: float = 0.0
    staggered: bool = False

    def __post_init__(self):
        if self.E.grid != self.B.grid:
            raise GridMismatchError("E and B live on different grids")
        divb = g.div(self.B).norm_inf()
        if divb > 1e-8 * field_scale(self.E, self.B):
            raise ConstraintViolationError(f"div B must vanish; |div B|_inf = {divb:.3e}", measured=divb)

    @property
    def grid(self) -> Grid:
        return self.E.grid


def stagger(s: EBState, dt: float) -> EBState:
    """Move ``B`` back half a step: ``B(t - dt/2) = B(t) + dt/2 curl E(t)``."""
    if s.staggered:
        return s
    return EBState(s.E, s.B + 0.5 * dt * g.curl(s.E), s.time, True)


def synchronize(s: EBState, dt: float) -> EBState:
    """Inverse of :func:`stagger`."""
    if not s.staggered:
        return s
    return EBState(s.E, s.B - 0.5 * dt * g.curl(s.E), s.time, False)


def step_eb(s: EBState, J_mid: VectorField, dt: float) -> EBState:
    """Advance by ``dt``::

        B(t + dt/2) = B(t - dt/2) - dt curl E(t)
        E(t + dt)   = E(t) + dt (curl B(t + dt/2) - J_mid)

    A synchronized state is split into two half updates of ``B`` around the
    ``E`` update, which is the same scheme.
    """
    check_step(s.grid, dt)
    if J_mid.grid != s.grid:
        raise GridMismatchError("current lives on a different grid")
    ops = s.grid.ops
    E, B = s.E.data, s.B.data
    if s.staggered:
        B = B - dt * ops.curl(E)
        E = E + dt * (ops.curl(B) - J_mid.data)
    else:
        B = B - 0.5 * dt * ops.curl(E)
        E = E + dt * (ops.curl(B) - J_mid.data)
        B = B - 0.5 * dt * ops.curl(E)
    return EBState(VectorField(s.grid, E), VectorField(s.grid, B), s.time + dt, s.staggered)


def _wave_geometry(grid: Grid, k, polarization):
    k = np.asarray(k, dtype=int)
    if k.shape != (grid.ndim,):
        raise ValueError(f"wavevector needs {grid.ndim} integer components, got {k.tolist()}")
    if not np.any(k):
        raise ValueError("wavevector must be nonzero")
    kphys = np.zeros(3)
    kphys[: grid.ndim] = 2 * np.pi * k / np.asarray(grid.lengths)
    pol = np.asarray(polarization, dtype=float)
    if pol.shape != (3,) or not np.any(pol):
        raise InvalidPolarizationError(f"polarization must be a nonzero 3-vector, got {pol.tolist()}")
    pol = pol / np.linalg.norm(pol)
    if abs(np.dot(pol, kphys)) > 1e-12 * np.linalg.norm(kphys):
        raise InvalidPolarizationError(f"polarization {pol.tolist()} is not transverse to k = {k.tolist()}")
    return kphys, pol


def plane_wave_fields(grid: Grid, k, amplitude, polarization, t=0.0):
    """Analytic vacuum plane wave ``(A, E, B)`` at time ``t``.

    ``A = (a/w) pol sin(k.x - w t)``, ``E = a pol cos(k.x - w t)``,
    ``B = a (k_hat x pol) cos(k.x - w t)`` with ``w = |k|``.
    """
    kphys, pol = _wave_geometry(grid, k, polarization)
    omega = float(np.linalg.norm(kphys))
    x = grid.coords()
    phase = sum(kphys[a] * x[a] for a in range(grid.ndim)) - omega * t
    phase = np.broadcast_to(phase, grid.shape)
    s, c = np.sin(phase), np.cos(phase)
    bdir = np.cross(kphys / omega, pol)
    col = (3,) + (1,) * grid.ndim
    A = (amplitude / omega) * pol.reshape(col) * s
    E = amplitude * pol.reshape(col) * c
    B = amplitude * bdir.reshape(col) * c
    return VectorField(grid, A), VectorField(grid, E), VectorField(grid, B)


def plane_wave_omega(grid: Grid, k) -> float:
    kphys, _ = _wave_geometry(grid, k, _any_transverse(grid, k))
    return float(np.linalg.norm(kphys))


def _any_transverse(grid, k):
    kk = np.zeros(3)
    kk[: grid.ndim] = np.asarray(k, dtype=float)
    trial = np.array([0.0, 0.0, 1.0]) if abs(kk[2]) < 0.9 * np.linalg.norm(kk) else np.array([1.0, 0.0, 0.0])
    return np.cross(kk, trial)


def plane_wave_state(grid: Grid, k, amplitude, polarization):
    """Matching plane-wave initial data ``(EBState, ExtendedState)``.

    ``E = -Y``, ``B = curl A`` (evaluated with the grid's operators), ``W = 0``,
    ``eta = 0``; ``A`` is transverse so both states are Lorentz-consistent and
    divergence-free.
    """
    A, E, _ = plane_wave_fields(grid, k, amplitude, polarization)
    ext = ExtendedState(A, -E, grid.zeros_scalar(), grid.zeros_scalar(), 0.0, lorentz_consistent=True)
    eb = EBState(E, g.curl(A), 0.0, False)
    return eb, ext


def eb_from_extended(s: ExtendedState) -> EBState:
    return EBState(-s.Y, g.curl(s.A), s.time, False)


def relative_l2(fields, reference) -> float:
    """``sqrt(sum |f - r|^2) / sqrt(sum |r|^2)`` over paired field lists."""
    num = sum(float(np.sum((f.data - r.data) ** 2)) for f, r in zip(fields, reference))
    den = sum(float(np.sum(r.data**2)) for r in reference)
    return float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))
