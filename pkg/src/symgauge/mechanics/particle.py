"""RK4 trajectories of ``dz/dt = J(z) grad H`` and the chart-equivalence check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import BlowUpError, ChartError, StepSizeError
from .algebra import LieAlgebraSpec
from .fields import GaugeFieldSpec
from .poisson import (
    PhasePoint,
    PoissonStructure,
    canonical_structure,
    gradient4,
    minimal_coupling,
    minimal_decoupling,
    twisted_structure,
)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray  # (k,)
    states: np.ndarray  # (k, 2(n+m))
    energies: np.ndarray  # (k,)
    n: int
    m: int
    chart: str

    def point(self, i: int) -> PhasePoint:
        return PhasePoint.from_vector(self.states[i], self.n, self.m, self.chart)

    @property
    def q(self):
        return self.states[:, : self.n]

    @property
    def p(self):
        return self.states[:, self.n : 2 * self.n]

    @property
    def y(self):
        return self.states[:, 2 * self.n + self.m :]

    def columns(self, include_u=True):
        n, m = self.n, self.m
        cols = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        if include_u:
            cols += [f"u{s + 1}" for s in range(m)]
        return cols + [f"y{s + 1}" for s in range(m)] + ["H"]

    def rows(self, include_u=True):
        """``(t, q..., p..., [u...,] y..., H)`` per recorded sample."""
        n, m = self.n, self.m
        parts = [self.times[:, None], self.states[:, : 2 * n]]
        if include_u:
            parts.append(self.states[:, 2 * n : 2 * n + m])
        parts += [self.states[:, 2 * n + m :], self.energies[:, None]]
        return np.hstack(parts)


def integrate_particle(H: Callable, P: PoissonStructure, z0: PhasePoint, dt: float, steps: int,
                       grad_H: Callable | None = None, record_every: int = 1) -> Trajectory:
    """Classical RK4. ``H`` and ``grad_H`` take the flat coordinate vector;
    without ``grad_H`` the gradient is a 4th-order difference of ``H``."""
    if not dt > 0:
        raise StepSizeError(f"time step must be positive, got dt = {dt}", bound=0.0)
    if z0.chart != P.chart:
        raise ChartError(f"initial point is in the {z0.chart} chart but the structure acts on {P.chart}")
    grad = grad_H if grad_H is not None else (lambda x: gradient4(H, x))
    rhs = lambda x: P(x) @ grad(x)

    z = z0.vector()
    times, states, energies = [0.0], [z.copy()], [float(H(z))]
    with np.errstate(over="ignore", invalid="ignore"):  # blow-up is detected below
        _rk4_loop(rhs, H, z, z0, dt, steps, record_every, times, states, energies)
    return Trajectory(np.array(times), np.array(states), np.array(energies), z0.n, z0.m, z0.chart)


def _rk4_loop(rhs, H, z, z0, dt, steps, record_every, times, states, energies):
    for k in range(1, steps + 1):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * dt * k1)
        k3 = rhs(z + 0.5 * dt * k2)
        k4 = rhs(z + dt * k3)
        znew = z + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(znew)):
            raise BlowUpError(f"non-finite state at step {k}", last_valid_step=k - 1,
                              last_valid_state=PhasePoint.from_vector(z, z0.n, z0.m, z0.chart))
        z = znew
        if k % record_every == 0 or k == steps:
            times.append(k * dt)
            states.append(z.copy())
            energies.append(float(H(z)))


@dataclass(frozen=True, eq=False)
class ChartComparison:
    max_deviation: float
    twisted: Trajectory
    canonical: Trajectory  # mapped back to the twisted chart


def chart_equivalence(z0: PhasePoint, field: GaugeFieldSpec, alg: LieAlgebraSpec | None,
                      H_twisted: Callable, dt: float, steps: int) -> ChartComparison:
    """Integrate ``z0`` with the twisted brackets and its minimally coupled
    image with the canonical brackets, then compare point by point.

    ``H_twisted(q, p, y)``; the canonical Hamiltonian is
    ``H~(q, p~, y) = H_twisted(q, p~ - y.A(q), y)``.
    """
    alg = alg if alg is not None else field.algebra
    n, m = field.n, field.m

    def split(x):
        return x[:n], x[n : 2 * n], x[2 * n + m :]

    def H_tw(x):
        q, p, y = split(x)
        return H_twisted(q, p, y)

    def H_can(x):
        q, pt, y = split(x)
        return H_twisted(q, pt - y @ field.A(q), y)

    tw = integrate_particle(H_tw, twisted_structure(field, alg), z0, dt, steps)
    can = integrate_particle(H_can, canonical_structure(n, m, alg), minimal_coupling(z0, field), dt, steps)
    back = np.array([minimal_decoupling(can.point(i), field).vector() for i in range(len(can.times))])
    mapped = Trajectory(can.times, back, can.energies, n, m, "twisted")
    deviation = float(np.max(np.abs(back - tw.states)))
    return ChartComparison(deviation, tw, mapped)


def kinetic_hamiltonian(q, p, y):
    return 0.5 * float(p @ p)


def gyro_period(b_norm: float, y: float = 1.0) -> float:
    return 2 * np.pi / abs(b_norm * y)


def gyroradius_error(traj: Trajectory, b, y: float = 1.0) -> float:
    """Largest deviation of the perpendicular distance from the analytic guiding
    centre from ``|p_perp| / |b y|``."""
    b = np.asarray(b, dtype=float)
    bhat = b / np.linalg.norm(b)
    q0, p0 = traj.q[0], traj.p[0]
    omega = np.linalg.norm(b) * y
    p_perp = p0 - (p0 @ bhat) * bhat
    # dp/dt = y p x b  =>  guiding centre q0 + (p x bhat) / omega ... sign from the Lorentz force
    centre0 = q0 + np.cross(p0, bhat) / omega
    radius = np.linalg.norm(p_perp) / abs(omega)
    rel = traj.q - centre0
    rel_perp = rel - np.outer(rel @ bhat, bhat)
    return float(np.max(np.abs(np.linalg.norm(rel_perp, axis=1) - radius)))
