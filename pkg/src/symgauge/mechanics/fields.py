"""Background gauge fields on R^n: potentials, curvatures and field-equation residuals.

Curvature convention (fixed by a symbolic oracle, see the tests)::

    F^s_ij = d_i A^s_j - d_j A^s_i - sum_{k,r} c^s_{kr} A^k_i A^r_j

With this sign the Yang-Mills residual below is exactly the Bianchi identity
of the derived curvature, and flat connections are ``A = -g^{-1} dg``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DimensionMismatchError, PreconditionError, WrongModeError
from .algebra import LieAlgebraSpec, levi_civita

POTENTIAL_STEP = 1e-4
# derivatives of quantities that are themselves finite differences of A
OUTER_STEP = 1e-3


def fd_derivative(f: Callable, x, step: float, order: int = 4):
    """Central differences of an array-valued ``f``; axis 0 of the result is the
    differentiation direction. ``step`` is scaled by ``1 + |x|``."""
    x = np.asarray(x, dtype=float)
    h = step * (1.0 + np.linalg.norm(x))
    out = []
    for l in range(x.size):
        e = np.zeros_like(x)
        e[l] = h
        if order == 4:
            d = (8 * (f(x + e) - f(x - e)) - (f(x + 2 * e) - f(x - 2 * e))) / (12 * h)
        else:
            d = (f(x + e) - f(x - e)) / (2 * h)
        out.append(np.asarray(d, dtype=float))
    return np.stack(out)


@dataclass(frozen=True, eq=False)
class GaugeFieldSpec:
    """Connection ``A^s_j(q)`` (shape ``(m, n)``) and curvature ``F^s_ij(q)``
    (shape ``(m, n, n)``).

    Modes:
      derived   potential only; curvature from 4th-order differences of A
                (or from ``potential_jacobian`` if supplied, ``[s, i, j] = d_i A^s_j``)
      analytic  potential and curvature both supplied; they need not agree,
                which is how field-equation-violating test fields are built
      direct    curvature only, no potential
    """

    n: int = 3
    m: int = 1
    potential: Callable | None = None
    curvature: Callable | None = None
    algebra: LieAlgebraSpec | None = None
    potential_jacobian: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.potential is None and self.curvature is None:
            raise PreconditionError("a gauge field needs a potential, a curvature, or both")
        if self.algebra is None:
            object.__setattr__(self, "algebra", LieAlgebraSpec.abelian(self.m))
        if self.algebra.m != self.m:
            raise DimensionMismatchError(f"field has m = {self.m} but the algebra has dimension {self.algebra.m}")
        rng = np.random.default_rng(12345)
        for _ in range(4):
            q = rng.uniform(-1, 1, self.n)
            if self.potential is not None and np.shape(self.A(q)) != (self.m, self.n):
                raise DimensionMismatchError(f"potential must return shape {(self.m, self.n)}, got {np.shape(self.A(q))}")
            F = self.F(q)
            if F.shape != (self.m, self.n, self.n):
                raise DimensionMismatchError(f"curvature must return shape {(self.m, self.n, self.n)}, got {F.shape}")
            if np.max(np.abs(F + np.swapaxes(F, 1, 2)), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(F), initial=0.0)):
                raise PreconditionError("curvature is not antisymmetric in its base indices")
            if self.potential_jacobian is not None:
                exact = np.asarray(self.potential_jacobian(q), dtype=float)
                approx = np.moveaxis(fd_derivative(self.A, q, POTENTIAL_STEP), 0, 1)
                if np.max(np.abs(exact - approx)) > 1e-6:
                    raise PreconditionError("supplied potential derivatives disagree with finite differences of the potential")

    @property
    def mode(self) -> str:
        if self.potential is None:
            return "direct"
        return "analytic" if self.curvature is not None else "derived"

    def A(self, q):
        if self.potential is None:
            raise WrongModeError(f"field {self.name or '<unnamed>'} has no potential (direct-curvature mode)")
        return np.asarray(self.potential(np.asarray(q, dtype=float)), dtype=float).reshape(self.m, self.n)

    def dA(self, q):
        """``[s, i, j] = d_i A^s_j``."""
        q = np.asarray(q, dtype=float)
        if self.potential_jacobian is not None:
            return np.asarray(self.potential_jacobian(q), dtype=float)
        return np.moveaxis(fd_derivative(self.A, q, POTENTIAL_STEP), 0, 1)

    def F(self, q):
        q = np.asarray(q, dtype=float)
        if self.curvature is not None:
            return np.asarray(self.curvature(q), dtype=float).reshape(self.m, self.n, self.n)
        return derived_curvature(self.dA(q), self.A(q), self.algebra)

    @property
    def is_abelian(self) -> bool:
        return self.algebra.is_abelian


def derived_curvature(dA, A, alg: LieAlgebraSpec):
    F = dA - np.swapaxes(dA, 1, 2)
    if not alg.is_abelian:
        quad = np.einsum("skr,ki,rj->sij", alg.c, A, A)
        F = F - 0.5 * (quad - np.swapaxes(quad, 1, 2))
    return F


# ---------------------------------------------------------------- residuals


def abelian_bianchi_residual(field: GaugeFieldSpec, q):
    """``R[i, j, k] = d_k F_ij + d_i F_jk + d_j F_ki`` for a single-generator field."""
    if field.m != 1:
        raise WrongModeError(f"abelian Bianchi residual needs m = 1, field has m = {field.m}")
    dF = fd_derivative(lambda x: field.F(x)[0], q, OUTER_STEP)  # [k, i, j]
    return (
        np.einsum("kij->ijk", dF)
        + np.einsum("ijk->ijk", dF)
        + np.einsum("jki->ijk", dF)
    )


def ym_field_residual(field: GaugeFieldSpec, alg: LieAlgebraSpec, q):
    """``R[s, i, j, l] = d_l F^s_ij + d_i F^s_jl + d_j F^s_li
    + sum_{k,r} c^s_kr (F^k_ij A^r_l + F^k_jl A^r_i + F^k_li A^r_j)``."""
    if field.potential is None:
        raise WrongModeError("the Yang-Mills residual needs the potential; field is in direct-curvature mode")
    if alg.m != field.m:
        raise DimensionMismatchError(f"algebra dimension {alg.m} does not match field m = {field.m}")
    q = np.asarray(q, dtype=float)
    dF = fd_derivative(field.F, q, OUTER_STEP)  # [l, s, i, j]
    F, A = field.F(q), field.A(q)
    deriv = (
        np.einsum("lsij->sijl", dF)
        + np.einsum("isjl->sijl", dF)
        + np.einsum("jsli->sijl", dF)
    )
    cF = np.einsum("skr,kij->srij", alg.c, F)
    colour = (
        np.einsum("srij,rl->sijl", cF, A)
        + np.einsum("srjl,ri->sijl", cF, A)
        + np.einsum("srli,rj->sijl", cF, A)
    )
    return deriv + colour


# ---------------------------------------------------------------- built-in families


def zero_field(n=3, m=1, algebra=None) -> GaugeFieldSpec:
    return GaugeFieldSpec(n, m, potential=lambda q: np.zeros((m, n)), algebra=algebra,
                          potential_jacobian=lambda q: np.zeros((m, n, n)), name="zero")


def constant_B(b, y_index: int = 0, m: int = 1) -> GaugeFieldSpec:
    """Uniform magnetic field in the symmetric gauge ``A = B x q / 2`` on
    generator ``y_index``; curvature ``F_ij = eps_ijk B_k`` given analytically."""
    b = np.asarray(b, dtype=float).reshape(3)
    eps = levi_civita()
    Fb = np.einsum("ijk,k->ij", eps, b)
    dAb = 0.5 * np.einsum("jki,k->ij", eps, b)  # d_i (B x q / 2)_j

    def potential(q):
        A = np.zeros((m, 3))
        A[y_index] = 0.5 * np.cross(b, q)
        return A

    def curvature(q):
        F = np.zeros((m, 3, 3))
        F[y_index] = Fb
        return F

    def jac(q):
        D = np.zeros((m, 3, 3))
        D[y_index] = dAb
        return D

    return GaugeFieldSpec(3, m, potential, curvature, potential_jacobian=jac, name="constant_B")


def landau_B(b: float) -> GaugeFieldSpec:
    """``B = (0, 0, b)`` in the gauge ``A = (0, b q1, 0)``, curvature derived."""
    def potential(q):
        return np.array([[0.0, b * q[0], 0.0]])

    def jac(q):
        D = np.zeros((1, 3, 3))
        D[0, 0, 1] = b
        return D

    return GaugeFieldSpec(3, 1, potential, potential_jacobian=jac, name="landau_B")


def radial_B() -> GaugeFieldSpec:
    """Direct-curvature field ``B(q) = q``: div B = 3, no potential exists."""
    eps = levi_civita()
    return GaugeFieldSpec(3, 1, curvature=lambda q: np.einsum("ijk,k->ij", eps, q)[None], name="radial_B")


def smooth_abelian() -> GaugeFieldSpec:
    """A non-uniform single-valued potential; its derived curvature is exact."""
    def potential(q):
        x, y, z = q
        return np.array([[np.sin(y) * np.cos(z), x * x * z, np.cos(x * y)]])

    return GaugeFieldSpec(3, 1, potential, name="smooth_abelian")


# su(2) with a_s = -(i/2) sigma_s, so [a_s, a_k] = eps_skr a_r
_PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
SU2_BASIS = -0.5j * _PAULI


def su2_exp(theta: float, s: int):
    """``exp(theta a_s) = cos(theta/2) I - i sin(theta/2) sigma_s``."""
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * _PAULI[s]


def su2_coefficients(X):
    """Coordinates of a traceless anti-Hermitian 2x2 matrix in the basis ``a_s``."""
    return np.real(1j * np.einsum("ab,sba->s", X, _PAULI))


def _default_angles(q):
    x, y, z = q
    t1 = np.sin(x) + 0.5 * y * z
    t2 = np.cos(y) + 0.3 * x - 0.2 * z * z
    g1 = np.array([np.cos(x), 0.5 * z, 0.5 * y])
    g2 = np.array([0.3, -np.sin(y), -0.4 * z])
    return (t1, t2), (g1, g2)


def su2_pure_gauge(sign: float = -1.0, angles=_default_angles) -> GaugeFieldSpec:
    """``A = sign * g^{-1} dg`` with ``g(q) = exp(t1(q) a_1) exp(t2(q) a_2)``.

    ``angles(q)`` returns the two angles and their gradients. ``sign=-1`` is the
    flat connection for the curvature convention of this module; ``sign=+1``
    gives a curved potential with the same derivatives.
    """
    alg = LieAlgebraSpec.su2()

    def potential(q):
        (t1, t2), (g1, g2) = angles(np.asarray(q, dtype=float))
        h = su2_exp(t2, 1)
        # g^{-1} d_j g = dt1_j h^{-1} a_1 h + dt2_j a_2
        rot = su2_coefficients(np.conj(h.T) @ SU2_BASIS[0] @ h)
        e2 = np.array([0.0, 1.0, 0.0])
        return sign * (np.outer(rot, g1) + np.outer(e2, g2))

    return GaugeFieldSpec(3, 3, potential, algebra=alg, name=f"su2_pure_gauge({sign:+g})")


def su2_curved(amplitude: float = 0.4) -> GaugeFieldSpec:
    """Smooth, non-flat su(2) potential used for chart-equivalence runs.
    Potential derivatives are supplied analytically."""
    alg = LieAlgebraSpec.su2()
    a = amplitude

    def potential(q):
        x, y, z = q
        return a * np.array([
            [np.sin(y), 0.5 * z, np.cos(x)],
            [0.3 * z, np.cos(z), np.sin(x + y)],
            [np.cos(y), 0.2 * x, 0.5 * y],
        ])

    def jac(q):
        x, y, z = q
        D = np.zeros((3, 3, 3))  # [s, i, j] = d_i A^s_j
        D[0, 1, 0] = np.cos(y)
        D[0, 2, 1] = 0.5
        D[0, 0, 2] = -np.sin(x)
        D[1, 2, 0] = 0.3
        D[1, 2, 1] = -np.sin(z)
        D[1, 0, 2] = D[1, 1, 2] = np.cos(x + y)
        D[2, 1, 0] = -np.sin(y)
        D[2, 0, 1] = 0.2
        D[2, 1, 2] = 0.5
        return a * D

    return GaugeFieldSpec(3, 3, potential, algebra=alg, potential_jacobian=jac, name="su2_curved")


def perturbed_curvature(base: GaugeFieldSpec, eps: float = 1.0) -> GaugeFieldSpec:
    """Keep ``base``'s potential but supply its curvature plus ``eps * q3`` in
    ``F^1_12``; the extra term has nonzero covariant exterior derivative."""
    def curvature(q):
        F = base.F(q).copy()
        F[0, 0, 1] += eps * q[2]
        F[0, 1, 0] -= eps * q[2]
        return F

    return GaugeFieldSpec(base.n, base.m, base.potential, curvature, algebra=base.algebra,
                          potential_jacobian=base.potential_jacobian, name=f"{base.name}+perturbation")
