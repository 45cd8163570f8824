"""Phase points, Poisson structure matrices, brackets and Jacobi diagnostics.

Coordinates are ordered ``z = (q_1..q_n, p_1..p_n, u_1..u_m, y_1..y_m)`` and
observables are callables of that flat vector. The flow is ``dz/dt = J(z) grad H``.

Orientation (one global choice, verified symbolically in the tests)::

    {q_i, p_j} = delta_ij           {u_s, y_k} = delta_sk
    {p_i, p_j} = sum_s y_s F^s_ij    {y_s, y_k} = -sum_r c^r_sk y_r
    {p_j, u_s} = A^s_j              {p_i, y_k} = sum_{s,r} A^s_i c^r_sk y_r

so ``{q1, |p|^2/2} = p1`` and a positive charge obeys ``dp/dt = y v x B``.
The last (colour) entry is what the momentum shift ``p~ = p + y.A`` produces
from the canonical brackets when the algebra is nonabelian; it vanishes for
abelian algebras.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ChartError, DimensionMismatchError, InvalidFieldError, PreconditionError, WrongModeError
from .algebra import CoadjointElement, LieAlgebraSpec, ad_invariance_check
from .fields import GaugeFieldSpec

CHARTS = ("twisted", "canonical")
BRACKET_STEP = 1e-5
JACOBI_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray
    u: np.ndarray
    y: np.ndarray
    chart: str = "twisted"

    def __post_init__(self):
        for name in ("q", "p", "u", "y"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float)).copy()
            if v.ndim != 1 or not np.all(np.isfinite(v)):
                raise InvalidFieldError(f"phase point component {name} must be a finite vector")
            object.__setattr__(self, name, v)
        if self.q.size != self.p.size:
            raise DimensionMismatchError("q and p must have the same length")
        if self.u.size != self.y.size:
            raise DimensionMismatchError("u and y must have the same length")
        if self.chart not in CHARTS:
            raise ChartError(f"unknown chart {self.chart!r}; expected one of {CHARTS}")

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def m(self) -> int:
        return self.y.size

    def vector(self):
        return np.concatenate([self.q, self.p, self.u, self.y])

    @classmethod
    def from_vector(cls, z, n, m, chart="twisted"):
        z = np.asarray(z, dtype=float)
        if z.shape != (2 * (n + m),):
            raise DimensionMismatchError(f"expected {2 * (n + m)} coordinates, got {z.shape}")
        return cls(z[:n], z[n : 2 * n], z[2 * n : 2 * n + m], z[2 * n + m :], chart)


def _as_vector(z):
    return z.vector() if isinstance(z, PhasePoint) else np.asarray(z, dtype=float)


@dataclass(frozen=True, eq=False)
class PoissonStructure:
    """Structure matrix evaluator on ``2(n + m)`` coordinates.

    ``kind`` is one of twisted, canonical, abelian-twisted, abelian-canonical.
    ``chart`` says which momentum (``p`` or ``p~``) the matrix acts on.
    """

    n: int
    m: int
    matrix_fn: Callable
    kind: str
    chart: str

    @property
    def dim(self) -> int:
        return 2 * (self.n + self.m)

    def __call__(self, z):
        z = _as_vector(z)
        if z.shape != (self.dim,):
            raise DimensionMismatchError(f"structure of dimension {self.dim} evaluated at {z.shape[0]} coordinates")
        return self.matrix_fn(z)

    def index(self, block: str, i: int) -> int:
        """0-based position of coordinate ``block[i]`` (``i`` is 1-based)."""
        n, m = self.n, self.m
        offsets = {"q": (0, n), "p": (n, n), "u": (2 * n, m), "y": (2 * n + m, m)}
        start, size = offsets[block]
        if not 1 <= i <= size:
            raise IndexError(f"{block}{i} out of range 1..{size}")
        return start + i - 1


def _base_matrix(n, m, z, alg):
    """Blocks shared by both charts: {q,p}, {u,y} and the Lie-Poisson {y,y}."""
    N = 2 * (n + m)
    U = np.zeros((N, N))
    U[np.arange(n), n + np.arange(n)] = 1.0
    U[2 * n + np.arange(m), 2 * n + m + np.arange(m)] = 1.0
    if m and not alg.is_abelian:
        y = z[2 * n + m :]
        yy = -np.einsum("rsk,r->sk", alg.c, y)
        U[2 * n + m :, 2 * n + m :] = np.triu(yy, 1)
    return U


def canonical_structure(n: int, m: int, alg: LieAlgebraSpec | None = None) -> PoissonStructure:
    alg = alg if alg is not None else LieAlgebraSpec.abelian(m)
    if alg.m != m:
        raise DimensionMismatchError(f"algebra dimension {alg.m} does not match m = {m}")

    def matrix(z):
        U = _base_matrix(n, m, z, alg)
        return U - U.T

    kind = "abelian-canonical" if alg.is_abelian else "canonical"
    return PoissonStructure(n, m, matrix, kind, "canonical")


def twisted_structure(field: GaugeFieldSpec, alg: LieAlgebraSpec | None = None,
                      color_coupling: bool = True) -> PoissonStructure:
    """Brackets in the original momenta ``p`` for a particle in ``field``.

    ``color_coupling=False`` drops the ``{p, y}`` entries; for nonabelian
    algebras that structure is not equivalent to the canonical one.
    Without a potential (direct-curvature fields) the ``{p, u}`` entries are
    set to zero, which only affects the untracked ``u`` dynamics.
    """
    alg = alg if alg is not None else field.algebra
    if alg.m != field.m:
        raise DimensionMismatchError(f"algebra dimension {alg.m} does not match field m = {field.m}")
    if not np.array_equal(alg.c, field.algebra.c):
        raise PreconditionError("field curvature was built for a different algebra")
    n, m = field.n, field.m
    colour = color_coupling and not alg.is_abelian
    if colour and field.potential is None:
        raise WrongModeError("nonabelian colour coupling needs the potential; field is in direct-curvature mode")

    def matrix(z):
        q, y = z[:n], z[2 * n + m :]
        U = _base_matrix(n, m, z, alg)
        U[n : 2 * n, n : 2 * n] = np.triu(np.einsum("s,sij->ij", y, field.F(q)), 1)
        if field.potential is not None:
            A = field.A(q)
            U[n : 2 * n, 2 * n : 2 * n + m] = A.T
            if colour:
                U[n : 2 * n, 2 * n + m :] = np.einsum("si,rsk,r->ik", A, alg.c, y)
        return U - U.T

    kind = "abelian-twisted" if alg.is_abelian else "twisted"
    return PoissonStructure(n, m, matrix, kind, "twisted")


def coordinate(i: int) -> Callable:
    """Observable returning coordinate ``z[i]`` (0-based)."""
    return lambda z: z[i]


def gradient(f: Callable, z, step: float = BRACKET_STEP):
    """Second-order central-difference gradient, step ``step * max(1, |z|)``."""
    z = np.asarray(z, dtype=float)
    h = step * max(1.0, float(np.linalg.norm(z)))
    g = np.empty(z.size)
    for l in range(z.size):
        e = np.zeros_like(z)
        e[l] = h
        fp, fm = f(z + e), f(z - e)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise InvalidFieldError(f"observable is not finite near z along coordinate {l}")
        g[l] = (fp - fm) / (2 * h)
    return g


def gradient4(f: Callable, z, step: float = 1e-4):
    """Fourth-order gradient with per-coordinate step ``step * max(1, |z_l|)``."""
    z = np.asarray(z, dtype=float)
    g = np.empty(z.size)
    for l in range(z.size):
        h = step * max(1.0, abs(z[l]))
        e = np.zeros_like(z)
        e[l] = h
        g[l] = (8 * (f(z + e) - f(z - e)) - (f(z + 2 * e) - f(z - 2 * e))) / (12 * h)
    return g


def bracket(f: Callable, g: Callable, P: PoissonStructure, z) -> float:
    """``{f, g}(z) = grad f . J(z) grad g``."""
    z = _as_vector(z)
    return float(gradient(f, z) @ P(z) @ gradient(g, z))


def structure_derivative(P: PoissonStructure, z, step: float = JACOBI_STEP):
    """``D[l] = d J / d z_l`` by 4th-order differences, per-coordinate step ``step * max(1, |z_l|)``."""
    z = _as_vector(z)
    D = np.empty((z.size, z.size, z.size))
    for l in range(z.size):
        h = step * max(1.0, abs(z[l]))
        e = np.zeros_like(z)
        e[l] = h
        D[l] = (8 * (P(z + e) - P(z - e)) - (P(z + 2 * e) - P(z - 2 * e))) / (12 * h)
    return D


def jacobi_tensor(P: PoissonStructure, z):
    """All cyclic sums ``R[i,j,k] = sum_l J_il d_l J_jk + J_jl d_l J_ki + J_kl d_l J_ij``."""
    z = _as_vector(z)
    J = P(z)
    T = np.einsum("il,ljk->ijk", J, structure_derivative(P, z))
    return T + np.einsum("jki->ijk", T) + np.einsum("kij->ijk", T)


def jacobi_residual(P: PoissonStructure, z, indices) -> float:
    """``{z_i,{z_j,z_k}} + cyclic`` for 0-based coordinate indices."""
    i, j, k = indices
    if len({i, j, k}) != 3:
        raise ValueError(f"Jacobi residual needs three distinct coordinates, got {indices}")
    z = _as_vector(z)
    J = P(z)
    D = structure_derivative(P, z)
    dJ = lambda a, b: D[:, a, b]
    return float(J[i] @ dJ(j, k) + J[j] @ dJ(k, i) + J[k] @ dJ(i, j))


def _require_potential(field):
    if field.potential is None:
        raise WrongModeError("minimal coupling needs the potential; field is in direct-curvature mode")


def minimal_coupling(z: PhasePoint, field: GaugeFieldSpec) -> PhasePoint:
    """Twisted point to canonical point: ``p~ = p + sum_s y_s A^s(q)``."""
    if z.chart != "twisted":
        raise ChartError(f"minimal coupling expects a twisted-chart point, got {z.chart!r}")
    _require_potential(field)
    return PhasePoint(z.q, z.p + z.y @ field.A(z.q), z.u, z.y, "canonical")


def minimal_decoupling(z: PhasePoint, field: GaugeFieldSpec) -> PhasePoint:
    """Inverse of :func:`minimal_coupling`."""
    if z.chart != "canonical":
        raise ChartError(f"expected a canonical-chart point, got {z.chart!r}")
    _require_potential(field)
    return PhasePoint(z.q, z.p - z.y @ field.A(z.q), z.u, z.y, "twisted")


def reduced_two_form(q, xi: CoadjointElement, field: GaugeFieldSpec, alg: LieAlgebraSpec | None = None):
    """Matrix of ``dp ^ dq + sum_{i<j} (e.F)_ij dq^i ^ dq^j`` on ``(q, p)``::

        Omega = [[e.F(q), -I],
                 [   I,    0]]

    Its inverse is the ``(q, p)`` block of the twisted structure at ``y = e``.
    """
    alg = alg if alg is not None else field.algebra
    invariant, M = ad_invariance_check(alg, xi)
    if not invariant:
        raise PreconditionError(
            f"co-adjoint element is not Ad*-invariant (max |c.e| = {np.max(np.abs(M)):.3e})"
        )
    if xi.e.size != field.m:
        raise DimensionMismatchError(f"element has {xi.e.size} entries for m = {field.m}")
    n = field.n
    eF = np.einsum("s,sij->ij", xi.e, field.F(np.asarray(q, dtype=float)))
    I = np.eye(n)
    return np.block([[eF, -I], [I, np.zeros((n, n))]])
