"""Structure constants and co-adjoint elements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError, PreconditionError

JACOBI_TOL = 1e-12


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for (i, j, k), sign in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[i, j, k] = sign
    return eps


@dataclass(frozen=True, eq=False)
class LieAlgebraSpec:
    """Lie algebra given by structure constants ``c[r, s, k] = c^r_{sk}``,
    i.e. ``[a_s, a_k] = sum_r c^r_{sk} a_r``.

    Construction rejects constants that are not antisymmetric in the lower
    indices or violate the Jacobi identity by more than 1e-12.
    """

    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise DimensionMismatchError(f"structure constants need shape (m, m, m), got {c.shape}")
        object.__setattr__(self, "c", c)
        if not np.array_equal(c, -np.swapaxes(c, 1, 2)):
            raise PreconditionError("structure constants are not antisymmetric: c^r_{sk} != -c^r_{ks}")
        err = float(np.max(np.abs(self.jacobi_defect()), initial=0.0))
        if err > JACOBI_TOL:
            raise PreconditionError(f"structure constants violate the Jacobi identity by {err:.3e}")

    @property
    def m(self) -> int:
        return self.c.shape[0]

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.c)

    def jacobi_defect(self):
        """``sum_l c^l_{sk} c^r_{lt} + c^l_{kt} c^r_{ls} + c^l_{ts} c^r_{lk}`` indexed ``[r, s, k, t]``."""
        c = self.c
        return (
            np.einsum("lsk,rlt->rskt", c, c)
            + np.einsum("lkt,rls->rskt", c, c)
            + np.einsum("lts,rlk->rskt", c, c)
        )

    def bracket(self, x, y):
        """Lie bracket of coefficient vectors."""
        return np.einsum("rsk,s,k->r", self.c, x, y)

    @classmethod
    def abelian(cls, m: int):
        return cls(np.zeros((m, m, m)), f"abelian({m})")

    @classmethod
    def so3(cls):
        """``[a_s, a_k] = eps_{skr} a_r``; identical constants serve su(2)."""
        return cls(levi_civita(), "so(3)")

    su2 = so3

    @classmethod
    def affine2(cls):
        """Two-dimensional affine algebra ``[a_1, a_2] = a_2``."""
        c = np.zeros((2, 2, 2))
        c[1, 0, 1] = 1.0
        c[1, 1, 0] = -1.0
        return cls(c, "aff(1)")


@dataclass(frozen=True, eq=False)
class CoadjointElement:
    """``xi = sum_s e_s a^s`` in the dual basis."""

    e: np.ndarray

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.e, dtype=float))
        if e.ndim != 1 or not np.all(np.isfinite(e)):
            raise PreconditionError("co-adjoint coefficients must be a finite vector")
        object.__setattr__(self, "e", e)


def ad_invariance_check(alg: LieAlgebraSpec, xi: CoadjointElement, tol=1e-12):
    """Whether ``xi`` is fixed by the co-adjoint action.

    Returns ``(invariant, M)`` with ``M[s, k] = sum_r c^r_{sk} e_r``; the element
    is invariant iff every entry vanishes (to ``tol``).
    """
    e = xi.e
    if e.shape != (alg.m,):
        raise DimensionMismatchError(f"co-adjoint element has {e.size} entries for an algebra of dimension {alg.m}")
    M = np.einsum("rsk,r->sk", alg.c, e)
    return bool(np.max(np.abs(M), initial=0.0) <= tol), M
