"""Periodic uniform grids and discrete vector calculus.

Fields are sampled on a uniform grid over a box of ``lengths`` with periodic
boundary conditions, in 1, 2 or 3 space dimensions. Vector fields always carry
three components; derivatives along axes the grid does not have are zero.

Two backends share one interface:

``spectral``
    Fourier differentiation. The Nyquist mode of every axis is treated as
    non-differentiable (its first-derivative symbol is zero), so that
    ``laplacian == div(grad(.))`` holds to roundoff on arbitrary data.
``central2``
    Second-order central differences ``(f[i+1] - f[i-1]) / 2h``. The Laplacian
    is the composition ``div(grad(.))``, i.e. the wide ``(f[i+2] - 2f[i] +
    f[i-2]) / 4h^2`` stencil, so the same identity holds.

For both backends every first-derivative operator is a Fourier multiplier
``i*s(k)``; the multipliers commute, which makes ``div(curl(.)) = 0`` and
``curl(grad(.)) = 0`` exact up to roundoff. Inverse operators are solved with
the backend's own symbol. The modes where all symbols vanish (the mean and the
per-axis Nyquist "checkerboard" modes, 2**d modes in total) form the common null
space; inverses require a zero mean and project the remaining null modes out.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import (
    ConstraintViolationError,
    GridMismatchError,
    InvalidFieldError,
    UnsolvableOnTorusError,
)

BACKENDS = ("spectral", "central2")
THREADS_ENV = "SYMGAUGE_THREADS"


def fft_workers():
    """Worker count for FFTs, taken from ``$SYMGAUGE_THREADS`` (default 1)."""
    value = os.environ.get(THREADS_ENV, "").strip()
    if not value:
        return 1
    try:
        n = int(value)
    except ValueError:
        return 1
    return n if n != 0 else 1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid.

    Attributes:
        shape: points per axis (1 to 3 axes, each >= 4; even for spectral).
        lengths: physical box length per axis, in light-speed units.
        backend: ``"spectral"`` or ``"central2"``.
    """

    shape: tuple
    lengths: tuple
    backend: str = "spectral"

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        lengths = tuple(float(x) for x in np.atleast_1d(self.lengths))
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lengths", lengths)
        if not 1 <= len(shape) <= 3:
            raise ValueError(f"grid must have 1 to 3 axes, got {len(shape)}")
        if len(lengths) != len(shape):
            raise ValueError(f"got {len(lengths)} lengths for {len(shape)} axes")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        for axis, n in enumerate(shape):
            if n < 4:
                raise ValueError(f"axis {axis}: extent {n} < 4")
            if self.backend == "spectral" and n % 2:
                raise ValueError(f"axis {axis}: spectral backend needs an even extent, got {n}")
        for axis, length in enumerate(lengths):
            if not np.isfinite(length) or length <= 0:
                raise ValueError(f"axis {axis}: length must be positive, got {length}")

    @classmethod
    def cube(cls, n, dim=3, length=2 * np.pi, backend="spectral"):
        return cls((n,) * dim, (length,) * dim, backend)

    def with_backend(self, backend):
        return Grid(self.shape, self.lengths, backend)

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def spacing(self):
        return tuple(length / n for length, n in zip(self.lengths, self.shape))

    @property
    def h_min(self):
        return min(self.spacing)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    @property
    def size(self):
        return int(np.prod(self.shape))

    def coords(self):
        """Open-mesh coordinate arrays ``x_a = i * h_a``, broadcastable to ``shape``."""
        axes = [np.arange(n) * h for n, h in zip(self.shape, self.spacing)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    @cached_property
    def ops(self):
        if self.backend == "spectral":
            return SpectralOps(self)
        return CentralOps(self)

    def scalar(self, values):
        """Scalar field from an array or from a callable of the coordinates."""
        if callable(values):
            values = np.broadcast_to(values(*self.coords()), self.shape)
        return ScalarField(self, values)

    def vector(self, values):
        """Vector field from a (3, *shape) array or a callable returning 3 components."""
        if callable(values):
            comps = values(*self.coords())
            values = np.stack([np.broadcast_to(np.asarray(c, dtype=float), self.shape) for c in comps])
        return VectorField(self, values)

    def zeros_scalar(self):
        return ScalarField(self, np.zeros(self.shape))

    def zeros_vector(self):
        return VectorField(self, np.zeros((3,) + self.shape))


# --------------------------------------------------------------------------- backends


class _Ops:
    """Raw-array kernels; the public functions below wrap them with field checks."""

    def __init__(self, grid):
        self.grid = grid
        self.d = grid.ndim
        self.axes = tuple(range(-self.d, 0))
        self.workers = fft_workers()
        self.symbols = self._symbols()
        self.lap_symbol = -sum(s * s for s in self.symbols)
        self.null_mask = self.lap_symbol == 0.0
        with np.errstate(divide="ignore"):
            inv = 1.0 / self.lap_symbol
        inv[self.null_mask] = 0.0
        self.inv_lap_symbol = inv
        # Shape of one array in rfft layout.
        self.kshape = self.lap_symbol.shape

    def _integer_modes(self):
        """Per-axis integer mode numbers in rfft layout, each broadcastable."""
        modes = []
        for axis, n in enumerate(self.grid.shape):
            if axis == self.d - 1:
                f = np.arange(n // 2 + 1, dtype=float)
            else:
                f = sfft.fftfreq(n, 1.0 / n)
            shape = [1] * self.d
            shape[axis] = f.size
            modes.append(f.reshape(shape))
        return modes

    def _symbols(self):
        raise NotImplementedError

    def fft(self, a):
        return sfft.rfftn(a, axes=self.axes, workers=self.workers)

    def ifft(self, ahat):
        return sfft.irfftn(ahat, s=self.grid.shape, axes=self.axes, workers=self.workers)

    # Inverses are Fourier solves of the backend's own symbol for both backends.
    def inv_lap(self, a):
        return self.ifft(self.fft(a) * self.inv_lap_symbol)

    def inv_curl(self, b):
        bh = self.fft(b)
        s = self._padded_symbols()
        cross = np.stack([
            s[1] * bh[2] - s[2] * bh[1],
            s[2] * bh[0] - s[0] * bh[2],
            s[0] * bh[1] - s[1] * bh[0],
        ])
        # i (s x b) / |s|^2, with -1/|s|^2 == inv_lap_symbol
        return self.ifft(-1j * cross * self.inv_lap_symbol)

    def _padded_symbols(self):
        zero = np.zeros((1,) * self.d)
        return list(self.symbols) + [zero] * (3 - self.d)

    def null_content(self, a):
        """Largest magnitude among the null-space Fourier coefficients, normalized as a mean."""
        ah = self.fft(a)
        return float(np.max(np.abs(ah[..., self.null_mask]), initial=0.0)) / self.grid.size


class SpectralOps(_Ops):
    def _symbols(self):
        syms = []
        for axis, modes in enumerate(self._integer_modes()):
            n = self.grid.shape[axis]
            k = 2 * np.pi * modes / self.grid.lengths[axis]
            k = np.where(np.abs(modes) == n // 2, 0.0, k)
            syms.append(k)
        return syms

    def deriv(self, a, axis):
        if axis >= self.d:
            return np.zeros_like(a)
        return self.ifft(1j * self.symbols[axis] * self.fft(a))

    def grad(self, a):
        ah = self.fft(a)
        out = np.zeros((3,) + self.grid.shape)
        for axis in range(self.d):
            out[axis] = self.ifft(1j * self.symbols[axis] * ah)
        return out

    def div(self, v):
        vh = self.fft(v[: self.d])
        acc = 1j * self.symbols[0] * vh[0]
        for axis in range(1, self.d):
            acc += 1j * self.symbols[axis] * vh[axis]
        return self.ifft(acc)

    def curl(self, v):
        vh = self.fft(v)
        s = self._padded_symbols()
        out = np.stack([
            s[1] * vh[2] - s[2] * vh[1],
            s[2] * vh[0] - s[0] * vh[2],
            s[0] * vh[1] - s[1] * vh[0],
        ])
        return self.ifft(1j * out)

    def curl_curl(self, v):
        vh = self.fft(v)
        s = self._padded_symbols()
        sdotv = s[0] * vh[0] + s[1] * vh[1] + s[2] * vh[2]
        # curl curl <-> |s|^2 v - s (s.v)
        out = np.stack([-self.lap_symbol * vh[c] - s[c] * sdotv for c in range(3)])
        return self.ifft(out)

    def lap(self, a):
        return self.ifft(self.lap_symbol * self.fft(a))


class CentralOps(_Ops):
    def _symbols(self):
        syms = []
        for axis, modes in enumerate(self._integer_modes()):
            n = self.grid.shape[axis]
            h = self.grid.spacing[axis]
            # exact zeros at n = 0 and n = N/2, so the null space is detected exactly
            syms.append(np.where((2 * modes) % n == 0, 0.0, np.sin(2 * np.pi * modes / n) / h))
        return syms

    def deriv(self, a, axis):
        if axis >= self.d:
            return np.zeros_like(a)
        ax = a.ndim - self.d + axis
        h = self.grid.spacing[axis]
        return (np.roll(a, -1, axis=ax) - np.roll(a, 1, axis=ax)) / (2 * h)

    def grad(self, a):
        out = np.zeros((3,) + self.grid.shape)
        for axis in range(self.d):
            out[axis] = self.deriv(a, axis)
        return out

    def div(self, v):
        acc = self.deriv(v[0], 0)
        for axis in range(1, self.d):
            acc += self.deriv(v[axis], axis)
        return acc

    def curl(self, v):
        d = self.deriv
        return np.stack([
            d(v[2], 1) - d(v[1], 2),
            d(v[0], 2) - d(v[2], 0),
            d(v[1], 0) - d(v[0], 1),
        ])

    def curl_curl(self, v):
        return self.curl(self.curl(v))

    def lap(self, a):
        acc = np.zeros_like(a)
        for axis in range(self.d):
            ax = a.ndim - self.d + axis
            h = self.grid.spacing[axis]
            acc += (np.roll(a, -2, axis=ax) - 2 * a + np.roll(a, 2, axis=ax)) / (4 * h * h)
        return acc


# --------------------------------------------------------------------------- fields


@dataclass(frozen=True, eq=False)
class _Field:
    grid: Grid
    data: np.ndarray

    _leading = ()

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        expected = self._leading + self.grid.shape
        if data.shape != expected:
            raise InvalidFieldError(
                f"{type(self).__name__} on grid {self.grid.shape} needs shape {expected}, got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise InvalidFieldError(f"{type(self).__name__} has non-finite samples")
        object.__setattr__(self, "data", data)

    def _other(self, other):
        if not isinstance(other, type(self)):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError(f"grids differ: {self.grid} vs {other.grid}")
        return other.data

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return type(self)(self.grid, self.data + o)

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return type(self)(self.grid, self.data - o)

    def __neg__(self):
        return type(self)(self.grid, -self.data)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return type(self)(self.grid, self.data * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return type(self)(self.grid, self.data / c)

    def norm_inf(self):
        return float(np.max(np.abs(self.data)))

    def norm_l2(self):
        """Quadrature L2 norm ``sqrt(sum |f|^2 * cell_volume)``."""
        return float(np.sqrt(np.sum(self.data * self.data) * self.grid.cell_volume))


class ScalarField(_Field):
    """One real sample per grid point."""

    def mean(self):
        return float(np.mean(self.data))


class VectorField(_Field):
    """Three real components per grid point; ``data`` has shape ``(3, *grid.shape)``."""

    _leading = (3,)

    def component(self, i):
        return ScalarField(self.grid, self.data[i])

    def mean(self):
        return np.mean(self.data, axis=tuple(range(1, self.data.ndim)))

    @classmethod
    def from_components(cls, grid, *comps):
        if len(comps) != 3:
            raise InvalidFieldError(f"need 3 components, got {len(comps)}")
        return cls(grid, np.stack([np.broadcast_to(np.asarray(c, dtype=float), grid.shape) for c in comps]))


def _require_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grids differ: {g} vs {f.grid}")
    return g


def _check_finite(f):
    if not np.all(np.isfinite(f.data)):
        raise InvalidFieldError(f"{type(f).__name__} has non-finite samples")


def field_scale(*fields):
    """``max(1, largest L-infinity norm)`` used to make tolerances meaningful."""
    return max([1.0] + [f.norm_inf() for f in fields if f is not None])


# --------------------------------------------------------------------------- operators


def grad(w: ScalarField) -> VectorField:
    _check_finite(w)
    return VectorField(w.grid, w.grid.ops.grad(w.data))


def div(v: VectorField) -> ScalarField:
    _check_finite(v)
    return ScalarField(v.grid, v.grid.ops.div(v.data))


def curl(v: VectorField) -> VectorField:
    _check_finite(v)
    return VectorField(v.grid, v.grid.ops.curl(v.data))


def curl_curl(v: VectorField) -> VectorField:
    """``curl(curl(v))``; spectral backend does it in one Fourier pass."""
    _check_finite(v)
    return VectorField(v.grid, v.grid.ops.curl_curl(v.data))


def laplacian(f):
    """Componentwise Laplacian of a scalar or vector field."""
    _check_finite(f)
    return type(f)(f.grid, f.grid.ops.lap(f.data))


def inv_laplacian(w: ScalarField, tol=1e-10) -> ScalarField:
    """Zero-mean ``u`` with ``laplacian(u) = w``.

    Raises UnsolvableOnTorusError when ``|mean(w)| > tol * max(1, |w|_inf)``.
    Null-space checkerboard content of ``w`` (nonzero only for data that is not
    band-limited) is discarded.
    """
    _check_finite(w)
    mean = w.mean()
    if abs(mean) > tol * field_scale(w):
        raise UnsolvableOnTorusError(f"Poisson problem unsolvable on the torus: mean = {mean:.3e}", mean=mean)
    return ScalarField(w.grid, w.grid.ops.inv_lap(w.data))


def inv_curl(b: VectorField, div_tol=1e-8, mean_tol=1e-10) -> VectorField:
    """Divergence-free, zero-mean ``S`` with ``curl(S) = b``."""
    _check_finite(b)
    ops = b.grid.ops
    scale = field_scale(b)
    divergence = float(np.max(np.abs(ops.div(b.data))))
    if divergence > div_tol * scale:
        raise ConstraintViolationError(
            f"inv_curl needs a divergence-free field; max|div b| = {divergence:.3e}", measured=divergence
        )
    means = b.mean()
    if np.max(np.abs(means)) > mean_tol * scale:
        raise UnsolvableOnTorusError(f"inv_curl needs zero-mean components; means = {means}", mean=means)
    return VectorField(b.grid, ops.inv_curl(b.data))


def inner(f, g) -> float:
    """Quadrature ``sum f.g * cell_volume``."""
    if type(f) is not type(g):
        raise InvalidFieldError(f"cannot pair {type(f).__name__} with {type(g).__name__}")
    grid = _require_same_grid(f, g)
    return float(np.vdot(f.data, g.data) * grid.cell_volume)


# --------------------------------------------------------------------------- sampling helpers


def _bandlimited(grid, rng, kmax, leading=()):
    noise = rng.standard_normal(leading + grid.shape)
    ops = grid.ops
    keep = np.ones(ops.kshape, dtype=bool)
    for axis, modes in enumerate(ops._integer_modes()):
        keep &= np.abs(modes) <= kmax
    keep &= ~ops.null_mask
    if not keep.any():
        raise ValueError(f"kmax={kmax} leaves no modes on grid {grid.shape}")
    out = ops.ifft(ops.fft(noise) * keep)
    return out / np.max(np.abs(out))


def random_scalar(grid, rng, kmax=3, amplitude=1.0):
    """Zero-mean band-limited random scalar field: modes with every |n_axis| <= kmax."""
    return ScalarField(grid, amplitude * _bandlimited(grid, rng, kmax))


def random_vector(grid, rng, kmax=3, amplitude=1.0):
    """Zero-mean band-limited random vector field (components normalized jointly)."""
    return VectorField(grid, amplitude * _bandlimited(grid, rng, kmax, (3,)))
