"""
Flat Riesz transforms as periodic Fourier multipliers.

On an ``n x n`` grid over a square cell of side ``L`` the transform ``R_j``
multiplies the discrete Fourier coefficient at frequency ``xi`` by
``-1j * xi_j / |xi|``.  The zero frequency is mapped to 0, so constants are
annihilated.  Nyquist modes are also mapped to 0: their multiplier is not
conjugate-symmetric and would break reality of the output.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError


@dataclass
class PeriodicGridFunction:
    """Samples of a scalar or vector function on a uniform periodic grid.

    ``values`` has shape ``(n, n)`` or ``(3, n, n)``; axis ``-2`` is ``x1``.
    """

    values: np.ndarray
    L: float = 2 * np.pi

    def __post_init__(self):
        self.values = np.asarray(self.values)
        n = self.values.shape[-1]
        if self.values.shape[-2] != n or n & (n - 1):
            raise ConfigError(f"grid must be square with a power-of-two side, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("non-finite samples")

    @property
    def n(self):
        return self.values.shape[-1]

    def coords(self):
        x = self.L * np.arange(self.n) / self.n
        return np.meshgrid(x, x, indexing="ij")

    def like(self, values):
        return PeriodicGridFunction(values, self.L)


def frequencies(n, L=2 * np.pi, nyquist=False):
    """Angular frequency grids ``(xi1, xi2)``; optionally flag Nyquist modes."""
    k = np.fft.fftfreq(n, d=L / (2 * np.pi * n))
    X1, X2 = np.meshgrid(k, k, indexing="ij")
    if nyquist:
        kint = np.fft.fftfreq(n, d=1.0 / n)
        ny = np.abs(kint) == n // 2
        mask = ny[:, None] | ny[None, :]
        return X1, X2, mask
    return X1, X2


@dataclass
class MultiplierOperator:
    """Fourier multiplier ``f -> ifft(symbol(xi) * fft(f))``.

    ``symbol`` maps arrays ``(xi1, xi2)`` to complex values of the same
    shape.  Zero and Nyquist modes are set to ``zero_mode``/0.
    """

    symbol: Callable
    zero_mode: complex = 0.0

    def multiplier(self, n, L):
        X1, X2, ny = frequencies(n, L, nyquist=True)
        m = np.zeros(X1.shape, complex)
        nz = (X1 != 0) | (X2 != 0)
        m[nz] = self.symbol(X1[nz], X2[nz])
        m[~nz] = self.zero_mode
        m[ny] = 0.0
        return m

    def __call__(self, f: PeriodicGridFunction) -> PeriodicGridFunction:
        m = self.multiplier(f.n, f.L)
        out = np.fft.ifft2(m * np.fft.fft2(f.values, axes=(-2, -1)), axes=(-2, -1))
        if np.isrealobj(f.values):
            out = out.real
        return f.like(out)


def riesz_multiplier(j):
    if j not in (1, 2):
        raise ConfigError(f"Riesz index must be 1 or 2, got {j}")

    def sym(x1, x2):
        return -1j * (x1 if j == 1 else x2) / np.hypot(x1, x2)

    return MultiplierOperator(sym)


def riesz_apply(j: int, f: PeriodicGridFunction) -> PeriodicGridFunction:
    """Apply the flat Riesz transform ``R_j`` (``j`` in ``{1, 2}``) to ``f``."""
    return riesz_multiplier(j)(f)


def halfspace_T_apply(f: PeriodicGridFunction) -> PeriodicGridFunction:
    """Apply ``[[0, 0, R1], [0, 0, R2], [-R1, -R2, 0]]`` to a vector field."""
    v = f.values
    if v.ndim != 3 or v.shape[0] != 3:
        raise ConfigError("half-space operator needs a three-component field")
    r1 = riesz_apply(1, f.like(v[2])).values
    r2 = riesz_apply(2, f.like(v[2])).values
    s = riesz_apply(1, f.like(v[0])).values + riesz_apply(2, f.like(v[1])).values
    return f.like(np.stack([r1, r2, -s]))


def halfspace_symbol(xi):
    """3x3 symbol matrix of the half-space operator at frequency ``xi != 0``."""
    xi = np.asarray(xi, float)
    a, b = -1j * xi / np.linalg.norm(xi)
    return np.array([[0, 0, a], [0, 0, b], [-a, -b, 0]])


def halfspace_matrix(n, L=2 * np.pi):
    """Dense ``3n^2 x 3n^2`` matrix of the half-space operator (small ``n`` only).

    Unknowns are ordered node-major (``3 * node + component``), matching
    :class:`elastic_np.nystrom.OperatorMatrix`.
    """
    N = n * n
    cols = []
    for comp in range(3):
        for k in range(N):
            v = np.zeros((3, n, n))
            v[comp].flat[k] = 1.0
            cols.append(halfspace_T_apply(PeriodicGridFunction(v, L)).values.reshape(3, N).T.ravel())
    M = np.array(cols).T  # columns in component-major order
    perm = (np.arange(N)[:, None] + N * np.arange(3)[None, :]).ravel()
    return M[:, perm]


def bandlimited_field(rng, n, kmax=8, zero_mean=True, components=None, L=2 * np.pi):
    """Random real trigonometric polynomial with modes ``|k_i| <= kmax``."""
    shape = (n, n) if components is None else (components, n, n)
    c = np.zeros(shape, complex)
    ks = np.r_[0:kmax + 1, n - kmax:n]
    sub = (slice(None),) if components else ()
    idx = np.ix_(ks, ks)
    c[sub + idx] = rng.standard_normal(c[sub + idx].shape) + 1j * rng.standard_normal(c[sub + idx].shape)
    f = np.fft.ifft2(c, axes=(-2, -1)).real
    if zero_mean:
        f -= f.mean(axis=(-2, -1), keepdims=True)
    return PeriodicGridFunction(f / np.abs(f).max(), L)
