"""
Dense Nystrom discretization of the elastic NP operator and its relatives.

Three quadrature schemes are available for sphere-like surfaces:

``"spectral"`` (default)
    For every target node the surface is re-parametrized in polar
    coordinates centred at the target (a rotated spherical chart).  The
    strongly singular part of ``K1`` is odd in the polar angle and cancels
    exactly under the symmetric angular rule; the density is interpolated
    at the polar nodes by its spherical-harmonic hyperinterpolant of degree
    ``resolution - 1``.  Grid functions above that degree are annihilated.
``"local"``
    Singularity subtraction: off-diagonal blocks are kernel values times
    weights and the diagonal block is chosen so that constant densities are
    integrated by the polar rule.  Low order; kept as a cross-check.
``"regularized"``
    Kernel denominators ``|x-y|^2 + eps^2`` with Richardson extrapolation
    over ``eps in {h, h/2}``.
"""

from dataclasses import dataclass, field
import struct

import numpy as np
from scipy.special import sph_harm_y_all

from . import lame
from .errors import ConfigError
from .geometry import Chart, GeometryError, Surface

KERNEL_TAGS = ("K", "T", "K2", "S", "Ktr")
_MAGIC = b"ENPOPMAT"


@dataclass
class QuadratureGrid:
    """Surface nodes with positive area weights.

    ``dirs`` are the unit-sphere directions the nodes are images of (``None``
    for flat charts); ``coords`` are the chart coordinates ``(theta, phi)``
    of the global spherical chart, or ``(u1, u2)`` for flat charts.
    """

    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    coords: np.ndarray
    chart_id: np.ndarray
    h: float
    resolution: int
    shape: tuple
    surface: Surface = None
    chart: Chart = None
    dirs: np.ndarray = None
    sphere_weights: np.ndarray = None

    @property
    def n(self):
        return len(self.weights)

    @property
    def area(self):
        return float(self.weights.sum())

    def weights3(self):
        """Weights repeated per vector component (length ``3N``)."""
        return np.repeat(self.weights, 3)


def build_grid(surface, resolution: int) -> QuadratureGrid:
    """Product grid: Gauss-Legendre in ``cos(theta)`` times trapezoid in ``phi``.

    ``resolution`` is the number of polar nodes; there are ``2 * resolution``
    azimuthal nodes, so ``N = 2 * resolution**2``.  A flat periodic
    :class:`Chart` gives a ``resolution x resolution`` trapezoid grid instead.
    """
    if int(resolution) != resolution or resolution < 8:
        raise ConfigError(f"resolution must be an integer >= 8, got {resolution}")
    resolution = int(resolution)
    if isinstance(surface, Chart):
        return _flat_grid(surface, resolution)

    t, w = np.polynomial.legendre.leggauss(resolution)
    theta = np.arccos(t)
    nphi = 2 * resolution
    phi = 2 * np.pi * np.arange(nphi) / nphi
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    st = np.sin(TH)
    dirs = np.stack([st * np.cos(PH), st * np.sin(PH), np.cos(TH)], -1).reshape(-1, 3)
    sw = np.outer(w, np.full(nphi, 2 * np.pi / nphi)).ravel()
    x, n, J = surface.geometry(dirs)
    grid3 = x.reshape(resolution, nphi, 3)
    h = max(
        np.linalg.norm(np.diff(grid3, axis=0), axis=-1).max(),
        np.linalg.norm(grid3 - np.roll(grid3, 1, axis=1), axis=-1).max(),
    )
    coords = np.stack([TH.ravel(), PH.ravel()], -1)
    return QuadratureGrid(x, n, sw * J, coords, np.zeros(len(sw), int), float(h), resolution,
                          (resolution, nphi), surface=surface, dirs=dirs, sphere_weights=sw)


def _flat_grid(chart: Chart, n: int) -> QuadratureGrid:
    if not all(chart.periodic):
        raise ConfigError("flat grids need a periodic chart")
    (a1, b1), (a2, b2) = chart.bounds
    u1 = a1 + (b1 - a1) * np.arange(n) / n
    u2 = a2 + (b2 - a2) * np.arange(n) / n
    U = np.stack(np.meshgrid(u1, u2, indexing="ij"), -1).reshape(-1, 2)
    x = chart.fn(U)
    D = chart.jac(U)
    N = np.cross(D[..., 0], D[..., 1])
    J = np.linalg.norm(N, axis=-1)
    w = J * (b1 - a1) * (b2 - a2) / n**2
    h = max((b1 - a1), (b2 - a2)) / n
    return QuadratureGrid(x, chart.orientation * N / J[:, None], w, U, np.zeros(len(w), int), float(h), n,
                          (n, n), chart=chart)


@dataclass
class SpectralBasis:
    """Real orthonormal spherical harmonics of degree ``< resolution`` on a grid.

    ``Y`` (``N x L``) holds basis values at the nodes; ``C`` (``L x N``) maps
    nodal values to the coefficients of their hyperinterpolant, so
    ``Y @ C`` is the projection onto the resolved degrees.
    """

    Y: np.ndarray
    C: np.ndarray
    degree: int

    @property
    def L(self):
        return self.Y.shape[1]


class OperatorMatrix:
    """Dense ``3N x 3N`` matrix acting on nodal vector values.

    Row/column ``3*i + a`` is component ``a`` at node ``i``.  Spectral
    assemblies also carry the factorization ``matrix = factor @ C3`` where
    ``factor`` (``3N x 3L``) holds the operator applied to the resolved
    basis fields and ``C3`` applies ``basis.C`` to each component.
    Coefficients are ordered component-major (``b * L + l``).  The dense
    matrix is formed on first access.
    """

    def __init__(self, matrix, tag, grid, params=None, factor=None, basis=None, meta=None):
        self._matrix = matrix
        self.tag = tag
        self.grid = grid
        self.params = params
        self.factor = factor
        self.basis = basis
        self.meta = dict(meta or {})

    def __repr__(self):
        return f"OperatorMatrix(tag={self.tag!r}, N={self.grid.n}, scheme={self.meta.get('scheme')!r})"

    @property
    def matrix(self):
        if self._matrix is None:
            N, L = self.grid.n, self.basis.L
            F = self.factor.reshape(3 * N, 3, L)
            self._matrix = np.einsum("rbl,lj->rjb", F, self.basis.C, optimize=True).reshape(3 * N, 3 * N)
        return self._matrix

    @property
    def shape(self):
        n = 3 * self.grid.n
        return (n, n)

    @property
    def null_dim(self):
        """Dimension of the annihilated (unresolved) subspace."""
        return 0 if self.basis is None else 3 * (self.grid.n - self.basis.L)

    @property
    def coeff(self):
        """Operator on resolved coefficients (``3L x 3L``); ``None`` for local schemes."""
        if self.factor is None:
            return None
        N, L = self.grid.n, self.basis.L
        F = self.factor.reshape(N, 3, 3 * L)
        return np.einsum("li,iac->alc", self.basis.C, F, optimize=True).reshape(3 * L, 3 * L)

    def weighted(self, projected=False):
        """Matrix of the same operator in the weighted-L2 orthonormal basis."""
        s = np.sqrt(self.grid.weights3())
        M = self.projected() if projected else self.matrix
        return s[:, None] * M / s[None, :]

    def projected(self):
        """Resolved-space matrix ``Y3 @ coeff @ C3``: the output is hyperinterpolated too.

        Has the same nonzero spectrum as :attr:`matrix`.  Only defined for
        spectral assemblies.
        """
        if self.factor is None:
            raise ConfigError("projection needs a spectral assembly")
        N, L = self.grid.n, self.basis.L
        A = self.coeff.reshape(3, L, 3, L)
        Y, C = self.basis.Y, self.basis.C
        return np.einsum("il,albm,mj->iajb", Y, A, C, optimize=True).reshape(3 * N, 3 * N)

    def block(self, i, j):
        return self.matrix[3 * i:3 * i + 3, 3 * j:3 * j + 3]

    def matvec(self, x):
        """Apply to a flat nodal vector of length ``3N`` (uses the factorization when present)."""
        x = np.asarray(x)
        if self.factor is None or self._matrix is not None:
            return self.matrix @ x
        N = self.grid.n
        c = (self.basis.C @ x.reshape(N, 3)).T.reshape(-1)
        return self.factor @ c

    def apply(self, f):
        """Apply to a nodal field of shape ``(N, 3)``."""
        f = np.asarray(f, float)
        return self.matvec(f.reshape(-1)).reshape(-1, 3)

    def to_binary(self, path):
        """Row-major float64 payload after a 32-byte header (magic, N, tag, reserved)."""
        N = self.grid.n
        header = _MAGIC + struct.pack("<Q", N) + self.tag.encode("ascii").ljust(8, b"\0")[:8] + bytes(8)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(self.matrix, dtype="<f8").tobytes())

    def to_csv(self, path, max_n=200):
        if self.grid.n > max_n:
            raise ValueError(f"CSV export is for small matrices (N <= {max_n})")
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17g")


def read_binary(path):
    """Read a matrix written by :meth:`OperatorMatrix.to_binary`; returns ``(tag, matrix)``."""
    with open(path, "rb") as fh:
        header = fh.read(32)
        if header[:8] != _MAGIC:
            raise ValueError(f"{path}: not an operator matrix file")
        (N,) = struct.unpack("<Q", header[8:16])
        tag = header[16:24].rstrip(b"\0").decode("ascii")
        data = np.frombuffer(fh.read(), dtype="<f8")
    return tag, data.reshape(3 * N, 3 * N).copy()


# -- spherical harmonics -----------------------------------------------------


def sh_basis(degree, dirs):
    """Orthonormal complex spherical harmonics up to ``degree`` at unit vectors.

    Returns ``(Y, m)``: ``Y`` has shape ``(P, (degree+1)**2)`` with columns
    ordered by ``(l, m)``, ``m = -l..l``; ``m`` lists the order of each column.
    """
    dirs = np.asarray(dirs, float)
    th = np.arccos(np.clip(dirs[..., 2], -1.0, 1.0))
    ph = np.arctan2(dirs[..., 1], dirs[..., 0])
    allY = sph_harm_y_all(degree, degree, th, ph)
    width = 2 * degree + 1
    li, mi = [], []
    for l in range(degree + 1):
        for m in range(-l, l + 1):
            li.append(l)
            mi.append(m)
    li, mi = np.array(li), np.array(mi)
    Y = allY[li, mi % width]
    return np.moveaxis(Y, 0, -1), mi


def real_sh_transform(degree):
    """Unitary ``U`` with ``Y_complex @ U`` real (same ``(l, m)`` column order).

    ``m > 0`` columns are cosine-type and ``m < 0`` sine-type combinations
    of ``Y_l^m`` and ``Y_l^-m``.
    """
    L = (degree + 1) ** 2
    U = np.zeros((L, L), complex)
    r2 = np.sqrt(0.5)
    for l in range(degree + 1):
        base = l * l + l
        U[base, base] = 1.0
        for m in range(1, l + 1):
            sgn = (-1) ** m
            U[base + m, base + m] = sgn * r2
            U[base - m, base + m] = r2
            U[base + m, base - m] = sgn * r2 / 1j
            U[base - m, base - m] = -r2 / 1j
    return U


def _polar_rule(n_radial, n_angular):
    """Unit-sphere polar rule centred at the north pole: directions and weights."""
    if n_angular % 2:
        raise ConfigError("angular count must be even for the odd-symmetry cancellation")
    tg, wg = np.polynomial.legendre.leggauss(n_radial)
    tq = (tg + 1) * np.pi / 2
    wq = wg * np.pi / 2 * np.sin(tq)
    pq = 2 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    TQ, PQ = np.meshgrid(tq, pq, indexing="ij")
    st = np.sin(TQ)
    local = np.stack([st * np.cos(PQ), st * np.sin(PQ), np.cos(TQ)], -1).reshape(-1, 3)
    return local, np.outer(wq, np.full(n_angular, 2 * np.pi / n_angular)).ravel()


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _kernel_values(tag, p, d, n_t, eps=0.0):
    if tag == "K":
        return lame.conormal_batch(p, d, n_t, eps)
    if tag == "T":
        return lame.k1_batch(d, n_t, eps)
    if tag == "K2":
        return lame.k2_batch(p, d, n_t, eps)
    if tag == "Ktr":
        return lame.kelvin_traction_batch(p, d, n_t, eps)
    if tag == "S":
        if eps:
            r2 = np.einsum("...k,...k->...", d, d) + eps**2
            r = np.sqrt(r2)[..., None, None]
            return -(p.alpha1 / (4 * np.pi)) * np.eye(3) / r - (p.alpha2 / (4 * np.pi)) * (
                d[..., :, None] * d[..., None, :]) / r**3
        return lame.kelvin_batch(p, d)
    raise KeyError(f"unknown kernel tag {tag!r}")


def _ring_sweep(grid, tags, p, n_radial, n_angular, visit):
    """Loop over latitude rings; for each, evaluate kernels on rotated polar rules.

    ``visit(k, kw, local_Y_dirs)`` receives ``kw[tag]`` of shape
    ``(nphi, P, 3, 3)``: kernel times surface quadrature weight for every
    target in ring ``k``.
    """
    surface = grid.surface
    ntheta, nphi = grid.shape
    local, wq = _polar_rule(n_radial, n_angular)
    theta = grid.coords[::nphi, 0]
    phis = grid.coords[:nphi, 1]
    for k in range(ntheta):
        th = theta[k]
        R0 = np.array([[np.cos(th), 0.0, np.sin(th)], [0.0, 1.0, 0.0], [-np.sin(th), 0.0, np.cos(th)]])
        base = local @ R0.T
        dirs = np.stack([base @ _rz(a).T for a in phis])  # (nphi, P, 3)
        y, _, J = surface.geometry(dirs)
        idx = k * nphi + np.arange(nphi)
        d = grid.nodes[idx][:, None, :] - y
        n_t = np.broadcast_to(grid.normals[idx][:, None, :], d.shape)
        kw = {t: _kernel_values(t, p, d, n_t) * (wq * J)[..., None, None] for t in tags}
        visit(k, kw, base)


def _spectral(grid, tags, p, n_radial, n_angular):
    degree = grid.resolution - 1
    N = grid.n
    ntheta, nphi = grid.shape
    Ygrid, mvals = sh_basis(degree, grid.dirs)
    L = Ygrid.shape[1]
    U = real_sh_transform(degree)
    C = (Ygrid.conj() * grid.sphere_weights[:, None]).T  # hyperinterpolation (L, N)
    basis = SpectralBasis((Ygrid @ U).real.copy(), (U.conj().T @ C).real.copy(), degree)
    phase = np.exp(1j * np.outer(grid.coords[:nphi, 1], mvals))  # (nphi, L)
    factors = {t: np.empty((N, 3, 3, L)) for t in tags}

    def visit(k, kw, base):
        Yq, _ = sh_basis(degree, base)
        for t in tags:
            block = (kw[t].transpose(0, 2, 3, 1).reshape(nphi * 9, -1) @ Yq).reshape(nphi, 3, 3, L)
            factors[t][k * nphi:(k + 1) * nphi] = ((block * phase[:, None, None, :]) @ U).real

    _ring_sweep(grid, tags, p, n_radial, n_angular, visit)
    return {t: (None, factors[t].reshape(3 * N, 3 * L), basis) for t in tags}


def _local(grid, tags, p, n_radial, n_angular):
    N = grid.n
    ntheta, nphi = grid.shape
    totals = {t: np.empty((N, 3, 3)) for t in tags}

    def visit(k, kw, base):
        for t in tags:
            totals[t][k * nphi:(k + 1) * nphi] = kw[t].sum(axis=1)

    _ring_sweep(grid, tags, p, n_radial, n_angular, visit)
    d = grid.nodes[:, None, :] - grid.nodes[None, :, :]
    n_t = np.broadcast_to(grid.normals[:, None, :], d.shape)
    idx = np.arange(N)
    out = {}
    with np.errstate(divide="ignore", invalid="ignore"):
        for t in tags:
            B = _kernel_values(t, p, d, n_t)
            B[idx, idx] = 0.0
            B *= grid.weights[None, :, None, None]
            B[idx, idx] = totals[t] - B.sum(axis=1)
            out[t] = (B.transpose(0, 2, 1, 3).reshape(3 * N, 3 * N), None, None)
    return out


def _regularized(grid, tags, p):
    N = grid.n
    d = grid.nodes[:, None, :] - grid.nodes[None, :, :]
    n_t = np.broadcast_to(grid.normals[:, None, :], d.shape)
    out = {}
    for t in tags:
        mats = []
        for eps in (grid.h, grid.h / 2):
            B = _kernel_values(t, p, d, n_t, eps=eps) * grid.weights[None, :, None, None]
            mats.append(B.transpose(0, 2, 1, 3).reshape(3 * N, 3 * N))
        out[t] = (2 * mats[1] - mats[0], None, None)
    return out


def assemble(p: lame.LameParameters, grid: QuadratureGrid, tags=("K",), scheme="spectral",
             n_radial=None, n_angular=None):
    """Assemble several operators in one sweep.

    Parameters
    ----------
    tags : sequence of {"K", "T", "K2", "S", "Ktr"}
        ``K`` the NP operator, ``T`` the ``K1`` part, ``K2`` the weakly
        singular part (``K = k0*T - K2``), ``S`` the single layer and
        ``Ktr`` the operator of the directly differentiated Kelvin
        traction (see :func:`lame.kelvin_traction`).
    scheme : {"spectral", "local", "regularized"}
    n_radial, n_angular : int, optional
        Polar rule sizes; default ``resolution`` and ``2 * resolution``.

    Returns
    -------
    dict of OperatorMatrix
    """
    if grid.surface is None:
        raise ConfigError("Nystrom assembly needs a closed surface grid")
    for t in tags:
        if t not in KERNEL_TAGS:
            raise KeyError(f"unknown operator tag {t!r}")
    n_radial = n_radial or grid.resolution
    n_angular = n_angular or 2 * grid.resolution
    if scheme == "spectral":
        raw = _spectral(grid, tags, p, n_radial, n_angular)
    elif scheme == "local":
        raw = _local(grid, tags, p, n_radial, n_angular)
    elif scheme == "regularized":
        raw = _regularized(grid, tags, p)
    else:
        raise ConfigError(f"unknown quadrature scheme {scheme!r}")
    meta = {"scheme": scheme, "n_radial": n_radial, "n_angular": n_angular}
    return {t: OperatorMatrix(M, t, grid, p, F, basis, meta) for t, (M, F, basis) in raw.items()}


def assemble_K(p, grid, **kw) -> OperatorMatrix:
    return assemble(p, grid, ("K",), **kw)["K"]


def assemble_T(grid, p=None, **kw) -> OperatorMatrix:
    """``K1`` part; Lame parameters only matter for bookkeeping."""
    return assemble(p or lame.LameParameters(1.0, 1.0), grid, ("T",), **kw)["T"]


def assemble_K2(p, grid, **kw) -> OperatorMatrix:
    return assemble(p, grid, ("K2",), **kw)["K2"]


def assemble_S(p, grid, **kw) -> OperatorMatrix:
    return assemble(p, grid, ("S",), **kw)["S"]


def composite(op: OperatorMatrix, matrix, tag="composite") -> OperatorMatrix:
    """Wrap a derived dense matrix on the same grid."""
    return OperatorMatrix(matrix, tag, op.grid, op.params, meta=op.meta)


# -- principal-value patch rule ----------------------------------------------


def pv_diagonal_block(chart: Chart, u, kernel="K1", p=None, rho=0.2, n_radial=16, n_angular=32):
    """Polar-rule integral of a kernel against a constant density over a patch.

    The patch is the parameter disk ``|v - u| < rho``.  The ``r dr dalpha``
    area element turns the ``r^-2`` singularity of ``K1`` into an odd
    ``r^-1`` angular integrand, which the symmetric angular rule cancels.

    Parameters
    ----------
    kernel : {"K1", "K2", "K", "S"}
    """
    u = np.asarray(u, float)
    (a1, b1), (a2, b2) = chart.bounds
    for ax, (a, b) in enumerate(chart.bounds):
        if chart.periodic[ax]:
            continue
        if u[ax] - rho <= a or u[ax] + rho >= b:
            raise GeometryError(f"patch of radius {rho} leaves the domain of {chart.name}")
    if n_angular % 2:
        raise ConfigError("angular count must be even")
    tg, wg = np.polynomial.legendre.leggauss(n_radial)
    r = (tg + 1) * rho / 2
    wr = wg * rho / 2
    al = 2 * np.pi * (np.arange(n_angular // 2) + 0.5) / n_angular
    R, A = np.meshgrid(r, al, indexing="ij")
    off = _symmetric_offsets(u, np.stack([R * np.cos(A), R * np.sin(A)], -1))
    W = (wr[:, None] * R) * (2 * np.pi / n_angular)
    x = chart.fn(u)
    D0 = chart.jac(u)
    N0 = np.cross(D0[:, 0], D0[:, 1])
    n = chart.orientation * N0 / np.linalg.norm(N0)
    p = p or lame.LameParameters(1.0, 1.0)
    tag = {"K1": "T", "K2": "K2", "K": "K", "S": "S"}[kernel]
    total = 0.0
    # antipodal nodes are summed pairwise so odd integrands cancel exactly on flat patches
    for sign in (1.0, -1.0):
        V = u + sign * off
        Dv = chart.jac(V)
        J = np.linalg.norm(np.cross(Dv[..., 0], Dv[..., 1]), axis=-1)
        d = x - chart.fn(V)
        total = total + (W * J)[..., None, None] * _kernel_values(tag, p, d, np.broadcast_to(n, d.shape))
    return total.sum(axis=(0, 1))


def _symmetric_offsets(u, v, sweeps=4):
    """Nudge offsets by rounding so that ``u + v`` and ``u - v`` are exact in floating point."""
    for _ in range(sweeps):
        v = (u + v) - u
        v = u - (u - v)
        if np.array_equal((u + v) - u, v) and np.array_equal(u - (u - v), v):
            break
    return v


# -- flat charts ---------------------------------------------------------------

#: polar-rule settings for the flat-chart T_h (near radius in cells, nodes, spline order)
FLAT_QUADRATURE = {"rho_cells": 16, "n_radial": 24, "n_angular": 16, "spline_order": 5}


def flat_T_apply(grid, f, **quadrature):
    """``T_h`` on a flat chart for a compactly supported three-component density.

    With the constant normal ``n = s e3`` (``s`` the chart orientation)
    ``K1 f = s [e3 (d . f) - d f3] / (2 pi |d|^3)``, so every component is
    a classical Riesz-type principal value evaluated by the polar rule of
    :func:`symbols.surface_riesz_apply`.  The chart ``orientation=-1`` is
    the boundary of the upper half-space with its outward normal.

    Parameters
    ----------
    grid : symbols.ChartGrid
        Grid on a flat chart.
    f : ndarray, shape (n1, n2, 3)
        Density vanishing near the edge of the grid window (extended by zero).
    """
    from .symbols import surface_riesz_apply

    f = np.asarray(f, float)
    if f.shape != tuple(grid.n) + (3,):
        raise ConfigError("density must have shape grid.n + (3,)")
    opts = {**FLAT_QUADRATURE, **quadrature}
    s = grid.chart.orientation

    def R(j, g):
        if not np.any(g):
            return np.zeros_like(g)
        return surface_riesz_apply(grid.chart, j, g, grid, **opts)

    out = np.empty_like(f)
    out[..., 0] = -s * R(1, f[..., 2])
    out[..., 1] = -s * R(2, f[..., 2])
    out[..., 2] = s * (R(1, f[..., 0]) + R(2, f[..., 1]))
    return out
