"""
Parametrized closed surfaces, coordinate charts and chart-level quantities.

All fixtures are star-shaped images of the unit sphere, ``x = F(yhat)``, so a
surface is described by the map ``F`` and its Jacobian.  Charts are rotated
spherical-coordinate parametrizations ``Phi(theta, phi) = F(Q s(theta, phi))``
plus a flat chart used for half-space checks.
"""

from dataclasses import dataclass

import numpy as np

#: |d1 Phi x d2 Phi| below this is treated as a degenerate parametrization.
DEGENERATE_TOL = 1e-10


class DomainError(ValueError):
    """Chart coordinates outside the parameter domain."""


class GeometryError(ValueError):
    """Degenerate Jacobian or an otherwise unusable geometric configuration."""


# -- smooth cutoffs ----------------------------------------------------------


def _psi(t):
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    a = _psi(t)
    b = _psi(1.0 - np.asarray(t, float))
    return a / (a + b)


def bump(t, inner, outer):
    """1 for ``t <= inner``, 0 for ``t >= outer``, smooth in between."""
    return 1.0 - smooth_step((np.asarray(t, float) - inner) / (outer - inner))


@dataclass(frozen=True)
class Cutoff:
    """Radial cutoff ``bump(t, inner, outer)`` of a normalized chart radius ``t``."""

    inner: float
    outer: float

    def __call__(self, t):
        return bump(t, self.inner, self.outer)


#: Nested cutoffs: supp chi1 lies inside {chi2 = 1}.
CHI1 = Cutoff(0.35, 0.45)
CHI2 = Cutoff(0.45, 0.55)


# -- metric ------------------------------------------------------------------


@dataclass(frozen=True)
class MetricTensor:
    g11: float
    g12: float
    g22: float

    @property
    def det(self):
        return self.g11 * self.g22 - self.g12**2

    @property
    def inverse(self):
        """``(g^11, g^12, g^22)``."""
        d = self.det
        return self.g22 / d, -self.g12 / d, self.g11 / d

    def matrix(self):
        return np.array([[self.g11, self.g12], [self.g12, self.g22]])

    def inverse_matrix(self):
        a, b, c = self.inverse
        return np.array([[a, b], [b, c]])


# -- charts ------------------------------------------------------------------


class Chart:
    """A parametrization ``Phi: D -> R^3`` on an open rectangle ``D``.

    Parameters
    ----------
    fn : callable
        ``u (..., 2) -> x (..., 3)``.
    jac : callable
        ``u (..., 2) -> DPhi (..., 3, 2)``; columns are ``d1 Phi`` and ``d2 Phi``.
    bounds : tuple
        ``((lo1, hi1), (lo2, hi2))``.
    orientation : {+1, -1}
        Sign applied to ``d1 Phi x d2 Phi`` to obtain the outward normal.
    radius_fn : callable, optional
        Normalized chart radius ``t(u)`` in ``[0, 1]`` used by the cutoffs.
    periodic : tuple of bool
        Whether each parameter direction is periodic (trapezoid-exact).
    """

    def __init__(self, fn, jac, bounds, orientation=1, radius_fn=None, periodic=(False, False), name="chart"):
        self.fn = fn
        self.jac = jac
        self.bounds = tuple(tuple(map(float, b)) for b in bounds)
        self.orientation = 1 if orientation >= 0 else -1
        self.radius_fn = radius_fn
        self.periodic = tuple(periodic)
        self.name = name

    def __repr__(self):
        return f"Chart({self.name!r}, bounds={self.bounds})"

    def contains(self, u):
        u = np.asarray(u, float)
        (a1, b1), (a2, b2) = self.bounds
        ok1 = (u[..., 0] > a1) & (u[..., 0] < b1)
        ok2 = (u[..., 1] > a2) & (u[..., 1] < b2)
        if self.periodic[0]:
            ok1 = np.isfinite(u[..., 0])
        if self.periodic[1]:
            ok2 = np.isfinite(u[..., 1])
        return ok1 & ok2

    def _check(self, u):
        u = np.asarray(u, float)
        if not np.all(self.contains(u)):
            raise DomainError(f"coordinates outside the domain of {self.name}: {self.bounds}")
        return u

    def point(self, u):
        return self.fn(self._check(u))

    def tangents(self, u):
        return self.jac(self._check(u))

    def hessian(self, u, h=1e-5):
        """Second derivatives ``d_a d_b Phi`` by central differences, shape ``(..., 3, 2, 2)``."""
        u = self._check(u)
        out = []
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            out.append((self.jac(u + e) - self.jac(u - e)) / (2 * h))
        return np.stack(out, axis=-1)

    def area_element(self, u):
        D = self.tangents(u)
        return np.linalg.norm(np.cross(D[..., 0], D[..., 1]), axis=-1)

    def cutoff(self, u, which=1):
        """``chi_1`` or ``chi_2`` evaluated at chart coordinates."""
        if self.radius_fn is None:
            raise GeometryError(f"{self.name} carries no cutoff functions")
        t = self.radius_fn(np.asarray(u, float))
        return (CHI1 if which == 1 else CHI2)(t)


def metric_at(chart: Chart, u) -> MetricTensor:
    """Metric ``G = DPhi^T DPhi`` at a single interior point."""
    D = chart.tangents(np.asarray(u, float))
    a, b = D[:, 0], D[:, 1]
    return MetricTensor(float(a @ a), float(a @ b), float(b @ b))


def metric_field(chart: Chart, u):
    """Vectorized ``(g11, g12, g22)`` over an array of chart points."""
    D = chart.tangents(u)
    a, b = D[..., 0], D[..., 1]
    return (
        np.einsum("...k,...k->...", a, a),
        np.einsum("...k,...k->...", a, b),
        np.einsum("...k,...k->...", b, b),
    )


def normal_at(chart: Chart, u):
    """Outward unit normal ``(d1 Phi x d2 Phi) / |d1 Phi x d2 Phi|``."""
    D = chart.tangents(u)
    N = np.cross(D[..., 0], D[..., 1])
    nrm = np.linalg.norm(N, axis=-1)
    if np.any(nrm < DEGENERATE_TOL):
        raise GeometryError(f"degenerate Jacobian on {chart.name}")
    return chart.orientation * N / nrm[..., None]


def taylor_metric_residual(chart: Chart, u, v) -> float:
    """``|Phi(u) - Phi(v)|^2 - <u-v, G(u)(u-v)>``; of size O(|u-v|^3)."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    diff = chart.point(u) - chart.point(v)
    d = u - v
    G = metric_at(chart, u).matrix()
    return float(diff @ diff - d @ G @ d)


def L_kernel(chart: Chart, u, z):
    """``<z, G(u) z>^(-3/2)``, the frozen-metric replacement of ``|x-y|^-3``."""
    G = metric_at(chart, u).matrix()
    z = np.asarray(z, float)
    q = np.einsum("...i,ij,...j->...", z, G, z)
    return q**-1.5


#: (i, j) pairs of the antisymmetric K1 numerators, with the ambient component
#: k that enters their chart linearization and the Levi-Civita sign.
KERNEL_PAIRS = (((0, 1), 2, 1.0), ((0, 2), 1, -1.0), ((1, 2), 0, 1.0))


def kernel_numerators(x, n, y):
    """``(K12, K13, K23)`` with ``Kij = n_i (x_j - y_j) - n_j (x_i - y_i)``."""
    d = np.asarray(x, float) - np.asarray(y, float)
    n = np.asarray(n, float)
    return np.stack([n[..., i] * d[..., j] - n[..., j] * d[..., i] for (i, j), _, _ in KERNEL_PAIRS], axis=-1)


def chart_kernel_coefficients(chart: Chart, u) -> np.ndarray:
    """Linear-term coefficients of ``K12, K13, K23`` in chart coordinates.

    Returns an array ``c`` of shape ``(3, 2)`` such that, with ``d = u - v``,
    ``K_ij(Phi(u), Phi(v)) = c[p, 0] d_1 - c[p, 1] d_2 + O(|d|^2)`` for the
    pairs ``p = (12, 13, 23)``.  Row ``p`` is
    ``s * (g11 d2phi_k - g12 d1phi_k, g22 d1phi_k - g12 d2phi_k) / |N|`` with
    ``k = 3, 2, 1`` and ``s`` the orientation times the Levi-Civita sign
    (negative for ``K13``).
    """
    u = np.asarray(u, float)
    D = chart.tangents(u)
    a, b = D[:, 0], D[:, 1]
    g11, g12, g22 = a @ a, a @ b, b @ b
    N = np.linalg.norm(np.cross(a, b))
    if N < DEGENERATE_TOL:
        raise GeometryError(f"degenerate Jacobian on {chart.name}")
    out = np.empty((3, 2))
    for p, (_, k, sign) in enumerate(KERNEL_PAIRS):
        s = sign * chart.orientation / N
        out[p] = s * (g11 * b[k] - g12 * a[k]), s * (g22 * a[k] - g12 * b[k])
    return out


def chart_error_term(chart: Chart, u, v, pair=0):
    """Remainder ``E(u, v)`` of the frozen-metric Riesz approximation of ``T_ij``.

    ``E = K_ij |N(v)| / |x - y|^3 - |N(u)| (c1 d1 - c2 d2) L(u, d)``; bounded
    by ``C |u - v|^-1`` on smooth charts.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    x, y = chart.point(u), chart.point(v)
    n = normal_at(chart, u)
    K = kernel_numerators(x, n, y)[pair]
    exact = K * chart.area_element(v) / np.linalg.norm(x - y) ** 3
    c = chart_kernel_coefficients(chart, u)[pair]
    d = u - v
    return exact - chart.area_element(u) * (c[0] * d[0] - c[1] * d[1]) * L_kernel(chart, u, d)


def flat_chart(orientation=1, half_width=np.inf, periodic=False, period=2 * np.pi):
    """The plane ``Phi(u) = (u1, u2, 0)``.

    With ``periodic=True`` the chart is a flat torus of side ``period``.
    """

    def fn(u):
        u = np.asarray(u, float)
        return np.concatenate([u, np.zeros(u.shape[:-1] + (1,))], axis=-1)

    def jac(u):
        u = np.asarray(u, float)
        D = np.zeros(u.shape[:-1] + (3, 2))
        D[..., 0, 0] = 1.0
        D[..., 1, 1] = 1.0
        return D

    def radius(u):
        # a single chart covers the plane: chi1 = chi2 = 1
        return np.zeros(np.shape(u)[:-1])

    w = period / 2 if periodic else half_width
    return Chart(fn, jac, ((-w, w), (-w, w)), orientation=orientation, radius_fn=radius,
                 periodic=(periodic, periodic), name="flat")


# -- surfaces ----------------------------------------------------------------


def _sphere_dirs(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _tangent_frame(yhat):
    """Orthonormal tangent vectors ``e1, e2`` with ``e1 x e2 = yhat``."""
    yhat = np.asarray(yhat, float)
    ref = np.where(np.abs(yhat[..., :1]) < 0.9, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    e1 = np.cross(ref, yhat)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(yhat, e1)
    return e1, e2


def rotation_to(z):
    """A rotation matrix whose third column is the unit vector ``z``."""
    z = np.asarray(z, float)
    z = z / np.linalg.norm(z)
    e1, e2 = _tangent_frame(z)
    return np.stack([e1, e2, z], axis=1)


#: Atlas rotations: chart poles along the z, x and y axes.
ATLAS_ROTATIONS = (
    np.eye(3),
    np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
    np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]),
)


class Surface:
    """Smooth closed surface ``x = F(yhat)`` over the unit sphere.

    Subclasses implement ``F`` and its Jacobian ``DF`` on ``R^3``; only the
    action of ``DF`` on vectors tangent to the sphere matters.
    """

    kind = "surface"

    def F(self, y):
        raise NotImplementedError

    def DF(self, y):
        raise NotImplementedError

    def params(self):
        return {}

    def describe(self):
        return {"kind": self.kind, **self.params()}

    def geometry(self, yhat):
        """Points, outward unit normals and area elements (relative to the sphere).

        Parameters
        ----------
        yhat : ndarray, shape (..., 3)
            Unit vectors.
        """
        yhat = np.asarray(yhat, float)
        e1, e2 = _tangent_frame(yhat)
        D = self.DF(yhat)
        t1 = np.einsum("...ij,...j->...i", D, e1)
        t2 = np.einsum("...ij,...j->...i", D, e2)
        N = np.cross(t1, t2)
        J = np.linalg.norm(N, axis=-1)
        return self.F(yhat), N / J[..., None], J

    def chart(self, rotation=None, name=None):
        """Spherical-coordinate chart ``Phi(theta, phi) = F(Q s(theta, phi))``.

        The cutoff radius is ``|theta - pi/2| / (pi/2)``: distance from the
        chart equator, normalized so the chart poles sit at radius 1.
        """
        Q = np.eye(3) if rotation is None else np.asarray(rotation, float)

        def fn(u):
            return self.F(_sphere_dirs(u[..., 0], u[..., 1]) @ Q.T)

        def jac(u):
            th, ph = u[..., 0], u[..., 1]
            y = _sphere_dirs(th, ph) @ Q.T
            dth = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], -1) @ Q.T
            dph = np.stack([-np.sin(th) * np.sin(ph), np.sin(th) * np.cos(ph), np.zeros_like(th)], -1) @ Q.T
            D = self.DF(y)
            return np.stack(
                [np.einsum("...ij,...j->...i", D, dth), np.einsum("...ij,...j->...i", D, dph)], axis=-1
            )

        def radius(u):
            return np.abs(u[..., 0] - np.pi / 2) / (np.pi / 2)

        return Chart(fn, jac, ((0.0, np.pi), (-np.pi, np.pi)), orientation=1, radius_fn=radius,
                     periodic=(False, True), name=name or f"{self.kind}-chart")

    def atlas(self):
        """Three spherical charts with poles along the coordinate axes."""
        return [self.chart(Q, name=f"{self.kind}-chart{i}") for i, Q in enumerate(ATLAS_ROTATIONS)]

    def chart_coordinates(self, yhat, rotation):
        """Inverse of the spherical chart: ``(theta, phi)`` of unit vectors ``yhat``."""
        y = np.asarray(yhat, float) @ np.asarray(rotation, float)
        th = np.arccos(np.clip(y[..., 2], -1.0, 1.0))
        ph = np.arctan2(y[..., 1], y[..., 0])
        return np.stack([th, ph], axis=-1)

    def partition_floor(self, yhat):
        """``sum_k chi1_k^2`` over the atlas at unit vectors ``yhat``."""
        total = 0.0
        for Q, ch in zip(ATLAS_ROTATIONS, self.atlas()):
            total = total + ch.cutoff(self.chart_coordinates(yhat, Q), 1) ** 2
        return total


class Sphere(Surface):
    kind = "sphere"

    def __init__(self, radius=1.0):
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        self.radius = float(radius)

    def F(self, y):
        return self.radius * np.asarray(y, float)

    def DF(self, y):
        y = np.asarray(y, float)
        return np.broadcast_to(self.radius * np.eye(3), y.shape[:-1] + (3, 3))

    def params(self):
        return {"radius": self.radius}


class Ellipsoid(Surface):
    kind = "ellipsoid"

    def __init__(self, a=1.0, b=1.0, c=2.0):
        if min(a, b, c) <= 0:
            raise ValueError("ellipsoid semi-axes must be positive")
        self.axes = np.array([a, b, c], float)

    def F(self, y):
        return np.asarray(y, float) * self.axes

    def DF(self, y):
        y = np.asarray(y, float)
        return np.broadcast_to(np.diag(self.axes), y.shape[:-1] + (3, 3))

    def params(self):
        a, b, c = self.axes
        return {"a": float(a), "b": float(b), "c": float(c)}


class StarSphere(Surface):
    """``r(yhat) = 1 + eps * h(yhat)`` with ``h`` a normalized solid harmonic.

    ``h`` is proportional to ``Re[(y1 + i y2)^m] * y3^(l-m)`` (harmonic for
    ``l - m`` in ``{0, 1}``), scaled so that ``max |h| = 1`` on the sphere.
    """

    kind = "star"

    def __init__(self, eps=0.1, l=3, m=2):
        if not 0 <= l - m <= 1 or m < 1:
            raise ValueError("star perturbation needs 1 <= m and l - m in {0, 1}")
        if not 0 <= eps <= 0.2:
            raise ValueError("star perturbation amplitude must lie in [0, 0.2]")
        self.eps, self.l, self.m = float(eps), int(l), int(m)
        t = np.linspace(0, np.pi, 721)
        p = np.linspace(0, 2 * np.pi, 1441)
        T, P = np.meshgrid(t, p, indexing="ij")
        self._scale = 1.0
        self._scale = 1.0 / np.abs(self._h(_sphere_dirs(T, P))).max()

    def _h(self, y):
        w = (y[..., 0] + 1j * y[..., 1]) ** self.m
        return self._scale * w.real * y[..., 2] ** (self.l - self.m)

    def _grad_h(self, y):
        k = self.l - self.m
        z = y[..., 2]
        wm1 = self.m * (y[..., 0] + 1j * y[..., 1]) ** (self.m - 1)
        zk = z**k
        gx = wm1.real * zk
        gy = (1j * wm1).real * zk
        gz = k * z ** max(k - 1, 0) * ((y[..., 0] + 1j * y[..., 1]) ** self.m).real if k else np.zeros_like(z)
        return self._scale * np.stack([gx, gy, gz], axis=-1)

    def radius(self, y):
        return 1.0 + self.eps * self._h(np.asarray(y, float))

    def F(self, y):
        y = np.asarray(y, float)
        return self.radius(y)[..., None] * y

    def DF(self, y):
        y = np.asarray(y, float)
        r = self.radius(y)
        g = self.eps * self._grad_h(y)
        return r[..., None, None] * np.eye(3) + y[..., :, None] * g[..., None, :]

    def params(self):
        return {"eps": self.eps, "l": self.l, "m": self.m}


def make_surface(kind, **params) -> Surface:
    """Build a fixture by name: ``unit_sphere``, ``sphere``, ``ellipsoid``, ``star``."""
    kind = kind.lower()
    if kind in ("unit_sphere", "sphere"):
        return Sphere(params.get("radius", 1.0))
    if kind == "ellipsoid":
        return Ellipsoid(params.get("a", 1.0), params.get("b", 1.0), params.get("c", 2.0))
    if kind in ("star", "star_perturbed_sphere"):
        return StarSphere(params.get("eps", 0.1), int(params.get("l", 3)), int(params.get("m", 2)))
    raise KeyError(f"unknown surface kind {kind!r}")
