"""
Closed-form elasticity kernels for an isotropic homogeneous body in 3-D.

The conormal derivative of the Kelvin matrix splits exactly as
``k0 * K1 - K2`` where ``K1`` is an antisymmetric, strongly singular
kernel and ``K2`` is symmetric and only weakly singular on smooth surfaces.

Every scalar routine has a batched twin (``*_batch``) that evaluates the
kernel for arrays of targets and sources and is what the Nystrom assembly
uses.  Batched routines do not check for coincident points; callers mask
the diagonal themselves.
"""

from dataclasses import dataclass, field

import numpy as np


class SingularPointError(ValueError):
    """Raised when a kernel is evaluated at coincident points."""


@dataclass(frozen=True)
class LameParameters:
    """Lame constants satisfying strong convexity.

    Parameters
    ----------
    lam : float
        First Lame constant.
    mu : float
        Shear modulus.
    """

    lam: float
    mu: float
    alpha1: float = field(init=False)
    alpha2: float = field(init=False)
    k0: float = field(init=False)

    def __post_init__(self):
        lam, mu = float(self.lam), float(self.mu)
        if not (np.isfinite(lam) and np.isfinite(mu)):
            raise ValueError("Lame parameters must be finite")
        if mu <= 0 or 3 * lam + 2 * mu <= 0:
            raise ValueError(
                f"strong convexity violated: need mu > 0 and 3*lam + 2*mu > 0, got lam={lam}, mu={mu}"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "alpha1", 0.5 * (1 / mu + 1 / (2 * mu + lam)))
        object.__setattr__(self, "alpha2", 0.5 * (1 / mu - 1 / (2 * mu + lam)))
        object.__setattr__(self, "k0", mu / (2 * (2 * mu + lam)))

    @property
    def centers(self):
        """Accumulation points ``(-k0, 0, k0)`` of the NP spectrum."""
        return np.array([-self.k0, 0.0, self.k0])


def _check_distinct(x, y):
    d = np.asarray(x, float) - np.asarray(y, float)
    r = np.linalg.norm(d)
    if r == 0.0:
        raise SingularPointError("kernel evaluated at coincident points")
    return d, r


def kelvin_matrix(p: LameParameters, x) -> np.ndarray:
    """Kelvin matrix ``Gamma(x)``, the fundamental solution of the Lame system."""
    x = np.asarray(x, float)
    r = np.linalg.norm(x)
    if r == 0.0:
        raise SingularPointError("Kelvin matrix is singular at the origin")
    return -(p.alpha1 / (4 * np.pi)) * np.eye(3) / r - (p.alpha2 / (4 * np.pi)) * np.outer(x, x) / r**3


def k1_kernel(x, n, y) -> np.ndarray:
    """Antisymmetric kernel ``[n (x-y)^T - (x-y) n^T] / (2 pi |x-y|^3)``.

    Parameters
    ----------
    x, n : array_like, shape (3,)
        Target point and its unit normal.
    y : array_like, shape (3,)
        Source point, ``y != x``.
    """
    d, r = _check_distinct(x, y)
    n = np.asarray(n, float)
    return (np.outer(n, d) - np.outer(d, n)) / (2 * np.pi * r**3)


def k2_kernel(p: LameParameters, x, n, y) -> np.ndarray:
    """Symmetric, weakly singular part of the conormal kernel."""
    d, r = _check_distinct(x, y)
    dn = d @ np.asarray(n, float)
    c1 = p.mu / (2 * p.mu + p.lam)
    c2 = 2 * (p.mu + p.lam) / (2 * p.mu + p.lam)
    return c1 * dn / (4 * np.pi * r**3) * np.eye(3) + c2 * dn / (4 * np.pi * r**5) * np.outer(d, d)


def conormal_kernel(p: LameParameters, x, n, y) -> np.ndarray:
    """NP kernel ``k0*K1 - K2`` built from the two kernels above.

    Notes
    -----
    This is the kernel whose operator the rest of the package studies.  The
    traction of the Kelvin matrix computed directly from its definition is
    :func:`kelvin_traction`; the two differ by an overall sign and by the
    weight of the ``(x-y)(x-y)^T`` term, so they share the principal part
    up to sign and the accumulation set ``{0, +k0, -k0}``.
    """
    return p.k0 * k1_kernel(x, n, y) - k2_kernel(p, x, n, y)


def kelvin_traction(p: LameParameters, x, n, y) -> np.ndarray:
    """Traction ``lam (div u) n + 2 mu (sym grad u) n`` of ``u = Gamma(x - y) b``.

    Column ``b`` of the result is the conormal derivative in ``x`` of
    column ``b`` of the Kelvin matrix, in closed form::

        -k0 K1 + [2 k0 (x-y).n I + 3 (lam+mu)/(2mu+lam) (x-y).n (x-y)(x-y)^T / |x-y|^2] / (4 pi |x-y|^3)
    """
    d, _ = _check_distinct(x, y)
    return kelvin_traction_batch(p, d, np.asarray(n, float))


# -- batched kernels -------------------------------------------------------
#
# x, n: (..., 3) targets/normals; y: (..., 3) sources, broadcast together.
# Output has shape broadcast(...) + (3, 3).


def kelvin_batch(p: LameParameters, d):
    """Kelvin matrix for an array of separations ``d`` (shape ``(..., 3)``)."""
    r = np.linalg.norm(d, axis=-1)[..., None, None]
    eye = np.eye(3)
    return -(p.alpha1 / (4 * np.pi)) * eye / r - (p.alpha2 / (4 * np.pi)) * (
        d[..., :, None] * d[..., None, :]
    ) / r**3


def k1_batch(d, n, eps=0.0):
    """``K1`` for separations ``d = x - y`` and target normals ``n``.

    ``eps > 0`` replaces ``|d|^2`` by ``|d|^2 + eps^2`` (regularized kernel).
    """
    r2 = np.einsum("...k,...k->...", d, d) + eps**2
    num = n[..., :, None] * d[..., None, :] - d[..., :, None] * n[..., None, :]
    return num / (2 * np.pi * r2[..., None, None] ** 1.5)


def k2_batch(p: LameParameters, d, n, eps=0.0):
    r2 = np.einsum("...k,...k->...", d, d) + eps**2
    dn = np.einsum("...k,...k->...", d, n)
    c1 = p.mu / (2 * p.mu + p.lam)
    c2 = 2 * (p.mu + p.lam) / (2 * p.mu + p.lam)
    a = (c1 * dn / (4 * np.pi * r2**1.5))[..., None, None]
    b = (c2 * dn / (4 * np.pi * r2**2.5))[..., None, None]
    return a * np.eye(3) + b * (d[..., :, None] * d[..., None, :])


def conormal_batch(p: LameParameters, d, n, eps=0.0):
    return p.k0 * k1_batch(d, n, eps) - k2_batch(p, d, n, eps)


def kelvin_traction_batch(p: LameParameters, d, n, eps=0.0):
    """Batched :func:`kelvin_traction`."""
    r2 = np.einsum("...k,...k->...", d, d) + eps**2
    dn = np.einsum("...k,...k->...", d, n)
    c1 = p.mu / (2 * p.mu + p.lam)
    c3 = 3 * (p.mu + p.lam) / (2 * p.mu + p.lam)
    a = (c1 * dn / (4 * np.pi * r2**1.5))[..., None, None]
    b = (c3 * dn / (4 * np.pi * r2**2.5))[..., None, None]
    return -p.k0 * k1_batch(d, n, eps) + a * np.eye(3) + b * (d[..., :, None] * d[..., None, :])
