"""
Eigenvalues of the discrete NP operator, clustering, and compactness probes.

Eigenvalues are computed in the weighted discrete L2 space of the grid.
The primary route symmetrizes with the single layer: ``-S K`` is symmetric
and ``-S`` positive definite, so the generalized symmetric problem
``(-S K) v = lambda (-S) v`` has real eigenvalues.  For spectral
assemblies the problem is solved on the resolved harmonic subspace and the
annihilated subspace contributes exact zeros.
"""

from dataclasses import dataclass, field, asdict
import json

import numpy as np
import scipy.linalg as sl
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import ConfigError, NumericError
from .lame import LameParameters
from .nystrom import OperatorMatrix

#: cluster radius at k0 = 1/6; scaled with k0 for other parameters
DELTA_REF = 0.04
CLUSTER_NAMES = ("-k0", "0", "+k0")


def default_delta(p: LameParameters):
    return DELTA_REF * p.k0 / (1.0 / 6.0)


@dataclass
class ClusterResult:
    """Nearest-center assignment of eigenvalues."""

    centers: np.ndarray
    delta: float
    assignment: np.ndarray
    distance: np.ndarray

    @property
    def outliers(self):
        return np.flatnonzero(self.distance > self.delta)

    @property
    def counts(self):
        inside = self.distance <= self.delta
        return {name: int(np.sum(inside & (self.assignment == i))) for i, name in enumerate(CLUSTER_NAMES)}

    def summary(self):
        return {"delta": self.delta, "centers": self.centers.tolist(), "counts": self.counts,
                "outliers": int(len(self.outliers))}


def cluster(eigenvalues, centers, delta) -> ClusterResult:
    """Assign every eigenvalue to its nearest center; distances above ``delta`` are outliers."""
    if delta < 0:
        raise ConfigError("cluster radius must be non-negative")
    ev = np.asarray(eigenvalues, float)
    c = np.asarray(centers, float)
    d = np.abs(ev[:, None] - c[None, :])
    a = np.argmin(d, axis=1)
    return ClusterResult(c, float(delta), a, d[np.arange(len(ev)), a])


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    method: str
    imaginary_defect: float
    spectral_radius: float
    clusters: ClusterResult
    params: dict
    resolution: int
    n_nodes: int
    null_dim: int = 0
    route_difference: float = None
    symmetry_defect: float = None
    meta: dict = field(default_factory=dict)

    @property
    def outliers(self):
        return self.eigenvalues[self.clusters.outliers]

    def fraction_within(self, resolved_only=False):
        """Fraction of eigenvalues within ``delta`` of a center."""
        n_out = len(self.clusters.outliers)
        total = len(self.eigenvalues) - (self.null_dim if resolved_only else 0)
        return 1.0 - n_out / total

    def to_dict(self):
        return {
            "parameters": self.params,
            "resolution": self.resolution,
            "n_nodes": self.n_nodes,
            "unknowns": len(self.eigenvalues),
            "method": self.method,
            "centers": self.clusters.centers.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "clusters": self.clusters.summary(),
            "outliers": self.outliers.tolist(),
            "defects": {
                "imaginary": self.imaginary_defect,
                "route_difference": self.route_difference,
                "symmetry": self.symmetry_defect,
            },
            "null_dim": self.null_dim,
            "fraction_within": self.fraction_within(),
            "fraction_within_resolved": self.fraction_within(resolved_only=True),
            "spectral_radius": self.spectral_radius,
            "meta": self.meta,
        }

    def to_json(self, path, extra=None):
        d = self.to_dict()
        if extra:
            d.update(extra)
        with open(path, "w") as fh:
            json.dump(d, fh, indent=1, sort_keys=True)

    def to_csv(self, path, header=None):
        """One eigenvalue per line, ascending; ``header`` lines are written as ``#`` comments."""
        np.savetxt(path, np.sort(self.eigenvalues), fmt="%.17g", header=header or "", comments="# ")


def _check_same_grid(K, S):
    if S is not None and S.grid is not K.grid:
        raise ConfigError("operators live on different grids")


def _coefficient_single_layer(K, S):
    """``C_J @ S.factor``: the single layer tested against the basis with surface weights."""
    g = K.grid
    N, L = g.n, K.basis.L
    CJ = K.basis.C * (g.weights / g.sphere_weights)[None, :]
    F = S.factor.reshape(N, 3, 3 * L)
    return np.einsum("li,iac->alc", CJ, F, optimize=True).reshape(3 * L, 3 * L)


def _sym(A):
    return 0.5 * (A + A.T)


def spectrum(K: OperatorMatrix, S: OperatorMatrix = None, method="symmetrized", delta=None,
             cross_check=True) -> SpectrumReport:
    """Real spectrum of ``K`` with cluster analysis.

    Parameters
    ----------
    method : {"symmetrized", "plain"}
        ``"symmetrized"`` solves the single-layer-weighted symmetric problem
        (needs ``S``); ``"plain"`` takes real parts of the nonsymmetric
        eigenvalues.
    cross_check : bool
        Also run the plain route and report the largest difference between
        the two sorted spectra and the imaginary defect.

    Raises
    ------
    NumericError
        If the eigensolver fails, e.g. when a nodal (``scheme="local"``)
        single layer is indefinite on unresolved modes; use ``"plain"`` then.
    """
    _check_same_grid(K, S)
    p = K.params
    if method not in ("symmetrized", "plain"):
        raise ConfigError(f"unknown eigenvalue method {method!r}")
    if method == "symmetrized" and S is None:
        raise ConfigError("the symmetrized route needs the single layer")
    spectral = K.factor is not None
    try:
        if spectral:
            Kc = K.coeff
            plain = None
            if method == "plain" or cross_check:
                plain = np.linalg.eigvals(Kc)
            if method == "symmetrized":
                Sm = _coefficient_single_layer(K, S)
                B1 = Sm @ Kc
                sym_defect = float(np.linalg.norm(B1 - B1.T) / np.linalg.norm(B1))
                ev = sl.eigh(-_sym(B1), -_sym(Sm), eigvals_only=True)
            else:
                ev = plain.real
                sym_defect = None
            ev = np.concatenate([ev, np.zeros(K.null_dim)])
        else:
            Kw = K.weighted()
            plain = np.linalg.eigvals(Kw) if (method == "plain" or cross_check) else None
            if method == "symmetrized":
                W = K.grid.weights3()
                B2 = W[:, None] * S.matrix
                B1 = B2 @ K.matrix
                sym_defect = float(np.linalg.norm(B1 - B1.T) / np.linalg.norm(B1))
                ev = sl.eigh(-_sym(B1), -_sym(B2), eigvals_only=True)
            else:
                ev = plain.real
                sym_defect = None
    except (np.linalg.LinAlgError, sl.LinAlgError) as exc:
        raise NumericError(f"eigensolver failed for {K!r}: {exc}") from exc
    ev = np.sort(ev)
    rho = float(np.abs(ev).max())
    imag = float(np.abs(plain.imag).max()) if plain is not None else 0.0
    diff = None
    if plain is not None and method == "symmetrized":
        pr = np.sort(np.concatenate([plain.real, np.zeros(K.null_dim)]) if spectral else plain.real)
        diff = float(np.abs(pr - ev).max())
    delta = default_delta(p) if delta is None else delta
    cl = cluster(ev, p.centers, delta)
    return SpectrumReport(ev, method, imag, rho, cl, {"lambda": p.lam, "mu": p.mu, "k0": p.k0},
                          K.grid.resolution, K.grid.n, K.null_dim, diff, sym_defect,
                          {"scheme": K.meta.get("scheme"), "surface": _describe(K)})


def _describe(op):
    s = op.grid.surface
    return s.describe() if s is not None else {"kind": "flat"}


# -- compactness probes ----------------------------------------------------------------

COMPOSITES = ("p3", "K(K-k0)", "K(K+k0)", "K^2-k0^2")


def composite_matrices(K: OperatorMatrix, p: LameParameters):
    """The four polynomial composites of ``K`` in an orthonormal weighted basis.

    Spectral assemblies use the resolved coefficient space with the
    surface Gram metric; others use the weighted nodal matrix.
    """
    if K.factor is not None:
        g = K.grid
        Y = K.basis.Y
        G = Y.T @ (Y * g.weights[:, None])
        R3 = sl.block_diag(*[sl.cholesky(G)] * 3)  # G = R^T R: z = R c is orthonormal
        A = R3 @ sl.solve_triangular(R3, K.coeff.T, trans="T").T
    else:
        A = K.weighted()
    I = np.eye(A.shape[0])
    k0 = p.k0
    A2 = A @ A
    return {
        "p3": A2 @ A - k0**2 * A,
        "K(K-k0)": A2 - k0 * A,
        "K(K+k0)": A2 + k0 * A,
        "K^2-k0^2": A2 - k0**2 * I,
    }


@dataclass
class CompactnessDiagnostic:
    tag: str
    resolutions: list
    singular_values: list
    k: int
    fraction: float
    kth: list
    fraction_values: list

    def slope(self, which="kth"):
        """Log-log slope of the probed singular value against the number of unknowns."""
        vals = np.asarray(self.kth if which == "kth" else self.fraction_values)
        n = np.asarray([3 * 2 * r * r for r in self.resolutions], float)
        return float(np.polyfit(np.log(n), np.log(vals), 1)[0])

    def to_dict(self):
        return {"tag": self.tag, "resolutions": self.resolutions, "k": self.k, "fraction": self.fraction,
                "kth": self.kth, "fraction_values": self.fraction_values,
                "slope_kth": self.slope("kth"), "slope_fraction": self.slope("fraction"),
                "leading_singular_values": [list(map(float, s[:40])) for s in self.singular_values]}


def composite_singular_values(K: OperatorMatrix, p: LameParameters):
    """Descending singular values of every composite."""
    return {t: sl.svdvals(M) for t, M in composite_matrices(K, p).items()}


def polynomial_compactness_probe(operators, p: LameParameters, k=20, fraction=0.25):
    """Singular-value trends of ``p3(K) = K^3 - k0^2 K`` and the three non-compact composites.

    Parameters
    ----------
    operators : sequence of OperatorMatrix
        ``K`` assembled at (at least three) increasing resolutions.
    k : int
        Fixed singular-value index (1-based).
    fraction : float
        Index as a fraction of the resolved dimension.

    Returns
    -------
    dict of CompactnessDiagnostic
    """
    operators = list(operators)
    if len(operators) < 3:
        raise ConfigError("the compactness probe needs at least three resolutions")
    res = [op.grid.resolution for op in operators]
    sv = {t: [] for t in COMPOSITES}
    for op in operators:
        for t, s in composite_singular_values(op, p).items():
            sv[t].append(s)
    out = {}
    for t in COMPOSITES:
        kth = [float(s[k - 1]) for s in sv[t]]
        fr = [float(s[int(fraction * len(s))]) for s in sv[t]]
        out[t] = CompactnessDiagnostic(t, res, sv[t], k, fraction, kth, fr)
    return out


def dichotomy_ratio(diag):
    """``sigma_k(p3) / sigma_k(K^2 - k0^2)`` per resolution."""
    return [a / b for a, b in zip(diag["p3"].kth, diag["K^2-k0^2"].kth)]


# -- Plemelj symmetrization ---------------------------------------------------------------


def _two_norm(M):
    """Spectral norm; Lanczos on ``M^T M`` above 2000 rows, dense SVD below."""
    n = M.shape[0]
    if n <= 2000:
        return float(np.linalg.norm(M, 2))
    op = LinearOperator((n, n), matvec=lambda x: M.T @ (M @ x), dtype=float)
    lam = eigsh(op, k=1, which="LA", tol=1e-10, v0=np.ones(n), return_eigenvectors=False)[0]
    return float(np.sqrt(lam))


def symmetrization_defect(K, S, form="KS", weights=None):
    """Relative Plemelj residual in the weighted inner product.

    ``form="KS"`` measures ``||K S - S K^T|| / ||S||`` and ``form="SK"``
    measures ``||S K - K^T S|| / ||S||``, with transposes taken in the
    weighted inner product.  Accepts :class:`OperatorMatrix` or plain arrays
    (then ``weights`` default to 1).
    """
    if form not in ("KS", "SK"):
        raise ConfigError("form must be 'KS' or 'SK'")
    if isinstance(K, OperatorMatrix):
        _check_same_grid(K, S)
        Kw, Sw = K.weighted(), S.weighted()
    else:
        Kw, Sw = np.asarray(K, float), np.asarray(S, float)
        if weights is not None:
            s = np.sqrt(np.asarray(weights, float))
            Kw = s[:, None] * Kw / s[None, :]
            Sw = s[:, None] * Sw / s[None, :]
    D = Kw @ Sw - Sw @ Kw.T if form == "KS" else Sw @ Kw - Kw.T @ Sw
    return _two_norm(D) / _two_norm(Sw)


def report_json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"not serializable: {type(obj)}")
