"""Acceptance criteria 1-10, each reported as one PASS/FAIL line.

The spectral criteria share one study per surface (resolutions 16, 24, 32,
lambda = mu = 1), assembled once per test session.
"""

import functools
import time

import numpy as np
import pytest

from conftest import record
from elastic_np import checks, geometry, lame, nystrom, riesz, spectral, symbols

P = lame.LameParameters(1.0, 1.0)
RESOLUTIONS = (16, 24, 32)
DELTA = 0.04


@functools.lru_cache(maxsize=None)
def study(kind):
    surface = {"sphere": geometry.Sphere(), "ellipsoid": geometry.Ellipsoid(1.0, 1.0, 2.0),
               "star": geometry.StarSphere(0.1)}[kind]
    t0 = time.perf_counter()
    reports, ks, sk, Ks = [], [], [], []
    for r in RESOLUTIONS:
        ops = nystrom.assemble(P, nystrom.build_grid(surface, r), ("K", "S"))
        K, S = ops["K"], ops["S"]
        reports.append(spectral.spectrum(K, S, delta=DELTA))
        ks.append(spectral.symmetrization_defect(K, S, "KS"))
        sk.append(spectral.symmetrization_defect(K, S, "SK"))
        # keep the factorized K only; the dense matrices are rebuilt on demand
        Ks.append(nystrom.OperatorMatrix(None, "K", K.grid, P, K.factor, K.basis, K.meta))
        del ops, K, S
    spectra_time = time.perf_counter() - t0
    probe = spectral.polynomial_compactness_probe(Ks, P, k=20)
    return {"reports": reports, "KS": ks, "SK": sk, "probe": probe, "seconds": spectra_time}


def clustering_verdict(st):
    reps = st["reports"]
    fin = reps[-1]
    frac = fin.fraction_within()
    counts = fin.clusters.counts
    outl = [len(r.clusters.outliers) for r in reps]
    centers_ok = np.allclose(fin.clusters.centers, [-P.k0, 0.0, P.k0])
    ok = frac >= 0.95 and all(v > 0 for v in counts.values()) and all(
        b <= a for a, b in zip(outl, outl[1:])) and centers_ok
    detail = (f"fraction within {DELTA} = {frac:.4f} (resolved subspace {fin.fraction_within(True):.4f}), "
              f"counts {counts}, outliers {outl}")
    return ok, detail


def compactness_verdict(st):
    pr = st["probe"]
    p3 = pr["p3"].kth
    p3_ok = p3[-1] <= 0.5 * p3[0]
    others = {}
    for t in ("K^2-k0^2", "K(K-k0)", "K(K+k0)"):
        v = np.asarray(pr[t].kth)
        others[t] = (v.max() / v.min() - 1.0 < 0.5) and v.min() > 0.1 * P.k0**2
    ok = p3_ok and all(others.values())
    detail = ("sigma_20(p3) " + ", ".join(f"{v:.3e}" for v in p3)
              + f" (ratio {p3[-1] / p3[0]:.3f}); sigma_20(K^2-k0^2) "
              + ", ".join(f"{v:.3e}" for v in pr["K^2-k0^2"].kth)
              + "; sigma at 1/4 of the resolved dimension (p3) "
              + ", ".join(f"{v:.3e}" for v in pr["p3"].fraction_values))
    return ok, detail


LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0


def split_oracle(p, d, n):
    """Independent construction: ``(n d^T - d n^T) v = (d x n) x v`` and unit-vector form of ``K2``."""
    r = np.linalg.norm(d, axis=-1)
    e = d / r[:, None]
    w = np.cross(d, n)
    skew = np.einsum("ijk,pj->pik", LEVI_CIVITA, w)
    K1 = skew / (2 * np.pi * r[:, None, None] ** 3)
    c = (n * e).sum(-1) / (4 * np.pi * r**2)
    K2 = c[:, None, None] * (p.mu * np.eye(3) + 2 * (p.mu + p.lam) * e[:, :, None] * e[:, None, :]) / (
        2 * p.mu + p.lam)
    return K1, K2


def test_criterion_01_kernel_split():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    x, y = checks.random_sphere_pairs(rng, 10_000)
    d = x - y
    K = lame.conormal_batch(P, d, x)
    K1 = lame.k1_batch(d, x)
    K2 = lame.k2_batch(P, d, x)
    O1, O2 = split_oracle(P, d, x)
    scale = np.abs(K).max(axis=(1, 2), keepdims=True)
    split = (np.abs(K - (P.k0 * O1 - O2)) / np.maximum(scale, 1.0)).max()
    parts = max(np.abs(K1 - O1).max() / max(1.0, np.abs(O1).max()), np.abs(K2 - O2).max() / max(1.0, np.abs(O2).max()))
    anti = np.abs(K1 + np.swapaxes(K1, -1, -2)).max()
    sym = np.abs(K2 - np.swapaxes(K2, -1, -2)).max()
    sec = time.perf_counter() - t0
    ok = split <= 1e-13 and anti == 0.0 and sym == 0.0 and sec < 5
    record(1, ok, f"|K - (k0 K1 - K2)| vs independent construction {split:.2e} (pieces {parts:.2e}), "
                  f"K1+K1^T {anti:.1e}, K2-K2^T {sym:.1e}, {sec:.2f} s")
    assert ok


def test_criterion_02_weak_singularity():
    rng = np.random.default_rng(2)
    scales = (1e-1, 1e-2, 1e-3)
    parts, ok = [], True
    for surf in (geometry.Sphere(), geometry.Ellipsoid(1.0, 1.0, 2.0)):
        prof = checks.weak_singularity_profile(P, surf, rng, scales)
        var = max(prof) / min(prof) - 1.0
        ok &= bool(np.all(np.isfinite(prof)) and var <= 0.1)
        parts.append(f"{surf.kind} " + ", ".join(f"{v:.4f}" for v in prof))
    # contrast: the principal part K1 is not weakly singular, |K1| |x-y| grows like 1/|x-y|
    yhat = np.array([[0.0, 0.0, 1.0]])
    k1 = [np.abs(lame.k1_batch(yhat - np.array([[np.sin(s), 0, np.cos(s)]]), yhat)).max()
          * 2 * np.sin(s / 2) for s in scales]
    ok &= k1[-1] / k1[0] > 50
    record(2, ok, "max|K2||x-y| at scales 1e-1,1e-2,1e-3: " + "; ".join(parts))
    assert ok


def test_criterion_03_flat_riesz():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    f = riesz.bandlimited_field(rng, 512, kmax=24)
    R = riesz.riesz_apply
    ident = np.abs(R(1, R(1, f)).values + R(2, R(2, f)).values + f.values).max()
    v = riesz.bandlimited_field(rng, 512, kmax=24, components=3)
    T = riesz.halfspace_T_apply
    cubic = np.abs(T(T(T(v))).values - T(v).values).max()
    sec = time.perf_counter() - t0
    ok = ident <= 1e-10 and cubic <= 1e-10 and sec < 10
    record(3, ok, f"|(R1^2+R2^2)f+f| {ident:.2e}, |T^3f-Tf| {cubic:.2e}, {sec:.2f} s")
    assert ok


def test_criterion_04_riesz_symbol():
    rng = np.random.default_rng(4)
    chk = checks.symbol_oracle_check(geometry.Sphere(), rng, n_pairs=100)
    record(4, chk.passed, f"max |p_j - numerical transform| over 100 pairs on sphere charts {chk.residual:.2e}")
    assert chk.passed


def test_criterion_05_sum_of_squares():
    rng = np.random.default_rng(5)
    parts, worst = [], 0.0
    for surf in (geometry.Sphere(), geometry.Ellipsoid(1.0, 1.0, 2.0), geometry.StarSphere(0.1)):
        chk, rows = checks.sum_of_squares_samples(surf, rng, 10_000)
        assert len(rows) >= 10_000
        worst = max(worst, chk.residual)
        parts.append(f"{surf.kind} {chk.residual:.2e}")
    ok = worst <= 1e-12
    record(5, ok, "max |s12^2+s13^2+s23^2+chi1^2| over 10^4 samples: " + ", ".join(parts))
    assert ok


def test_criterion_06_composition_order():
    slope, res = checks.composition_remainder(geometry.Sphere().chart(), grids=(64, 128, 256))
    ok = abs(slope + 1.0) <= 0.3
    record(6, ok, f"fitted order {slope:.3f}; remainders " + ", ".join(f"{r:.3e}" for r in res))
    assert ok


def test_criterion_07_spectral_clustering_sphere():
    st = study("sphere")
    ok, detail = clustering_verdict(st)
    ok &= st["seconds"] < 600
    record(7, ok, detail + f", {st['seconds']:.0f} s")
    assert ok


def test_criterion_08_compactness_dichotomy_sphere():
    ok, detail = compactness_verdict(study("sphere"))
    record(8, ok, detail)
    assert ok


@pytest.mark.parametrize("kind", ["ellipsoid", "star"])
def test_criterion_09_geometry_independence(kind):
    st = study(kind)
    ok7, d7 = clustering_verdict(st)
    ok8, d8 = compactness_verdict(st)
    ok = ok7 and ok8
    record(9, ok, f"[{kind}] clustering {'pass' if ok7 else 'fail'}: {d7}; "
                  f"compactness {'pass' if ok8 else 'fail'}: {d8}")
    assert ok


def test_criterion_10_symmetrization():
    st = study("sphere")
    ks = st["KS"]
    ok = all(b < a for a, b in zip(ks, ks[1:]))
    record(10, ok, "||KS - SK^T||/||S|| " + ", ".join(f"{v:.3e}" for v in ks)
           + " (transposed form ||SK - K^T S||/||S|| " + ", ".join(f"{v:.3e}" for v in st["SK"]) + ")")
    assert ok
