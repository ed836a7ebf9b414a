import numpy as np
import pytest

from elastic_np import geometry as geo
from elastic_np import lame, nystrom, riesz, spectral, symbols
from elastic_np.errors import ConfigError

P11 = lame.LameParameters(1.0, 1.0)


@pytest.fixture(scope="module")
def sphere12():
    g = nystrom.build_grid(geo.Sphere(), 12)
    return g, nystrom.assemble(P11, g, ("K", "T", "K2", "S", "Ktr"))


@pytest.fixture(scope="module")
def ellipsoid_traction():
    out = {}
    for n in (8, 12, 16):
        g = nystrom.build_grid(geo.Ellipsoid(1, 1, 2), n)
        out[n] = nystrom.assemble(P11, g, ("Ktr",))["Ktr"]
    return out


def test_sphere_area():
    g = nystrom.build_grid(geo.Sphere(), 16)
    assert 4 * np.pi * 0.999 <= g.area <= 4 * np.pi * 1.001


def test_prolate_spheroid_area():
    # closed form 2 pi a^2 (1 + c / (a e) arcsin e), e^2 = 1 - a^2 / c^2
    a, c = 1.0, 2.0
    e = np.sqrt(1 - a**2 / c**2)
    exact = 2 * np.pi * a**2 * (1 + c / (a * e) * np.arcsin(e))
    g = nystrom.build_grid(geo.Ellipsoid(a, a, c), 16)
    assert abs(g.area - exact) / exact < 1e-6


def test_flat_torus_weights_exact():
    g = nystrom.build_grid(geo.flat_chart(periodic=True), 16)
    assert g.area == pytest.approx((2 * np.pi) ** 2, rel=1e-15)
    np.testing.assert_array_equal(g.normals, np.tile([0.0, 0.0, 1.0], (g.n, 1)))


def test_grid_sizes_and_errors():
    assert nystrom.build_grid(geo.Sphere(), 8).n == 128
    assert nystrom.build_grid(geo.Sphere(), 16).n == 4 * 128
    with pytest.raises(ConfigError):
        nystrom.build_grid(geo.Sphere(), 7)
    with pytest.raises(ConfigError):
        nystrom.build_grid(geo.Sphere(), 8.5)
    with pytest.raises(ConfigError):
        nystrom.build_grid(geo.flat_chart(), 16)
    g = nystrom.build_grid(geo.flat_chart(periodic=True), 8)
    with pytest.raises(ConfigError):
        nystrom.assemble_K(P11, g)
    with pytest.raises(KeyError):
        nystrom.assemble(P11, nystrom.build_grid(geo.Sphere(), 8), ("X",))


def test_split_two_ways(sphere12):
    _, ops = sphere12
    K = ops["K"].matrix
    other = P11.k0 * ops["T"].matrix - ops["K2"].matrix
    assert np.abs(K - other).max() <= 1e-12 * max(1.0, np.abs(K).max())


def test_split_two_ways_local_scheme():
    g = nystrom.build_grid(geo.Ellipsoid(1, 1, 2), 8)
    ops = nystrom.assemble(P11, g, ("K", "T", "K2"), scheme="local")
    diff = ops["K"].matrix - (P11.k0 * ops["T"].matrix - ops["K2"].matrix)
    assert np.abs(diff).max() <= 1e-12 * max(1.0, np.abs(ops["K"].matrix).max())


def test_T_block_pattern():
    g = nystrom.build_grid(geo.Ellipsoid(1, 1, 2), 8)
    for scheme in ("local", "spectral"):
        T = nystrom.assemble_T(g, scheme=scheme).matrix.reshape(g.n, 3, g.n, 3)
        assert np.abs(T + T.transpose(0, 3, 2, 1)).max() == 0.0


def test_spectral_radius_and_boundedness():
    radii, norms = [], []
    for n in (8, 12, 16):
        g = nystrom.build_grid(geo.Sphere(), n)
        ops = nystrom.assemble(P11, g, ("K", "S"))
        radii.append(spectral.spectrum(ops["K"], ops["S"], cross_check=False).spectral_radius)
        f = np.tile([1.0, 0.0, 0.0], (g.n, 1))
        Kf = ops["K"].apply(f)
        norms.append(np.sqrt(np.sum(g.weights[:, None] * Kf**2)))
    assert max(radii) <= 0.5
    assert max(norms) / min(norms) < 1.01


def test_compact_part_entry_bound():
    # k0 T - K = K2 and |K2(x, y)| |x - y| is bounded on the unit sphere,
    # so off-diagonal entries obey |entry| <= C w_j / |x_i - x_j| with C fixed.
    consts = []
    for n in (8, 12):
        g = nystrom.build_grid(geo.Sphere(), n)
        ops = nystrom.assemble(P11, g, ("K", "T"), scheme="local")
        D = (P11.k0 * ops["T"].matrix - ops["K"].matrix).reshape(g.n, 3, g.n, 3)
        r = np.linalg.norm(g.nodes[:, None] - g.nodes[None], axis=-1)
        off = ~np.eye(g.n, dtype=bool)
        ratio = np.abs(D).max(axis=(1, 3))[off] * r[off] / np.broadcast_to(g.weights[None, :], r.shape)[off]
        consts.append(ratio.max())
    bound = (P11.mu / (2 * P11.mu + P11.lam) + 2 * (P11.mu + P11.lam) / (2 * P11.mu + P11.lam)) / (8 * np.pi)
    assert max(consts) <= bound + 1e-12


def test_single_layer_symmetry_and_sign():
    g = nystrom.build_grid(geo.Sphere(), 24)
    S = nystrom.assemble_S(P11, g)
    Sw = S.weighted(projected=True)
    assert spectral._two_norm(Sw - Sw.T) / spectral._two_norm(Sw) <= 1e-8
    # the nodal matrix also carries the unresolved part of the image
    Sn = S.weighted()
    assert spectral._two_norm(Sn - Sn.T) / spectral._two_norm(Sn) < 1e-4
    Sc = spectral._coefficient_single_layer(S, S)
    assert np.linalg.eigvalsh(0.5 * (Sc + Sc.T)).max() < 0


def test_single_layer_scaling():
    g1 = nystrom.build_grid(geo.Sphere(1.0), 8)
    g2 = nystrom.build_grid(geo.Sphere(2.0), 8)
    S1 = nystrom.assemble_S(P11, g1).matrix
    S2 = nystrom.assemble_S(P11, g2).matrix
    np.testing.assert_allclose(S2, 2 * S1, rtol=1e-12, atol=1e-14 * np.abs(S1).max())


def test_spectral_matvec_and_projection(sphere12):
    g, ops = sphere12
    K = ops["K"]
    rng = np.random.default_rng(0)
    x = rng.standard_normal(3 * g.n)
    fresh = nystrom.OperatorMatrix(None, "K", g, P11, K.factor, K.basis)
    np.testing.assert_allclose(fresh.matvec(x), K.matrix @ x, atol=1e-13)
    ev_nodal = np.sort(np.linalg.eigvals(K.matrix).real)
    ev_proj = np.sort(np.linalg.eigvals(K.projected()).real)
    np.testing.assert_allclose(ev_nodal, ev_proj, atol=1e-10)


def test_binary_roundtrip(tmp_path, sphere12):
    g, ops = sphere12
    path = tmp_path / "K.bin"
    ops["K"].to_binary(path)
    tag, M = nystrom.read_binary(path)
    assert tag == "K"
    assert np.array_equal(M, ops["K"].matrix)
    assert path.read_bytes()[:8] == b"ENPOPMAT"
    with pytest.raises(ValueError):
        ops["K"].to_csv(tmp_path / "K.csv", max_n=10)


def test_traction_operator_rigid_motions_sphere(sphere12):
    # Somigliana: rigid displacements r satisfy K^* r = r / 2 for the operator with
    # the directly differentiated kernel; on the sphere they are also right eigenvectors.
    g, ops = sphere12
    K = ops["Ktr"].matrix
    w = g.weights3()
    for r in _rigid_fields(g):
        v = r.reshape(-1)
        assert np.abs((K.T @ (w * v)) / w - 0.5 * v).max() < 1e-12


def test_traction_operator_rigid_motions_ellipsoid(ellipsoid_traction):
    errs = []
    for n, K in ellipsoid_traction.items():
        g = K.grid
        w = g.weights3()
        errs.append(max(np.abs((K.matrix.T @ (w * r.reshape(-1))) / w - 0.5 * r.reshape(-1)).max()
                        for r in _rigid_fields(g)))
    assert errs[-1] < 1e-3
    assert errs[0] > errs[1] > errs[2]


def _rigid_fields(g):
    N = g.n
    return [np.tile(e, (N, 1)) for e in np.eye(3)] + [np.cross(e, g.nodes) for e in np.eye(3)]


def test_pv_patch_flat_constant_density_zero():
    B = nystrom.pv_diagonal_block(geo.flat_chart(), [0.3, -0.1], "K1")
    assert np.all(B == 0.0)


def test_pv_patch_sphere_self_convergence():
    ch = geo.Sphere().chart()
    u = [1.0, 0.3]
    vals = [nystrom.pv_diagonal_block(ch, u, "K1", n_angular=m) for m in (8, 16, 32, 64)]
    d = [np.abs(b - a).max() for a, b in zip(vals, vals[1:])]
    assert all(d2 <= 0.3 * d1 or d2 < 1e-15 for d1, d2 in zip(d, d[1:]))


def test_pv_patch_k2_small():
    ch = geo.Ellipsoid(1, 1, 2).chart()
    u = [1.2, 0.4]
    vals = [np.abs(nystrom.pv_diagonal_block(ch, u, "K2", rho=r)).max() for r in (0.2, 0.1, 0.05)]
    assert np.all(np.isfinite(vals))
    assert vals[0] / vals[1] == pytest.approx(2.0, rel=0.1)
    assert vals[1] / vals[2] == pytest.approx(2.0, rel=0.1)


def test_pv_patch_leaving_chart():
    with pytest.raises(geo.GeometryError):
        nystrom.pv_diagonal_block(geo.Sphere().chart(), [0.1, 0.0], "K1", rho=0.2)


def test_flat_T_matches_halfspace_fft():
    # Oracle: the FFT half-space operator on a zero-padded periodic grid; images
    # decay like P^-3 in the padding factor P, removed by extrapolation from P = 8, 16.
    n = 128
    chart = geo.flat_chart(orientation=-1, periodic=True)
    grid = symbols.chart_grid(chart, n)
    U = grid.points()
    g = np.exp(-((U[..., 0] - 0.3) ** 2 + (U[..., 1] + 0.2) ** 2) / 0.25)
    f = np.stack([(U[..., 1] + 0.2) * g, 0.5 * g, (U[..., 0] - 0.3) * g], -1)
    Th = nystrom.flat_T_apply(grid, f)
    out = {}
    for P in (8, 16):
        fp = np.zeros((3, P * n, P * n))
        fp[:, :n, :n] = np.moveaxis(f, -1, 0)
        Tf = riesz.halfspace_T_apply(riesz.PeriodicGridFunction(fp, P * 2 * np.pi))
        out[P] = np.moveaxis(Tf.values[:, :n, :n], 0, -1)
    oracle = (8 * out[16] - out[8]) / 7
    assert np.abs(Th - oracle).max() / np.abs(oracle).max() <= 1e-6
