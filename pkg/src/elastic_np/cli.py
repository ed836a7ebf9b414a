"""
Command-line driver.

Usage::

    python -m elastic_np SUBCOMMAND [--config PATH] [--out DIR] [--seed N]
        [--resolutions 16,24,32] [--surface NAME] [--lambda X] [--mu X]
        [--KEY VALUE ...]

Any configuration key can be overridden as ``--KEY VALUE`` (dashes and
underscores are interchangeable, surface parameters as ``--surface.c 2``).

Subcommands: ``verify-kernels``, ``verify-riesz``, ``verify-symbols``,
``spectrum``, ``probe-compactness``.

Exit codes: 0 success, 1 a check failed, 2 configuration error, 3 resource
limit (memory ceiling or a locked output directory).
"""

import argparse
import csv
import datetime
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks, geometry, lame, nystrom, spectral
from .errors import ConfigError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

SURFACE_KEYS = ("radius", "a", "b", "c", "eps", "l", "m")


class ResourceLimit(RuntimeError):
    pass


@dataclass
class RunConfig:
    surface: str = "sphere"
    surface_params: dict = field(default_factory=dict)
    lam: float = 1.0
    mu: float = 1.0
    resolutions: tuple = (16, 24, 32)
    seed: int = 0
    out: str = "out"
    scheme: str = "spectral"
    n_radial: int = 0
    n_angular: int = 0
    delta: float = 0.0
    probe_compactness: bool = True
    probe_k: int = 20
    probe_fraction: float = 0.25
    memory_limit_mb: float = 4096.0
    riesz_grid: int = 512
    symbol_pairs: int = 100
    sos_samples: int = 10_000
    composition_grids: tuple = (64, 128, 256)
    export_matrices: bool = False

    def params(self):
        try:
            return lame.LameParameters(self.lam, self.mu)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def make_surface(self):
        try:
            return geometry.make_surface(self.surface, **self.surface_params)
        except KeyError as exc:
            raise ConfigError(f"surface: unknown kind {self.surface!r}") from exc
        except ValueError as exc:
            raise ConfigError(f"surface: {exc}") from exc

    def validate(self):
        self.params()
        self.make_surface()
        if any(r < 8 for r in self.resolutions):
            raise ConfigError("resolutions: every resolution must be >= 8")
        if self.scheme not in ("spectral", "local", "regularized"):
            raise ConfigError(f"scheme: unknown quadrature scheme {self.scheme!r}")
        if self.riesz_grid & (self.riesz_grid - 1):
            raise ConfigError("riesz_grid: must be a power of two")
        if self.delta < 0:
            raise ConfigError("delta: must be non-negative")
        return self

    def as_dict(self):
        d = dict(self.__dict__)
        d["resolutions"] = list(self.resolutions)
        d["composition_grids"] = list(self.composition_grids)
        d["lambda"] = d.pop("lam")
        return d


_FIELDS = {f for f in RunConfig.__dataclass_fields__}
_ALIASES = {"lambda": "lam"}


def _coerce(key, value):
    default = RunConfig.__dataclass_fields__[key].default
    if key in ("resolutions", "composition_grids"):
        return tuple(int(v) for v in str(value).split(",") if v.strip())
    if isinstance(default, bool):
        v = str(value).strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value).strip()


def apply_setting(cfg: RunConfig, key, value):
    key = key.strip()
    if key.startswith("surface.") or key in SURFACE_KEYS:
        name = key.split(".", 1)[-1]
        if name not in SURFACE_KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            cfg.surface_params[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
        return
    attr = _ALIASES.get(key, key)
    if attr not in _FIELDS or attr == "surface_params":
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        setattr(cfg, attr, _coerce(attr, value))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def parse_config_text(text, cfg=None):
    """Parse ``key = value`` lines (``#`` starts a comment)."""
    cfg = cfg or RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        k, v = line.split("=", 1)
        apply_setting(cfg, k, v.strip())
    return cfg


def code_hash():
    h = hashlib.sha256()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()


# -- output handling --------------------------------------------------------------------


class OutputDir:
    """Output directory guarded by a lockfile."""

    def __init__(self, path):
        self.path = Path(path)
        self.lock = self.path / ".lock"

    def __enter__(self):
        self.path.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise ResourceLimit(f"output directory {self.path} is locked by another run") from exc
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        self.lock.unlink(missing_ok=True)
        return False

    def file(self, name):
        return self.path / name


def provenance(cfg, command):
    return {"command": command, "config": cfg.as_dict(), "code_sha256": code_hash(),
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}


def write_residuals(path, check_list, prov):
    with open(path, "w", newline="") as fh:
        fh.write(f"# code_sha256={prov['code_sha256']}\n")
        fh.write(f"# config={json.dumps(prov['config'], sort_keys=True)}\n")
        w = csv.writer(fh)
        w.writerow(["check", "max_residual", "tolerance", "result"])
        for c in check_list:
            w.writerow(c.row())


def _csv_header(prov):
    return f"code_sha256={prov['code_sha256']}\nconfig={json.dumps(prov['config'], sort_keys=True)}"


def write_report(path, prov, body):
    with open(path, "w") as fh:
        json.dump({**body, "provenance": prov}, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(type(obj))


def _checks_body(check_list):
    return {"checks": [{"name": c.name, "residual": c.residual, "tolerance": c.tolerance, "passed": c.passed,
                        "note": c.note} for c in check_list]}


def _status(check_list):
    return EXIT_OK if all(c.passed for c in check_list) else EXIT_FAIL


def _print_checks(check_list):
    for c in check_list:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:40s} {c.residual:.3e} (tol {c.tolerance:.1e}) {c.note}")


# -- subcommands ------------------------------------------------------------------------


def cmd_verify_kernels(cfg, out, prov):
    rng = np.random.default_rng(cfg.seed)
    cl = checks.kernel_suite(cfg.params(), cfg.make_surface(), rng)
    write_residuals(out.file("residuals.csv"), cl, prov)
    write_report(out.file("report.json"), prov, _checks_body(cl))
    _print_checks(cl)
    return _status(cl)


def cmd_verify_riesz(cfg, out, prov):
    rng = np.random.default_rng(cfg.seed)
    surface = cfg.make_surface()
    cl = checks.riesz_suite(rng, cfg.riesz_grid)
    sym, rows = checks.symbol_suite(surface, rng, cfg.symbol_pairs, cfg.sos_samples, cfg.composition_grids)
    cl += sym
    write_residuals(out.file("residuals.csv"), cl, prov)
    _write_samples(out.file("symbol_samples.csv"), rows)
    write_report(out.file("report.json"), prov, _checks_body(cl))
    _print_checks(cl)
    return _status(cl)


def cmd_verify_symbols(cfg, out, prov):
    rng = np.random.default_rng(cfg.seed)
    surface = cfg.make_surface()
    cl = [checks.symbol_oracle_check(surface, rng, cfg.symbol_pairs)]
    sos, rows = checks.sum_of_squares_samples(surface, rng, cfg.sos_samples)
    cl.append(sos)
    write_residuals(out.file("residuals.csv"), cl, prov)
    _write_samples(out.file("symbol_samples.csv"), rows)
    write_report(out.file("report.json"), prov, _checks_body(cl))
    _print_checks(cl)
    return _status(cl)


def _write_samples(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["chart", "u1", "u2", "xi1", "xi2", "residual"])
        for r in rows:
            w.writerow([r[0]] + [f"{v:.17g}" for v in r[1:]])


def estimate_memory_mb(resolution, n_ops=2):
    """Peak memory of assembling and analysing ``n_ops`` operators at one resolution."""
    N = 2 * resolution * resolution
    L = resolution * resolution
    dense = (3 * N) ** 2 * 8
    factor = 3 * N * 3 * L * 8
    return (n_ops * (dense + 2 * factor) + 6 * (3 * L) ** 2 * 8) / 2**20


def _assemble(cfg, surface, p, r, tags):
    est = estimate_memory_mb(r, len(tags))
    if est > cfg.memory_limit_mb:
        raise ResourceLimit(f"resolution {r} needs about {est:.0f} MB, above the ceiling of "
                            f"{cfg.memory_limit_mb:.0f} MB")
    grid = nystrom.build_grid(surface, r)
    return nystrom.assemble(p, grid, tags, scheme=cfg.scheme, n_radial=cfg.n_radial or None,
                            n_angular=cfg.n_angular or None)


def _check_all_ceilings(cfg, n_ops):
    for r in cfg.resolutions:
        est = estimate_memory_mb(r, n_ops)
        if est > cfg.memory_limit_mb:
            raise ResourceLimit(f"resolution {r} needs about {est:.0f} MB, above the ceiling of "
                                f"{cfg.memory_limit_mb:.0f} MB")


def cmd_spectrum(cfg, out, prov):
    p = cfg.params()
    surface = cfg.make_surface()
    if cfg.probe_compactness and len(cfg.resolutions) < 3:
        raise ConfigError("resolutions: the compactness probe needs at least three resolutions")
    _check_all_ceilings(cfg, 2)
    reports, Ks, rows = [], [], []
    header = _csv_header(prov)
    for r in cfg.resolutions:
        t0 = time.perf_counter()
        ops = _assemble(cfg, surface, p, r, ("K", "S"))
        rep = spectral.spectrum(ops["K"], ops["S"], delta=cfg.delta or None)
        dks = spectral.symmetrization_defect(ops["K"], ops["S"], "KS")
        dsk = spectral.symmetrization_defect(ops["K"], ops["S"], "SK")
        rep.meta.update({"plemelj_KS": dks, "plemelj_SK": dsk})
        reports.append(rep)
        rep.to_csv(out.file(f"eigenvalues_r{r}.csv"), header)
        if cfg.export_matrices:
            ops["K"].to_binary(out.file(f"K_r{r}.bin"))
        Ks.append(ops["K"])
        rows.append((r, 3 * ops["K"].grid.n, rep))
        print(f"resolution {r}: {3 * ops['K'].grid.n} unknowns, {time.perf_counter() - t0:.1f} s", flush=True)
        del ops
    reports[-1].to_csv(out.file("eigenvalues.csv"), header)
    probe = None
    cl = spectrum_checks(reports)
    if cfg.probe_compactness:
        probe = spectral.polynomial_compactness_probe(Ks, p, cfg.probe_k, cfg.probe_fraction)
        cl += compactness_checks(probe)
    body = {"spectra": [r.to_dict() for r in reports], **_checks_body(cl)}
    if probe:
        body["compactness"] = {t: d.to_dict() for t, d in probe.items()}
    write_report(out.file("report.json"), prov, body)
    write_residuals(out.file("residuals.csv"), cl, prov)
    summary = spectrum_summary(rows, probe)
    out.file("summary.txt").write_text(summary)
    print(summary)
    _print_checks(cl)
    return _status(cl)


def spectrum_checks(reports):
    cl = []
    fin = reports[-1]
    cl.append(Check("fraction_within_delta_finest", 1.0 - fin.fraction_within(), 0.05,
                    note=f"resolved-subspace fraction {fin.fraction_within(True):.4f}"))
    empty = [k for k, v in fin.clusters.counts.items() if v == 0]
    cl.append(Check("all_clusters_nonempty", float(len(empty)), 0.0, note=",".join(empty)))
    outl = [len(r.clusters.outliers) for r in reports]
    growth = max([b - a for a, b in zip(outl, outl[1:])] + [0])
    cl.append(Check("outliers_non_increasing", float(growth), 0.0, note=f"counts {outl}"))
    imag = max(r.imaginary_defect / r.spectral_radius for r in reports)
    cl.append(Check("imaginary_defect_relative", imag, 1e-6))
    dks = [r.meta["plemelj_KS"] for r in reports]
    mono = all(b < a for a, b in zip(dks, dks[1:]))
    cl.append(Check("plemelj_defect_decreasing", dks[-1], dks[0], passed=mono,
                    note="KS form " + ", ".join(f"{d:.3e}" for d in dks)))
    return cl


Check = checks.Check


def spectrum_summary(rows, probe):
    lines = [f"{'res':>4} {'3N':>6} {'within':>8} {'resolved':>9} {'outliers':>8} "
             f"{'n(-k0)':>7} {'n(0)':>6} {'n(+k0)':>7} {'min':>9} {'max':>9} {'KS':>10} {'SK':>10}"]
    for r, n3, rep in rows:
        c = rep.clusters.counts
        lines.append(f"{r:>4} {n3:>6} {rep.fraction_within():8.4f} {rep.fraction_within(True):9.4f} "
                     f"{len(rep.clusters.outliers):>8} {c['-k0']:>7} {c['0']:>6} {c['+k0']:>7} "
                     f"{rep.eigenvalues[0]:9.5f} {rep.eigenvalues[-1]:9.5f} "
                     f"{rep.meta['plemelj_KS']:10.3e} {rep.meta['plemelj_SK']:10.3e}")
    if probe:
        lines.append("")
        k = probe["p3"].k
        lines.append(f"singular value {k} of the composites (and at fraction {probe['p3'].fraction} of the "
                     "resolved dimension)")
        for t, d in probe.items():
            vals = "  ".join(f"{v:.4e}" for v in d.kth)
            fr = "  ".join(f"{v:.4e}" for v in d.fraction_values)
            lines.append(f"  {t:10s} {vals}   |  {fr}")
    return "\n".join(lines) + "\n"


def compactness_checks(probe):
    p3 = probe["p3"]
    cl = [Check("p3_kth_singular_value_halves", p3.kth[-1] / p3.kth[0], 0.5,
                note="sigma_k(p3): " + ", ".join(f"{v:.4e}" for v in p3.kth))]
    for t in ("K^2-k0^2", "K(K-k0)", "K(K+k0)"):
        v = np.asarray(probe[t].kth)
        var = float(v.max() / v.min() - 1.0)
        cl.append(Check(f"{t}_kth_stable", var, 0.5, passed=bool(var < 0.5 and v.min() > 0),
                        note=", ".join(f"{x:.4e}" for x in v)))
    ratio = spectral.dichotomy_ratio(probe)
    cl.append(Check("p3_to_K2_ratio_halves", ratio[-1] / ratio[0], 0.5,
                    note="sigma_k(p3) / sigma_k(K^2-k0^2): " + ", ".join(f"{x:.4e}" for x in ratio)))
    fr = p3.fraction_values
    cl.append(Check("p3_fraction_index_decreasing", fr[-1] / fr[0], 1.0,
                    passed=all(b < a for a, b in zip(fr, fr[1:])),
                    note=", ".join(f"{x:.4e}" for x in fr)))
    return cl


def cmd_probe_compactness(cfg, out, prov):
    p = cfg.params()
    surface = cfg.make_surface()
    if len(cfg.resolutions) < 3:
        raise ConfigError("resolutions: the compactness probe needs at least three resolutions")
    _check_all_ceilings(cfg, 1)
    Ks = [_assemble(cfg, surface, p, r, ("K",))["K"] for r in cfg.resolutions]
    probe = spectral.polynomial_compactness_probe(Ks, p, cfg.probe_k, cfg.probe_fraction)
    cl = compactness_checks(probe)
    write_report(out.file("report.json"), prov,
                 {"compactness": {t: d.to_dict() for t, d in probe.items()}, **_checks_body(cl)})
    write_residuals(out.file("residuals.csv"), cl, prov)
    _print_checks(cl)
    return _status(cl)


COMMANDS = {
    "verify-kernels": cmd_verify_kernels,
    "verify-riesz": cmd_verify_riesz,
    "verify-symbols": cmd_verify_symbols,
    "spectrum": cmd_spectrum,
    "probe-compactness": cmd_probe_compactness,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="elastic-np", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", help="random seed")
    ap.add_argument("--resolutions", help="comma-separated list, e.g. 16,24,32")
    ap.add_argument("--surface", help="sphere | ellipsoid | star")
    ap.add_argument("--lambda", dest="lam", help="first Lame constant")
    ap.add_argument("--mu", help="shear modulus")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override any configuration key")
    return ap


def _extra_settings(rest):
    """``--KEY VALUE`` / ``--KEY=VALUE`` pairs left over by the parser."""
    pairs, i = [], 0
    while i < len(rest):
        tok = rest[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        elif i + 1 < len(rest):
            val = rest[i + 1]
            i += 2
        else:
            raise ConfigError(f"option --{key} expects a value")
        pairs.append((key.replace("-", "_"), val))
    return pairs


def load_config(args, extra=()):
    cfg = RunConfig()
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        parse_config_text(text, cfg)
    for key, val in (("out", args.out), ("seed", args.seed), ("resolutions", args.resolutions),
                     ("surface", args.surface), ("lambda", args.lam), ("mu", args.mu)):
        if val is not None:
            apply_setting(cfg, key, val)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        apply_setting(cfg, *item.split("=", 1))
    for key, val in extra:
        apply_setting(cfg, key, val)
    return cfg.validate()


def main(argv=None):
    ap = build_parser()
    try:
        args, rest = ap.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args, _extra_settings(rest))
        with OutputDir(cfg.out) as out:
            return COMMANDS[args.command](cfg, out, provenance(cfg, args.command))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except MemoryError:
        print("resource limit: out of memory", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
