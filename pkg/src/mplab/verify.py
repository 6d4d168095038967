"""Self-contained invariant suites behind ``mplab verify``.

Each check draws its own small samples from a seeded generator, measures
the worst violation and returns a :class:`DiagnosticRecord`.  The ``fast``
level keeps ``n <= 64``; ``full`` goes up to ``n = 512``.
"""

import json
import math

import numpy as np

from .bounds import (
    H,
    SmoothingParams,
    esd_distance_to_law,
    smoothing_rhs_for_sample,
    step_distance,
)
from .diagnostics import (
    KAPPA,
    DiagnosticRecord,
    RegionSpec,
    RowRemoval,
    edge_lower_bounds,
    kappa_mass,
    monotone_in_v,
    region_g_membership,
    row_sum_bound,
)
from .ensemble import EnsembleConfig, sample_matrix
from .mp_law import MPLaw, mp_cdf, mp_cdf_vec, mp_moment, mp_stieltjes, mp_stieltjes_sym
from .spectral import hermitize, remove_row, spectral_sample

__all__ = ["run_suite", "suite_report", "LEVELS"]

SCHEMA_VERSION = 1
Y_GRID = (0.25, 0.5, 0.75, 1.0)
LEVELS = {
    "fast": {"sizes": [(8, 16), (16, 32), (32, 32), (64, 128)], "samples": 4, "z_points": 200},
    "full": {"sizes": [(8, 16), (64, 128), (128, 256), (512, 1024)], "samples": 6, "z_points": 1000},
}


def _z_grid(rng, count):
    u = rng.uniform(-3.0, 3.0, count)
    v = np.exp(rng.uniform(math.log(1e-4), math.log(10.0), count))
    return u + 1j * v


def _record(name, params, statistic, bound, passed=None):
    statistic, bound = float(statistic), float(bound)
    passed = statistic <= bound if passed is None else bool(passed)
    return DiagnosticRecord(name, params, statistic, bound, passed)


def _rel(lhs, rhs):
    return abs(lhs - rhs) / (1.0 + abs(rhs))


def _samples(cfg, rng, count):
    sizes = cfg["sizes"]
    for k in range(count):
        n, p = sizes[k % len(sizes)]
        conf = EnsembleConfig(n, p, "rademacher" if k % 2 == 0 else "gaussian", base_seed=int(rng.integers(2 ** 32)))
        yield sample_matrix(conf, 0).entries


def _law_checks(rng, cfg):
    zs = _z_grid(rng, cfg["z_points"])
    quad_res = sym_res = bound_excess = 0.0
    band_short = 0.0
    moment_err = 0.0
    cdf_gap = 0.0
    for y in Y_GRID:
        law = MPLaw(y)
        S = mp_stieltjes(law, zs)
        s = mp_stieltjes_sym(law, zs)
        scale = 1.0 + np.abs(zs) ** 2
        quad_res = max(quad_res, float(np.max(np.abs(y * zs * S * S + (y - 1 + zs) * S + 1) / scale)))
        sym_res = max(sym_res, float(np.max(np.abs(y * s * s + (zs + (y - 1) / zs) * s + 1) / scale)))
        bound_excess = max(bound_excess, float(np.max(np.abs(s) - 1.0 / math.sqrt(y))))
        band = (np.abs(zs.real) >= law.a) & (np.abs(zs.real) <= law.b)
        if band.any():
            short = 1.0 / (1.0 + math.sqrt(y)) - np.abs(zs[band] + y * s[band])
            band_short = max(band_short, float(np.max(short)))
        moment_err = max(
            moment_err,
            abs(mp_moment(law, 0) - 1.0),
            abs(mp_moment(law, 1) - 1.0),
            abs(mp_moment(law, 2) - (1.0 + y)),
        )
        xs = np.linspace(law.lower, law.upper, 17)
        cdf_gap = max(cdf_gap, max(abs(mp_cdf(law, x) - mp_cdf_vec(law, x)) for x in xs))
    return [
        _record("law.stieltjes_quadratic", {"points": len(zs)}, quad_res, 1e-12),
        _record("law.sym_quadratic", {"points": len(zs)}, sym_res, 1e-12),
        _record("law.sym_modulus_bound", {}, bound_excess, 1e-12),
        _record("law.support_band_lower_bound", {}, band_short, 1e-9),
        _record("law.moments", {}, moment_err, 1e-8),
        _record("law.cdf_two_routes", {}, cdf_gap, 1e-10),
        _record(
            "law.kappa",
            {},
            max(abs(kappa_mass(KAPPA) - 0.75), abs(math.tan(3 * math.pi / 8) - H), abs(KAPPA - H)),
            1e-12,
        ),
    ]


def _spectral_checks(rng, cfg, poison):
    herm = trace = ward = lower_row = monotone = interlace = 0.0
    diag_repr = trace_gap = transform_gap = eps3_sum = deriv = eps3 = fd = 0.0
    count = 0
    for X in _samples(cfg, rng, cfg["samples"]):
        n, p = X.shape
        sv = np.linalg.svd(X / math.sqrt(p), compute_uv=False)
        ev = np.linalg.eigvalsh(hermitize(X))
        oracle = np.sort(np.concatenate([sv, -sv, np.zeros(p - n)]))
        herm = max(herm, float(np.max(np.abs(ev - oracle))))

        rr = RowRemoval(X)
        for z in _z_grid(rng, 3):
            z = complex(z.real, max(z.imag, 1e-2))
            trace = max(trace, _rel(*rr.trace_identity(z)))
            R = rr.full.at(z).matrix
            minor = rr.minor(0).at(z).matrix
            for l in rng.integers(0, n + p, 2):
                lhs, rhs = row_sum_bound(R, l, z.imag)
                ward = max(ward, abs(lhs - rhs) / (1.0 + rhs))
            for l in rng.integers(n - 1, n + p - 1, 2):
                lhs, rhs = row_sum_bound(minor, l, z.imag, cols=slice(n - 1, None))
                lower_row = max(lower_row, lhs - rhs)
            for s in (2, 4, 16):
                lo, hi = monotone_in_v(rr.full, z, int(rng.integers(n + p)), s)
                monotone = max(monotone, lo - hi)
            for j in rng.integers(0, n, 2):
                j = int(j)
                e = rr.epsilon(z, j)
                diag_repr = max(diag_repr, e.residual / max(1.0, abs(e.r_jj)))
                lhs, rhs = rr.trace_gap(z, j)
                if poison:
                    rhs = -rhs
                trace_gap = max(trace_gap, _rel(lhs, rhs))
                transform_gap = max(transform_gap, _rel(*rr.transform_gap(z, j)))
                lhs, rhs = rr.derivative_identity(z, j)
                deriv = max(deriv, _rel(lhs, rhs))
                # central differences need v well above the step to be accurate
                zf, h = complex(z.real, max(z.imag, 0.1)), 1e-5
                exact = rr.derivative_identity(zf, j)[1]
                fd_val = (rr.full.diagonal(zf + h)[j] - rr.full.diagonal(zf - h)[j]) / (2 * h)
                fd = max(fd, _rel(fd_val, exact))
                eps3 = max(eps3, abs(e.eps3) * n * z.imag / 2.0)
                count += 1
            if n <= 64:
                eps3_sum = max(eps3_sum, _rel(*rr.eps3_sum(z)))
        for j in range(min(n, 4)):
            a = spectral_sample(X).eigenvalues
            b = spectral_sample(remove_row(X, j)).eigenvalues
            interlace = max(interlace, step_distance(a, b) * n / 2.0)
    return [
        _record("spectral.hermitization_vs_svd", {}, herm, 1e-8),
        _record("spectral.trace_identity", {}, trace, 1e-9),
        _record("spectral.ward_row_equality", {}, ward, 1e-10),
        _record("spectral.row_sum_bound", {}, lower_row, 1e-12),
        _record("spectral.monotone_in_v", {"s": [2, 4, 16]}, monotone, 1e-12),
        _record("spectral.interlacing", {"statistic": "n/2 sup|F_n - F_n^(j)|"}, interlace, 1.0),
        _record("diagnostics.diag_repr", {"triples": count}, diag_repr, 1e-8),
        _record("diagnostics.trace_gap", {"triples": count, "poison": poison}, trace_gap, 1e-10),
        _record("diagnostics.transform_gap", {"triples": count}, transform_gap, 1e-10),
        _record("diagnostics.eps3_sum", {}, eps3_sum, 1e-8),
        _record("diagnostics.derivative_identity", {}, deriv, 1e-10),
        _record("diagnostics.derivative_fd", {"step": 1e-5}, fd, 1e-5),
        _record("diagnostics.eps3_bound", {"statistic": "n v |eps3| / 2"}, eps3, 1.0),
    ]


def _geometry_checks(rng, level):
    worst = -math.inf
    worst_b = -math.inf
    checked = 0
    for y in (0.25, 0.5, 1.0):
        law = MPLaw(y)
        for n in (200, 1000):
            spec = RegionSpec.for_law(law, n)
            for _ in range(200 if level == "fast" else 1000):
                u = rng.uniform(law.a, law.b) * rng.choice([-1.0, 1.0])
                v = math.exp(rng.uniform(math.log(spec.v0), math.log(spec.V)))
                z = complex(u, v)
                if not region_g_membership(z, law, spec).in_region_g:
                    continue
                (e, lb), (nv, lb2) = edge_lower_bounds(z, law, spec)
                worst = max(worst, lb - e)
                worst_b = max(worst_b, lb2 - nv)
                checked += 1
    return [
        _record("diagnostics.edge_bound_gamma_v", {"points": checked}, max(worst, 0.0), 0.0),
        _record("diagnostics.edge_bound_nv", {"points": checked}, max(worst_b, 0.0), 0.0),
    ]


def _bounds_checks(rng, cfg, level):
    factor = brute = 0.0
    for X in _samples(cfg, rng, cfg["samples"]):
        n, p = X.shape
        law = MPLaw(n / p)
        sample = spectral_sample(X)
        d = esd_distance_to_law(sample, law)
        ds = esd_distance_to_law(sample, law, symmetrized=True)
        factor = max(factor, abs(d - 2.0 * ds))
        grid = np.linspace(-0.5, law.upper + 1.0, 20001)
        ev = sample.eigenvalues
        dense = np.max(np.abs(np.searchsorted(ev, grid, side="right") / n - mp_cdf_vec(law, grid)))
        # the grid sup can only undershoot the exact one
        brute = max(brute, float(dense - d))
    n = 64 if level == "fast" else 200
    law = MPLaw(0.5)
    params = SmoothingParams.for_law(law, n)
    conf = EnsembleConfig(n, 2 * n, base_seed=int(rng.integers(2 ** 32)))
    report = smoothing_rhs_for_sample(spectral_sample(sample_matrix(conf, 0)), law, params)
    return [
        _record("bounds.factor_two_symmetrization", {}, factor, 1e-12),
        _record("bounds.kolmogorov_vs_dense_grid", {}, brute, 1e-12),
        _record(
            "bounds.smoothing_dominates",
            {"n": n, "total": report.total},
            report.measured_delta,
            report.total,
        ),
        _record("bounds.admissibility", {}, 2 * params.v * params.H - params.eps ** 1.5, 1e-12 * params.eps ** 1.5),
    ]


def run_suite(level="fast", seed=0, poison=False):
    """Run every check at ``level``; returns the list of records."""
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose from {sorted(LEVELS)}")
    cfg = LEVELS[level]
    rng = np.random.default_rng(seed)
    records = []
    records += _law_checks(rng, cfg)
    records += _spectral_checks(rng, cfg, poison)
    records += _geometry_checks(rng, level)
    records += _bounds_checks(rng, cfg, level)
    return records


def suite_report(records, level, seed):
    """JSON-ready report: ``{schema_version, level, seed, passed, checks: [...]}``."""
    return {
        "schema_version": SCHEMA_VERSION,
        "level": level,
        "seed": seed,
        "passed": all(r.passed for r in records),
        "checks": [r.to_dict() for r in records],
    }


def report_json(records, level, seed):
    return json.dumps(suite_report(records, level, seed), indent=2, sort_keys=True)
