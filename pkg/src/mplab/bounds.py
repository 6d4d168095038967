"""Kolmogorov distances and the Stieltjes-transform smoothing bound.

The smoothing bound controls ``sup_x |F(x) - G~_y(x)|`` for a symmetric
distribution ``F`` by

    2 int |S_F - s_y|(u + iV) du  +  C1 v  +  C2 eps^(3/2)
      + 2 sup_{x in J'} int_{v/sqrt(gamma(x))}^{V} |S_F - s_y|(x + iu) du

where ``J' = [a + eps/2, b - eps/2]``, ``2 v H <= eps^(3/2)`` and
``H = tan(3 pi / 8) = 1 + sqrt(2)``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from ._errors import ContractError, DomainError
from .diagnostics import RegionSpec, region_g_membership
from .mp_law import edge_distance, edge_functional, mp_cdf_vec, mp_stieltjes_sym, sym_cdf
from .spectral import empirical_stieltjes_sym

__all__ = [
    "H",
    "kolmogorov_distance",
    "step_distance",
    "eigen_tolerance",
    "esd_distance_to_law",
    "smoothing_constants",
    "SmoothingParams",
    "BoundReport",
    "smoothing_rhs",
    "smoothing_rhs_for_sample",
    "stieltjes_error_envelope",
    "envelope_terms",
    "calibrate_envelope_constant",
]

H = 1.0 + math.sqrt(2.0)
SCHEMA_VERSION = 1


def _atoms_and_masses(atoms):
    vals, counts = np.unique(np.asarray(atoms, dtype=float), return_counts=True)
    right = np.cumsum(counts) / counts.sum()
    left = right - counts / counts.sum()
    return vals, left, right


def kolmogorov_distance(atoms, cdf):
    """``sup_x |F(x) - G(x)|`` for the ESD of ``atoms`` and a continuous ``G``.

    The supremum is attained at a jump of ``F``, on one side or the other,
    so only the left and right limits at the atoms are compared.  Ties are
    merged.  ``cdf`` must accept arrays.
    """
    vals, left, right = _atoms_and_masses(atoms)
    g = np.asarray(cdf(vals), dtype=float)
    return float(max(np.max(np.abs(right - g)), np.max(np.abs(left - g))))


def step_distance(atoms_a, atoms_b, atol=0.0):
    """``sup_x |F_a(x) - F_b(x)|`` for two empirical distributions.

    Atoms closer than ``atol`` are treated as one tied value, so computed
    eigenvalues that differ only by roundoff do not open spurious gaps.
    """
    a = np.sort(np.asarray(atoms_a, dtype=float))
    b = np.sort(np.asarray(atoms_b, dtype=float))
    pts = np.union1d(a, b)
    if atol > 0 and pts.size > 1:
        # keep only the right end of each cluster of near-equal points
        pts = pts[np.append(np.diff(pts) > atol, True)]
    fa = np.searchsorted(a, pts + atol, side="right") / a.size
    fb = np.searchsorted(b, pts + atol, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def eigen_tolerance(*spectra):
    """Roundoff scale ``8 N eps max|lambda|`` of computed symmetric spectra."""
    size = max(len(s) for s in spectra)
    top = max(float(np.max(np.abs(s))) if len(s) else 0.0 for s in spectra)
    return 8.0 * size * np.finfo(float).eps * top


def esd_distance_to_law(sample, law, symmetrized=False):
    """``Delta(F_n, G_y)``, or ``Delta(F~_n, G~_y)`` with ``symmetrized=True``."""
    if symmetrized:
        s = sample.singular_values
        return kolmogorov_distance(np.concatenate([-s, s]), lambda x: sym_cdf(law, x))
    return kolmogorov_distance(sample.eigenvalues, lambda x: mp_cdf_vec(law, x))


def smoothing_constants(y):
    """``(C1, C2)`` of the smoothing inequality."""
    if y == 1.0:
        return H * H / math.pi, 1.0 / math.pi
    root = math.sqrt(y * (1.0 - math.sqrt(y)))
    return 2.0 * H * H * math.sqrt(3.0) / (math.pi ** 2 * root), 4.0 / (math.pi * root)


@dataclass(frozen=True)
class SmoothingParams:
    """Heights and margin for the smoothing bound at ratio ``y``."""

    y: float
    v: float
    V: float
    eps: float
    H: float = H

    def __post_init__(self):
        if not (self.v > 0 and self.V > self.v and self.eps > 0):
            raise ContractError("need 0 < v < V and eps > 0")
        if 2.0 * self.v * self.H > self.eps ** 1.5 * (1.0 + 1e-12):
            raise ContractError("admissibility 2 v H <= eps^(3/2) violated")
        if self.eps > 0.5 * math.sqrt(self.y):
            raise ContractError("eps must not exceed sqrt(y)/2")

    @property
    def C1(self):
        return smoothing_constants(self.y)[0]

    @property
    def C2(self):
        return smoothing_constants(self.y)[1]

    @classmethod
    def for_law(cls, law, n, A0=1.0, V=None):
        """``v0 = A0/n``, ``eps^(3/2) = 2 v0 kappa`` and ``v`` at the admissibility equality."""
        region = RegionSpec.for_law(law, n, A0=A0, V=V)
        v = region.eps ** 1.5 / (2.0 * H)
        return cls(law.y, v, region.V, region.eps)


@dataclass
class BoundReport:
    """Terms of the smoothing bound and, optionally, the distance it bounds."""

    horizontal: float
    c1_v: float
    c2_eps: float
    vertical: float
    measured_delta: float = None
    flags: list = field(default_factory=list)

    @property
    def total(self):
        return self.horizontal + self.c1_v + self.c2_eps + self.vertical

    @property
    def holds(self):
        return self.measured_delta is None or self.measured_delta <= self.total

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "term_names": ["horizontal", "C1v", "C2eps", "vertical"],
            "terms": [self.horizontal, self.c1_v, self.c2_eps, self.vertical],
            "total": self.total,
            "measured_delta": self.measured_delta,
            "flags": list(self.flags),
        }


def _horizontal(diff, law, params, second_moment, radius):
    T = law.b + 10.0
    val, _ = quad(lambda u: diff(complex(u, params.V)), -T, T, limit=400, epsabs=1e-11, epsrel=1e-9)
    # tail beyond |u| = T from the moment expansion of the two transforms;
    # both laws are symmetric with unit mass, so odd terms vanish
    M = max(radius, law.b)
    tail = abs(second_moment - 1.0) / T ** 2 + M ** 4 / (T ** 4 * (1.0 - (M / T) ** 2))
    return 2.0 * (val + tail)


def _vertical_integral(diff, law, params, x):
    lo = params.v / math.sqrt(float(edge_distance(law, x)))
    if lo >= params.V:
        return 0.0
    val, _ = quad(
        lambda t: diff(complex(x, math.exp(t))) * math.exp(t),
        math.log(lo),
        math.log(params.V),
        limit=400,
        epsabs=1e-11,
        epsrel=1e-8,
    )
    return val


def _vertical(diff, law, params, grid_points):
    lo, hi = law.a + 0.5 * params.eps, law.b - 0.5 * params.eps
    # uniform grid plus geometric clustering towards both edges of J'
    bulk = np.linspace(lo, hi, grid_points)
    depth = np.geomspace(1e-4, 0.05, 20) * (hi - lo)
    xs = np.unique(np.concatenate([bulk, lo + depth, hi - depth]))
    vals = np.array([_vertical_integral(diff, law, params, x) for x in xs])
    i = int(np.argmax(vals))
    best = float(vals[i])
    left, right = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    if right > left:
        res = minimize_scalar(
            lambda x: -_vertical_integral(diff, law, params, x),
            bounds=(left, right),
            method="bounded",
            options={"xatol": 1e-6 * (hi - lo)},
        )
        best = max(best, -float(res.fun))
    return 2.0 * best


def smoothing_rhs(stieltjes_F, law, params, *, second_moment=None, radius=None,
                  grid_points=200, measured_delta=None):
    """Evaluate the right-hand side of the smoothing bound.

    Parameters
    ----------
    stieltjes_F : callable or None
        Stieltjes transform of a *symmetric* distribution ``F`` on the upper
        half-plane.  ``None`` stands for ``F = G~_y`` itself, in which case
        both integral terms are exactly zero.
    law : MPLaw
    params : SmoothingParams
    second_moment, radius : float
        ``int x^2 dF`` and a bound on ``|x|`` over the support of ``F``;
        they control the analytic tail of the horizontal integral and are
        required whenever ``stieltjes_F`` is given.
    grid_points : int
        Size of the uniform grid over ``J'`` before refinement.
    measured_delta : float, optional
        Stored on the report for comparison.

    Returns
    -------
    BoundReport
    """
    if params.y != law.y:
        raise ContractError("params were built for a different y")
    flags = ["y_near_one"] if 0.99 < law.y < 1.0 else []
    c1v, c2e = params.C1 * params.v, params.C2 * params.eps ** 1.5
    if stieltjes_F is None:
        return BoundReport(0.0, c1v, c2e, 0.0, measured_delta, flags)
    if second_moment is None or radius is None:
        raise ContractError("second_moment and radius of F are required")

    def diff(z):
        return abs(stieltjes_F(z) - mp_stieltjes_sym(law, z))

    horizontal = _horizontal(diff, law, params, second_moment, radius)
    vertical = _vertical(diff, law, params, grid_points)
    return BoundReport(horizontal, c1v, c2e, vertical, measured_delta, flags)


def smoothing_rhs_for_sample(sample, law, params, grid_points=200):
    """Smoothing bound for the symmetrized ESD of ``sample``, with ``Delta`` measured."""
    s = sample.singular_values
    delta = esd_distance_to_law(sample, law, symmetrized=True)
    return smoothing_rhs(
        lambda z: empirical_stieltjes_sym(sample, z),
        law,
        params,
        second_moment=float(np.mean(s ** 2)),
        radius=float(s.max()),
        grid_points=grid_points,
        measured_delta=delta,
    )


def envelope_terms(z, n, law, C, region=None):
    """The two terms ``C/(n v^(3/4))`` and ``C/(n^(3/2) v^(3/2) |edge|^(1/4))``."""
    region = RegionSpec.for_law(law, n) if region is None else region
    z = complex(z)
    if not region_g_membership(z, law, region).in_region_g:
        raise DomainError(f"z={z} is outside the region G for n={n}")
    v = z.imag
    first = C / (n * v ** 0.75)
    second = C / (n ** 1.5 * v ** 1.5 * abs(edge_functional(law, z)) ** 0.25)
    return first, second


def stieltjes_error_envelope(z, n, law, C, region=None):
    """Envelope for ``|E m_n(z) - s_y(z)|`` on ``G``; ``C`` is supplied by the caller."""
    first, second = envelope_terms(z, n, law, C, region)
    return first + second


def calibrate_envelope_constant(errors, zs, n, law, region=None):
    """Smallest ``C`` with ``errors[i] <= envelope(zs[i])`` for every point."""
    ratios = [e / stieltjes_error_envelope(z, n, law, 1.0, region) for e, z in zip(errors, zs)]
    return float(max(ratios))
