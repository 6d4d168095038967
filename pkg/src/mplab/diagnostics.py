"""Resolvent-level statistics for a single data matrix.

Everything here works in symmetrized coordinates: ``m_n(z)`` is the
transform of the symmetrized ESD, which equals the average of the first
``n`` diagonal entries of ``R = (V - zI)^{-1}``.  Raw entries ``X_jk`` enter
the quadratic forms with an explicit ``1/p``; the resolvents use ``X/sqrt(p)``.

Sign convention for the decomposition: with

    eps1 = (1/p) sum_k (X_jk^2 - 1) R^(j)_{kk}
    eps2 = (1/p) sum_{k != l} X_jk X_jl R^(j)_{kl}
    eps3 = (1/p) (sum_l R^(j)_{ll} - sum_l R_{ll})      (lower block)

the diagonal entry is ``R_jj = -1 / (z + y m_n + (y-1)/z + eps1 + eps2 + eps3)``.
"""

from dataclasses import dataclass, field, asdict
import math

import numpy as np

from ._errors import ContractError
from .mp_law import MPLaw, ComplexEval, mp_stieltjes_sym, edge_distance, edge_functional
from .spectral import (
    HermitianResolvent,
    empirical_stieltjes_sym,
    hermitize,
    spectral_sample,
    _raw,
)

__all__ = [
    "KAPPA",
    "EpsilonTriple",
    "RegionSpec",
    "DiagnosticRecord",
    "RowRemoval",
    "epsilon_decompose",
    "lambda_n",
    "quadratic_form_q",
    "region_g_membership",
    "kappa_mass",
    "sym_transform",
    "sym_transform_derivative",
    "row_sum_bound",
    "monotone_in_v",
    "edge_lower_bounds",
]

KAPPA = 1.0 + math.sqrt(2.0)


def kappa_mass(k):
    """``(1/pi) int_{|u| <= k} du / (1 + u^2)``."""
    return 2.0 / math.pi * math.atan(k)


def sym_transform(singular_values, z, n=None):
    """``(1/n) sum_j z / (s_j^2 - z^2)`` with an explicit normalizer ``n``."""
    s2 = np.asarray(singular_values, dtype=float) ** 2
    n = s2.size if n is None else n
    return complex(np.sum(z / (s2 - z * z)) / n)


def sym_transform_derivative(singular_values, z, n=None):
    """Derivative of :func:`sym_transform`: ``(1/n) sum (s^2 + z^2)/(s^2 - z^2)^2``."""
    s2 = np.asarray(singular_values, dtype=float) ** 2
    n = s2.size if n is None else n
    return complex(np.sum((s2 + z * z) / (s2 - z * z) ** 2) / n)


@dataclass(frozen=True)
class EpsilonTriple:
    """Decomposition of the self-consistency error of ``R_jj``."""

    eps1: complex
    eps2: complex
    eps3: complex
    lambda_n: complex
    r_jj: complex
    r_jj_reconstructed: complex

    @property
    def residual(self):
        """Relative mismatch between the direct and reconstructed ``R_jj``."""
        return abs(self.r_jj - self.r_jj_reconstructed) / abs(self.r_jj)


class RowRemoval:
    """A data matrix together with its hermitized resolvents.

    Holds the eigendecomposition of ``V`` and lazily of every ``V^(j)``
    (row ``j`` of the data removed), so that many identities can be checked
    at many ``z`` without refactoring.
    """

    def __init__(self, X):
        self.X = _raw(X)
        self.n, self.p = self.X.shape
        self.full = HermitianResolvent(hermitize(self.X))
        self._minors = {}
        self._minor_sv = {}

    @property
    def y(self):
        return self.n / self.p

    def minor(self, j):
        if not (0 <= j < self.n):
            raise ContractError(f"row index {j} outside [0, {self.n})")
        if j not in self._minors:
            Xj = np.delete(self.X, j, axis=0)
            self._minors[j] = HermitianResolvent(hermitize(Xj))
        return self._minors[j]

    def singular_values(self):
        if None not in self._minor_sv:
            self._minor_sv[None] = spectral_sample(self.X).singular_values
        return self._minor_sv[None]

    def minor_singular_values(self, j):
        if j not in self._minor_sv:
            Xj = np.delete(self.X, j, axis=0)
            ev = np.linalg.eigvalsh(Xj @ Xj.T / self.p)
            self._minor_sv[j] = np.sqrt(np.clip(ev, 0.0, None))
        return self._minor_sv[j]

    def m_n(self, z):
        """Symmetrized transform from the upper diagonal block of ``R``."""
        return complex(np.mean(self.full.diagonal(z)[: self.n]))

    def m_n_minor(self, z, j):
        """``m_n^(j)``: upper block of ``R^(j)`` summed, divided by ``n`` (not ``n-1``)."""
        return complex(np.sum(self.minor(j).diagonal(z)[: self.n - 1]) / self.n)

    def lower_trace(self, z, j=None):
        """``sum_l R_{l+n, l+n}`` for ``R`` or ``R^(j)``."""
        if j is None:
            return complex(np.sum(self.full.diagonal(z)[self.n:]))
        return complex(np.sum(self.minor(j).diagonal(z)[self.n - 1:]))

    # identities, each returned as (lhs, rhs)

    def trace_identity(self, z):
        """``m_n(z)`` from the spectrum vs ``Tr R / 2n + (1 - y)/(2 z y)``."""
        lhs = sym_transform(self.singular_values(), z)
        rhs = self.full.trace(z) / (2 * self.n) + (1 - self.y) / (2 * z * self.y)
        return lhs, rhs

    def lower_block_identity(self, z):
        """``(1/p) sum_l R_{l+n,l+n}`` vs ``y m_n - (1 - y)/z``."""
        return self.lower_trace(z) / self.p, self.y * sym_transform(self.singular_values(), z) - (1 - self.y) / z

    def trace_gap(self, z, j):
        """``(1/p)(sum R_ll - sum R^(j)_ll)`` vs ``y(m_n - m_n^(j)) + 1/(pz)``.

        The right side is built from the singular values of ``X`` and
        ``X^(j)`` alone, so the two sides take independent routes.
        """
        lhs = (self.lower_trace(z) - self.lower_trace(z, j)) / self.p
        m = sym_transform(self.singular_values(), z)
        mj = sym_transform(self.minor_singular_values(j), z, n=self.n)
        return lhs, self.y * (m - mj) + 1.0 / (self.p * z)

    def transform_gap(self, z, j):
        """``m_n - m_n^(j)`` vs ``(Tr R - Tr R^(j))/(2n) - 1/(2nz)``."""
        m = sym_transform(self.singular_values(), z)
        mj = sym_transform(self.minor_singular_values(j), z, n=self.n)
        rhs = (self.full.trace(z) - self.minor(j).trace(z)) / (2 * self.n) - 1.0 / (2 * self.n * z)
        return m - mj, rhs

    def derivative_identity(self, z, j):
        """``(Tr R - Tr R^(j)) R_jj`` vs ``[R^2]_jj = dR_jj/dz``."""
        lhs = (self.full.trace(z) - self.minor(j).trace(z)) * self.full.diagonal(z)[j]
        U = self.full.eigenvectors
        rhs = complex((U[j] ** 2) @ (1.0 / (self.full.eigenvalues - z) ** 2))
        return lhs, rhs

    def eps3_sum(self, z):
        """``(1/n) sum_j eps3_j R_jj`` vs ``-(y/2n)(m_n'(z) + m_n(z)/z)``.

        ``m_n'`` comes from the eigenvalue representation, the left side from
        ``n + 1`` resolvent decompositions.
        """
        diag = self.full.diagonal(z)
        lower = self.lower_trace(z)
        acc = 0.0
        for j in range(self.n):
            eps3 = (self.lower_trace(z, j) - lower) / self.p
            acc += eps3 * diag[j]
        sv = self.singular_values()
        rhs = -self.y / (2 * self.n) * (sym_transform_derivative(sv, z) + sym_transform(sv, z) / z)
        return complex(acc / self.n), rhs

    def epsilon(self, z, j, law=None):
        law = MPLaw(self.y) if law is None else law
        Rj = self.minor(j).at(z).matrix[self.n - 1:, self.n - 1:]
        x = self.X[j]
        d = np.diag(Rj)
        eps1 = complex(np.sum((x * x - 1.0) * d) / self.p)
        quad = complex(x @ Rj @ x)
        eps2 = complex((quad - np.sum(x * x * d)) / self.p)
        eps3 = (self.lower_trace(z, j) - self.lower_trace(z)) / self.p
        m = self.m_n(z)
        y = self.y
        r_direct = complex(self.full.diagonal(z)[j])
        r_rep = -1.0 / (z + y * m + (y - 1.0) / z + eps1 + eps2 + eps3)
        return EpsilonTriple(eps1, eps2, eps3, m - mp_stieltjes_sym(law, z), r_direct, r_rep)


def epsilon_decompose(X, z, j, law=None):
    """``(eps1, eps2, eps3, Lambda_n)`` for row ``j`` (0-based) at ``z``."""
    if complex(z).imag <= 0:
        raise ContractError("epsilon decomposition needs Im z > 0")
    rr = RowRemoval(X)
    if rr.n < 2:
        raise ContractError("need n >= 2")
    return rr.epsilon(complex(z), j, law)


def lambda_n(sample, z, law):
    """``Lambda_n(z) = m_n(z) - s_y(z)`` in symmetrized coordinates."""
    if complex(z).imag <= 0:
        raise ContractError("Lambda_n needs Im z > 0")
    return complex(empirical_stieltjes_sym(sample, z) - mp_stieltjes_sym(law, z))


def quadratic_form_q(X, z, J, j):
    """``Q^(J,j) = (1/p) sum_{l=2}^{p} |sum_{k<l} X_jk R^(J,j)_{k+n,l+n}|^2``.

    ``R^(J,j)`` is the resolvent of the hermitization with the data rows in
    ``J`` and ``j`` removed; ``J`` and ``j`` are 0-based row indices.
    """
    arr = _raw(X)
    n, p = arr.shape
    J = set(int(i) for i in J)
    if j in J or not (0 <= j < n) or any(not (0 <= i < n) for i in J):
        raise ContractError("need j outside J and all indices in range")
    if len(J) >= n - 1:
        raise ContractError("|J| must be smaller than n - 1")
    keep = [i for i in range(n) if i != j and i not in J]
    sub = arr[keep]
    m = len(keep)
    R = HermitianResolvent(hermitize(sub)).at(complex(z)).matrix[m:, m:]
    x = arr[j]
    # inner[l] = sum_{k<l} x_k R_{kl}: strictly upper triangle, column sums
    inner = np.triu(x[:, None] * R, k=1).sum(axis=0)
    return float(np.sum(np.abs(inner) ** 2) / p)


@dataclass(frozen=True)
class RegionSpec:
    """Parameters of the region ``G`` for a given ``n``.

    ``v0 = A0/n`` and the band margin satisfies ``eps^(3/2) = 2 v0 kappa``
    unless ``C8`` overrides it with ``eps = C8 v0^(2/3)``.
    """

    A0: float
    n: int
    V: float
    eps: float
    kappa: float = KAPPA

    @property
    def v0(self):
        return self.A0 / self.n

    @classmethod
    def for_law(cls, law, n, A0=1.0, V=None, C8=None):
        v0 = A0 / n
        eps = C8 * v0 ** (2.0 / 3.0) if C8 is not None else (2.0 * v0 * KAPPA) ** (2.0 / 3.0)
        V = 4.0 * math.sqrt(law.y) if V is None else V
        spec = cls(A0, n, V, eps)
        if not (0.0 < eps < 0.5):
            raise ContractError(f"band margin eps={eps:.4g} outside (0, 1/2); increase n")
        return spec

    def to_dict(self):
        return asdict(self)


def region_g_membership(z, law, spec):
    """Whether ``z`` lies in ``G``; returns a :class:`ComplexEval`."""
    z = complex(z)
    u, v = z.real, z.imag
    gamma = float(edge_distance(law, u))
    au = abs(u)
    inside = (
        v > 0
        and law.a + spec.eps <= au <= law.b - spec.eps
        and gamma > 0
        and spec.v0 / math.sqrt(gamma) <= v <= spec.V
    )
    return ComplexEval(z, gamma, bool(inside))


def row_sum_bound(R, l, v, cols=None):
    """``(sum_k |R_lk|^2, Im R_ll / v)`` with ``k`` over ``cols`` (all by default).

    Over the full row the two sides are equal; over a subset of columns
    the left side can only shrink.
    """
    row = R[l] if cols is None else R[l, cols]
    return float(np.sum(np.abs(row) ** 2)), float(R[l, l].imag / v)


def monotone_in_v(resolvents, z, l, s):
    """``(|R_ll(u + iv/s)|, s |R_ll(u + iv)|)`` for a :class:`HermitianResolvent`."""
    z = complex(z)
    low = resolvents.diagonal(complex(z.real, z.imag / s))[l]
    return float(abs(low)), float(s * abs(resolvents.diagonal(z)[l]))


def edge_lower_bounds(z, law, spec):
    """Lower bounds on the edge functional inside ``G``.

    Returns ``((|E|, (4y/5) max(gamma, v)), (n v sqrt|E|, A0 4y/5))`` where
    ``E = (z + (y-1)/z)^2 - 4y``.
    """
    z = complex(z)
    e = abs(edge_functional(law, z))
    gamma = float(edge_distance(law, z.real))
    c = 0.8 * law.y
    return (e, c * max(gamma, z.imag)), (spec.n * z.imag * math.sqrt(e), spec.A0 * c)


@dataclass
class DiagnosticRecord:
    """One check outcome, serializable as a flat JSON record."""

    check_name: str
    params: dict = field(default_factory=dict)
    statistic: float = 0.0
    bound: float = 0.0
    passed: bool = True

    def to_dict(self):
        return {
            "check_name": self.check_name,
            "params": self.params,
            "statistic": self.statistic,
            "bound": self.bound,
            "pass": self.passed,
        }
