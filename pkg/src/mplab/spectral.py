"""Hermitization, spectra, empirical distributions and resolvents.

For an ``n x p`` data matrix the hermitization is the ``(n+p) x (n+p)``
block matrix ``V = [[0, X/sqrt(p)], [X^T/sqrt(p), 0]]``.  Its eigenvalues are
``+-s_j`` together with ``p - n`` zeros, where ``s_j`` are the singular
values of ``X/sqrt(p)``.

Resolvents ``R(z) = (V - z I)^{-1}`` are evaluated from one eigendecomposition
of ``V`` so that sweeps over many ``z`` cost a matrix product each.
"""

from dataclasses import dataclass
import json

import numpy as np

from ._errors import ContractError, DomainError
from .ensemble import DataMatrix, sample_covariance

__all__ = [
    "SpectralSample",
    "Resolvent",
    "HermitianResolvent",
    "hermitize",
    "eigen_spectrum",
    "spectral_sample",
    "esd",
    "sym_esd",
    "empirical_stieltjes",
    "empirical_stieltjes_sym",
    "resolvent",
    "remove_row",
]

SCHEMA_VERSION = 1


def _raw(X):
    if isinstance(X, DataMatrix):
        return X.entries
    return np.asarray(X, dtype=float)


@dataclass(frozen=True)
class SpectralSample:
    """Singular values of ``X/sqrt(p)``, sorted descending.

    A pooled sample (several trials concatenated) keeps ``n`` as the row
    count of one trial and records the number of trials; every value then
    carries weight ``1/len(singular_values)``.
    """

    singular_values: np.ndarray
    n: int
    p: int
    config_hash: str = ""
    trial_index: int = -1
    trials: int = 1

    def __post_init__(self):
        s = np.sort(np.asarray(self.singular_values, dtype=float))[::-1].copy()
        if np.any(s < 0):
            raise ContractError("singular values must be nonnegative")
        if s.size != self.n * self.trials:
            raise ContractError(f"expected {self.n * self.trials} values, got {s.size}")
        s.setflags(write=False)
        object.__setattr__(self, "singular_values", s)

    @property
    def y(self):
        return self.n / self.p

    @property
    def eigenvalues(self):
        """Ascending eigenvalues ``s_j^2`` of ``W``."""
        return self.singular_values[::-1] ** 2

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "p": self.p,
            "trials": self.trials,
            "config_hash": self.config_hash,
            "trial_index": self.trial_index,
            "singular_values": [float(v) for v in self.singular_values],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.array(d["singular_values"], dtype=float),
            int(d["n"]),
            int(d["p"]),
            d.get("config_hash", ""),
            int(d.get("trial_index", -1)),
            int(d.get("trials", 1)),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))


def hermitize(X):
    """Block matrix ``[[0, X/sqrt(p)], [X^T/sqrt(p), 0]]``."""
    arr = _raw(X)
    n, p = arr.shape
    V = np.zeros((n + p, n + p))
    B = arr / np.sqrt(p)
    V[:n, n:] = B
    V[n:, :n] = B.T
    return V


def _check_symmetric(M, tol=1e-12):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if M.size and np.max(np.abs(M - M.T)) > tol * scale:
        raise ContractError("matrix is not symmetric")
    return M


def eigen_spectrum(M, vectors=False):
    """Ascending eigenvalues of a real symmetric matrix (LAPACK ``syevd``).

    With ``vectors=True`` the orthonormal eigenvectors are returned as well.
    """
    M = _check_symmetric(M)
    if vectors:
        return np.linalg.eigh(M)
    return np.linalg.eigvalsh(M)


def spectral_sample(X, config_hash="", trial_index=-1):
    """Singular values of ``X/sqrt(p)`` obtained from the eigenvalues of ``W``.

    Eigenvalues below ``n * eps * max(ev)`` are set to exactly zero (the
    usual numerical-rank cutoff), so rank-deficient ``W`` give reproducible
    zero atoms instead of roundoff of either sign.
    """
    arr = _raw(X)
    ev = eigen_spectrum(sample_covariance(arr))
    cutoff = ev.size * np.finfo(float).eps * max(float(ev[-1]), 0.0) if ev.size else 0.0
    s = np.sqrt(np.where(ev <= cutoff, 0.0, ev))
    return SpectralSample(s, arr.shape[0], arr.shape[1], config_hash, trial_index)


def _step_cdf(sorted_vals, x):
    xs = np.asarray(x, dtype=float)
    out = np.searchsorted(sorted_vals, xs, side="right") / sorted_vals.size
    return out.item() if np.ndim(x) == 0 else out


def esd(sample, x):
    """Empirical distribution of ``{s_j^2}``: right-continuous step function."""
    return _step_cdf(sample.eigenvalues, x)


def sym_esd(sample, x):
    """Symmetrized empirical distribution: mass ``1/(2n)`` at each ``+-s_j``."""
    s = sample.singular_values
    return _step_cdf(np.concatenate([-s, s[::-1]]), x)


def _check_off_spectrum(points, z):
    zz = np.asarray(z, dtype=complex)
    if np.any(zz.imag == 0):
        real = zz[zz.imag == 0].real
        gap = np.min(np.abs(points[:, None] - real[None, :]))
        if gap == 0.0:
            raise DomainError("z lies on the spectrum")
    return zz


def empirical_stieltjes(sample, z):
    """``m_n(z) = (1/len) sum 1/(s_j^2 - z)``."""
    ev = sample.eigenvalues
    zz = _check_off_spectrum(ev, z)
    out = np.mean(1.0 / (ev[:, None] - zz.reshape(1, -1)), axis=0).reshape(zz.shape)
    return out.item() if np.ndim(z) == 0 else out


def empirical_stieltjes_sym(sample, z):
    """Transform of the symmetrized ESD: ``(1/len) sum z/(s_j^2 - z^2)``."""
    ev = sample.eigenvalues
    zz = _check_off_spectrum(np.concatenate([-sample.singular_values, sample.singular_values]), z)
    flat = zz.reshape(1, -1)
    out = np.mean(flat / (ev[:, None] - flat ** 2), axis=0).reshape(zz.shape)
    return out.item() if np.ndim(z) == 0 else out


@dataclass(frozen=True)
class Resolvent:
    """``R = (V - z I)^{-1}`` at one spectral parameter."""

    matrix: np.ndarray
    z: complex

    @property
    def trace(self):
        return complex(np.trace(self.matrix))

    def diag(self):
        return np.diag(self.matrix)


class HermitianResolvent:
    """Resolvent family of a fixed real symmetric matrix.

    The eigendecomposition is computed once; :meth:`at` and :meth:`squared`
    then cost one ``O(N^3)`` product per ``z`` and read only immutable state.
    """

    def __init__(self, V):
        self.V = np.array(_check_symmetric(V), dtype=float)
        self.V.setflags(write=False)
        w, U = eigen_spectrum(self.V, vectors=True)
        self.eigenvalues = w
        self.eigenvectors = U
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def size(self):
        return self.V.shape[0]

    def _weights(self, z, power=1):
        z = complex(z)
        gap = self.eigenvalues - z
        if z.imag == 0 and np.min(np.abs(gap)) == 0.0:
            raise DomainError("singular shift: z is an eigenvalue")
        return 1.0 / gap ** power

    def at(self, z):
        d = self._weights(z)
        U = self.eigenvectors
        return Resolvent((U * d) @ U.T, complex(z))

    def squared(self, z):
        """``R(z)^2``, which equals ``dR/dz``."""
        d = self._weights(z, 2)
        U = self.eigenvectors
        return (U * d) @ U.T

    def trace(self, z):
        return complex(np.sum(self._weights(z)))

    def trace_squared(self, z):
        return complex(np.sum(self._weights(z, 2)))

    def diagonal(self, z):
        """Diagonal of ``R(z)`` without forming the full matrix."""
        d = self._weights(z)
        return (self.eigenvectors ** 2) @ d


def resolvent(V, z):
    """``(V - z I)^{-1}`` for a symmetric ``V`` (via its eigendecomposition)."""
    return HermitianResolvent(V).at(z)


def remove_row(X, j):
    """Drop row ``j`` (0-based) of the data matrix.

    Quantities built from the result keep the ``1/n`` normalization of the
    full matrix when compared against it.
    """
    arr = _raw(X)
    n = arr.shape[0]
    if n < 2:
        raise ContractError("need at least two rows")
    if not (0 <= j < n):
        raise ContractError(f"row index {j} outside [0, {n})")
    out = np.delete(arr, j, axis=0)
    if isinstance(X, DataMatrix):
        return DataMatrix(out, X.dist, X.seed, X.trunc_level, X.normalized)
    return out
