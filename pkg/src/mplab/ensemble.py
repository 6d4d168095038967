"""Random data matrices and the truncate / center / normalize pipeline.

Matrices are stored raw: ``DataMatrix.entries`` holds the ``X_jk`` themselves,
and the ``1/sqrt(p)`` scaling is applied by :func:`sample_covariance` and by
the hermitization in :mod:`mplab.spectral`.
"""

from dataclasses import dataclass, field, asdict
import hashlib
import json
import math

import numpy as np
from scipy.special import ndtr, ndtri

from ._errors import ContractError, DomainError

__all__ = [
    "EntryDistribution",
    "EnsembleConfig",
    "DataMatrix",
    "load_config",
    "sample_matrix",
    "truncate_entries",
    "center_normalize",
    "sample_covariance",
    "prepared_matrix",
    "truncation_const_for",
]

SCHEMA_VERSION = 1
DISTRIBUTIONS = ("rademacher", "gaussian", "uniform_scaled", "two_point")


@dataclass(frozen=True)
class EntryDistribution:
    """A mean-zero, unit-variance law for the matrix entries.

    ``two_point`` puts mass ``q`` on ``sqrt((1-q)/q)`` and ``1-q`` on
    ``-sqrt(q/(1-q))``; small ``q`` gives a rare large value.
    """

    name: str
    q: float = 0.5

    def __post_init__(self):
        if self.name not in DISTRIBUTIONS:
            raise ContractError(f"unknown entry distribution {self.name!r}")
        if self.name == "two_point" and not (0.0 < self.q < 1.0):
            raise ContractError("two_point needs 0 < q < 1")

    @classmethod
    def two_point_with_mu4(cls, mu4):
        """Two-point law with prescribed fourth moment ``mu4 >= 1``."""
        # mu4 = (1 - 3q + 3q^2) / (q(1-q)) solved for q <= 1/2
        if mu4 < 1.0:
            raise DomainError("fourth moment of a unit-variance law is at least 1")
        q = 0.5 * (1.0 - math.sqrt(1.0 - 4.0 / (mu4 + 3.0)))
        return cls("two_point", q)

    def atoms(self):
        """``(values, probabilities)`` for the discrete laws, else None."""
        if self.name == "rademacher":
            return np.array([-1.0, 1.0]), np.array([0.5, 0.5])
        if self.name == "two_point":
            q = self.q
            return (
                np.array([-math.sqrt(q / (1.0 - q)), math.sqrt((1.0 - q) / q)]),
                np.array([1.0 - q, q]),
            )
        return None

    @property
    def mu4(self):
        """Fourth moment ``E X^4``."""
        if self.name == "gaussian":
            return 3.0
        if self.name == "uniform_scaled":
            return 9.0 / 5.0
        vals, probs = self.atoms()
        return float(np.sum(probs * vals ** 4))

    def sample(self, rng, shape):
        if self.name == "rademacher":
            return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
        if self.name == "gaussian":
            return rng.standard_normal(shape)
        if self.name == "uniform_scaled":
            return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)
        vals, _ = self.atoms()
        return np.where(rng.random(shape) < self.q, vals[1], vals[0])

    def truncated_moments(self, level):
        """``(E X 1{|X|<=t}, E X^2 1{|X|<=t})`` in closed form.

        ``level=None`` means no truncation.
        """
        if level is None:
            return 0.0, 1.0
        t = float(level)
        if self.name == "gaussian":
            phi = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
            return 0.0, float(1.0 - 2.0 * ndtr(-t) - 2.0 * t * phi)
        if self.name == "uniform_scaled":
            m = min(t, math.sqrt(3.0))
            return 0.0, m ** 3 / (3.0 * math.sqrt(3.0))
        vals, probs = self.atoms()
        keep = np.abs(vals) <= t
        return float(np.sum(probs[keep] * vals[keep])), float(np.sum(probs[keep] * vals[keep] ** 2))

    def to_json(self):
        if self.name == "two_point":
            return {"name": self.name, "q": self.q}
        return self.name

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            return cls(obj)
        if isinstance(obj, dict):
            if "mu4" in obj:
                return cls.two_point_with_mu4(float(obj["mu4"]))
            return cls(obj["name"], float(obj.get("q", 0.5)))
        raise ContractError(f"cannot read entry distribution from {obj!r}")


@dataclass(frozen=True)
class EnsembleConfig:
    """Everything needed to regenerate a family of trials.

    ``trunc_const`` plays the role of both the truncation constant ``c`` and
    the bound ``D`` in ``|X_jk| <= D n^(1/4)``.
    """

    n: int
    p: int
    entry_dist: EntryDistribution = field(default_factory=lambda: EntryDistribution("rademacher"))
    trunc_const: float = 1.0
    trials: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if isinstance(self.entry_dist, (str, dict)):
            object.__setattr__(self, "entry_dist", EntryDistribution.from_json(self.entry_dist))
        if self.n < 2 or self.p < self.n:
            raise ContractError(f"need n >= 2 and p >= n, got n={self.n}, p={self.p}")
        if self.trunc_const <= 0:
            raise ContractError("trunc_const must be positive")
        if self.trials < 1:
            raise ContractError("trials must be >= 1")
        if not (0 <= self.base_seed < 2 ** 64):
            raise ContractError("base_seed must be a 64-bit unsigned integer")

    @property
    def y(self):
        return self.n / self.p

    def with_size(self, n, y=None):
        """Same ensemble at ``n`` rows with ``p = round(n / y)``."""
        y = self.y if y is None else y
        return EnsembleConfig(n, int(round(n / y)), self.entry_dist, self.trunc_const, self.trials, self.base_seed)

    def with_trials(self, trials):
        return EnsembleConfig(self.n, self.p, self.entry_dist, self.trunc_const, trials, self.base_seed)

    def to_dict(self):
        d = asdict(self)
        d["entry_dist"] = self.entry_dist.to_json()
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("schema_version", None)
        if "y" in d:
            y = float(d.pop("y"))
            d.setdefault("p", int(round(d["n"] / y)))
        unknown = set(d) - {"n", "p", "entry_dist", "trunc_const", "trials", "base_seed"}
        if unknown:
            raise ContractError(f"unknown config fields: {sorted(unknown)}")
        return cls(
            n=int(d["n"]),
            p=int(d["p"]),
            entry_dist=EntryDistribution.from_json(d.get("entry_dist", "rademacher")),
            trunc_const=float(d.get("trunc_const", 1.0)),
            trials=int(d.get("trials", 1)),
            base_seed=int(d.get("base_seed", 0)),
        )

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def load_config(path):
    """Read an :class:`EnsembleConfig` from a JSON file."""
    with open(path) as fh:
        return EnsembleConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class DataMatrix:
    """Raw ``n x p`` entries plus the provenance needed by later stages.

    ``trunc_level`` is the threshold ``t`` after :func:`truncate_entries`
    (None before), ``normalized`` is set by :func:`center_normalize`.
    """

    entries: np.ndarray
    dist: EntryDistribution
    seed: tuple = ()
    trunc_level: float = None
    normalized: bool = False

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2:
            raise ContractError("entries must be a 2-d array")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def p(self):
        return self.entries.shape[1]

    @classmethod
    def from_array(cls, entries, dist="rademacher"):
        return cls(entries, EntryDistribution.from_json(dist))


def _rng(config, trial_index):
    # Philox keyed by (seed, shape); the trial index selects a disjoint
    # block of the 256-bit counter, so any trial can be drawn on its own.
    key = np.array([config.base_seed, (config.n << 32) | config.p], dtype=np.uint64)
    counter = np.array([0, 0, 0, trial_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def sample_matrix(config, trial_index):
    """Draw trial ``trial_index`` of ``config``; bit-identical on every call."""
    if not (0 <= trial_index < config.trials):
        raise ContractError(f"trial_index {trial_index} outside [0, {config.trials})")
    entries = config.entry_dist.sample(_rng(config, trial_index), (config.n, config.p))
    return DataMatrix(entries, config.entry_dist, seed=(config.base_seed, trial_index))


def truncate_entries(X, c):
    """Zero every entry with ``|X_jk| > c n^(1/4)``.

    Returns
    -------
    DataMatrix, int
        The truncated matrix and the number of zeroed entries.
    """
    if c <= 0:
        raise ContractError("truncation constant must be positive")
    level = c * X.n ** 0.25
    drop = np.abs(X.entries) > level
    out = np.where(drop, 0.0, X.entries)
    return DataMatrix(out, X.dist, X.seed, trunc_level=level), int(drop.sum())


def center_normalize(Xhat):
    """Subtract the exact truncated mean and divide by the exact std.

    The moments come from :meth:`EntryDistribution.truncated_moments`, so the
    output entries have mean 0 and variance 1 under the entry law.
    """
    mean, second = Xhat.dist.truncated_moments(Xhat.trunc_level)
    var = second - mean * mean
    if not var > 1e-300:
        raise DomainError("truncated entry law is degenerate (zero variance)")
    sigma = math.sqrt(var)
    if mean == 0.0 and sigma == 1.0:
        out = Xhat.entries
    else:
        out = (Xhat.entries - mean) / sigma
    return DataMatrix(out, Xhat.dist, Xhat.seed, Xhat.trunc_level, normalized=True)


def sample_covariance(X):
    """``W = X X^T / p`` (symmetrized exactly)."""
    arr = X.entries if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)
    W = arr @ arr.T / arr.shape[1]
    return 0.5 * (W + W.T)


def prepared_matrix(config, trial_index, truncate=False):
    """The full pipeline: sample, then optionally truncate and re-standardize."""
    X = sample_matrix(config, trial_index)
    if truncate:
        X, _ = truncate_entries(X, config.trunc_const)
        X = center_normalize(X)
    return X


def truncation_const_for(dist, n, p, expected_zeroed):
    """Constant ``c`` making ``E #{|X_jk| > c n^(1/4)}`` equal ``expected_zeroed``.

    Only continuous laws can hit an arbitrary target.
    """
    tail = expected_zeroed / (n * p)
    if not (0.0 < tail < 1.0):
        raise DomainError("expected_zeroed must lie in (0, n p)")
    if dist.name == "gaussian":
        t = -ndtri(0.5 * tail)
    elif dist.name == "uniform_scaled":
        t = math.sqrt(3.0) * (1.0 - tail)
    else:
        raise DomainError(f"{dist.name} is discrete; its tail cannot be tuned continuously")
    return float(t / n ** 0.25)
