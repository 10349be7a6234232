"""p-spin model, effective 2-body binary/Ising models and the AND embedding.

Register convention: ancilla qubits occupy positions ``0..nanc-1`` and the
logical qubits follow. Configurations are enumerated lexicographically with
position 0 as the most significant bit, so the integer index of a
configuration is its bit string read in base 2.

Coefficient layout (the "chromosome" order)::

    (c0, c_1, ..., c_ntot, d_12, d_13, ..., d_1ntot, d_23, ..., d_(ntot-1)ntot)
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np


class DimensionError(ValueError):
    """Raised when a configuration or coefficient vector has the wrong length."""


# --------------------------------------------------------------------------
# bit configurations
# --------------------------------------------------------------------------

def as_bits(config, size=None):
    """Validate a bit configuration and return it as an int8 array."""
    bits = np.asarray(config)
    if bits.ndim != 1:
        raise DimensionError(f"configuration must be 1-D, got shape {bits.shape}")
    if size is not None and bits.size != size:
        raise DimensionError(f"configuration has {bits.size} bits, expected {size}")
    if not np.all((bits == 0) | (bits == 1)):
        raise ValueError(f"configuration must contain only 0/1, got {bits.tolist()}")
    return bits.astype(np.int8)


def to_spins(config):
    """Map bits x to spins sigma = 1 - 2x."""
    return 1 - 2 * as_bits(config).astype(np.int64)


def from_spins(spins):
    """Inverse of :func:`to_spins`."""
    s = np.asarray(spins)
    if not np.all((s == 1) | (s == -1)):
        raise ValueError("spins must be +1 or -1")
    return ((1 - s) // 2).astype(np.int8)


def all_configs(size):
    """All ``2**size`` configurations, lexicographic, shape ``(2**size, size)``."""
    if size < 0:
        raise ValueError("size must be non-negative")
    idx = np.arange(2**size, dtype=np.int64)
    shifts = np.arange(size - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)


def bitstring(config):
    return "".join(str(int(b)) for b in config)


# --------------------------------------------------------------------------
# p-spin model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PSpinModel:
    """Ferromagnetic p-spin model on ``n`` qubits with ``p``-body interaction."""

    n: int
    p: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and isinstance(self.p, (int, np.integer))):
            raise TypeError("n and p must be integers")
        if not 1 <= self.p <= self.n:
            raise ValueError(f"need 1 <= p <= n, got n={self.n}, p={self.p}")

    def energy(self, config):
        return pspin_energy(config, self)

    def energies(self):
        """Energies of all configurations in enumeration order."""
        spins = 1 - 2 * all_configs(self.n).astype(np.float64)
        m = spins.sum(axis=1) / self.n
        return -self.n * m**self.p


def pspin_energy(config, model):
    """Classical p-spin energy ``-n * m**p`` with ``m`` the mean magnetization."""
    bits = as_bits(config, model.n)
    m = float(np.sum(1 - 2 * bits.astype(np.int64))) / model.n
    return -model.n * m**model.p


# --------------------------------------------------------------------------
# quadratic (QUBO) and Ising models
# --------------------------------------------------------------------------

def chromosome_length(ntot):
    return (ntot * ntot + ntot + 2) // 2


def ntot_from_length(length):
    """Invert :func:`chromosome_length`; raises if ``length`` is not valid."""
    ntot = int(round((-1 + np.sqrt(1 + 8 * (length - 1))) / 2))
    if ntot < 1 or chromosome_length(ntot) != length:
        raise DimensionError(f"{length} is not a valid chromosome length")
    return ntot


def pair_index(i, j, ntot):
    """Position of coupling ``(i, j)``, ``i < j``, in the row-major upper triangle."""
    if not 0 <= i < j < ntot:
        raise IndexError(f"invalid pair ({i}, {j}) for ntot={ntot}")
    return i * ntot - i * (i + 1) // 2 + (j - i - 1)


def pairs(ntot):
    return list(combinations(range(ntot), 2))


def gene_names(ntot):
    """Labels in chromosome order; registers are numbered from 1 (``c0`` is the constant)."""
    return ["c0"] + [f"c{i + 1}" for i in range(ntot)] + [f"d{i + 1},{j + 1}" for i, j in pairs(ntot)]


def default_ancilla_defs(n, nanc):
    """Ancilla ``k`` is the AND of logical qubits ``2k`` and ``2k+1``.

    Returned as register indices, e.g. ``n=4, nanc=2 -> ((0, (2, 3)), (1, (4, 5)))``.
    """
    if nanc < 0 or 2 * nanc > n:
        raise ValueError(f"cannot pair {nanc} ancillae on {n} logical qubits")
    return tuple((k, (nanc + 2 * k, nanc + 2 * k + 1)) for k in range(nanc))


def _frozen(values, dtype=np.float64):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticModel:
    """Binary model ``c0 + sum_i c_i x_i + sum_{i<j} d_ij x_i x_j``."""

    ntot: int
    c0: float
    c: np.ndarray
    d: np.ndarray
    nanc: int = 0
    ancilla_defs: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "c", _frozen(self.c))
        object.__setattr__(self, "d", _frozen(self.d))
        defs = tuple((int(a), (int(p[0]), int(p[1]))) for a, p in self.ancilla_defs)
        object.__setattr__(self, "ancilla_defs", defs)
        if self.c.shape != (self.ntot,):
            raise DimensionError(f"expected {self.ntot} linear terms, got {self.c.shape}")
        if self.d.shape != (self.ntot * (self.ntot - 1) // 2,):
            raise DimensionError(f"expected {self.ntot * (self.ntot - 1) // 2} couplings, got {self.d.shape}")
        if defs and len(defs) != self.nanc:
            raise ValueError("ancilla_defs must have one entry per ancilla")
        for k, (a, (i, j)) in enumerate(defs):
            if a != k:
                raise ValueError("ancillae must occupy the first register positions in order")
            if not (self.nanc <= i < self.ntot and self.nanc <= j < self.ntot) or i == j:
                raise ValueError(f"bad parents ({i}, {j}) for ancilla {a}")

    @classmethod
    def from_chromosome(cls, genes, nanc=0, ancilla_defs=()):
        genes = np.asarray(genes, dtype=np.float64)
        ntot = ntot_from_length(genes.size)
        return cls(ntot, genes[0], genes[1 : ntot + 1], genes[ntot + 1 :], nanc, ancilla_defs)

    def chromosome(self):
        return np.concatenate(([self.c0], self.c, self.d))

    def coupling(self, i, j):
        if i > j:
            i, j = j, i
        return self.d[pair_index(i, j, self.ntot)]

    def energy(self, config):
        return quadratic_energy(config, self)

    def energies(self):
        """Energies of all ``2**ntot`` configurations in enumeration order."""
        return _chromosome_energies(self.chromosome(), self.ntot)


def _features(ntot):
    """0/1 design matrix: row = configuration, column = chromosome gene."""
    x = all_configs(ntot).astype(np.float64)
    cols = [np.ones(len(x))] + [x[:, i] for i in range(ntot)]
    cols += [x[:, i] * x[:, j] for i, j in pairs(ntot)]
    return np.stack(cols, axis=1)


def _chromosome_energies(genes, ntot):
    feats = _features(ntot)
    e = np.zeros(feats.shape[0])
    # sequential accumulation in gene order; kernels.py relies on the same order
    for k in range(feats.shape[1]):
        e += genes[k] * feats[:, k]
    return e


def quadratic_energy(config, model):
    bits = as_bits(config, model.ntot)
    e = 0.0 + model.c0
    for i in range(model.ntot):
        e += model.c[i] * bits[i]
    for k, (i, j) in enumerate(pairs(model.ntot)):
        e += model.d[k] * (bits[i] * bits[j])
    return float(e)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Spin model ``K + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j``."""

    K: float
    h: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "K", float(self.K))
        object.__setattr__(self, "h", _frozen(self.h))
        object.__setattr__(self, "J", _frozen(self.J))
        n = self.h.size
        if self.J.shape != (n * (n - 1) // 2,):
            raise DimensionError(f"expected {n * (n - 1) // 2} couplings, got {self.J.shape}")

    @property
    def ntot(self):
        return self.h.size

    def energy(self, config):
        return ising_energy(config, self)

    def energies(self):
        s = 1.0 - 2.0 * all_configs(self.ntot)
        e = self.K + s @ self.h
        for k, (i, j) in enumerate(pairs(self.ntot)):
            e = e + self.J[k] * s[:, i] * s[:, j]
        return e


def ising_energy(config, model):
    """Ising energy of a bit configuration, evaluated at ``sigma = 1 - 2x``."""
    s = to_spins(as_bits(config, model.ntot)).astype(np.float64)
    e = model.K + float(model.h @ s)
    for k, (i, j) in enumerate(pairs(model.ntot)):
        e += model.J[k] * s[i] * s[j]
    return float(e)


def quad_to_ising(model):
    """Convert a binary model to the equivalent Ising model.

    Substituting ``x = (1 - s)/2`` gives ``K = c0 + sum c/2 + sum d/4``,
    ``h_i = -c_i/2 - (1/4) sum_{j != i} d_ij`` and ``J_ij = d_ij/4``.
    """
    n = model.ntot
    row_sums = np.zeros(n)
    for k, (i, j) in enumerate(pairs(n)):
        row_sums[i] += model.d[k]
        row_sums[j] += model.d[k]
    K = model.c0 + model.c.sum() / 2 + model.d.sum() / 4
    h = -model.c / 2 - row_sums / 4
    return IsingModel(K, h, model.d / 4)


# --------------------------------------------------------------------------
# AND embedding
# --------------------------------------------------------------------------

def penalty_energy(x_i, x_j, x_tilde, delta):
    """Penalty ``delta*(3t + x_i x_j - 2 t x_i - 2 t x_j)``; zero iff ``t = x_i AND x_j``."""
    for b in (x_i, x_j, x_tilde):
        if b not in (0, 1):
            raise ValueError("penalty arguments must be bits")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return delta * (3 * x_tilde + x_i * x_j - 2 * x_tilde * x_i - 2 * x_tilde * x_j)


def and_embed_cubic(J, indices, delta):
    """Quadratize ``J x_i x_j x_k`` with one ancilla ``t = x_j AND x_k``.

    ``indices`` are 0-based logical qubit indices. The returned model has the
    ancilla at register position 0 and logical qubit ``q`` at position ``q + 1``.
    """
    i, j, k = (int(v) for v in indices)
    if len({i, j, k}) != 3 or min(i, j, k) < 0:
        raise ValueError(f"indices must be three distinct non-negative integers, got {indices}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    ntot = max(i, j, k) + 2
    c = np.zeros(ntot)
    d = np.zeros(ntot * (ntot - 1) // 2)
    ri, rj, rk = i + 1, j + 1, k + 1
    c[0] = 3 * delta
    d[pair_index(0, ri, ntot)] += J
    d[pair_index(0, rj, ntot)] += -2 * delta
    d[pair_index(0, rk, ntot)] += -2 * delta
    d[pair_index(min(rj, rk), max(rj, rk), ntot)] += delta
    return QuadraticModel(ntot, 0.0, c, d, nanc=1, ancilla_defs=((0, (min(rj, rk), max(rj, rk))),))


def analytic_solution(n, delta, exact=False):
    """Hand-derived chromosome embedding the ``p=3`` model for ``n`` in {3, 4}.

    Ancilla penalties enter with ``+3*delta`` on the ancilla, ``-2*delta`` on
    its two parent couplings and ``+delta`` on the parent-parent coupling, so
    that the lowest ``2**n`` levels reproduce the p-spin spectrum exactly.
    With ``exact=True`` the genes are returned as :class:`fractions.Fraction`.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    dl = Fraction(delta) if exact else float(delta)
    F = Fraction if exact else (lambda a, b=1: a / b)
    if n == 3:
        genes = [F(-3), 3 * dl, F(26, 9), F(26, 9), F(26, 9),
                 -2 * dl, -2 * dl, F(16, 3),
                 F(-8, 3) + dl, F(-8, 3), F(-8, 3)]
    elif n == 4:
        genes = [F(-4), 3 * dl, 3 * dl, F(7, 2), F(7, 2), F(7, 2), F(7, 2),
                 F(0), -2 * dl, -2 * dl, F(3), F(3),
                 F(3), F(3), -2 * dl, -2 * dl,
                 F(-3) + dl, F(-3), F(-3), F(-3), F(-3),
                 F(-3) + dl]
    else:
        raise ValueError(f"analytic solution only available for n in (3, 4), got {n}")
    return genes if exact else np.array(genes, dtype=np.float64)


def analytic_model(n, delta):
    nanc = {3: 1, 4: 2}.get(n)
    if nanc is None:
        raise ValueError(f"analytic solution only available for n in (3, 4), got {n}")
    return QuadraticModel.from_chromosome(analytic_solution(n, delta), nanc, default_ancilla_defs(n, nanc))
