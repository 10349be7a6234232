"""Exhaustive spectra, degeneracy grouping, GA fitness and the rms metric."""
from dataclasses import dataclass

import numpy as np

from .model import DimensionError, PSpinModel, QuadraticModel, all_configs, chromosome_length

MAX_ENUMERATION_SIZE = 24
DEFAULT_TOL = 1e-9


class ResourceLimitError(RuntimeError):
    """Raised when an exhaustive computation would exceed the size cap."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """All configurations of a register sorted by ascending energy.

    ``indices[r]`` is the enumeration index of the configuration at rank ``r``;
    ties keep enumeration (lexicographic) order.
    """

    size: int
    energies: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return self.energies.size

    def configs(self):
        return all_configs(self.size)[self.indices]

    @property
    def entries(self):
        return list(zip(self.energies.tolist(), [tuple(int(b) for b in c) for c in self.configs()]))

    @classmethod
    def from_energies(cls, energies, size):
        energies = np.asarray(energies, dtype=np.float64)
        if energies.size != 2**size:
            raise DimensionError(f"expected {2**size} energies, got {energies.size}")
        order = np.argsort(energies, kind="stable")
        return cls(size, energies[order], order)


def _check_size(size):
    if size < 1:
        raise ValueError("register size must be >= 1")
    if size > MAX_ENUMERATION_SIZE:
        raise ResourceLimitError(f"exhaustive enumeration capped at {MAX_ENUMERATION_SIZE} qubits, got {size}")


def enumerate_spectrum(energy_fn, size):
    """Evaluate ``energy_fn`` on every configuration and sort stably by energy."""
    _check_size(size)
    energies = np.array([energy_fn(c) for c in all_configs(size)], dtype=np.float64)
    return Spectrum.from_energies(energies, size)


def model_spectrum(model):
    """Spectrum of a :class:`PSpinModel`, :class:`QuadraticModel` or Ising model."""
    size = model.n if isinstance(model, PSpinModel) else model.ntot
    _check_size(size)
    return Spectrum.from_energies(model.energies(), size)


@dataclass(frozen=True, eq=False)
class DegeneracyGroups:
    bounds: tuple  # (start, stop) rank ranges
    members: tuple  # frozenset of enumeration indices per group
    rank_group: np.ndarray  # group id of every rank

    def sizes(self):
        return [stop - start for start, stop in self.bounds]

    def config_group(self, size):
        """Group id of every configuration, indexed by enumeration index."""
        out = np.full(2**size, -1, dtype=np.int64)
        for g, mem in enumerate(self.members):
            out[list(mem)] = g
        return out


def degeneracy_groups(spec, tol=DEFAULT_TOL):
    """Split a sorted spectrum into maximal runs whose energy spread is <= tol."""
    e = spec.energies
    bounds, start = [], 0
    for r in range(1, e.size):
        if e[r] - e[start] > tol:
            bounds.append((start, r))
            start = r
    bounds.append((start, e.size))
    rank_group = np.empty(e.size, dtype=np.int64)
    members = []
    for g, (a, b) in enumerate(bounds):
        rank_group[a:b] = g
        members.append(frozenset(int(i) for i in spec.indices[a:b]))
    return DegeneracyGroups(tuple(bounds), tuple(members), rank_group)


@dataclass(frozen=True)
class FitnessReport:
    f: float
    mse: float
    l: int
    vec_penalty: float
    gap_to_nonphysical: float


def fitness(chrom, target, nanc, delta, tol=DEFAULT_TOL):
    """Spectral fitness of an effective-model chromosome (lower is better).

    The lowest ``L = 2**n`` sorted effective energies are compared with the
    full sorted target spectrum (mean-square error). Each rank whose
    effective configuration, restricted to the logical qubits, lies outside
    the target's degeneracy group at that rank adds ``delta``.
    """
    chrom = np.asarray(chrom, dtype=np.float64)
    ntot = target.n + nanc
    if chrom.size != chromosome_length(ntot):
        raise DimensionError(f"chromosome length {chrom.size} != {chromosome_length(ntot)} for ntot={ntot}")
    L = 2**target.n
    ref = model_spectrum(target)
    groups = degeneracy_groups(ref, tol)
    eff = model_spectrum(QuadraticModel.from_chromosome(chrom, nanc))

    mse = float(np.mean((ref.energies - eff.energies[:L]) ** 2))
    logical = eff.indices[:L] % L  # ancillae are the high-order bits
    l = sum(int(logical[r]) not in groups.members[groups.rank_group[r]] for r in range(L))
    gap = float(eff.energies[L] - eff.energies[L - 1]) if eff.energies.size > L else float("inf")
    return FitnessReport(mse + l * delta, mse, l, l * delta, gap)


def gap_to_nonphysical(chrom, n):
    """Distance between the highest compared level and the next one."""
    eff = model_spectrum(QuadraticModel.from_chromosome(chrom))
    L = 2**n
    return float(eff.energies[L] - eff.energies[L - 1]) if eff.energies.size > L else float("inf")


@dataclass(frozen=True)
class RmsReport:
    value: float
    skipped: int
    used: int


def rms_report(analytic, genetic, zero_genes="skip"):
    """Relative root-mean-square deviation of ``genetic`` from ``analytic``.

    The relative error is undefined where an analytic gene is 0.
    ``zero_genes`` picks the treatment: ``"skip"`` drops those genes and
    averages over the rest, ``"unit"`` counts each as relative error 1 (0 if
    the genetic gene is also 0) and ``"raise"`` rejects them.
    """
    a = np.asarray(analytic, dtype=np.float64)
    g = np.asarray(genetic, dtype=np.float64)
    if a.shape != g.shape or a.ndim != 1:
        raise DimensionError(f"shape mismatch {a.shape} vs {g.shape}")
    zero = a == 0
    n_zero = int(zero.sum())
    if zero_genes == "raise" and n_zero:
        raise ValueError(f"{n_zero} analytic genes are 0, relative error undefined")
    rel = np.zeros_like(a)
    rel[~zero] = (a[~zero] - g[~zero]) / a[~zero]
    if zero_genes == "unit":
        rel[zero] = (g[zero] != 0).astype(np.float64)
        return RmsReport(float(np.sqrt(np.mean(rel**2))), 0, a.size)
    if zero_genes not in ("skip", "raise"):
        raise ValueError(f"unknown zero_genes mode {zero_genes!r}")
    used = a.size - n_zero
    if used == 0:
        raise ValueError("every analytic gene is 0")
    return RmsReport(float(np.sqrt(np.sum(rel[~zero] ** 2) / used)), n_zero, used)


def rms(analytic, genetic, zero_genes="skip"):
    return rms_report(analytic, genetic, zero_genes).value
