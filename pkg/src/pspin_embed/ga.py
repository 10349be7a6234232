"""Real-valued genetic algorithm for the free parameters of the effective model.

One generation is: keep the ``elitism`` best individuals, pick parents by
tournament, cross consecutive parent pairs with probability ``p_cx``, mutate
each child with probability ``p_mut`` (each gene then with probability
``indpb``), clamp to the gene bounds and evaluate. Randomness is drawn in
fixed-shape blocks from a PCG64 generator, so a run depends only on
``(seed, config, problem)`` and not on the kernel backend.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from types import SimpleNamespace

import numpy as np

from . import kernels
from .model import DimensionError, PSpinModel, chromosome_length, default_ancilla_defs, pair_index, pairs
from .spectrum import DEFAULT_TOL

log = logging.getLogger(__name__)

CROSSOVERS = ("one-point", "two-point")
SIGMAS = (0.2, 0.4, 0.6, 0.8, 1.0)
TOURNAMENT_SIZES = (2, 3, 5)
#: generations whose random draws are generated in one block
DRAW_BLOCK = 500


def combo(k):
    """Operator combination ``k`` (1..30): ``(crossover, sigma, tournament size)``."""
    if not 1 <= k <= 30:
        raise ValueError(f"combo must be in 1..30, got {k}")
    i = k - 1
    return CROSSOVERS[i // 15], SIGMAS[(i % 15) // 3], TOURNAMENT_SIZES[i % 3]


COMBOS = {k: combo(k) for k in range(1, 31)}


@dataclass(frozen=True, eq=False)
class GeneBounds:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=np.float64)
        hi = np.array(self.hi, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionError("lo and hi must be 1-D arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("every gene needs lo < hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __len__(self):
        return self.lo.size

    def contains(self, genes):
        genes = np.asarray(genes)
        return bool(np.all((genes >= self.lo) & (genes <= self.hi)))

    @classmethod
    def default(cls, ntot, nanc, delta, ancilla_defs=None, limit=10.0, penalty_window="offset"):
        """``[-limit, limit]`` everywhere except on penalty-carrying genes.

        With ``penalty_window="offset"`` every gene gets
        ``[P - limit, P + limit]`` where ``P`` is the coefficient the AND
        penalties contribute to it (``3*delta`` on an ancilla field,
        ``-2*delta`` on ancilla-parent couplings, ``+delta`` on the
        parent-parent coupling, 0 elsewhere). ``"wide"`` instead gives every
        gene touching an ancilla, or coupling two parents, the symmetric range
        ``[-3*delta - limit, 3*delta + limit]``.
        """
        if ancilla_defs is None:
            ancilla_defs = default_ancilla_defs(ntot - nanc, nanc)
        size = chromosome_length(ntot)
        if penalty_window == "offset":
            centre = penalty_coefficients(ntot, ancilla_defs, delta)
            return cls(centre - limit, centre + limit)
        if penalty_window != "wide":
            raise ValueError(f"unknown penalty_window {penalty_window!r}")
        wide = penalty_positions(ntot, nanc, ancilla_defs)
        lo = np.full(size, -limit)
        hi = np.full(size, limit)
        lo[wide] = -3 * delta - limit
        hi[wide] = 3 * delta + limit
        return cls(lo, hi)


def penalty_coefficients(ntot, ancilla_defs, delta):
    """Chromosome holding only the AND penalties of ``ancilla_defs``."""
    genes = np.zeros(chromosome_length(ntot))
    for a, (i, j) in ancilla_defs:
        genes[1 + a] += 3 * delta
        genes[ntot + 1 + pair_index(a, i, ntot)] += -2 * delta
        genes[ntot + 1 + pair_index(a, j, ntot)] += -2 * delta
        genes[ntot + 1 + pair_index(min(i, j), max(i, j), ntot)] += delta
    return genes


def penalty_positions(ntot, nanc, ancilla_defs):
    pos = {1 + a for a in range(nanc)}
    for k, (i, j) in enumerate(pairs(ntot)):
        if i < nanc or j < nanc:
            pos.add(ntot + 1 + k)
    for _, (i, j) in ancilla_defs:
        pos.add(ntot + 1 + pair_index(min(i, j), max(i, j), ntot))
    return sorted(pos)


@dataclass(frozen=True)
class GaConfig:
    npop: int = 20
    ngen: int = 25000
    p_cx: float = 0.4
    p_mut: float = 0.7
    crossover: str = "two-point"
    sigma: float = 0.2
    nt: int = 5
    indpb: float | None = None  # None -> 1/D
    seed: int = 0
    elitism: int = 1

    def __post_init__(self):
        if self.npop < 2:
            raise ValueError("npop must be >= 2")
        if self.ngen < 0:
            raise ValueError("ngen must be >= 0")
        for name in ("p_cx", "p_mut"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.indpb is not None and not 0.0 <= self.indpb <= 1.0:
            raise ValueError("indpb must be in [0, 1]")
        if self.crossover not in CROSSOVERS:
            raise ValueError(f"crossover must be one of {CROSSOVERS}")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.nt < 1:
            raise ValueError("nt must be >= 1")
        if not 0 <= self.elitism < self.npop:
            raise ValueError("elitism must be in [0, npop)")

    def with_combo(self, k):
        crossover, sigma, nt = combo(k)
        return replace(self, crossover=crossover, sigma=sigma, nt=nt)

    def gene_rate(self, n_genes):
        return 1.0 / n_genes if self.indpb is None else self.indpb


@dataclass(frozen=True, eq=False)
class Problem:
    """Target p-spin model plus the shape of the effective model."""

    model: PSpinModel
    nanc: int
    delta: float = 50.0
    tol: float = DEFAULT_TOL
    ancilla_defs: tuple | None = None
    penalty_window: str = "offset"

    def __post_init__(self):
        if self.nanc < 0:
            raise ValueError("nanc must be >= 0")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if self.ancilla_defs is None:
            object.__setattr__(self, "ancilla_defs", default_ancilla_defs(self.model.n, self.nanc))

    @property
    def ntot(self):
        return self.model.n + self.nanc

    @property
    def n_genes(self):
        return chromosome_length(self.ntot)

    @cached_property
    def bounds(self):
        return GeneBounds.default(self.ntot, self.nanc, self.delta, self.ancilla_defs,
                                  penalty_window=self.penalty_window)

    @cached_property
    def tables(self):
        return kernels.FitnessTables.build(self.model, self.nanc, self.delta, self.tol)

    def to_dict(self):
        return {"n": self.model.n, "p": self.model.p, "nanc": self.nanc, "delta": self.delta, "tol": self.tol,
                "ancilla_defs": [[a, list(pq)] for a, pq in self.ancilla_defs],
                "penalty_window": self.penalty_window}


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------

def init_population(cfg, bounds, rng):
    """``npop`` chromosomes with every gene uniform in its bounds."""
    return rng.uniform(bounds.lo, bounds.hi, size=(cfg.npop, len(bounds)))


def _check_pair(p1, p2):
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.shape != p2.shape or p1.ndim != 1:
        raise DimensionError(f"parents differ in shape: {p1.shape} vs {p2.shape}")
    return p1, p2


def _two_cuts(rng, n_genes, size=None):
    """Two distinct cut points in ``[1, n_genes-1]``, uniformly, ordered."""
    r1 = rng.integers(1, n_genes, size=size)
    r2 = rng.integers(1, n_genes - 1, size=size)
    r2 = r2 + (r2 >= r1)
    return np.minimum(r1, r2), np.maximum(r1, r2)


def one_point_crossover(p1, p2, rng=None, r=None):
    """Exchange the tails of two parents after cut point ``r`` in ``[1, D-1]``."""
    p1, p2 = _check_pair(p1, p2)
    if p1.size < 2:
        raise DimensionError("one-point crossover needs at least 2 genes")
    if r is None:
        r = int(rng.integers(1, p1.size))
    return np.concatenate((p1[:r], p2[r:])), np.concatenate((p2[:r], p1[r:]))


def two_point_crossover(p1, p2, rng=None, r1=None, r2=None):
    """Exchange the segment ``[r1, r2)`` between two parents."""
    p1, p2 = _check_pair(p1, p2)
    if p1.size < 3:
        raise DimensionError("two-point crossover needs at least 3 genes")
    if r1 is None or r2 is None:
        r1, r2 = (int(v) for v in _two_cuts(rng, p1.size))
    r1, r2 = min(r1, r2), max(r1, r2)
    c1, c2 = p1.copy(), p2.copy()
    c1[r1:r2], c2[r1:r2] = p2[r1:r2], p1[r1:r2]
    return c1, c2


def gaussian_mutation(chrom, sigma, indpb, bounds, rng):
    """Add N(0, sigma^2) to each gene with probability ``indpb``, then clamp."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    chrom = np.asarray(chrom, dtype=np.float64)
    hit = rng.random(chrom.size) < indpb
    noise = rng.standard_normal(chrom.size)
    moved = np.minimum(np.maximum(chrom + sigma * noise, bounds.lo), bounds.hi)
    return np.where(hit, moved, chrom)


def tournament_select(pop, fitnesses, nt, rng, drawn=None):
    """Index of the fittest (lowest) of ``nt`` uniformly drawn individuals.

    Draws are with replacement; ties go to the earliest draw.
    """
    if nt < 1:
        raise ValueError("nt must be >= 1")
    fitnesses = np.asarray(fitnesses)
    if len(pop) == 0:
        raise ValueError("empty population")
    if drawn is None:
        drawn = rng.integers(0, len(pop), size=nt)
    drawn = np.asarray(drawn)
    return int(drawn[np.argmin(fitnesses[drawn])])


# --------------------------------------------------------------------------
# run loop
# --------------------------------------------------------------------------

@dataclass
class RunRecord:
    best_chromosome: np.ndarray
    best_fitness: float
    fitness_history: np.ndarray  # best of the population, generation 0 = initial
    seed: int
    combo_id: int | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "seed": self.seed,
            "combo_id": self.combo_id,
            "best_fitness": self.best_fitness,
            "best_chromosome": self.best_chromosome.tolist(),
            "fitness_history": self.fitness_history.tolist(),
            "config": self.config,
        }


def _draw_block(rng, n_gen, cfg, n_genes):
    n_off = cfg.npop - cfg.elitism
    n_pairs = (n_off + 1) // 2
    n_child = 2 * n_pairs
    tour = rng.integers(0, cfg.npop, size=(n_gen, n_child, cfg.nt))
    cx_u = rng.random((n_gen, n_pairs))
    if cfg.crossover == "one-point":
        cut_lo = rng.integers(1, n_genes, size=(n_gen, n_pairs))
        cut_hi = np.full_like(cut_lo, n_genes)
    else:
        cut_lo, cut_hi = _two_cuts(rng, n_genes, size=(n_gen, n_pairs))
    return SimpleNamespace(
        tour=tour, cx_u=cx_u, cut_lo=cut_lo, cut_hi=cut_hi,
        mut_u=rng.random((n_gen, n_child)),
        gene_u=rng.random((n_gen, n_child, n_genes)),
        noise=rng.standard_normal((n_gen, n_child, n_genes)),
    )


def run_ga(cfg, problem, backend=None, combo_id=None):
    """Run one seeded GA and return its :class:`RunRecord`."""
    n_genes = problem.n_genes
    if cfg.crossover == "two-point" and n_genes < 3:
        raise ValueError("two-point crossover needs at least 3 genes")
    bounds = problem.bounds
    tables = problem.tables
    rng = np.random.default_rng(cfg.seed)

    pop = init_population(cfg, bounds, rng)
    fit, _, _ = kernels.batch_fitness(pop, tables, backend)
    i0 = int(np.argmin(fit))
    state = SimpleNamespace(
        pop=pop, fit=np.ascontiguousarray(fit), best_genes=pop[i0].copy(),
        best_fit=np.array([fit[i0]]), hist=None,
    )
    params = SimpleNamespace(
        lo=bounds.lo, hi=bounds.hi, p_cx=cfg.p_cx, p_mut=cfg.p_mut, indpb=cfg.gene_rate(n_genes),
        sigma=cfg.sigma, elitism=cfg.elitism,
    )
    history = np.empty(cfg.ngen + 1)
    history[0] = fit[i0]
    done = 0
    while done < cfg.ngen:
        block = min(DRAW_BLOCK, cfg.ngen - done)
        draws = _draw_block(rng, block, cfg, n_genes)
        state.hist = history[1 + done : 1 + done + block]
        kernels.evolve(state, draws, params, tables, backend)
        done += block

    return RunRecord(
        best_chromosome=state.best_genes,
        best_fitness=float(state.best_fit[0]),
        fitness_history=history,
        seed=cfg.seed,
        combo_id=combo_id,
        config=asdict(cfg),
    )


def _run_job(args):
    cfg, problem, backend, combo_id = args
    return run_ga(cfg, problem, backend, combo_id)


def run_many(cfgs, problem, backend=None, combo_ids=None, jobs=1):
    """Run independent GAs, optionally in worker processes; order is preserved."""
    combo_ids = combo_ids or [None] * len(cfgs)
    args = [(c, problem, backend, k) for c, k in zip(cfgs, combo_ids)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_job, args, chunksize=max(1, len(args) // (4 * jobs))))
    return [_run_job(a) for a in args]


def seeded_configs(cfg, runs):
    """Per-run configs with seeds ``cfg.seed + run_index``."""
    return [replace(cfg, seed=cfg.seed + i) for i in range(runs)]


# --------------------------------------------------------------------------
# design study
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComboSummary:
    combo_id: int
    crossover: str
    sigma: float
    nt: int
    fitnesses: tuple
    min: float
    q1: float
    median: float
    q3: float
    max: float
    outliers: tuple

    @classmethod
    def from_fitnesses(cls, combo_id, fitnesses):
        f = np.asarray(fitnesses, dtype=np.float64)
        q1, med, q3 = np.percentile(f, [25, 50, 75])
        iqr = q3 - q1
        out = f[(f < q1 - 1.5 * iqr) | (f > q3 + 1.5 * iqr)]
        crossover, sigma, nt = combo(combo_id)
        return cls(combo_id, crossover, sigma, nt, tuple(f.tolist()), float(f.min()), float(q1), float(med),
                   float(q3), float(f.max()), tuple(sorted(out.tolist())))


@dataclass(frozen=True)
class DesignStudyTable:
    rows: tuple

    def best_combo(self):
        """Combo with the smallest median final fitness (lowest id on ties)."""
        return min(self.rows, key=lambda r: (r.median, r.combo_id)).combo_id


def design_study(combos, runs_per_combo, cfg_base, problem, backend=None, jobs=1):
    """Run ``runs_per_combo`` seeded GAs for each combo and summarize final fitness."""
    if runs_per_combo < 1:
        raise ValueError("runs_per_combo must be >= 1")
    combos = list(combos)
    cfgs, ids = [], []
    for k in combos:
        for c in seeded_configs(cfg_base.with_combo(k), runs_per_combo):
            cfgs.append(c)
            ids.append(k)
    records = run_many(cfgs, problem, backend, ids, jobs)
    rows = []
    for n, k in enumerate(combos):
        recs = records[n * runs_per_combo : (n + 1) * runs_per_combo]
        rows.append(ComboSummary.from_fitnesses(k, [r.best_fitness for r in recs]))
        log.info("combo %d median %.3e", k, rows[-1].median)
    return DesignStudyTable(tuple(rows)), records
