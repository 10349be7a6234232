"""Hot loops of the genetic search: batch fitness and the generational step.

Every kernel exists twice. ``_nb_*`` functions are numba-compiled scalar
loops; ``_np_*`` functions are vectorized numpy. Both perform the same
floating point operations in the same order (energies accumulate gene by gene,
squared errors accumulate rank by rank, sorts are stable), so the two
backends produce bit-identical fitness values and GA trajectories.
"""
from dataclasses import dataclass

import numpy as np

from ._backend import njit, resolve_backend
from .model import _features
from .spectrum import DEFAULT_TOL, degeneracy_groups, model_spectrum


@dataclass(frozen=True, eq=False)
class FitnessTables:
    """Precomputed lookup arrays for evaluating many chromosomes of one problem."""

    feats: np.ndarray  # (2**ntot, D) 0/1 design matrix
    target: np.ndarray  # (L,) sorted target energies
    target_gid: np.ndarray  # (L,) degeneracy group of each target rank
    config_gid: np.ndarray  # (L,) degeneracy group of each logical configuration
    delta: float

    @property
    def L(self):
        return self.target.size

    @classmethod
    def build(cls, target, nanc, delta, tol=DEFAULT_TOL):
        ref = model_spectrum(target)
        groups = degeneracy_groups(ref, tol)
        return cls(
            feats=np.ascontiguousarray(_features(target.n + nanc)),
            target=np.ascontiguousarray(ref.energies),
            target_gid=np.ascontiguousarray(groups.rank_group),
            config_gid=np.ascontiguousarray(groups.config_group(target.n)),
            delta=float(delta),
        )


# --------------------------------------------------------------------------
# numba kernels
# --------------------------------------------------------------------------

@njit(cache=True)
def _nb_fitness_one(genes, feats, target, target_gid, config_gid, delta):
    n_cfg, n_genes = feats.shape
    L = target.shape[0]
    e = np.empty(n_cfg)
    for c in range(n_cfg):
        acc = 0.0
        for k in range(n_genes):
            acc += genes[k] * feats[c, k]
        e[c] = acc
    order = np.argsort(e, kind="mergesort")
    s = 0.0
    l = 0
    for r in range(L):
        diff = target[r] - e[order[r]]
        s += diff * diff
        if config_gid[order[r] % L] != target_gid[r]:
            l += 1
    mse = s / L
    return mse + l * delta, mse, l


@njit(cache=True)
def _nb_batch_fitness(pop, feats, target, target_gid, config_gid, delta):
    m = pop.shape[0]
    f = np.empty(m)
    mse = np.empty(m)
    l = np.empty(m, dtype=np.int64)
    for i in range(m):
        f[i], mse[i], l[i] = _nb_fitness_one(pop[i], feats, target, target_gid, config_gid, delta)
    return f, mse, l


@njit(cache=True)
def _nb_evolve(pop, fit, best_genes, best_fit, hist, tour, cx_u, cut_lo, cut_hi, mut_u, gene_u, noise,
               lo, hi, p_cx, p_mut, indpb, sigma, elitism, feats, target, target_gid, config_gid, delta):
    n_gen = tour.shape[0]
    npop, n_genes = pop.shape
    n_child = tour.shape[1]
    nt = tour.shape[2]
    n_off = npop - elitism
    for g in range(n_gen):
        order = np.argsort(fit, kind="mergesort")
        new_pop = np.empty_like(pop)
        new_fit = np.empty_like(fit)
        for e in range(elitism):
            new_pop[e] = pop[order[e]]
            new_fit[e] = fit[order[e]]

        children = np.empty((n_child, n_genes))
        for c in range(n_child):
            best = tour[g, c, 0]
            for t in range(1, nt):
                cand = tour[g, c, t]
                if fit[cand] < fit[best]:
                    best = cand
            children[c] = pop[best]

        for q in range(n_child // 2):
            if cx_u[g, q] < p_cx:
                for k in range(cut_lo[g, q], cut_hi[g, q]):
                    tmp = children[2 * q, k]
                    children[2 * q, k] = children[2 * q + 1, k]
                    children[2 * q + 1, k] = tmp

        for c in range(n_child):
            if mut_u[g, c] < p_mut:
                for k in range(n_genes):
                    if gene_u[g, c, k] < indpb:
                        v = children[c, k] + sigma * noise[g, c, k]
                        children[c, k] = min(max(v, lo[k]), hi[k])

        for c in range(n_off):
            new_pop[elitism + c] = children[c]
            f, _, _ = _nb_fitness_one(children[c], feats, target, target_gid, config_gid, delta)
            new_fit[elitism + c] = f

        pop[:] = new_pop
        fit[:] = new_fit
        i_best = np.argmin(fit)
        hist[g] = fit[i_best]
        if fit[i_best] < best_fit[0]:
            best_fit[0] = fit[i_best]
            best_genes[:] = pop[i_best]


# --------------------------------------------------------------------------
# numpy kernels
# --------------------------------------------------------------------------

def _np_batch_fitness(pop, feats, target, target_gid, config_gid, delta):
    L = target.shape[0]
    e = np.zeros((pop.shape[0], feats.shape[0]))
    for k in range(feats.shape[1]):
        e += pop[:, k : k + 1] * feats[None, :, k]
    order = np.argsort(e, axis=1, kind="stable")[:, :L]
    low = np.take_along_axis(e, order, axis=1)
    s = np.zeros(pop.shape[0])
    for r in range(L):
        diff = target[r] - low[:, r]
        s += diff * diff
    mse = s / L
    l = np.sum(config_gid[order % L] != target_gid[None, :], axis=1).astype(np.int64)
    return mse + l * delta, mse, l


def _np_evolve(pop, fit, best_genes, best_fit, hist, tour, cx_u, cut_lo, cut_hi, mut_u, gene_u, noise,
               lo, hi, p_cx, p_mut, indpb, sigma, elitism, feats, target, target_gid, config_gid, delta):
    n_gen, n_child, _ = tour.shape
    npop, n_genes = pop.shape
    n_off = npop - elitism
    cols = np.arange(n_genes)
    for g in range(n_gen):
        order = np.argsort(fit, kind="stable")
        elite = order[:elitism]

        drawn = tour[g]
        parents = drawn[np.arange(n_child), np.argmin(fit[drawn], axis=1)]
        children = pop[parents]

        a, b = children[0::2], children[1::2]
        seg = (cx_u[g] < p_cx)[:, None] & (cols[None, :] >= cut_lo[g][:, None]) & (cols[None, :] < cut_hi[g][:, None])
        children = np.empty_like(children)
        children[0::2] = np.where(seg, b, a)
        children[1::2] = np.where(seg, a, b)

        hit = (mut_u[g] < p_mut)[:, None] & (gene_u[g] < indpb)
        moved = np.minimum(np.maximum(children + sigma * noise[g], lo), hi)
        children = np.where(hit, moved, children)[:n_off]

        child_fit, _, _ = _np_batch_fitness(children, feats, target, target_gid, config_gid, delta)
        pop[:] = np.concatenate((pop[elite], children))
        fit[:] = np.concatenate((fit[elite], child_fit))
        i_best = np.argmin(fit)
        hist[g] = fit[i_best]
        if fit[i_best] < best_fit[0]:
            best_fit[0] = fit[i_best]
            best_genes[:] = pop[i_best]


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def batch_fitness(pop, tables, backend=None):
    """Fitness, mse and unsorted-rank count for every row of ``pop``."""
    fn = _nb_batch_fitness if resolve_backend(backend) == "numba" else _np_batch_fitness
    pop = np.ascontiguousarray(pop, dtype=np.float64)
    return fn(pop, tables.feats, tables.target, tables.target_gid, tables.config_gid, tables.delta)


def evolve(state, draws, params, tables, backend=None):
    """Advance ``state`` in place by ``len(draws.tour)`` generations.

    ``state`` carries ``pop``, ``fit``, ``best_genes``, ``best_fit`` (1-element)
    and writes per-generation best fitness into ``hist``.
    """
    fn = _nb_evolve if resolve_backend(backend) == "numba" else _np_evolve
    fn(state.pop, state.fit, state.best_genes, state.best_fit, state.hist,
       draws.tour, draws.cx_u, draws.cut_lo, draws.cut_hi, draws.mut_u, draws.gene_u, draws.noise,
       params.lo, params.hi, params.p_cx, params.p_mut, params.indpb, params.sigma, params.elitism,
       tables.feats, tables.target, tables.target_gid, tables.config_gid, tables.delta)
