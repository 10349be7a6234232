"""Compare the numba and numpy kernel backends.

Times batch fitness evaluation and complete GA runs on both backends and
checks that they return bit-identical results. Numba compilation is excluded
from the timings (a warm-up call runs first).

    python benchmarks/bench_backends.py --n 4 --generations 2000
"""
import argparse
import time

import numpy as np

from pspin_embed import kernels
from pspin_embed.ga import GaConfig, Problem, run_ga
from pspin_embed.model import PSpinModel

BACKENDS = ("numba", "numpy")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--nanc", type=int, default=None)
    ap.add_argument("--pop", type=int, default=1000, help="chromosomes per batch-fitness call")
    ap.add_argument("--generations", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    nanc = args.n // 2 if args.nanc is None else args.nanc
    problem = Problem(PSpinModel(args.n, 3), nanc)
    pop = np.random.default_rng(0).uniform(problem.bounds.lo, problem.bounds.hi, size=(args.pop, problem.n_genes))
    cfg = GaConfig(ngen=args.generations, seed=0)

    results = {}
    for b in BACKENDS:
        kernels.batch_fitness(pop[:2], problem.tables, b)
        run_ga(GaConfig(ngen=2), problem, b)
        t_fit, fit = best_of(lambda: kernels.batch_fitness(pop, problem.tables, b), args.repeat)
        t_ga, rec = best_of(lambda: run_ga(cfg, problem, b), args.repeat)
        results[b] = (t_fit, t_ga, fit, rec)

    print(f"n={args.n} nanc={nanc} genes={problem.n_genes} configs={2**problem.ntot}")
    print(f"{'backend':8s} {'fitness/s':>12s} {'ga run [s]':>11s} {'gen/s':>9s}")
    for b, (t_fit, t_ga, _, _) in results.items():
        print(f"{b:8s} {args.pop / t_fit:12.0f} {t_ga:11.3f} {args.generations / t_ga:9.0f}")
    (_, ga_nb, fit_nb, rec_nb), (_, ga_np, fit_np, rec_np) = results["numba"], results["numpy"]
    same = all(np.array_equal(x, y) for x, y in zip(fit_nb, fit_np)) and \
        np.array_equal(rec_nb.fitness_history, rec_np.fitness_history)
    print(f"speedup (GA run): {ga_np / ga_nb:.1f}x; bit-identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
