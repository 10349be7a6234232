"""Command line front end.

Subcommands: ``embed``, ``design-study``, ``spectrum``, ``anneal``, ``compare``.
Configuration comes from built-in defaults, then an optional JSON file
(sections ``problem``, ``ga``, ``anneal``, ``output``), then flags.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numeric failure.
"""
import argparse
import copy
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .anneal import (AnnealConfig, NumericalError, adiabatic_diagnostics, build_quadratic_hamiltonian,
                     build_transverse_field, evolve, problem_hamiltonian)
from .artifacts import read_chromosome, write_chromosome, write_csv, write_json
from .ga import COMBOS, GaConfig, Problem, design_study, run_many, seeded_configs
from .model import (PSpinModel, QuadraticModel, analytic_solution, bitstring, chromosome_length, default_ancilla_defs,
                    gene_names)
from .spectrum import degeneracy_groups, fitness, model_spectrum, rms_report

log = logging.getLogger("pspin_embed")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "problem": {"n": 3, "p": 3, "nanc": None, "delta": 50.0, "tol": 1e-9, "penalty_window": "offset"},
    "ga": {"npop": 20, "ngen": 25000, "p_cx": 0.4, "p_mut": 0.7, "combo": None, "crossover": "two-point",
           "sigma": 0.2, "nt": 5, "indpb": None, "elitism": 1, "runs": 100, "seed": 0, "combos": "1-30"},
    "anneal": {"tf": 100.0, "n_grid": 201, "tol": 1e-8, "k": None, "model": "pspin", "viz": False},
    "output": {"out_dir": "results"},
}
VIZ_DELTA = 11.0
ANALYTIC_NANC = {3: 1, 4: 2}

# flag name -> (section, key)
FLAG_MAP = {
    "n": ("problem", "n"), "p": ("problem", "p"), "nanc": ("problem", "nanc"), "delta": ("problem", "delta"),
    "combo": ("ga", "combo"), "runs": ("ga", "runs"), "generations": ("ga", "ngen"), "seed": ("ga", "seed"),
    "npop": ("ga", "npop"), "combos": ("ga", "combos"),
    "tf": ("anneal", "tf"), "grid": ("anneal", "n_grid"), "levels": ("anneal", "k"), "model": ("anneal", "model"),
    "viz": ("anneal", "viz"), "out_dir": ("output", "out_dir"),
}


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def resolve_config(args):
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from exc
        for section, values in loaded.items():
            if section not in cfg or not isinstance(values, dict):
                raise ConfigError(f"unknown config section {section!r}")
            unknown = set(values) - set(cfg[section])
            if unknown:
                raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
            cfg[section].update(values)
    delta_given = cfg["problem"]["delta"] != DEFAULTS["problem"]["delta"]
    for flag, (section, key) in FLAG_MAP.items():
        value = getattr(args, flag, None)
        if value is not None and value is not False:
            cfg[section][key] = value
            delta_given |= flag == "delta"
    if cfg["anneal"]["viz"] and not delta_given:
        cfg["problem"]["delta"] = VIZ_DELTA

    prob = cfg["problem"]
    if prob["nanc"] is None:
        prob["nanc"] = 0 if prob["p"] <= 2 else prob["n"] // 2
    ga = cfg["ga"]
    if ga["combo"] is not None:
        if ga["combo"] not in COMBOS:
            raise ConfigError(f"combo must be in 1..30, got {ga['combo']}")
        ga["crossover"], ga["sigma"], ga["nt"] = COMBOS[ga["combo"]]
    if ga["runs"] < 1:
        raise ConfigError("runs must be >= 1")
    return cfg


def parse_combos(spec):
    if isinstance(spec, (list, tuple)):
        out = [int(v) for v in spec]
    else:
        out = []
        for part in str(spec).split(","):
            part = part.strip()
            if "-" in part:
                a, b = part.split("-")
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
    if not out or any(k not in COMBOS for k in out):
        raise ConfigError(f"combos must be a non-empty subset of 1..30, got {spec!r}")
    return out


def make_problem(cfg):
    p = cfg["problem"]
    return Problem(PSpinModel(int(p["n"]), int(p["p"])), int(p["nanc"]), float(p["delta"]), float(p["tol"]),
                   penalty_window=p["penalty_window"])


def make_ga_config(cfg):
    g = cfg["ga"]
    return GaConfig(npop=g["npop"], ngen=g["ngen"], p_cx=g["p_cx"], p_mut=g["p_mut"], crossover=g["crossover"],
                    sigma=g["sigma"], nt=g["nt"], indpb=g["indpb"], seed=g["seed"], elitism=g["elitism"])


def manifest(subcommand, cfg, seeds=(), outputs=(), **extra):
    return {"tool": "pspin-embed", "version": __version__, "subcommand": subcommand, "config": cfg,
            "seeds": list(seeds), "outputs": list(outputs), **extra}


def analytic_reference(problem):
    """Analytic chromosome when the problem matches one of the hand-derived cases."""
    n = problem.model.n
    if problem.model.p == 3 and ANALYTIC_NANC.get(n) == problem.nanc and \
            tuple(problem.ancilla_defs) == default_ancilla_defs(n, problem.nanc):
        return analytic_solution(n, problem.delta)
    return None


def spectrum_rows(target, genes, nanc, tol):
    """Side-by-side rows of the original and effective low spectra."""
    L = 2**target.n
    ref = model_spectrum(target)
    groups = degeneracy_groups(ref, tol)
    eff = model_spectrum(QuadraticModel.from_chromosome(genes, nanc))
    eff_cfg = eff.configs()
    rows = []
    for r in range(eff.energies.size):
        logical = int(eff.indices[r]) % L
        if r < L:
            ok = logical in groups.members[groups.rank_group[r]]
            rows.append([r, bitstring(ref.configs()[r]), ref.energies[r], bitstring(eff_cfg[r]), eff.energies[r],
                         int(ok)])
        else:
            rows.append([r, "", "", bitstring(eff_cfg[r]), eff.energies[r], ""])
    return rows


SPECTRUM_HEADER = ["rank", "original_config", "original_energy", "effective_config", "effective_energy", "in_group"]


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_embed(cfg, args):
    problem = make_problem(cfg)
    base = make_ga_config(cfg)
    runs = cfg["ga"]["runs"]
    out = Path(cfg["output"]["out_dir"])
    cfgs = seeded_configs(base, runs)
    seeds = [c.seed for c in cfgs]
    outputs = ["runs/", "final_fitness.csv", "fitness_history.csv", "best_chromosome.json", "best_spectrum.csv",
               "summary.json"]
    reference = analytic_reference(problem)
    if reference is not None:
        outputs.append("comparison.csv")
    man = manifest("embed", cfg, seeds, outputs)

    records = run_many(cfgs, problem, args.backend, [cfg["ga"]["combo"]] * runs, args.jobs)
    i_best = min(range(runs), key=lambda i: (records[i].best_fitness, records[i].seed))
    best = records[i_best]

    stride = max(1, base.ngen // 1000)
    for i, rec in enumerate(records):
        d = rec.to_dict()
        d["fitness_history"] = rec.fitness_history[::stride]
        d["history_stride"] = stride
        write_json(out / "runs" / f"run_{i:04d}.json", d, man)

    final_rows = []
    for i, rec in enumerate(records):
        rep = fitness(rec.best_chromosome, problem.model, problem.nanc, problem.delta, problem.tol)
        final_rows.append([i, rec.seed, rec.best_fitness, rep.mse, rep.l, rep.gap_to_nonphysical])
    write_csv(out / "final_fitness.csv", ["run", "seed", "best_fitness", "mse", "l", "gap_to_nonphysical"],
              final_rows, man)
    write_csv(out / "fitness_history.csv", ["generation", "best_fitness"], enumerate(best.fitness_history), man)
    write_chromosome(out / "best_chromosome.json", best.best_chromosome, problem.nanc, problem.delta, man,
                     {"seed": best.seed, "fitness": best.best_fitness})
    write_csv(out / "best_spectrum.csv", SPECTRUM_HEADER,
              spectrum_rows(problem.model, best.best_chromosome, problem.nanc, problem.tol), man)

    report = fitness(best.best_chromosome, problem.model, problem.nanc, problem.delta, problem.tol)
    summary = {"best_run": i_best, "best_seed": best.seed, "best_fitness": best.best_fitness,
               "fitness_report": asdict(report),
               "median_final_fitness": float(np.median([r.best_fitness for r in records]))}
    if reference is not None:
        names = gene_names(problem.ntot)
        rows = []
        for k, (a, g) in enumerate(zip(reference, best.best_chromosome)):
            rows.append([k, names[k], a, g, (a - g) / a if a != 0 else ""])
        write_csv(out / "comparison.csv", ["gene", "name", "analytic", "genetic", "relative_error"], rows, man)
        skip = rms_report(reference, best.best_chromosome, "skip")
        summary["rms"] = skip.value
        summary["rms_skipped_zero_genes"] = skip.skipped
        summary["rms_zero_as_unit"] = rms_report(reference, best.best_chromosome, "unit").value
    write_json(out / "summary.json", summary, man)
    print(f"best fitness {best.best_fitness:.6e} (seed {best.seed})"
          + (f", rms {summary['rms']:.4e}" if "rms" in summary else ""))
    return EXIT_OK


def cmd_design_study(cfg, args):
    problem = make_problem(cfg)
    base = make_ga_config(cfg)
    combos = parse_combos(cfg["ga"]["combos"])
    runs = cfg["ga"]["runs"]
    out = Path(cfg["output"]["out_dir"])
    seeds = [base.seed + i for i in range(runs)]
    man = manifest("design-study", cfg, seeds, ["design_study.csv", "design_study_runs.csv", "summary.json"],
                   combos=combos)

    table, records = design_study(combos, runs, base, problem, args.backend, args.jobs)
    rows = [[r.combo_id, r.crossover, r.sigma, r.nt, len(r.fitnesses), r.min, r.q1, r.median, r.q3, r.max,
             len(r.outliers), ";".join(format(v, ".17g") for v in r.outliers)] for r in table.rows]
    write_csv(out / "design_study.csv", ["combo", "crossover", "sigma", "nt", "runs", "min", "q1", "median", "q3",
                                         "max", "n_outliers", "outliers"], rows, man)
    write_csv(out / "design_study_runs.csv", ["combo", "run", "seed", "best_fitness"],
              [[rec.combo_id, i % runs, rec.seed, rec.best_fitness] for i, rec in enumerate(records)], man)
    best = table.best_combo()
    write_json(out / "summary.json", {"best_combo": best, "best_combo_operators": COMBOS[best],
                                      "medians": {r.combo_id: r.median for r in table.rows}}, man)
    print(f"minimal-median combo: {best} {COMBOS[best]}")
    return EXIT_OK


def _load_genes(source, problem):
    if source == "analytic":
        genes = analytic_reference(problem)
        if genes is None:
            raise ConfigError("analytic chromosome only exists for p=3 with n=3 (nanc=1) or n=4 (nanc=2)")
        return genes, problem.nanc
    if source == "zero":
        return np.zeros(chromosome_length(problem.ntot)), problem.nanc
    genes, header = read_chromosome(source)
    nanc = int(header.get("nanc", problem.nanc))
    if genes.size != chromosome_length(problem.model.n + nanc):
        raise ConfigError(f"{source}: {genes.size} genes, expected {chromosome_length(problem.model.n + nanc)} "
                          f"for n={problem.model.n}, nanc={nanc}")
    return genes, nanc


def cmd_spectrum(cfg, args):
    problem = make_problem(cfg)
    out = Path(cfg["output"]["out_dir"])
    genes, nanc = _load_genes(args.chromosome, problem)
    man = manifest("spectrum", cfg, outputs=["parameters.csv", "spectrum.csv", "spectrum.json"],
                   chromosome=args.chromosome)
    ntot = problem.model.n + nanc
    names = gene_names(ntot)
    write_csv(out / "parameters.csv", ["gene", "name", "value"], [[k, names[k], g] for k, g in enumerate(genes)], man)
    rows = spectrum_rows(problem.model, genes, nanc, problem.tol)
    write_csv(out / "spectrum.csv", SPECTRUM_HEADER, rows, man)
    rep = fitness(genes, problem.model, nanc, problem.delta, problem.tol)
    L = 2**problem.model.n
    write_json(out / "spectrum.json", {
        "parameters": dict(zip(names, genes.tolist())),
        "levels": [dict(zip(SPECTRUM_HEADER, r)) for r in rows[:L]],
        "nonphysical_levels": [{"effective_config": r[3], "effective_energy": r[4]} for r in rows[L:]],
        "fitness_report": asdict(rep),
    }, man)
    for r in rows[:L]:
        print(f"{r[1]:>{problem.model.n}} {r[2]: .5f}   {r[3]:>{ntot}} {r[4]: .5f}")
    return EXIT_OK


def cmd_anneal(cfg, args):
    problem = make_problem(cfg)
    a = cfg["anneal"]
    out = Path(cfg["output"]["out_dir"])
    if a["model"] == "pspin":
        h1 = problem_hamiltonian(problem.model)
    else:
        genes, nanc = _load_genes(a["model"], problem)
        h1 = build_quadratic_hamiltonian(QuadraticModel.from_chromosome(genes, nanc))
    size = int(round(np.log2(h1.shape[0])))
    h0 = build_transverse_field(size)
    acfg = AnnealConfig(tf=float(a["tf"]), n_grid=int(a["n_grid"]), tol=float(a["tol"]), k=a["k"])
    man = manifest("anneal", cfg, outputs=["pgs.csv", "spectra.csv", "summary.json"])

    res = evolve(h0, h1, acfg)
    diag = adiabatic_diagnostics(h0, h1, res.s)
    write_csv(out / "pgs.csv", ["s", "P"], zip(res.s, res.pgs), man)
    k = res.spectra.shape[1]
    write_csv(out / "spectra.csv", ["s"] + [f"E_{i}" for i in range(k)],
              ([s, *e] for s, e in zip(res.s, res.spectra)), man)
    write_json(out / "summary.json", {"fidelity": res.fidelity, "min_gap": res.min_gap, "norm_drift": res.norm_drift,
                                      "adiabatic": asdict(diag), "register_size": size}, man)
    print(f"fidelity {res.fidelity:.6f}, min gap {res.min_gap:.6f}, adiabatic bound {diag.bound:.4g}")
    return EXIT_OK


def cmd_compare(cfg, args):
    a, ha = read_chromosome(args.first)
    b, hb = read_chromosome(args.second)
    if a.size != b.size:
        raise ConfigError(f"chromosome lengths differ: {a.size} vs {b.size}")
    out = Path(cfg["output"]["out_dir"])
    man = manifest("compare", cfg, outputs=["compare.csv", "summary.json"], first=args.first, second=args.second)
    names = gene_names(int(ha["ntot"]))
    rows = [[k, names[k], x, y, y - x, (x - y) / x if x != 0 else ""] for k, (x, y) in enumerate(zip(a, b))]
    write_csv(out / "compare.csv", ["gene", "name", "first", "second", "difference", "relative_error"], rows, man)
    rep = rms_report(a, b, args.zero_genes)
    write_json(out / "summary.json", {"rms": rep.value, "skipped_zero_genes": rep.skipped, "genes_used": rep.used,
                                      "zero_genes": args.zero_genes}, man)
    print(f"rms {rep.value:.6e} ({rep.skipped} zero genes skipped)")
    return EXIT_OK


COMMANDS = {"embed": cmd_embed, "design-study": cmd_design_study, "spectrum": cmd_spectrum, "anneal": cmd_anneal,
            "compare": cmd_compare}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config with sections problem/ga/anneal/output")
    common.add_argument("--n", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--nanc", type=int)
    common.add_argument("--delta", type=float)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--backend", choices=("numba", "numpy"), help="kernel backend (default: $PSPIN_EMBED_BACKEND)")
    common.add_argument("-v", "--verbose", action="store_true")

    ga = argparse.ArgumentParser(add_help=False)
    ga.add_argument("--combo", type=int, help="operator combination 1..30")
    ga.add_argument("--runs", type=int)
    ga.add_argument("--generations", type=int)
    ga.add_argument("--npop", type=int)
    ga.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    ga.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")

    parser = argparse.ArgumentParser(prog="pspin-embed", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("embed", parents=[common, ga], help="run seeded GAs for the effective model")
    ds = sub.add_parser("design-study", parents=[common, ga], help="compare operator combinations")
    ds.add_argument("--combos", help="e.g. '1-30' or '2,18'")

    sp = sub.add_parser("spectrum", parents=[common], help="tabulate original vs effective spectra")
    sp.add_argument("--chromosome", default="analytic", help="'analytic', 'zero' or a chromosome file")

    an = sub.add_parser("anneal", parents=[common], help="simulate closed-system annealing")
    an.add_argument("--model", help="'pspin', 'analytic' or a chromosome file")
    an.add_argument("--tf", type=float)
    an.add_argument("--grid", type=int, help="number of output points in s")
    an.add_argument("--levels", type=int, help="instantaneous levels to record")
    an.add_argument("--viz", action="store_true", help=f"use delta={VIZ_DELTA:g} unless --delta is given")

    cp = sub.add_parser("compare", parents=[common], help="rms and gene table of two chromosome files")
    cp.add_argument("first")
    cp.add_argument("second")
    cp.add_argument("--zero-genes", choices=("skip", "unit", "raise"), default="skip")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.jobs = getattr(args, "jobs", 1)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
