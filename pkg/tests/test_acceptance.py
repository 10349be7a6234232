"""Acceptance suite: one test per numbered criterion.

Each test tags itself with ``criterion(num, detail)``; the terminal summary
then prints one PASS/FAIL line per criterion. Run on its own with::

    pytest tests/test_acceptance.py -v
"""
import time

import numpy as np
import pytest

from pspin_embed.anneal import (AnnealConfig, adiabatic_bound, build_pspin_hamiltonian, build_quadratic_hamiltonian,
                                build_transverse_field, evolve, instantaneous_spectrum)
from pspin_embed.cli import main
from pspin_embed.ga import GaConfig, Problem, design_study, run_many, seeded_configs
from pspin_embed.model import (PSpinModel, QuadraticModel, all_configs, analytic_model, analytic_solution,
                               and_embed_cubic, ising_energy, penalty_energy, quad_to_ising, quadratic_energy)
from pspin_embed.spectrum import degeneracy_groups, fitness, model_spectrum, rms

DELTA = 50.0
LEVELS_N3 = [-3] + [-1 / 9] * 3 + [1 / 9] * 3 + [3]
LEVELS_N4 = [-4] + [-0.5] * 4 + [0] * 6 + [0.5] * 4 + [4]


def best_time(fn, repeat=20):
    fn()
    return min(_timed(fn) for _ in range(repeat))


def _timed(fn):
    t = time.perf_counter()
    fn()
    return time.perf_counter() - t


def _analytic_exactness(n, nanc, table):
    target = PSpinModel(n, 3)
    genes = analytic_solution(n, DELTA)
    rep = fitness(genes, target, nanc, DELTA)
    low = model_spectrum(QuadraticModel.from_chromosome(genes, nanc)).energies[: 2**n]
    err = float(np.max(np.abs(low - table)))
    elapsed = best_time(lambda: fitness(genes, target, nanc, DELTA))
    return rep, err, elapsed, low


def test_c01_analytic_exactness_n3(criterion):
    rep, err, elapsed, _ = _analytic_exactness(3, 1, LEVELS_N3)
    criterion(1, f"n=3 analytic: F={rep.f:.1e}, l={rep.l}, max level error {err:.1e}, {elapsed * 1e3:.3f} ms")
    assert rep.l == 0 and rep.f <= 1e-24
    assert err <= 1e-12
    assert elapsed < 1e-3


def test_c02_analytic_exactness_n4(criterion):
    rep, err, elapsed, low = _analytic_exactness(4, 2, LEVELS_N4)
    sizes = degeneracy_groups(model_spectrum(PSpinModel(4, 3))).sizes()
    eff_sizes = [len(g) for g in np.split(low, np.flatnonzero(np.diff(low) > 1e-9) + 1)]
    criterion(2, f"n=4 analytic: F={rep.f:.1e}, l={rep.l}, max level error {err:.1e}, groups {eff_sizes}, "
                 f"{elapsed * 1e3:.3f} ms")
    assert rep.l == 0 and rep.f <= 1e-18
    assert err <= 1e-9
    assert sizes == eff_sizes == [1, 4, 6, 4, 1]
    assert elapsed < 1e-2


def test_c03_and_embedding_equivalence(criterion):
    bad = []
    for J in (-8.0, -1.0, 1.0, 8.0):
        frag = and_embed_cubic(J, (0, 1, 2), DELTA)
        levels = sorted(quadratic_energy(c, frag) for c in all_configs(4))
        cubic = sorted(J * a * b * c for a, b, c in all_configs(3).tolist())
        if levels[:8] != cubic:
            bad.append(J)
    criterion(3, f"lowest 8 of 16 levels equal cubic levels for J in (-8,-1,1,8); mismatches: {bad}")
    assert not bad


def test_c04_penalty_table(criterion):
    rows = []
    for xi, xj, t in all_configs(3).tolist():
        e = penalty_energy(xi, xj, t, DELTA)
        rows.append(e == 0 if t == (xi & xj) else e >= DELTA)
    criterion(4, f"{sum(rows)}/8 bit triples satisfy zero-on-AND, >= delta otherwise")
    assert all(rows)


def test_c05_binary_ising_round_trip(criterion):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        ntot = int(rng.integers(1, 7))
        npair = ntot * (ntot - 1) // 2
        model = QuadraticModel(ntot, rng.normal(0, 10), rng.normal(0, 10, ntot), rng.normal(0, 10, npair))
        ising = quad_to_ising(model)
        binary = model.energies()
        worst = max(worst, float(np.max(np.abs(binary - ising.energies()))))
        c = all_configs(ntot)[int(rng.integers(0, 2**ntot))]
        worst = max(worst, abs(quadratic_energy(c, model) - ising_energy(c, ising)))
    criterion(5, f"1000 random models, ntot<=6: max |E_binary - E_ising| = {worst:.1e}")
    assert worst <= 1e-10


def _best_of_runs(n, nanc, k, runs=20, ngen=25000):
    problem = Problem(PSpinModel(n, 3), nanc, DELTA)
    cfg = GaConfig(npop=20, ngen=ngen, p_cx=0.4, p_mut=0.7).with_combo(k)
    t = time.perf_counter()
    recs = run_many(seeded_configs(cfg, runs), problem, combo_ids=[k] * runs)
    best = min(recs, key=lambda r: r.best_fitness)
    return best, time.perf_counter() - t


def test_c06_ga_reproduction_n3(criterion):
    best, elapsed = _best_of_runs(3, 1, 18)
    r = rms(analytic_solution(3, DELTA), best.best_chromosome)
    criterion(6, f"n=3 combo 18, best of 20 runs: F={best.best_fitness:.3e} (seed {best.seed}), rms={r:.2e}, "
                 f"{elapsed:.0f} s")
    assert best.best_fitness <= 1e-3


def test_c07_ga_reproduction_n4(criterion):
    best, elapsed = _best_of_runs(4, 2, 2)
    r = rms(analytic_solution(4, DELTA), best.best_chromosome)
    criterion(7, f"n=4 combo 2, best of 20 runs: F={best.best_fitness:.3e} (seed {best.seed}), rms={r:.3f}, "
                 f"{elapsed:.0f} s")
    assert best.best_fitness <= 1e-1
    assert 0.01 <= r <= 1.0


def test_c08_design_study_direction(criterion):
    problem = Problem(PSpinModel(3, 3), 1, DELTA)
    t = time.perf_counter()
    table, _ = design_study(range(1, 31), 25, GaConfig(ngen=5000), problem)
    k = table.best_combo()
    row = next(r for r in table.rows if r.combo_id == k)
    criterion(8, f"reduced design study: minimal median combo {k} ({row.crossover}, sigma={row.sigma}, "
                 f"nt={row.nt}), median {row.median:.2e}, {time.perf_counter() - t:.0f} s")
    assert row.sigma == 0.2


def test_c09_annealing_fidelity(criterion):
    h0_3, h0_4 = build_transverse_field(3), build_transverse_field(4)
    h_pspin = build_pspin_hamiltonian(PSpinModel(3, 3))
    h_eff = build_quadratic_hamiltonian(analytic_model(3, DELTA))
    out = {}
    for name, h0, h1, tf in (("pspin", h0_3, h_pspin, 100.0), ("analytic", h0_4, h_eff, 100.0),
                             ("sudden", h0_3, h_pspin, 0.01)):
        t = time.perf_counter()
        out[name] = (evolve(h0, h1, AnnealConfig(tf=tf)).fidelity, time.perf_counter() - t)
    criterion(9, "fidelity: " + ", ".join(f"{k} {v[0]:.6f} ({v[1]:.1f} s)" for k, v in out.items()))
    assert out["pspin"][0] == pytest.approx(0.99998, abs=5e-4)
    assert out["analytic"][0] == pytest.approx(0.994, abs=5e-3)
    assert out["sudden"][0] == pytest.approx(0.125, abs=1e-2)
    assert all(v[1] < 60 for v in out.values())


def test_c10_spectra_structure(criterion):
    h0 = build_transverse_field(4)
    exact = np.sort(PSpinModel(3, 3).energies())
    seps, errs = {}, {}
    for delta in (11.0, 50.0):
        levels = instantaneous_spectrum(h0, build_quadratic_hamiltonian(analytic_model(3, delta)), [1.0], 9)[0]
        errs[delta] = float(np.max(np.abs(levels[:8] - exact)))
        seps[delta] = float(levels[8] - levels[7])
    criterion(10, f"s=1: level error {errs[11.0]:.1e} (delta 11), separation {seps[11.0]:.3f} (delta 11) "
                  f"-> {seps[50.0]:.3f} (delta 50)")
    assert errs[11.0] <= 1e-9
    assert seps[11.0] > 1
    assert seps[50.0] > seps[11.0]


def test_c11_adiabatic_bound_scaling(criterion):
    s = np.linspace(0.0, 1.0, 201)
    orig = adiabatic_bound(build_transverse_field(3), build_pspin_hamiltonian(PSpinModel(3, 3)), s)
    eff = adiabatic_bound(build_transverse_field(4), build_quadratic_hamiltonian(analytic_model(3, DELTA)), s)
    ratio = eff / orig
    criterion(11, f"bound ratio {ratio:.2f} (effective {eff:.3f} / original {orig:.4f}); "
                  f"required [{DELTA / 3:.2f}, {3 * DELTA:.0f}]")
    assert DELTA / 3 <= ratio <= 3 * DELTA


def test_c12_cli_determinism(criterion, tmp_path):
    commands = [
        ["embed", "--runs", "3", "--generations", "400", "--seed", "5"],
        ["design-study", "--combos", "2,18", "--runs", "2", "--generations", "200"],
        ["spectrum", "--chromosome", "analytic", "--n", "4"],
        ["anneal", "--model", "analytic", "--tf", "10", "--grid", "21"],
    ]
    mismatched = []
    for k, cmd in enumerate(commands):
        dirs = [tmp_path / f"{k}_{rep}" for rep in (0, 1)]
        for d in dirs:
            assert main(cmd + ["--out-dir", str(d)]) == 0
        # the output directory is part of the manifest; compare everything else byte for byte
        for path in sorted(dirs[0].rglob("*.csv")):
            other = dirs[1] / path.relative_to(dirs[0])
            a = path.read_text().replace(str(dirs[0]), "")
            b = other.read_text().replace(str(dirs[1]), "")
            if a != b:
                mismatched.append(str(path.relative_to(tmp_path)))
    n_files = sum(1 for _ in tmp_path.rglob("*.csv")) // 2
    criterion(12, f"{n_files} CSV artifacts from 4 subcommands re-run: {len(mismatched)} differ")
    assert not mismatched
