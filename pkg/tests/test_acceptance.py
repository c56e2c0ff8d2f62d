"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` or through pytest.
"""
import math
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from impurity_decay.couplings import (
    CIRCULAR_DIPOLE,
    assemble_system,
    collective_decay_matrix,
    pair_coupling_circular,
    pair_coupling_general,
)
from impurity_decay.dynamics import fit_decay_rate, integrate_amplitudes
from impurity_decay.experiments import REFERENCE_ROWS, ExperimentConfig
from impurity_decay.experiments.common import case_array
from impurity_decay.solver import detuning_grid, detuning_sweep, effective_decay, eigen_sweep, self_energy

# tolerances
INTERSTITIAL_GAMMA_REL = 0.10
INTERSTITIAL_DBE_ABS = 0.15
BATCH_SECONDS = 300.0
SUBSTITUTIONAL_FACTOR = 2.0
MAX_GRID_STEPS = 2
NEIGHBOR_ROWS_REQUIRED = 9
BAND_EDGE = 2.0
BAND_EDGE_ABS = 0.1
CLOSED_FORM_REL = 1e-12
EIGEN_DIRECT_REL = 1e-8
ODE_REL = 0.05
ODE_GAMMA_I = 1e-2
SMALL_R_ABS = 1e-6
PSD_FLOOR = -1e-8
MONOTONE_SLACK = 1e-12
SPEEDUP_MIN = 5.0
POSMAP_SECONDS = 600.0

INTERSTITIAL = [r for r in REFERENCE_ROWS if r.placement == "interstitial"]
SUBSTITUTIONAL = [r for r in REFERENCE_ROWS if r.placement == "substitutional"]
KINDS = ("square", "triangular", "oblique", "rectangular", "honeycomb")


def report(number, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    line = f"criterion {number}: {status}  {detail}".rstrip()
    if failures:
        line += "  [" + "; ".join(failures) + "]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def _records(table1_run):
    return {(r.kind, r.placement): r for r in table1_run["records"]}


def test_criterion_1_interstitial_rows(table1_run):
    recs = _records(table1_run)
    failures = []
    for row in INTERSTITIAL:
        rec = recs[(row.kind, row.placement)]
        if rec.gamma_min is None:
            failures.append(f"{rec.label}: {rec.error}")
            continue
        rel = abs(rec.gamma_min - row.gamma_min) / row.gamma_min
        if rel > INTERSTITIAL_GAMMA_REL:
            failures.append(f"{rec.label} gamma {rec.gamma_min:.3e} vs {row.gamma_min:.3e} ({rel:.0%})")
        if rec.d_be is None or abs(rec.d_be - row.d_be) > INTERSTITIAL_DBE_ABS:
            got = "none" if rec.d_be is None else f"{rec.d_be:.3f}"
            failures.append(f"{rec.label} d_BE {got} vs {row.d_be}")
    if table1_run["elapsed"] > BATCH_SECONDS:
        failures.append(f"batch took {table1_run['elapsed']:.0f} s")
    report(1, failures, f"(batch {table1_run['elapsed']:.1f} s)")


def test_criterion_2_substitutional_rows(table1_run, config):
    recs = _records(table1_run)
    steps = MAX_GRID_STEPS * config.grid_step
    failures = []
    for row in SUBSTITUTIONAL:
        rec = recs[(row.kind, row.placement)]
        if rec.gamma_min is None:
            failures.append(f"{rec.label}: {rec.error}")
            continue
        ratio = rec.gamma_min / row.gamma_min
        if not 1 / SUBSTITUTIONAL_FACTOR <= ratio <= SUBSTITUTIONAL_FACTOR:
            failures.append(f"{rec.label} gamma {rec.gamma_min:.3e} vs {row.gamma_min:.3e} (x{ratio:.2g})")
        if rec.d_be is None or rec.d_be > steps:
            got = "no band edge" if rec.d_be is None else f"{rec.d_be:.3f}"
            failures.append(f"{rec.label} d_BE {got}")
    conv = table1_run["conventions"]
    report(2, failures, f"(substitution={conv['substitution']}, triangular={conv['triangular']})")


def test_criterion_3_neighbor_statistics(table1_run):
    recs = _records(table1_run)
    mismatched = []
    for row in REFERENCE_ROWS:
        rec = recs[(row.kind, row.placement)]
        if (rec.n_nearest, rec.n_distinct) != (row.n_nearest, row.n_distinct):
            mismatched.append(f"{rec.label} {rec.n_nearest}/{rec.n_distinct} vs {row.n_nearest}/{row.n_distinct}")
    matched = len(REFERENCE_ROWS) - len(mismatched)
    failures = mismatched if matched < NEIGHBOR_ROWS_REQUIRED else []
    note = f" (mismatch noted: {', '.join(mismatched)})" if mismatched and not failures else ""
    report(3, failures, f"({matched}/10 rows){note}")


def test_criterion_4_vacancy_scan(vacancy_curves, config):
    failures = []
    edges = [vc.curve.band_edge for vc in vacancy_curves]
    for k, e in enumerate(edges, start=1):
        if not abs(e - BAND_EDGE) <= BAND_EDGE_ABS:
            failures.append(f"p{k} band edge {e:.3f}")
    deltas = [vc.curve.delta_min for vc in vacancy_curves]
    gaps = [d - e for d, e in zip(deltas, edges)]
    if not all(b < a for a, b in zip(gaps, gaps[1:])):
        failures.append("optimum does not approach the band edge monotonically: "
                        + ", ".join(f"{g:.3f}" for g in gaps))
    p5 = vacancy_curves[-1].curve
    if p5.d_be is None or p5.d_be > MAX_GRID_STEPS * config.grid_step:
        failures.append(f"p5 d_BE {p5.d_be}")
    report(4, failures, "(distances to edge " + ", ".join(f"{g:.3f}" for g in gaps) + ")")


def _long_diagonal(poly):
    d02, d13 = poly[2] - poly[0], poly[3] - poly[1]
    return (poly[0], d02) if np.linalg.norm(d02) >= np.linalg.norm(d13) else (poly[1], d13)


def test_criterion_5_position_maps(position_maps):
    maps, _ = position_maps
    failures = []
    for kind in ("square", "triangular", "rectangular"):
        pm = maps[kind]
        for o in pm.optima:
            if np.linalg.norm(o - pm.centre) > pm.cell_size:
                failures.append(f"{kind} optimum {np.round(o, 4).tolist()} off centre")
    pm = maps["oblique"]
    if len(pm.optima) != 2:
        failures.append(f"oblique has {len(pm.optima)} optima")
    else:
        o1, o2 = pm.optima
        if np.linalg.norm(o1 + o2 - 2 * pm.centre) > pm.cell_size:
            failures.append("oblique optima not symmetric")
        if min(np.linalg.norm(o - pm.centre) for o in pm.optima) <= pm.cell_size:
            failures.append("oblique optimum at centre")
        p, d = _long_diagonal(pm.voronoi.region)
        d = d / np.linalg.norm(d)
        for o in pm.optima:
            off = abs(np.cross(d, o - p))
            if off > pm.cell_size:
                failures.append(f"oblique optimum {off:.4f} from long diagonal")
    for kind, pm in maps.items():
        verts = pm.voronoi.vertices
        for o in pm.optima:
            dist = np.linalg.norm(verts - o, axis=1).min() if len(verts) else math.inf
            if dist > pm.cell_size:
                failures.append(f"{kind} optimum {np.round(o, 4).tolist()} is {dist:.4f} from a vertex "
                                f"(cell {pm.cell_size:.4f})")
    report(5, failures)


def test_criterion_6_oracle_equivalence(table1_run):
    failures = []
    worst = 0.0
    for r in np.linspace(0.05, 2.0, 2000):
        for phi in (0.0, 1.1, 2.7):
            a = pair_coupling_circular(r)
            b = pair_coupling_general(CIRCULAR_DIPOLE, CIRCULAR_DIPOLE,
                                      r * np.array([math.cos(phi), math.sin(phi), 0.0]))
            worst = max(worst, abs(a.J - b.J) / abs(b.J), abs(a.Gamma - b.Gamma) / abs(b.Gamma))
    if worst > CLOSED_FORM_REL:
        failures.append(f"(a) closed form vs contraction {worst:.1e}")

    cfg = ExperimentConfig()
    worst_sweep = 0.0
    for row in REFERENCE_ROWS:
        sys_ = assemble_system(case_array(row.kind, row.placement, cfg))
        grid = detuning_grid(sys_, cfg.delta_min, cfg.delta_max, cfg.n_points)
        a = eigen_sweep(sys_, detunings=grid, refine=False).gamma_eff
        b = detuning_sweep(sys_, detunings=grid, refine=False).gamma_eff
        worst_sweep = max(worst_sweep, float(np.max(np.abs(a - b) / np.abs(b))))
    if worst_sweep > EIGEN_DIRECT_REL:
        failures.append(f"(b) eigen vs direct {worst_sweep:.1e}")

    sq = assemble_system(case_array("square", "interstitial", cfg))
    delta = eigen_sweep(sq).delta_min
    target = effective_decay(sq.gamma_I, self_energy(sq, delta)) * ODE_GAMMA_I / sq.gamma_I
    traj = integrate_amplitudes(sq, delta, gamma_I=ODE_GAMMA_I, t_max=8 / target, n_records=4001)
    ode_rel = abs(fit_decay_rate(traj) - target) / target
    if ode_rel > ODE_REL:
        failures.append(f"(c) fitted decay differs by {ode_rel:.1%} at gamma_I={ODE_GAMMA_I}")

    small = pair_coupling_circular(1e-4 / (2 * math.pi), 0.3, 2.7).Gamma
    if abs(small - math.sqrt(0.3 * 2.7)) > SMALL_R_ABS:
        failures.append(f"(d) Gamma(x=1e-4) = {small}")
    report(6, failures, f"(a {worst:.1e}, b {worst_sweep:.1e}, c {ode_rel:.1%}, d ok)")


def test_criterion_7_property_suite(table1_run):
    cfg = ExperimentConfig()
    failures = []
    min_eig = math.inf
    for row in REFERENCE_ROWS:
        arr = case_array(row.kind, row.placement, cfg)
        ev = float(np.linalg.eigvalsh(collective_decay_matrix(arr)).min())
        min_eig = min(min_eig, ev)
        if ev < PSD_FLOOR:
            failures.append(f"{row.kind} {row.placement} Gamma eigenvalue {ev:.2e}")
        sys_ = assemble_system(arr)
        for gI, t_max in ((1.0, 200.0), (ODE_GAMMA_I, 2e4)):
            traj = integrate_amplitudes(sys_, 3.0, gamma_I=gI, t_max=t_max, n_records=2001)
            if np.max(np.diff(traj.population)) > MONOTONE_SLACK:
                failures.append(f"{row.kind} {row.placement} excitation grows")
    recs = _records(table1_run)
    for kind in KINDS:
        i, s = recs[(kind, "interstitial")].gamma_min, recs[(kind, "substitutional")].gamma_min
        if not (i is not None and s is not None and i < s):
            failures.append(f"{kind}: interstitial {i:.3e} not below substitutional {s:.3e}")
    best = min((r for r in recs.values() if r.gamma_min is not None), key=lambda r: r.gamma_min)
    if best.label != "square int.":
        failures.append(f"smallest minimum is {best.label} ({best.gamma_min:.3e}), "
                        f"square int. {recs[('square', 'interstitial')].gamma_min:.3e}")
    report(7, failures, f"(min Gamma eigenvalue {min_eig:.1e})")


def test_criterion_8_performance(position_maps):
    cfg = ExperimentConfig()
    arr = case_array("square", "interstitial", cfg)
    grid = np.linspace(cfg.delta_min, cfg.delta_max, cfg.n_points)
    start = time.perf_counter()
    eigen_sweep(assemble_system(arr), detunings=grid, refine=False)
    t_eigen = time.perf_counter() - start
    start = time.perf_counter()
    detuning_sweep(assemble_system(arr), detunings=grid, refine=False)
    t_direct = time.perf_counter() - start
    speedup = t_direct / t_eigen
    _, times = position_maps
    slowest = max(times.values())
    failures = []
    if speedup < SPEEDUP_MIN:
        failures.append(f"eigen sweep only {speedup:.1f}x faster")
    if slowest > POSMAP_SECONDS:
        failures.append(f"41x41 position map took {slowest:.0f} s")
    report(8, failures, f"(speedup {speedup:.0f}x, slowest 41x41 map {slowest:.1f} s)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
