"""Acceptance criteria 1-9, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` (the summary lines appear at
the end of the pytest report) or ``python3 tests/test_acceptance.py``.
Tolerances and trial counts are the contract values; nothing is loosened
to make a criterion pass.
"""

from __future__ import annotations

import json
import math
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import brute_even_closed_paths  # noqa: E402
from specrad import cyclestats as cs  # noqa: E402
from specrad import digraph as dg  # noqa: E402
from specrad import experiments as ex  # noqa: E402
from specrad.dist import EntryDistribution, moment, normalize_to_unit_second_moment  # noqa: E402
from specrad.ensemble import sample_matrix  # noqa: E402
from specrad.spectral import eigenvalues, log_trace_moment, operator_norm_power  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"
RESULTS: list[str] = []


def report(tag: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {tag}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# 1 ------------------------------------------------------------------------------


def test_criterion_1_veblen_equivalence():
    t0 = time.perf_counter()
    vb = ex.veblen_exhaustive(max_vertices=4, max_edges=8)
    dt = time.perf_counter() - t0
    ok = vb["total"] > 0 and vb["agree"] == vb["total"] and dt < 120
    report("1", ok, f"{vb['agree']}/{vb['total']} strongly connected multi digraphs agree on all three "
                    f"characterizations ({dt:.1f}s, limit 120s)")


# 2 ------------------------------------------------------------------------------


def test_criterion_2_counting_bounds():
    t0 = time.perf_counter()
    grid = ex.counting_grid(max_k=4, max_N=6)
    viol = {
        "path counting": sum(not r["generating_ok"] for r in grid),
        "graph counting": sum(r["labeled_rooted"] > r["graph_bound"] for r in grid),
        "closed path count": sum(r["paths"] > r["path_bound"] for r in grid),
        "generating totals": sum(not r["generating_total_matches"] for r in grid),
    }
    golden = {
        "N=3,2k=2 paths": (sum(1 for _ in dg.enumerate_even_closed_paths(3, 1)), 3),
        "N=2,2k=4 paths": (sum(1 for _ in dg.enumerate_even_closed_paths(2, 2)), 4),
        "doubled 2-cycle generating paths": (
            dg.count_generating_paths(dg.MultiDigraph.from_edges({(1, 2): 2, (2, 1): 2})), 2),
    }
    frozen = json.loads((GOLDEN / "counts.json").read_text())["even_closed_path_tally"]
    tally_ok = all(
        dg.even_closed_path_tally(*map(int, key.split(","))) == {int(a): b for a, b in want.items()}
        for key, want in frozen.items()
    )
    dt = time.perf_counter() - t0
    ok = not any(viol.values()) and all(a == b for a, b in golden.values()) and tally_ok and dt < 300
    report("2", ok, f"{len(grid)} (k,N,l) rows, violations {viol}; golden {golden}; "
                    f"tallies match brute-force fixture: {tally_ok} ({dt:.1f}s, limit 300s)")


# 3 ------------------------------------------------------------------------------


def test_criterion_3_trace_and_power_dominance():
    laws = [EntryDistribution.gaussian(), EntryDistribution.rademacher(),
            normalize_to_unit_second_moment(EntryDistribution.pareto(2.2))[1]]
    trace_viol = power_viol = route_mismatch = 0
    for s in range(50):
        a = sample_matrix(laws[s % 3], 50, seed=ex.trial_seed(3, s)).dense
        rho = float(np.abs(eigenvalues(a).eigenvalues).max())
        for k in range(2, 7):
            # rho^{2k-2} <= Tr((X*)^{k-1} X^{k-1}), compared in logs at relative 1e-9
            if (2 * k - 2) * math.log(rho) > log_trace_moment(a, k) + math.log1p(1e-9):
                trace_viol += 1
        for m in (1, 2, 4, 8):
            pm = np.linalg.matrix_power(a, m)
            svd_norm = float(np.linalg.norm(pm, 2))  # second route: SVD
            iter_norm = operator_norm_power(a, m).lower
            if abs(iter_norm - svd_norm) > 1e-8 * svd_norm:
                route_mismatch += 1
            if rho > min(iter_norm, svd_norm) ** (1 / m) * (1 + 1e-9):
                power_viol += 1
    ok = trace_viol == 0 and power_viol == 0 and route_mismatch == 0
    report("3", ok, f"50 matrices n=50: trace violations {trace_viol}, power violations {power_viol}, "
                    f"power-iteration vs SVD disagreements {route_mismatch}")


# 4 ------------------------------------------------------------------------------


def test_criterion_4_weight_identities():
    checked = viol = zero_roots = 0
    worst = 0.0
    laws = [EntryDistribution.gaussian(), EntryDistribution.sparse_toy(0.5, 0.5)]
    for s in range(20):
        n = 2 + s % 5
        a = sample_matrix(laws[s % 2], n, seed=ex.trial_seed(4, s)).dense
        for k in (1, 2, 3):
            for P in brute_even_closed_paths(n, k):
                direct = math.prod(abs(a[u - 1, v - 1]) for u, v in zip(P, P[1:]))
                G = dg.digraph_of_path(P)
                p = cs.digraph_weight(a, G)
                w = abs(cs.path_weight(a, P))
                errs = [abs(w - p) / max(p, 1e-300), abs(direct - p) / max(p, 1e-300)]
                root = (P[0], P[1])
                pr = cs.rooted_weight(a, dg.RootedMultiDigraph(G, root))
                xr = abs(a[root[0] - 1, root[1] - 1]) ** 2
                if xr != 0:
                    errs.append(abs(pr * xr - p) / max(p, 1e-300))
                else:
                    zero_roots += 1
                    errs.append(0.0 if math.isfinite(pr) else math.inf)
                e = max(errs)
                worst = max(worst, e)
                viol += e > 1e-12
                checked += 1
    ok = viol == 0 and zero_roots > 0
    report("4", ok, f"{checked} even closed paths on 20 matrices (n<=6, 2k<=6), {zero_roots} with X_root = 0; "
                    f"violations {viol}, worst relative error {worst:.2e} (limit 1e-12)")


# 5 ------------------------------------------------------------------------------


def test_criterion_5_event_Ak_frequency(tmp_path):
    t0 = time.perf_counter()
    eps, B = 0.5, 1.0
    lines, ok = [], True
    for name, d in (("sparse_toy", {"kind": "sparse_toy", "q": 0.3, "eps": eps}), ("rademacher", {"kind": "rademacher"})):
        law = EntryDistribution.from_dict(d)
        assert moment(law, 2).value <= 1 and moment(law, 2 + eps).value <= B
        c = ex.ExperimentConfig("ak_frequency", dist=d, n_values=[30, 60], k_values=[6, 8], trials=400,
                                eps=eps, B=B, seed=5, mc_trials=2000, output_dir=str(tmp_path / name))
        for row in ex.run(c).summary:
            good = row["frequency"] >= 1 - 6 / row["k"] - 3 * row["stderr"]
            ok &= good and row["trials"] >= 400
            lines.append(f"{name} (N={row['n']},k={row['k']}) P(A_k)={row['frequency']:.3f} "
                         f">= {1 - 6 / row['k']:.3f} - 3*{row['stderr']:.3f}")
    dt = time.perf_counter() - t0
    report("5", ok and dt < 600, "; ".join(lines) + f" ({dt:.0f}s, limit 600s)")


# 6 ------------------------------------------------------------------------------


def test_criterion_6_toy_phase(tmp_path):
    N, eps = 200, 0.5
    q = N ** -1.5
    c = ex.ExperimentConfig("toy_phase", n_values=[N], q_values=[q], eps=eps, trials=400, seed=6,
                            output_dir=str(tmp_path))
    r = ex.run(c)
    row = r.summary[0]
    acyclic = [rec for rec in r.records if not rec["has_cycle"]]
    acyclic_ok = all(rec["rho"] <= rec["threshold"] for rec in acyclic)
    ok = row["p_rho_positive"] <= 2 * q * N + 3 * row["stderr"] and acyclic_ok
    report("6", ok, f"N=200, q=N^-1.5: P(rho>0)={row['p_rho_positive']:.4f} <= 2qN + 3se = "
                    f"{2 * q * N:.4f} + {3 * row['stderr']:.4f}; {len(acyclic)} acyclic trials all below threshold: "
                    f"{acyclic_ok}")


# 7 ------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def figure1_run(tmp_path_factory):
    c = ex.ExperimentConfig("figure1", n_values=[1000], trials=20, alphas=[1.8, 2.2], seed=7,
                            output_dir=str(tmp_path_factory.mktemp("fig1")))
    t0 = time.perf_counter()
    r = ex.run(c)
    pilot = json.loads((GOLDEN / "figure1_pilot.json").read_text())
    return r, pilot, time.perf_counter() - t0


def test_criterion_7a_figure1_finite_variance(figure1_run):
    r, pilot, dt = figure1_run
    row = next(s for s in r.summary if s["alpha"] == 2.2)
    frac = row["frac_within_1p5_circle"]
    ok = frac >= 0.8 and row["m2_source"] == "analytic" and dt < 1200
    report("7a", ok, f"alpha=2.2 normalized, N=1000: max|lambda| <= 1.5 sqrt(N M2) in {frac:.0%} of 20 seeds "
                     f"(need >= 80%; pilot {pilot['alpha_2.2']['frac_within_1p5_circle']:.0%})")


def test_criterion_7b_figure1_infinite_variance(figure1_run):
    r, pilot, dt = figure1_run
    row = next(s for s in r.summary if s["alpha"] == 1.8)
    frac = row["frac_with_outlier"]
    ok = frac >= 0.8 and row["m2_source"] == "empirical" and dt < 1200
    report("7b", ok, f"alpha=1.8, N=1000: >= 1 eigenvalue outside the empirical circle in {frac:.0%} of 20 seeds "
                     f"(need >= 80%; pilot oracle observed {pilot['alpha_1.8']['frac_with_outlier']:.0%})")


# 8 ------------------------------------------------------------------------------


def test_criterion_8_convergence(tmp_path):
    c = ex.ExperimentConfig("convergence", dist={"kind": "rademacher"}, n_values=[100, 300, 1000], trials=20,
                            seed=8, output_dir=str(tmp_path))
    r = ex.run(c)
    means = [s["rho_over_sqrt_n_mean"] for s in r.summary]
    stds = [s["rho_over_sqrt_n_std"] for s in r.summary]
    mono = ex.monotone_within_stddev(means, stds)
    ok = 0.95 <= means[-1] <= 1.10 and mono
    report("8", ok, "mean rho/sqrt(N) " + ", ".join(f"N={n}: {m:.4f}+-{s:.4f}" for n, m, s in
                                                   zip(c.n_values, means, stds))
           + f"; final in [0.95, 1.10]; monotone within one stddev: {mono}")


# 9 ------------------------------------------------------------------------------


def _csvs(directory: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(directory.glob("*.csv"))}


def test_criterion_9_determinism(tmp_path):
    runs = [
        dict(experiment="figure1", n_values=[80], trials=2),
        dict(experiment="convergence", n_values=[30, 60], trials=3),
        dict(experiment="toy_phase", n_values=[60], trials=20),
        dict(experiment="ak_frequency", n_values=[20], k_values=[4], trials=5, mc_trials=500),
        dict(experiment="lemma_suite", max_k=2, max_N=3),
    ]
    diffs = []
    for spec in runs:
        outs = []
        for rep in ("a", "b"):
            d = tmp_path / f"{spec['experiment']}_{rep}"
            ex.run(ex.ExperimentConfig(output_dir=str(d), seed=9, **spec))
            outs.append(_csvs(d))
        if outs[0] != outs[1] or not outs[0]:
            diffs.append(spec["experiment"])
    report("9", not diffs, f"{len(runs)} experiments rerun with identical config and seed; "
                           f"byte-identical CSVs except: {diffs or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
