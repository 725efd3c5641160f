"""End-to-end acceptance suite.

Each test prints one PASS/FAIL line (visible with ``pytest -s`` or in the
failure report).  Step sizes and step budgets were tuned once on the pinned
seeds and are fixed here; every run is deterministic.
"""

import contextlib

import numpy as np
import pytest
from scipy import stats

import specgap as sg
from specgap import transforms as tf
from specgap.cli import main
from specgap.metrics import _eigenspace_slices
from conftest import random_graph


@contextlib.contextmanager
def criterion(num: int, desc: str):
    try:
        yield
    except Exception:
        print(f"criterion {num:2d} [{desc}]: FAIL")
        raise
    print(f"criterion {num:2d} [{desc}]: PASS")


# --- shared fixtures (graphs and baseline runs reused across criteria) -------

@pytest.fixture(scope="module")
def clique_1000_5():
    g, _ = sg.gen_clique_clusters(sg.CliqueSpec(1000, 5, 25, 0))
    return g, sg.graph_ground_truth(g)


@pytest.fixture(scope="module")
def mdp_1_10():
    g = sg.gen_three_room_mdp(sg.MdpSpec(1, 10))
    return g, sg.graph_ground_truth(g)


def _steps_to_streak(g, gt, transform, solver, k, eta, steps, eval_every,
                     operator=None):
    cfg = sg.SolverConfig(solver=solver, k=k, eta=eta, steps=steps,
                          eval_every=eval_every, seed=11)
    run = sg.run_solver(g, transform, cfg, ground_truth=gt, operator=operator,
                        stop_on_targets=True, record_timing=False)
    return run.steps_to_streak


@pytest.fixture(scope="module")
def identity_oja_clique_steps(clique_1000_5):
    g, gt = clique_1000_5
    return _steps_to_streak(g, gt, tf.identity(), "oja", 5, eta=3.0,
                            steps=120_000, eval_every=500)


@pytest.fixture(scope="module")
def identity_oja_mdp_steps(mdp_1_10):
    g, gt = mdp_1_10
    return _steps_to_streak(g, gt, tf.identity(), "oja", 3, eta=8.0,
                            steps=200_000, eval_every=500)


# --- criterion 1 -------------------------------------------------------------

def test_criterion_01_chain_enumeration_oracle(path3, star4, k3,
                                               two_triangles_bridge):
    with criterion(1, "walk-sum enumeration equals dense Laplacian powers"):
        graphs = [path3, star4, k3, two_triangles_bridge]
        rng = np.random.default_rng(2024)
        for seed in range(5):
            graphs.append(random_graph(rng, int(rng.integers(3, 9)), p=0.6))
        cases = []
        for g in graphs:
            cases.append(g)
            wg = sg.Graph(g.n, g.u, g.v,
                          rng.uniform(0.2, 2.5, g.m))  # weighted twin
            cases.append(wg)
        for g in cases:
            dense = sg.dense_laplacian(g)
            for ell in (1, 2, 3, 4):
                exact = np.linalg.matrix_power(dense, ell)
                got = sg.enumerate_chains(g, ell)
                scale = max(1.0, float(np.linalg.norm(exact)))
                assert np.linalg.norm(got - exact) <= 1e-9 * scale


# --- criterion 2 -------------------------------------------------------------

def test_criterion_02_estimator_unbiasedness(path3, k3):
    with criterion(2, "importance estimator unbiased, error ~ 1/sqrt(N)"):
        for g in (path3, k3):
            v = np.random.default_rng(1234).standard_normal(3)
            exact = np.linalg.matrix_power(sg.dense_laplacian(g), 3) @ v
            means = np.array([
                sg.estimate_power_matvec(
                    g, 3, v, sg.SamplerConfig(3, 10_000, seed=1000 + b))
                for b in range(100)
            ])  # 10^6 walks total
            se = means.std(axis=0, ddof=1) / 10.0
            assert np.all(np.abs(means.mean(axis=0) - exact) <= 3 * se)

            sizes = [100, 1000, 10_000, 100_000, 1_000_000]
            errs = []
            for N in sizes:
                reps = [np.linalg.norm(
                    sg.estimate_power_matvec(
                        g, 3, v, sg.SamplerConfig(3, N, seed=77 * N + r))
                    - exact) for r in range(6)]
                errs.append(np.mean(reps))
            slope = np.polyfit(np.log10(sizes), np.log10(errs), 1)[0]
            assert -0.6 <= slope <= -0.4, f"slope {slope}"


# --- criterion 3 -------------------------------------------------------------

def test_criterion_03_rejection_uniformity(path3):
    with criterion(3, "rejection sampling is uniform over incidence walks"):
        inc = sg.edge_incidence_graph(path3)
        pm = sg.p_min(path3.m, sg.degree_bounds(path3).deg_star_inc, 2)
        rng = np.random.default_rng(31)
        counts: dict = {}
        accepted = 0
        trials = 100_000
        for _ in range(trials):
            w = sg.sample_walk(inc, 2, rng)
            if sg.rejection_filter(w, pm, rng):
                accepted += 1
                counts[w.edges] = counts.get(w.edges, 0) + 1
        assert len(counts) == 4  # all four incidence walks occur
        assert stats.chisquare(list(counts.values())).pvalue > 0.01
        chain_estimate = accepted / trials / pm
        assert abs(chain_estimate - 4.0) / 4.0 <= 0.05


# --- criterion 4 -------------------------------------------------------------

def _eigenspace_error(gt, ft, positions=3):
    groups = [grp for grp in _eigenspace_slices(gt.eigenvalues)
              if grp.start < positions]
    worst = 0.0
    for grp in groups:
        A = gt.eigenvectors[:, grp]
        B = ft.eigenvectors[:, grp]
        dim = grp.stop - grp.start
        worst = max(worst, 1.0 - np.linalg.norm(A.T @ B) ** 2 / dim)
    return worst


def test_criterion_04_eigenvector_preservation():
    with criterion(4, "exact -e^-L and log(L+eI) keep the bottom-3 eigenspaces"):
        rng = np.random.default_rng(404)
        for _ in range(20):
            g = random_graph(rng, int(rng.integers(5, 31)), p=0.45,
                             weighted=True, require_connected=True)
            L = sg.dense_laplacian(g)
            gt = sg.dense_eig(L)
            for t in (tf.exact_neg_exp(), tf.exact_log(1e-6)):
                ft = sg.dense_eig(sg.exact_transform_dense(t, L))
                assert _eigenspace_error(gt, ft) <= 1e-8


# --- criterion 5 -------------------------------------------------------------

def test_criterion_05_solver_correctness():
    with criterion(5, "both solvers solve the 60-node clique graph"):
        g, _ = sg.gen_clique_clusters(sg.CliqueSpec(60, 3, 25, 0))
        gt = sg.graph_ground_truth(g)
        for solver, eta in (("oja", 2.0), ("mu-eg", 0.04)):
            cfg = sg.SolverConfig(solver=solver, k=3, eta=eta, steps=50_000,
                                  eval_every=100, seed=11)
            run = sg.run_solver(g, tf.identity(), cfg, ground_truth=gt,
                                subspace_target=1e-3, stop_on_targets=True,
                                record_timing=False)
            assert run.steps_to_streak is not None, solver
            assert run.steps_to_streak <= 50_000
            assert run.steps_to_subspace is not None, solver
            assert run.records[-1].subspace_error <= 1e-3
            assert run.records[-1].streak == 3


# --- criteria 6 and 7 ---------------------------------------------------------
#
# Shared step size per (graph, solver) pair, tuned for the transformed run.
# The Oja baselines converge within the budget, giving a directly measured
# ratio.  The mu-eg baselines are unstable at any step size that lets the
# transformed operator move quickly (stability demands eta < 2 / spectral
# spread, and the raw Laplacian's spread is hundreds of times wider), so they
# are run against a capped budget and the criterion certifies a ratio lower
# bound from the cap.

@pytest.mark.slow
def test_criterion_06_series_transform_speedup(clique_1000_5, mdp_1_10,
                                               identity_oja_clique_steps,
                                               identity_oja_mdp_steps):
    with criterion(6, "negexp-limit(251) reaches streak-k >= 3x faster"):
        t251 = tf.neg_exp_limit(251)
        for (g, gt), k, oja_eta, mueg_eta, id_oja_steps in (
                (clique_1000_5, 5, 3.0, 1.0, identity_oja_clique_steps),
                (mdp_1_10, 3, 8.0, 2.0, identity_oja_mdp_steps)):
            op = sg.make_reversed_operator(g, t251)
            s_oja = _steps_to_streak(g, gt, t251, "oja", k, oja_eta,
                                     steps=20_000, eval_every=25, operator=op)
            assert s_oja is not None
            assert id_oja_steps is not None
            assert id_oja_steps >= 3 * s_oja, (id_oja_steps, s_oja)

            s_mueg = _steps_to_streak(g, gt, t251, "mu-eg", k, mueg_eta,
                                      steps=20_000, eval_every=25, operator=op)
            assert s_mueg is not None
            cap = 3 * s_mueg + 500
            id_mueg = _steps_to_streak(g, gt, tf.identity(), "mu-eg", k,
                                       mueg_eta, steps=cap, eval_every=25)
            assert id_mueg is None or id_mueg >= 3 * s_mueg, \
                (id_mueg, s_mueg)


@pytest.mark.slow
def test_criterion_07_exact_log_speedup(clique_1000_5, mdp_1_10,
                                        identity_oja_clique_steps,
                                        identity_oja_mdp_steps):
    with criterion(7, "exact matrix log reaches streak-k >= 10x faster"):
        tlog = tf.exact_log(1e-6)
        for (g, gt), k, oja_eta, id_oja_steps in (
                (clique_1000_5, 5, 3.0, identity_oja_clique_steps),
                (mdp_1_10, 3, 8.0, identity_oja_mdp_steps)):
            op = sg.make_reversed_operator(g, tlog)
            s_oja = _steps_to_streak(g, gt, tlog, "oja", k, oja_eta,
                                     steps=20_000, eval_every=25, operator=op)
            assert s_oja is not None
            assert id_oja_steps is not None
            assert id_oja_steps >= 10 * s_oja, (id_oja_steps, s_oja)

            s_mueg = _steps_to_streak(g, gt, tlog, "mu-eg", k, 0.1,
                                      steps=20_000, eval_every=25, operator=op)
            assert s_mueg is not None
            cap = 10 * s_mueg + 200
            id_mueg = _steps_to_streak(g, gt, tf.identity(), "mu-eg", k, 0.1,
                                       steps=cap, eval_every=25)
            assert id_mueg is None or id_mueg >= 10 * s_mueg, \
                (id_mueg, s_mueg)


# --- criterion 8 -------------------------------------------------------------

@pytest.mark.slow
def test_criterion_08_series_degree_failure_pattern():
    with criterion(8, "limit series fails below degree 251 on the 2-clique graph"):
        g, _ = sg.gen_clique_clusters(sg.CliqueSpec(1000, 2, 25, 1))
        gt = sg.graph_ground_truth(g)
        s251 = _steps_to_streak(g, gt, tf.neg_exp_limit(251), "oja", 2,
                                eta=1.0, steps=2000, eval_every=25)
        assert s251 is not None  # degree 251 covers the spectrum radius ~502
        budget = max(300, 4 * s251)
        success = {251: True}
        for ell in (11, 51, 151):
            s = _steps_to_streak(g, gt, tf.neg_exp_limit(ell), "oja", 2,
                                 eta=1.0, steps=budget, eval_every=25)
            success[ell] = s is not None
            assert s is None, f"degree {ell} unexpectedly reached streak 2"
        flags = [success[ell] for ell in (11, 51, 151, 251)]
        assert flags == sorted(flags)  # success is monotone in the degree


# --- criterion 9 -------------------------------------------------------------

def test_criterion_09_cheeger_inequality():
    with criterion(9, "lambda_2/2 <= rho <= sqrt(2 lambda_2), normalized"):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 50:
            n = int(rng.integers(4, 15))
            g = random_graph(rng, n, p=float(rng.uniform(0.2, 0.7)))
            if not g.is_connected():
                continue
            lam2 = sg.graph_ground_truth(g, "normalized").eigenvalues[1]
            rho, _ = sg.brute_force_rho(g)
            assert lam2 / 2 <= rho + 1e-12
            assert rho <= np.sqrt(2 * lam2) + 1e-12
            checked += 1


# --- criterion 10 ------------------------------------------------------------

@pytest.mark.slow
def test_criterion_10_end_to_end_clustering():
    with criterion(10, "solver embeddings give >= 0.95 k-means accuracy"):
        spec = sg.CliqueSpec(300, 3, 25, 0)
        _, labels = sg.gen_clique_clusters(spec)
        plain, _ = sg.gen_clique_clusters(spec)
        completed, _ = sg.degrade_and_complete(sg.LinkPredSpec(spec, 0.2, 7))
        for g in (plain, completed):
            cfg = sg.SolverConfig(solver="oja", k=3, eta=3.0, steps=600,
                                  eval_every=50, seed=11)
            run = sg.run_solver(g, tf.neg_exp_limit(251), cfg,
                                stop_on_targets=True, record_timing=False)
            pred = sg.kmeans_cluster(run.V, 3, seed=5)
            assert sg.cluster_accuracy(pred, labels) >= 0.95


# --- criterion 11 ------------------------------------------------------------

def test_criterion_11_byte_identical_reruns(tmp_path):
    with criterion(11, "same seed reproduces byte-identical CSV output"):
        solve_args = ["solve", "--graph", "clique:n=40,k=2,seed=9",
                      "--transform", "negexp-limit", "--degree", "11",
                      "--k", "2", "--eta", "1.0", "--steps", "400",
                      "--eval-every", "50", "--seed", "17",
                      "--batch-size", "64", "--timing", "off"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(solve_args + ["--out", str(a)]) == 0
        assert main(solve_args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

        suite = tmp_path / "suite.txt"
        suite.write_text(
            "name = base\ngraph = clique:n=30,k=3,seed=2,shortcircuit=2\n"
            "transform = identity\nsolver = oja\nk = 3\neta = 2.0\n"
            "steps = 6000\neval_every = 50\nseed = 5\n\n"
            "name = dilated\ngraph = clique:n=30,k=3,seed=2,shortcircuit=2\n"
            "transform = negexp-limit\ndegree = 51\nsolver = oja\nk = 3\n"
            "eta = 2.0\nsteps = 6000\neval_every = 50\nseed = 5\n")
        s1, s2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        assert main(["benchmark", "--suite", str(suite), "--out", str(s1)]) == 0
        assert main(["benchmark", "--suite", str(suite), "--out", str(s2)]) == 0
        assert s1.read_bytes() == s2.read_bytes()

        v = np.random.default_rng(3).standard_normal(4)
        g = sg.Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        est1 = sg.estimate_power_matvec(
            g, 3, v, sg.SamplerConfig(3, 40_000, n_walkers=1, seed=23))
        est2 = sg.estimate_power_matvec(
            g, 3, v, sg.SamplerConfig(3, 40_000, n_walkers=8, seed=23))
        assert np.array_equal(est1, est2)
