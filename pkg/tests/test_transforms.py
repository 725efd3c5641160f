import numpy as np
import pytest
from numpy.polynomial import polynomial as P

import specgap as sg
from specgap import transforms as tf
from conftest import random_graph


# --- scalar maps ------------------------------------------------------------

def test_negexp_at_zero():
    assert sg.scalar_map(tf.exact_neg_exp(), 0.0) == -1.0


def test_limit_hits_zero_at_ell():
    assert sg.scalar_map(tf.neg_exp_limit(3), 3.0) == pytest.approx(0.0)


def test_limit_251_near_exact():
    got = sg.scalar_map(tf.neg_exp_limit(251), 2.0)
    assert abs(got - (-np.exp(-2))) < 1e-2


def test_log_domain_error():
    with pytest.raises(ValueError, match="positive"):
        sg.scalar_map(tf.exact_log(1e-6), -1.0)


def test_identity_map_passthrough():
    lam = np.linspace(0, 5, 11)
    np.testing.assert_allclose(sg.scalar_map(tf.identity(), lam), lam)


def test_limit_requires_odd_degree():
    with pytest.raises(ValueError, match="odd"):
        tf.neg_exp_limit(10)


def test_log_requires_positive_epsilon():
    with pytest.raises(ValueError, match="epsilon"):
        sg.SpectralTransform("log", epsilon=0.0)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown transform"):
        sg.SpectralTransform("chebyshev")


def test_monotone_on_spectrum_range():
    lam = np.linspace(-3.0, 12.0, 2001)
    vals = sg.scalar_map(tf.neg_exp_limit(11), lam)
    assert np.all(np.diff(vals) >= -1e-12)  # non-decreasing on all of R
    lam = np.linspace(0.0, 12.0, 2001)
    for t in (tf.exact_neg_exp(), tf.exact_log(1e-6)):
        vals = sg.scalar_map(t, lam)
        assert np.all(np.diff(vals) > 0)


def test_limit_vs_exact_agreement_window():
    lam = np.linspace(0.0, 12.0, 4001)
    diff = np.abs(sg.scalar_map(tf.neg_exp_limit(251), lam)
                  - sg.scalar_map(tf.exact_neg_exp(), lam))
    assert diff.max() <= 0.02


def test_polynomial_coefficients_match_scalar_map():
    lam = np.linspace(0.0, 1.5, 9)
    for t in (tf.identity(), tf.neg_exp_taylor(6), tf.neg_exp_limit(5),
              tf.log_taylor(7)):
        vals = P.polyval(lam, sg.polynomial_coefficients(t))
        np.testing.assert_allclose(vals, sg.scalar_map(t, lam), atol=1e-12)


def test_exact_kind_has_no_coefficients():
    with pytest.raises(ValueError, match="polynomial"):
        sg.polynomial_coefficients(tf.exact_log())


# --- dense exact transform --------------------------------------------------

def test_exact_dense_identity_roundtrip(two_triangles_bridge):
    L = sg.dense_laplacian(two_triangles_bridge)
    out = sg.exact_transform_dense(tf.identity(), L)
    np.testing.assert_allclose(out, L, atol=1e-10)


def test_exact_dense_negexp_spectrum(path2):
    out = sg.exact_transform_dense(tf.exact_neg_exp(), sg.dense_laplacian(path2))
    np.testing.assert_allclose(np.linalg.eigvalsh(out),
                               sorted([-1.0, -np.exp(-2)]), atol=1e-12)


def test_exact_dense_log_spectrum(k3):
    out = sg.exact_transform_dense(tf.exact_log(1e-6), sg.dense_laplacian(k3))
    expected = sorted([np.log(1e-6), np.log(3 + 1e-6), np.log(3 + 1e-6)])
    np.testing.assert_allclose(np.linalg.eigvalsh(out), expected, rtol=1e-9)


def test_exact_dense_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        sg.exact_transform_dense(tf.exact_neg_exp(),
                                 np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigenvector_preservation_random_graphs():
    rng = np.random.default_rng(99)
    for _ in range(5):
        g = random_graph(rng, int(rng.integers(5, 30)), weighted=True,
                         require_connected=True)
        L = sg.dense_laplacian(g)
        gt = sg.dense_eig(L)
        for t in (tf.exact_neg_exp(), tf.exact_log(1e-6)):
            ft = sg.dense_eig(sg.exact_transform_dense(t, L))
            # mapped spectrum keeps the eigenvalue ordering
            np.testing.assert_allclose(
                ft.eigenvalues, sg.scalar_map(t, gt.eigenvalues), rtol=1e-8,
                atol=1e-8)
            err = sg.subspace_error(ft.bottom(3), gt, k=3)
            assert err <= 1e-8


# --- reversal ----------------------------------------------------------------

def test_lambda_star_rules():
    assert sg.choose_lambda_star(tf.exact_neg_exp(), 17.0) == 0.0
    assert sg.choose_lambda_star(tf.neg_exp_limit(11), 17.0) == 0.0
    assert sg.choose_lambda_star(tf.identity(), 4.0) == pytest.approx(4.04)
    assert sg.choose_lambda_star(tf.exact_log(1e-6), 4.0) == \
        pytest.approx(np.log(4.000001) * 1.01)


def test_identity_reversal_on_ones(two_triangles_bridge):
    op = sg.make_reversed_operator(two_triangles_bridge, tf.identity())
    ones = np.ones(6)
    np.testing.assert_allclose(op.apply(ones), op.lambda_star * ones,
                               atol=1e-12)


def test_negexp_limit_matvec_matches_dense_oracle(k3):
    op = sg.make_reversed_operator(k3, tf.neg_exp_limit(251))
    dense = sg.exact_transform_dense(tf.exact_neg_exp(), sg.dense_laplacian(k3))
    v = np.random.default_rng(0).standard_normal(3)
    want = 0.0 * v - dense @ v
    got = op.apply(v)
    assert np.linalg.norm(got - want) / np.linalg.norm(want) <= 1e-2


def test_negexp_taylor_degree_zero(k3):
    op = sg.make_reversed_operator(k3, tf.neg_exp_taylor(0))
    v = np.random.default_rng(1).standard_normal(3)
    np.testing.assert_allclose(op.apply(v), op.lambda_star * v + v, atol=1e-12)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_taylor_matvec_matches_scalar_map(two_triangles_bridge):
    # polynomial Horner application agrees with the dense eigenvalue map
    # (the log series is outside its convergence radius here; the Horner
    # evaluation itself must still match the scalar polynomial)
    for t in (tf.neg_exp_taylor(9), tf.log_taylor(9, 0.5)):
        op = sg.make_reversed_operator(two_triangles_bridge, t)
        L = sg.dense_laplacian(two_triangles_bridge)
        gt = sg.dense_eig(L)
        fL = (gt.eigenvectors * sg.scalar_map(t, gt.eigenvalues)) @ gt.eigenvectors.T
        v = np.random.default_rng(2).standard_normal(6)
        np.testing.assert_allclose(op.apply(v), op.lambda_star * v - fL @ v,
                                   atol=1e-8)


def test_matvec_dimension_mismatch(k3):
    op = sg.make_reversed_operator(k3, tf.identity())
    with pytest.raises(ValueError, match="dimension"):
        op.apply(np.ones(4))


def test_exact_kind_without_dense_oracle(k3):
    lap = sg.build_laplacian(k3)
    op = sg.TransformedOperator(lap, tf.exact_neg_exp(), 0.0, 4.0, None)
    with pytest.raises(ValueError, match="dense"):
        op.apply(np.ones(3))


def test_log_taylor_divergence_warning(k3):
    # spectrum radius bound 4 >= 2 - eps: the series cannot converge
    with pytest.warns(RuntimeWarning, match="diverges"):
        sg.make_reversed_operator(k3, tf.log_taylor(11))


def test_reversed_top_k_is_bottom_k():
    rng = np.random.default_rng(21)
    for _ in range(5):
        g = random_graph(rng, int(rng.integers(4, 30)), weighted=True,
                         require_connected=True)
        gt = sg.graph_ground_truth(g)
        for t in (tf.identity(), tf.exact_neg_exp(), tf.exact_log(1e-6)):
            op = sg.make_reversed_operator(g, t)
            if t.is_exact:
                M = op.lambda_star * np.eye(g.n) - op.dense_f
            else:
                M = op.apply(np.eye(g.n))
            mt = sg.dense_eig(M)
            k = min(3, g.n - 1)
            top = mt.eigenvectors[:, ::-1][:, :k]
            assert sg.subspace_error(top, gt, k=k) <= 1e-7
