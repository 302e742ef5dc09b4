import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontier_bench.dataframe import Dataset, default_catalog
from frontier_bench.diagnostics import (AMBIGUOUS, MATCH, MISMATCH, correlation_matrix, gini,
                                        gini_from_counts_csv, jacobi_eigh, pca, productivity,
                                        sign_check, vif)
from frontier_bench.errors import CatalogError, DataError
from frontier_bench.regress import RegressionResult, RegressionSpec, Term

from oracles import charpoly_eigenvalues, gini_pairs, two_pass_corr, vif_from_correlation


def frame(M, names=None):
    M = np.asarray(M, float)
    names = names or [f"v{j}" for j in range(M.shape[1])]
    return Dataset(tuple(f"D{i}" for i in range(M.shape[0])),
                   {n: M[:, j] for j, n in enumerate(names)}), names


# ---- correlation -------------------------------------------------------

def test_correlation_examples():
    ds, names = frame([[1, 2, 6], [2, 4, 5], [3, 6, 4], [4, 8, 1]])
    R = correlation_matrix(ds, names).matrix
    assert R[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diag(R) == 1.0)
    assert R[0, 2] < -0.9
    with pytest.raises(DataError, match="zero-variance"):
        correlation_matrix(frame([[1, 1], [2, 1]])[0], ["v0", "v1"])


@pytest.mark.parametrize("seed", range(5))
def test_correlation_matches_two_pass(seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(20, 4)) @ rng.normal(size=(4, 4))
    ds, names = frame(M)
    np.testing.assert_allclose(correlation_matrix(ds, names).matrix, two_pass_corr(M), atol=1e-12)


def test_correlation_affine_invariance():
    rng = np.random.default_rng(9)
    M = rng.normal(size=(15, 3))
    base = correlation_matrix(*frame(M)).matrix
    moved = correlation_matrix(*frame(M * [3.0, 0.01, 50.0] + [1e3, -7.0, 0.5])).matrix
    np.testing.assert_allclose(moved, base, atol=1e-12)


def test_ranked_pairs_order(tmp_path):
    ds, names = frame([[1, 2, 0], [2, 4.5, 1], [3, 5, 0], [4, 8, 1]])
    cm = correlation_matrix(ds, names)
    r = [abs(p[2]) for p in cm.ranked_pairs()]
    assert r == sorted(r, reverse=True)
    cm.write_csv(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == ",v0,v1,v2"


# ---- VIF ---------------------------------------------------------------

def test_orthogonal_regressors_have_unit_vif():
    a = np.array([1.0, -1.0, 1.0, -1.0])
    b = np.array([1.0, 1.0, -1.0, -1.0])
    ds, names = frame(np.column_stack([a, b]))
    assert all(abs(v - 1.0) <= 1e-9 for v in vif(ds, names).values)


def test_exact_collinearity_gives_inf():
    rng = np.random.default_rng(0)
    a, c = rng.normal(size=10), rng.normal(size=10)
    ds, names = frame(np.column_stack([a, 3 * a + 1, c]))
    rep = vif(ds, names)
    assert rep.collinear == ["v0", "v1"]
    assert math.isfinite(rep["v2"])
    assert rep.to_dict()["values"]["v0"] == "inf"


@pytest.mark.parametrize("seed", range(5))
def test_vif_matches_correlation_definition(seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(30, 4)) @ rng.uniform(-1, 1, (4, 4))
    ds, names = frame(M)
    np.testing.assert_allclose(vif(ds, names).values, vif_from_correlation(M), rtol=1e-8)


def test_vif_scale_invariance_and_threshold():
    rng = np.random.default_rng(4)
    a = rng.normal(size=40)
    M = np.column_stack([a, a + rng.normal(0, 0.05, 40), rng.normal(size=40)])
    ds, names = frame(M)
    base = vif(ds, names)
    assert base.flagged == ["v0", "v1"]
    scaled = vif(frame(M * [1e4, 1e-3, 7.0])[0], names)
    np.testing.assert_allclose(scaled.values, base.values, rtol=1e-8)
    with pytest.raises(DataError):
        vif(ds, ["v0"])


# ---- PCA ---------------------------------------------------------------

def test_rank_one_pca_explains_everything():
    t = np.arange(1.0, 9.0)
    ds, names = frame(np.column_stack([t, 2 * t, -t + 3]))
    res = pca(ds, names)
    assert abs(res.shares[0] - 1.0) <= 1e-8
    assert res.retained == 1


def test_identity_correlation_pca():
    ds, names = frame([[1, 1], [1, -1], [-1, 1], [-1, -1]])
    res = pca(ds, names, retain=2)
    np.testing.assert_allclose(res.eigenvalues, [1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(res.shares, [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_pca_eigenvalues_match_charpoly(seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(25, 5)) @ rng.normal(size=(5, 5))
    ds, names = frame(M)
    res = pca(ds, names)
    np.testing.assert_allclose(res.eigenvalues, charpoly_eigenvalues(two_pass_corr(M)), atol=1e-8)
    V = res.loadings
    np.testing.assert_allclose(V.T @ V, np.eye(5), atol=1e-10)
    for j in range(5):
        assert V[np.argmax(np.abs(V[:, j])), j] > 0


def test_pca_permutation_invariance_of_spectrum():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(20, 4)) @ rng.normal(size=(4, 4))
    a = pca(*frame(M))
    perm = [2, 0, 3, 1]
    b = pca(*frame(M[:, perm]))
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)


def test_pca_retain_rules():
    rng = np.random.default_rng(1)
    ds, names = frame(rng.normal(size=(30, 4)))
    res = pca(ds, names, retain=0.8)
    cum = np.cumsum(res.shares)
    assert cum[res.retained - 1] >= 0.8 - 1e-12
    assert res.retained == 1 or cum[res.retained - 2] < 0.8
    assert pca(ds, names, retain=3).retained == 3
    assert res.scores.shape == (30, res.retained)
    for bad in (0, 5, 1.5, 0.0):
        with pytest.raises(DataError):
            pca(ds, names, retain=bad)


def test_jacobi_reconstructs_matrix():
    rng = np.random.default_rng(6)
    B = rng.normal(size=(6, 6))
    A = B + B.T
    w, V = jacobi_eigh(A)
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)


# ---- Gini --------------------------------------------------------------

def test_gini_closed_forms():
    assert gini([3, 3, 3, 3]) == 0.0
    assert gini([0, 0, 0, 12]) == 0.75
    assert gini([5]) == 0.0
    for bad in ([], [1, -1], [0, 0]):
        with pytest.raises(DataError):
            gini(bad)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0, max_value=1e6, allow_nan=False), min_size=1, max_size=30)
       .filter(lambda v: sum(v) > 1e-6),
       st.floats(min_value=1e-3, max_value=1e3), st.randoms(use_true_random=False))
def test_gini_properties(values, scale, rnd):
    g = gini(values)
    n = len(values)
    assert g == pytest.approx(gini_pairs(values), abs=1e-12)
    assert -1e-15 <= g <= (n - 1) / n + 1e-12
    assert gini([v * scale for v in values]) == pytest.approx(g, abs=1e-12)
    perm = list(values)
    rnd.shuffle(perm)
    assert gini(perm) == pytest.approx(g, abs=1e-12)


def test_gini_counts_csv(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("dmu_id,w1,w2,w3,w4\nA,3,3,3,3\nB,0,0,0,12\n")
    values, periods = gini_from_counts_csv(p)
    assert values == {"A": 0.0, "B": 0.75}
    assert periods == 4
    p.write_text("dmu_id,w1\nA,x\n")
    with pytest.raises(DataError, match="non-numeric"):
        gini_from_counts_csv(p)
    p.write_text("dmu_id,w1\nA,1\nA,2\n")
    with pytest.raises(DataError, match="duplicate"):
        gini_from_counts_csv(p)


# ---- sign check and productivity ---------------------------------------

def fake_result(terms):
    spec = RegressionSpec("DEA", tuple(n for n, _ in terms))
    return RegressionResult(spec, (Term("INT", 1.0, 0.1, 0.0),)
                            + tuple(Term(n, c, 0.1, 0.5) for n, c in terms),
                            log_lik=0.0, aic=0.0, n=38, n_params=len(terms) + 1)


def test_sign_check_statuses():
    check = sign_check(fake_result([("GINI", -3.069), ("RES", -0.003), ("DELATM", 0.2)]),
                       default_catalog())
    assert check.status("GINI") == MATCH
    assert check.status("RES") == MISMATCH
    assert check.status("DELATM") == AMBIGUOUS
    assert check.mismatches == ["RES"]
    with pytest.raises(CatalogError):
        sign_check(fake_result([("NOPE", 1.0)]), default_catalog())


def test_productivity():
    np.testing.assert_allclose(productivity([10.0, 3.0], [5.0, 2.0]), [2.0, 1.5])
    with pytest.raises(DataError):
        productivity([1.0], [0.0])
    with pytest.raises(DataError):
        productivity([1.0, 2.0], [1.0])
