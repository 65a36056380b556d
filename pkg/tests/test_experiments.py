import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpm_lab import experiments as ex


def test_worker_count(monkeypatch):
    monkeypatch.delenv("RPM_LAB_THREADS", raising=False)
    assert ex.worker_count() == 1
    monkeypatch.setenv("RPM_LAB_THREADS", "3")
    assert ex.worker_count() == 3
    assert ex.worker_count(2) == 2
    assert ex.worker_count(0) == 1


def test_sample_unbiased():
    assert ex.sample_unbiased(1, 0)[1] == 1
    word, k = ex.sample_unbiased(20_000, 1)
    freq = np.array([word.count(x) for x in "BbRr"]) / len(word)
    assert np.abs(freq - 0.25).max() < 0.02
    ks = [ex.sample_unbiased(10, s)[1] for s in range(2000)]
    assert set(ks) == set(range(1, 11))
    with pytest.raises(ValueError):
        ex.sample_unbiased(0, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        ex.TrialConfig(n=0)
    with pytest.raises(ValueError):
        ex.TrialConfig(trials=0)


def test_tables_are_reproducible_and_independent_of_workers():
    cfg = ex.TrialConfig(n=300, trials=40, seed=7)
    a = ex.verify_degree_tail(cfg)
    b = ex.verify_degree_tail(ex.TrialConfig(n=300, trials=40, seed=7, workers=2))
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() != ex.verify_degree_tail(ex.TrialConfig(n=300, trials=40, seed=8)).to_csv()


def test_boundary_table_logs_the_bound():
    cfg = ex.TrialConfig(n=500, trials=50)
    table = ex.verify_boundary_tail(cfg)
    assert table.notes["bound_dominates"] == 50
    assert table.columns == ["t", "empirical", "bound", "sigma", "lower", "upper", "passed"]


def test_degree_bound_at_zero():
    assert ex.degree_bound(0) == 2
    assert ex.boundary_bound(0) == 2


def test_tail_rows():
    rows = ex.tail_rows(np.array([0, 1, 2, 3]), [0, 2, 4], lambda x: 0.5, "m")
    assert [r["empirical"] for r in rows] == [1.0, 0.5, 0.0]
    assert [r["passed"] for r in rows] == [False, True, True]


def test_pooled_tv():
    assert ex.pooled_tv(list("aaaaabbbbb"), list("aaaaabbbbb")) == 0
    assert ex.pooled_tv(list("aaaaa"), list("bbbbb")) == 1
    # rare codes fall into one pooled bin
    assert ex.pooled_tv(list("xyz"), list("uvw")) == 0


@settings(max_examples=50)
@given(st.lists(st.sampled_from("abc"), min_size=1, max_size=30),
       st.lists(st.sampled_from("abc"), min_size=1, max_size=30))
def test_pooled_tv_is_a_distance(x, y):
    d = ex.pooled_tv(x, y, min_count=1)
    assert 0 <= d <= 1
    assert d == pytest.approx(ex.pooled_tv(y, x, min_count=1))


def test_local_convergence_small_run():
    table = ex.verify_local_convergence(1, (10, 100), 400, 40, m0=100, max_doublings=1)
    assert [r["n"] for r in table.rows] == [10, 100]
    assert table.notes["ladder"] == (100, 200, 400)
    assert len(table.notes["stability_by_m"]) == 2
    again = ex.verify_local_convergence(1, (10, 100), 400, 40, m0=100, max_doublings=1)
    assert again.to_csv() == table.to_csv()


def test_radius_zero_ball_is_always_the_same():
    table = ex.verify_local_convergence(0, (10, 100), 200, 10, m0=50, max_doublings=0)
    assert all(r["tv"] == 0 for r in table.rows) and table.passed


def test_truncation_must_cover_n():
    with pytest.raises(ValueError):
        ex.verify_local_convergence(1, (10, 1000), 100, 5)


def test_local_trial_limit_matches_a_deep_ladder_rung():
    codes, limit, rungs = ex.local_trial(((10,), 1, 800, (200, 400, 800), 3, 0))
    assert limit == rungs[-1]


def test_root_choice():
    table = ex.verify_root_choice(200, 400, seed=1)
    assert table.rows[0]["p_value"] > 1e-3 and table.passed


def test_eq12_small():
    table = ex.verify_eq12(max_len=2, random_pairs=20, random_len=10)
    assert table.passed
    assert table.rows[0]["pairs"] == 20 * 21


def test_root_distance_table_shape():
    cfg = ex.TrialConfig(trials=30, n_list=(20, 200))
    table = ex.verify_root_distance(cfg)
    assert {r["k"] for r in table.rows} == {0, 1, 2, "M_n"}
