import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topocollab.corpus import PaperRecord, extract_ambiguous_cases
from topocollab.evaluate import (
    DegenerateCaseError,
    EvalConfig,
    OutOfFoldMemberships,
    accuracy,
    cross_validate,
    lambda_grid,
    lambda_sweep,
    prepare_case,
    splitting_error,
    stratified_folds,
    sweep_from_memberships,
)
from topocollab.synth import SynthSpec, generate_corpus


def test_accuracy_and_splitting_error():
    z = np.array([[8, 2], [1, 9]])
    assert accuracy(z) == pytest.approx(17 / 20)
    assert splitting_error(z, 2) == 0
    assert splitting_error(np.array([[5, 0, 0], [0, 3, 2]]), 2) == 2


def test_lambda_grid_inclusive():
    g = lambda_grid(0.01)
    assert len(g) == 101 and g[0] == 0.0 and g[-1] == 1.0
    with pytest.raises(ValueError):
        lambda_grid(0.3)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=60), st.integers(2, 10), st.integers(0, 1000))
def test_folds_balanced(y, k, seed):
    y = np.array(y)
    k = min(k, len(y))
    folds = stratified_folds(y, k, seed)
    sizes = np.bincount(folds, minlength=k)
    assert sizes.max() - sizes.min() <= 1
    for c in np.unique(y):
        per = np.bincount(folds[y == c], minlength=k)
        assert per.max() - per.min() <= 1
    assert (stratified_folds(y, k, seed) == folds).all()


def _oof(u_collab, u_topo, y):
    y = np.asarray(y)
    folds = np.arange(len(y)) % 2
    return OutOfFoldMemberships(np.asarray(u_collab, float), np.asarray(u_topo, float), y, folds, 2, ("a", "b"))


def test_sweep_picks_middle_of_longest_run():
    # collaborative right on rows 0,1; topological right on rows 2,3
    oof = _oof([[0.9, 0.1], [0.2, 0.8], [0.6, 0.4], [0.6, 0.4]],
               [[0.4, 0.6], [0.6, 0.4], [0.1, 0.9], [0.3, 0.7]], [0, 1, 1, 1])
    res = sweep_from_memberships("x", oof, lambda_grid(0.1))
    assert res.gamma_h_max >= max(res.gamma_c, res.gamma_t)
    assert res.lambda_star in res.tied_set
    lo, hi = res.tied_interval
    assert lo <= res.lambda_star <= hi


def test_sweep_all_tied_gives_half():
    oof = _oof([[0.9, 0.1], [0.1, 0.9]], [[0.8, 0.2], [0.3, 0.7]], [0, 1])
    res = sweep_from_memberships("x", oof, lambda_grid(0.01))
    assert res.tied_interval == (0.0, 1.0)
    assert res.lambda_star == 0.5


def test_score_rejects_out_of_range():
    with pytest.raises(ValueError):
        _oof([[1, 0]], [[1, 0]], [0]).score(-0.1)


def test_degenerate_case_detected(toy_corpus):
    corpus = toy_corpus + [PaperRecord("8", ("AA1", "AA9"), ("A9", "A99"))]
    (case,) = extract_ambiguous_cases(corpus)
    net, fm = prepare_case(corpus, case, EvalConfig())
    with pytest.raises(DegenerateCaseError):
        cross_validate(case, net, EvalConfig(), 0.5, 0, fm)


def test_toy_case_runs(toy_corpus):
    (case,) = extract_ambiguous_cases(toy_corpus)
    net, fm = prepare_case(toy_corpus, case, EvalConfig(kappa=1))
    res = lambda_sweep(case, net, EvalConfig(kappa=1), 0.1, 0, fm)
    assert res.n_folds == 4
    assert res.confusion.total == 4


def test_sweep_deterministic():
    corpus = generate_corpus(SynthSpec("shared-collaborators-distinct-topology"), seed=4)
    (case,) = extract_ambiguous_cases(corpus)
    cfg = EvalConfig()
    net, fm = prepare_case(corpus, case, cfg)
    a = lambda_sweep(case, net, cfg, seed=7, features=fm)
    b = lambda_sweep(case, net, cfg, seed=7, features=fm)
    assert (a.gamma_per_lambda == b.gamma_per_lambda).all()
    assert a.lambda_star == b.lambda_star


def test_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(kappa=0)
    with pytest.raises(ValueError):
        EvalConfig(m=1.0)


def test_accuracy_examples():
    assert accuracy(np.diag([5, 5])) == 1.0
    assert accuracy(np.array([[3, 1], [0, 4]])) == 7 / 8
    assert accuracy(np.array([[0, 2], [3, 0]])) == 0.0
    with pytest.raises(ValueError):
        accuracy(np.zeros((2, 2)))


@pytest.mark.parametrize("mode", ["disjoint-collaborators", "noise"])
def test_sweep_invariants(mode):
    corpus = generate_corpus(SynthSpec(mode), seed=2)
    (case,) = extract_ambiguous_cases(corpus)
    cfg = EvalConfig()
    net, fm = prepare_case(corpus, case, cfg)
    res = lambda_sweep(case, net, cfg, seed=2, features=fm)
    assert ((res.gamma_per_lambda >= 0) & (res.gamma_per_lambda <= 1)).all()
    assert res.lambda_star in res.tied_set
    assert res.gamma_h_max >= max(res.gamma_c, res.gamma_t) - 1e-12
    assert res.confusion.z.sum() == fm.n_rows and (res.confusion.z >= 0).all()
