import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from activeforecast.active import (
    AEWAF,
    AGF,
    REWAF,
    RGF,
    ActiveState,
    QueryPolicy,
    active_predict,
    active_step,
    aewaf_condition,
    agf_condition,
    run_active,
    run_active_on_predictions,
)
from activeforecast.core import SparseVector
from activeforecast.experts import ExpertKind, ExpertPool, LinearExpert
from activeforecast.forecasters import ForecasterState, ewaf_predict, gf_predict, run_forecaster, update_losses

from conftest import random_stream


def fresh(losses, eta=1.0, delta=0.2):
    s = ActiveState.initial(len(losses), eta, delta)
    s.queried_losses[:] = losses
    return s


def never_called():
    raise AssertionError("oracle consulted on a skipped round")


class TestConditions:
    def test_aewaf_examples(self):
        assert aewaf_condition([0.3, 0.45, 0.4], 0.2)
        assert not aewaf_condition([0.0, 1.0], 0.2)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=8))
    def test_aewaf_full_tolerance_always_skips(self, preds):
        assert aewaf_condition(preds, 1.0)

    def test_aewaf_tie_skips(self):
        assert aewaf_condition([0.25, 0.5], 0.25)

    def test_agf_examples(self):
        assert agf_condition([0.5, 0.5], 0.5, 0.0)
        assert not agf_condition([0.2, 0.8], 0.5, 0.2)
        assert agf_condition([0.45, 0.55], 0.5, 0.1)


class TestActivePredict:
    def test_uniform_aewaf(self):
        assert active_predict(fresh([0, 0]), [0.2, 0.8], AEWAF) == pytest.approx((0.5, 0.5))

    def test_symmetric_agf(self):
        assert active_predict(fresh([0, 0]), [1.0, 0.0], AGF) == pytest.approx((0.5, 0.5))

    @pytest.mark.parametrize("eta", [0.05, 1.0, 4.0])
    def test_halved_weight(self, eta):
        p_hat, p_bar = active_predict(fresh([0, math.log(2) / eta], eta), [1.0, 0.0], AEWAF)
        assert p_hat == pytest.approx(2 / 3, abs=1e-12)
        assert p_bar == p_hat

    def test_uses_queried_losses_only(self):
        s = fresh([0.0, 3.0])
        s.skipped_losses[:] = [50.0, 0.0]
        expected = ewaf_predict(ForecasterState(1.0, np.array([0.0, 3.0])), [0.9, 0.1])
        assert active_predict(s, [0.9, 0.1], AEWAF)[0] == expected

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            active_predict(fresh([0, 0]), [0.5], AEWAF)


class TestQueryPolicy:
    def test_rho_required_for_random(self):
        with pytest.raises(ValueError):
            QueryPolicy(REWAF)

    def test_rho_forbidden_for_active(self):
        with pytest.raises(ValueError):
            QueryPolicy(AEWAF, rho=0.5)

    def test_rho_range(self):
        with pytest.raises(ValueError):
            QueryPolicy(RGF, rho=1.5, rng_seed=0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            QueryPolicy("EWAF")


class TestActiveStep:
    def test_full_tolerance_never_queries(self, rng):
        s = ActiveState.initial(3, 0.5, 1.0)
        for f in rng.uniform(0, 1, (20, 3)):
            _, queried, _ = active_step(s, f, QueryPolicy(AEWAF), never_called)
            assert not queried
        np.testing.assert_array_equal(s.queried_losses, np.zeros(3))
        assert s.query_count == 0 and s.decisions == [False] * 20

    def test_zero_tolerance_queries_on_disagreement(self):
        s = ActiveState.initial(2, 0.5, 0.0)
        p, queried, _ = active_step(s, [0.3, 0.9], QueryPolicy(AEWAF), lambda: 1)
        assert queried and p == pytest.approx(0.6)
        np.testing.assert_allclose(s.queried_losses, [0.7, 0.1])
        assert s.query_count == 1 and s.decisions == [True]

    def test_oracle_called_once(self):
        calls = []
        s = ActiveState.initial(2, 0.5, 0.0)
        active_step(s, [0.0, 1.0], QueryPolicy(AGF), lambda: calls.append(1) or 0)
        assert calls == [1]

    def test_oracle_failure_propagates(self):
        def broken():
            raise RuntimeError("network down")

        with pytest.raises(RuntimeError):
            active_step(ActiveState.initial(2, 0.5, 0.0), [0.0, 1.0], QueryPolicy(AEWAF), broken)

    def test_random_policy_needs_generator(self):
        with pytest.raises(ValueError):
            active_step(ActiveState.initial(2, 0.5, 0.0), [0.0, 1.0], QueryPolicy(REWAF, 0.5, 1), lambda: 0)

    @pytest.mark.parametrize("kind", [REWAF, RGF])
    def test_certain_querying_recovers_full_losses(self, kind, rng):
        F, y = random_stream(rng, 200, 4)
        tr = run_active_on_predictions(F, y, QueryPolicy(kind, 1.0, 3), 0.2, 0.0)
        assert tr.query_count == 200
        s = ForecasterState.initial(4, 0.2)
        for t in range(200):
            update_losses(s, F[t], int(y[t]))
        np.testing.assert_array_equal(tr.queried_losses, s.cum_losses)


class TestRunActive:
    def test_empty_stream(self):
        pool = ExpertPool([LinearExpert(np.zeros(2), ExpertKind.PA)] * 2)
        tr = run_active(pool, [], QueryPolicy(AEWAF), 0.5, 0.2)
        assert tr.T == 0 and tr.query_count == 0 and tr.forecaster_loss == 0.0

    def test_agreeing_experts_never_query(self, rng):
        w = np.array([0.3, -0.2])
        pool = ExpertPool([LinearExpert(w.copy(), k) for k in ExpertKind])
        stream = [(SparseVector.from_dense(rng.normal(size=2)), int(rng.integers(0, 2))) for _ in range(50)]
        tr = run_active(pool, stream, QueryPolicy(AEWAF), 0.5, 0.0)
        assert tr.query_count == 0
        for t, (x, _) in enumerate(stream):
            assert tr.predictions[t] == pytest.approx(pool[0].predict(x), abs=1e-15)

    def test_run_active_matches_precomputed(self, rng):
        pool = ExpertPool([LinearExpert(rng.normal(size=3), k) for k in ExpertKind])
        stream = [(SparseVector.from_dense(rng.normal(size=3)), int(rng.integers(0, 2))) for _ in range(40)]
        a = run_active(pool, stream, QueryPolicy(AGF), 0.4, 0.1)
        F = pool.prediction_matrix([x for x, _ in stream])
        b = run_active_on_predictions(F, [y for _, y in stream], QueryPolicy(AGF), 0.4, 0.1)
        np.testing.assert_array_equal(a.predictions, b.predictions)


@pytest.mark.parametrize("kind, full", [(AEWAF, "EWAF"), (AGF, "GF")])
def test_always_query_equivalence(kind, full, rng):
    F, y = random_stream(rng, 300, 5)
    tr = run_active_on_predictions(F, y, QueryPolicy(kind), 0.3, -1.0)
    ref = run_forecaster(full, F, y, 0.3)
    assert tr.query_count == 300
    assert np.array_equal(tr.predictions, ref.predictions)
    assert tr.forecaster_loss == ref.forecaster_loss


@pytest.mark.parametrize("kind", [AEWAF, AGF])
def test_shadow_gap_and_accounting(kind, rng):
    for _ in range(10):
        F, y = random_stream(rng, 200, 4, agreement=0.7)
        delta = float(rng.uniform(0.05, 0.4))
        eta = float(rng.uniform(0.05, 1.0))
        state = ActiveState.initial(4, eta, delta)
        shadow = ForecasterState.initial(4, eta)
        policy = QueryPolicy(kind)
        for t in range(200):
            if kind == AEWAF:
                p_full = ewaf_predict(shadow, F[t])
            else:
                p_full = gf_predict(shadow, F[t])[0]
            p_hat, queried, _ = active_step(state, F[t], policy, lambda: int(y[t]))
            if not queried:
                assert abs(p_full - p_hat) <= delta + 1e-9
                state.skipped_losses += np.abs(F[t] - y[t])
            update_losses(shadow, F[t], int(y[t]))
            np.testing.assert_allclose(state.queried_losses + state.skipped_losses, shadow.cum_losses, atol=1e-12)


def test_query_count_non_increasing_in_delta(rng):
    F, y = random_stream(rng, 400, 5)
    counts = [
        run_active_on_predictions(F, y, QueryPolicy(AEWAF), 0.2, d).query_count
        for d in np.linspace(0, 1, 21)
    ]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[-1] == 0


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9])
def test_bernoulli_query_ratio(rho, rng):
    T = 20000
    F, y = random_stream(rng, T, 2)
    tr = run_active_on_predictions(F, y, QueryPolicy(REWAF, rho, 11), 0.05, 0.0)
    assert abs(tr.query_ratio - rho) <= 4 * math.sqrt(rho * (1 - rho) / T)


@pytest.mark.parametrize("kind", [AEWAF, AGF, REWAF, RGF])
def test_deterministic(kind, rng):
    F, y = random_stream(rng, 300, 3)
    policy = QueryPolicy(kind, 0.4, 5) if kind in (REWAF, RGF) else QueryPolicy(kind)
    a = run_active_on_predictions(F, y, policy, 0.3, 0.15)
    b = run_active_on_predictions(F, y, policy, 0.3, 0.15)
    assert np.array_equal(a.predictions, b.predictions)
    assert np.array_equal(a.queried, b.queried)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 1))
def test_state_invariants(seed, delta):
    rng = np.random.default_rng(seed)
    F, y = random_stream(rng, 60, 3)
    tr = run_active_on_predictions(F, y, QueryPolicy(AGF), 0.5, delta)
    assert tr.query_count == int(tr.queried.sum())
    assert np.all(tr.queried_losses <= tr.query_count + 1e-12)
    np.testing.assert_allclose(tr.queried_losses + tr.skipped_losses, tr.expert_losses, atol=1e-12)
