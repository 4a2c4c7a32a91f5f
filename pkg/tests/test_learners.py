import math

import numpy as np
import pytest

from srastream.gmm import (
    GmmParams,
    SuffStats,
    expected_suffstats,
    population_suffstats,
)
from srastream.learners import (
    IemGmmLearner,
    SdemGmmLearner,
    SemGmmLearner,
    SgdL2Learner,
    SraGmmLearner,
    SgdL2Learner as _SgdAlias,  # noqa: F401  (import sanity)
    init_params_from_window,
    make_gmm_learner,
)
from srastream.sa import ConstantRho, InvTRho, SaState, SraConfig
from srastream.streams import generate, benchmark_synthetic_spec


def unit_gaussian():
    return GmmParams(np.array([1.0]), np.array([[0.0]]), np.array([[[1.0]]]))


class TestInitFromWindow:
    def test_single_component_moments(self):
        p = init_params_from_window([[1.0], [3.0]], 1)
        assert p.means.ravel() == pytest.approx([2.0])
        assert p.covariances.ravel() == pytest.approx([1.0], rel=1e-3)

    def test_two_components_split_sorted(self):
        p = init_params_from_window([[0.0], [0.1], [5.0], [5.1]], 2)
        assert sorted(p.means.ravel()) == pytest.approx([0.05, 5.05])
        assert p.weights == pytest.approx([0.5, 0.5])

    def test_uniform_mode_range_and_determinism(self):
        window = np.array([[2.0], [8.0], [4.0]])
        a = init_params_from_window(window, 2, mode="uniform", seed=9)
        b = init_params_from_window(window, 2, mode="uniform", seed=9)
        np.testing.assert_array_equal(a.means, b.means)
        assert np.all(a.means >= 2.0) and np.all(a.means <= 8.0)

    def test_empty_window_errors(self):
        with pytest.raises(ValueError):
            init_params_from_window(np.empty((0, 1)), 1)

    def test_window_shorter_than_k_errors(self):
        with pytest.raises(ValueError):
            init_params_from_window([[1.0]], 2)

    def test_unknown_mode_errors(self):
        with pytest.raises(ValueError):
            init_params_from_window([[1.0], [2.0]], 1, mode="bogus")

    def test_contaminated_window_trimmed(self):
        # one absurd point must not poison the moment matching
        window = [[0.5], [0.52], [0.48], [-0.5], [-0.52], [-0.48], [0.49],
                  [-0.51], [0.51], [-15.0]]
        p = init_params_from_window(window, 2)
        assert np.all(np.abs(p.means) < 1.0)
        assert np.all(p.covariances < 1.0)


class TestSraLearner:
    def hand_learner(self, gamma=10.0, rho=0.1):
        cfg = SraConfig(gamma=gamma, rho_schedule=ConstantRho(rho))
        learner = SraGmmLearner(unit_gaussian(), cfg)
        # moment-matched start: flattened statistics are (1, 0, 1)
        np.testing.assert_array_equal(learner.state.theta, [1.0, 0.0, 1.0])
        return learner

    def test_hand_step(self):
        learner = self.hand_learner()
        rep = learner.step(1.0)
        assert not rep.truncated
        np.testing.assert_allclose(learner.state.theta, [1.0, 0.1, 1.0], atol=1e-15)
        assert learner.model.means.ravel() == pytest.approx([0.1])
        assert rep.score == pytest.approx(0.5 * math.log(2 * math.pi) + 0.5)

    def test_truncation_freezes_everything(self):
        learner = self.hand_learner(gamma=1.0)
        before_theta = learner.state.theta.tobytes()
        before_means = learner.model.means.tobytes()
        rep = learner.step(50.0)  # |H| ~ 2500, way over
        assert rep.truncated
        assert learner.state.theta.tobytes() == before_theta
        assert learner.model.means.tobytes() == before_means
        assert learner.state.dropped_count == 1
        assert np.isfinite(rep.score)

    def test_kept_update_is_convex_combination(self):
        rng = np.random.default_rng(2)
        cfg = SraConfig(gamma=50.0, rho_schedule=ConstantRho(0.3))
        learner = SraGmmLearner(unit_gaussian(), cfg)
        for _ in range(50):
            y = rng.normal()
            prev = learner.state.theta.copy()
            sbar = expected_suffstats(learner.model, y).flatten()
            learner.step(y)
            expected = prev - 0.3 * (prev - sbar)
            np.testing.assert_allclose(learner.state.theta, expected, atol=1e-12)
            # coordinate-wise between the endpoints
            lo = np.minimum(prev, sbar) - 1e-12
            hi = np.maximum(prev, sbar) + 1e-12
            assert np.all(learner.state.theta >= lo)
            assert np.all(learner.state.theta <= hi)

    def test_score_uses_pre_update_model(self):
        learner = self.hand_learner()
        before = learner.model
        rep = learner.step(2.0)
        from srastream.gmm import log_density

        assert rep.score == pytest.approx(-log_density(before, 2.0))


class TestReductions:
    def test_sem_equals_sra_with_infinite_gamma(self):
        st = generate(benchmark_synthetic_spec(seed=4))
        y = st.y[:2000]
        r = 0.01
        p0 = init_params_from_window(y[:10], 2)
        sra = SraGmmLearner(
            p0, SraConfig(gamma=math.inf, rho_schedule=ConstantRho(r))
        )
        sem = SemGmmLearner(init_params_from_window(y[:10], 2), r)
        for yi in y:
            sra.step(yi)
            sem.step(yi)
            assert sra.state.theta.tobytes() == sem.state.theta.tobytes()
        assert sra.model.means.tobytes() == sem.model.means.tobytes()

    def test_iem_equals_sra_with_inv_t_schedule(self):
        st = generate(benchmark_synthetic_spec(seed=8))
        y = st.y[:2000]
        prior = 10
        p0 = init_params_from_window(y[:10], 2)
        sra = SraGmmLearner(
            p0, SraConfig(gamma=math.inf, rho_schedule=InvTRho(offset=prior))
        )
        iem = IemGmmLearner(init_params_from_window(y[:10], 2), prior_count=prior)
        for yi in y:
            sra.step(yi)
            iem.step(yi)
            assert sra.state.theta.tobytes() == iem.state.theta.tobytes()


class TestIem:
    def test_first_step_replaces_stats(self):
        # pure running average: the first step lands exactly on the
        # per-observation statistics, whose implied variance is zero, so the
        # parameter update must flag the degeneracy
        from srastream.gmm import DegenerateComponentError

        learner = IemGmmLearner(unit_gaussian())
        with pytest.raises(DegenerateComponentError):
            learner.step(2.0)
        np.testing.assert_allclose(learner.state.theta, [1.0, 2.0, 4.0], atol=1e-15)

    def test_midpoint_at_t2(self):
        learner = IemGmmLearner(unit_gaussian())
        learner.state = SaState(np.array([1.0, 0.0, 1.0]), t=1)
        learner.step(2.0)  # sbar = (1, 2, 4), rho = 1/2
        np.testing.assert_allclose(learner.state.theta, [1.0, 1.0, 2.5], atol=1e-15)

    def test_running_average_induction(self):
        rng = np.random.default_rng(12)
        learner = IemGmmLearner(unit_gaussian(), prior_count=1)
        init = learner.state.theta.copy()
        sbars = [init]
        for _ in range(200):
            y = rng.normal()
            sbars.append(expected_suffstats(learner.model, y).flatten())
            learner.step(y)
            np.testing.assert_allclose(
                learner.state.theta, np.mean(sbars, axis=0), atol=1e-12
            )


class TestSdem:
    def test_r_zero_is_plain_sums(self):
        from srastream.gmm import responsibilities
        from srastream.learners import SDEM_SMOOTHING

        rng = np.random.default_rng(3)
        learner = SdemGmmLearner(unit_gaussian(), 0.0)
        counts = learner.counts.copy()
        first = learner.first.copy()
        second = learner.second.copy()
        for _ in range(50):
            y = rng.normal()
            r = responsibilities(learner.model, np.atleast_1d(y))
            r = (1 - SDEM_SMOOTHING) * r + SDEM_SMOOTHING / learner.model.K
            counts = counts + r
            first = first + r[:, None] * np.atleast_1d(y)[None, :]
            second = second + r[:, None, None] * np.outer(y, y)[None]
            learner.step(y)
            np.testing.assert_allclose(learner.counts, counts, atol=1e-12)
            np.testing.assert_allclose(learner.first, first, atol=1e-12)
            np.testing.assert_allclose(learner.second, second, atol=1e-12)

    def test_stationary_convergence(self):
        rng = np.random.default_rng(21)
        T = 10_000
        mu, sigma = 1.3, 0.5
        y = rng.normal(mu, sigma, T)
        learner = SdemGmmLearner(
            GmmParams(np.array([1.0]), np.array([[0.0]]), np.array([[[1.0]]])),
            r=0.001,
        )
        for yi in y:
            learner.step(yi)
        # effective sample size of the discounted average is ~1/r
        se = sigma / math.sqrt(1.0 / 0.001)
        assert abs(learner.model.means[0, 0] - mu) < 3 * se

    def test_window_seeding(self):
        window = np.array([[0.4], [0.6], [-0.4], [-0.6]])
        learner = SdemGmmLearner(
            init_params_from_window(window, 2), 0.01, window=window
        )
        assert learner.counts.sum() == pytest.approx(
            sum((1 - 0.01) ** i for i in range(4)), abs=1e-9
        )

    def test_r_range_checked(self):
        with pytest.raises(ValueError):
            SdemGmmLearner(unit_gaussian(), 1.0)


class TestSgdL2:
    def quad_grad(self, a):
        return lambda theta, y: theta - a

    def test_plain_sgd_reduction(self):
        cfg = SraConfig(gamma=math.inf, rho_schedule=ConstantRho(0.1))
        learner = SgdL2Learner(
            np.zeros(2), cfg, self.quad_grad(np.array([1.0, 2.0])), weight_decay=0.0
        )
        learner.step(None)
        np.testing.assert_allclose(learner.theta, [0.1, 0.2])

    def test_fixed_point_with_decay(self):
        a = np.array([2.0])
        lam = 0.5
        cfg = SraConfig(gamma=math.inf, rho_schedule=ConstantRho(0.1))
        learner = SgdL2Learner(
            np.zeros(1), cfg, self.quad_grad(a), weight_decay=lam
        )
        prev_err = abs(learner.theta[0] - a[0] / (1 + lam))
        for _ in range(200):
            learner.step(None)
            err = abs(learner.theta[0] - a[0] / (1 + lam))
            assert err <= prev_err + 1e-15
            prev_err = err
        assert learner.theta[0] == pytest.approx(2.0 / 1.5, abs=1e-8)

    def test_truncation_freezes_theta(self):
        cfg = SraConfig(gamma=1.0, rho_schedule=ConstantRho(0.1))
        learner = SgdL2Learner(
            np.array([100.0]), cfg, self.quad_grad(np.array([0.0])), weight_decay=0.0
        )
        rep = learner.step(None)  # gradient 100 > gamma
        assert rep.truncated
        assert learner.theta[0] == 100.0

    def test_loss_hook_scores(self):
        cfg = SraConfig(gamma=math.inf, rho_schedule=ConstantRho(0.1))
        learner = SgdL2Learner(
            np.array([3.0]), cfg, self.quad_grad(np.array([0.0])),
            loss_fn=lambda theta, y: 0.5 * float(theta @ theta),
        )
        rep = learner.step(None)
        assert rep.score == pytest.approx(4.5)


class TestFactory:
    def test_dispatch(self):
        p = unit_gaussian()
        cfg = SraConfig(gamma=1.0, rho_schedule=ConstantRho(0.1))
        assert isinstance(make_gmm_learner("sra", p, config=cfg), SraGmmLearner)
        assert isinstance(make_gmm_learner("sem", p, r=0.1), SemGmmLearner)
        assert isinstance(make_gmm_learner("iem", p), IemGmmLearner)
        assert isinstance(make_gmm_learner("sdem", p, r=0.1), SdemGmmLearner)

    def test_missing_arguments(self):
        p = unit_gaussian()
        with pytest.raises(ValueError):
            make_gmm_learner("sra", p)
        with pytest.raises(ValueError):
            make_gmm_learner("sem", p)
        with pytest.raises(ValueError):
            make_gmm_learner("nope", p)

    def test_iem_window_sets_prior(self):
        p = unit_gaussian()
        learner = make_gmm_learner("iem", p, window=np.zeros((10, 1)))
        assert learner.prior_count == 10
