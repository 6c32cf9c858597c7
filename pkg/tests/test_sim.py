import math

import numpy as np
import pytest

from pushwalk.asymptotics import AsymptoticRegime, normal_approx_y
from pushwalk.errors import CensoredError, ConfigError, DomainError
from pushwalk.exact import hitting_time_survival, pull_distribution, pull_failure_probability, y_distribution
from pushwalk.model import MIX_FUNCTION, NetworkConfig
from pushwalk.rounds import resolve_level
from pushwalk.sim import (
    CENSORED,
    SimConfig,
    default_threads,
    ks_critical_value,
    normality_diagnostics,
    run_monte_carlo,
    simulate_round_chain,
)


def report_fingerprint(rep):
    parts = [rep.y.tobytes(), rep.trajectory_mean.tobytes()]
    for table in (rep.tau, rep.nu):
        for lam in sorted(table):
            parts.append(table[lam].tobytes())
    return b"".join(parts)


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(algorithm="gossip"), dict(replications=0), dict(seed=-1), dict(seed=2**64),
        dict(levels=(0.0,)), dict(levels=(1.2,)), dict(max_rounds=0), dict(track_rounds=0),
        dict(track_rounds=5, max_rounds=4),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            SimConfig(NetworkConfig(10, 2, 1), **kw)

    def test_thresholds(self):
        sc = SimConfig(NetworkConfig(10, 2, 1), levels=(0.25, 1.0))
        assert sc.thresholds == (3, 10)

    def test_default_threads(self, monkeypatch):
        monkeypatch.delenv("PUSHWALK_THREADS", raising=False)
        assert default_threads() == 1
        monkeypatch.setenv("PUSHWALK_THREADS", "3")
        assert default_threads() == 3
        monkeypatch.setenv("PUSHWALK_THREADS", "zero")
        with pytest.raises(ConfigError):
            default_threads()


class TestReplication:
    def test_forced_first_round(self):
        sc = SimConfig(NetworkConfig(3, 1, 1), replications=50, seed=9)
        rep = run_monte_carlo(sc)
        assert np.all(rep.y == 1)
        assert rep.trajectory_mean.tolist() == [1.0, 2.0]

    def test_bad_index(self):
        with pytest.raises(DomainError):
            simulate_round_chain(SimConfig(NetworkConfig(4, 2, 1)), -1)

    def test_single_replication_report(self):
        sc = SimConfig(NetworkConfig(50, 5, 2), replications=1, seed=123, levels=(0.5,))
        res = simulate_round_chain(sc, 0)
        rep = run_monte_carlo(sc)
        assert rep.y.tolist() == [res.y]
        assert rep.tau[0.5].tolist() == [res.tau[0]] and rep.nu[0.5].tolist() == [res.nu[0]]

    def test_frozen_push_run(self):
        rep = run_monte_carlo(SimConfig(NetworkConfig(50, 5, 2), "push", 20, 123, (0.5, 0.9), 100, 3))
        assert rep.y.tolist() == [9, 9, 8, 7, 10, 8, 9, 8, 7, 9, 9, 9, 9, 8, 7, 7, 9, 10, 8, 9]
        assert rep.tau[0.5].tolist() == [22, 19, 20, 17, 22, 23, 22, 17, 24, 22, 18, 19, 18, 23, 21, 24,
                                         16, 18, 19, 17]
        assert rep.nu[0.9].tolist() == [3, 4, 4, 3, 4, 4, 4, 4, 4, 4, 3, 3, 3, 4, 3, 4, 3, 4, 4, 4]

    def test_frozen_pull_run(self):
        rep = run_monte_carlo(SimConfig(NetworkConfig(50, 5, 2), "pull", 10, 123, (0.5, 0.9), 100, 3))
        assert rep.y.tolist() == [10, 9, 7, 4, 7, 6, 12, 9, 11, 11]
        assert rep.nu[0.9].tolist() == [3, 3, 4, 3, 3, 4, 3, 3, 3, 3]
        assert 0.5 not in rep.tau

    def test_deterministic_and_thread_invariant(self):
        sc = SimConfig(NetworkConfig(200, 10, 3), "push", 300, 77, (0.3, 0.95), 200, 4)
        base = report_fingerprint(run_monte_carlo(sc, threads=1))
        assert report_fingerprint(run_monte_carlo(sc, threads=1)) == base
        assert report_fingerprint(run_monte_carlo(sc, threads=4)) == base
        other = report_fingerprint(run_monte_carlo(SimConfig(sc.cfg, "push", 300, 78, sc.levels, 200, 4)))
        assert other != base

    def test_within_round_threshold_and_unreachable_tau(self):
        # threshold above n - k can only be reached through I, never through S
        sc = SimConfig(NetworkConfig(20, 10, 2), replications=30, seed=1, levels=(1.0,))
        rep = run_monte_carlo(sc, keep_replications=True)
        assert 1.0 not in rep.tau
        assert all(r.tau == (None,) for r in rep.replications)
        assert np.all(rep.nu[1.0] >= 1)

    def test_selection_count_bounds(self):
        cfg = NetworkConfig(300, 3, 3)
        lams = tuple(j / 300 for j in range(4, 298))
        rep = run_monte_carlo(SimConfig(cfg, "push", 40, 5, lams, 500, 1), keep_replications=True)
        thresholds = np.array([resolve_level(x, 300) for x in lams])
        for res in rep.replications:
            tau = np.array(res.tau)
            assert np.all(tau != CENSORED) and np.all(tau <= res.selections)
            assert np.all(np.diff(tau) >= 0)
            # S moves by at most c per selection
            assert np.all(tau >= np.ceil(thresholds / cfg.c))
            step = cfg.c
            assert np.all(tau[step:] >= tau[:-step] + 1)

    def test_trajectory(self):
        sc = SimConfig(NetworkConfig(100, 2, 2), replications=50, seed=3, track_rounds=12, max_rounds=12)
        rep = run_monte_carlo(sc, keep_replications=True)
        for res in rep.replications:
            assert res.trajectory[0] == 2 and np.all(np.diff(res.trajectory) >= 0)
            # round m performs I_{m-1} selections, so I_m <= (c + 1) I_{m-1}
            assert np.all(res.trajectory[1:] <= 3 * res.trajectory[:-1])
            assert res.trajectory[-1] == 100

    def test_censoring_is_recorded(self):
        sc = SimConfig(NetworkConfig(1000, 1, 1), replications=5, seed=0, levels=(1.0,), max_rounds=2)
        rep = run_monte_carlo(sc)
        assert rep.censored == 5 and np.all(rep.nu[1.0] == CENSORED)
        with pytest.raises(CensoredError):
            rep.require_uncensored()

    @pytest.mark.parametrize("algorithm", ["push", "pull"])
    def test_no_censoring_with_generous_budget(self, algorithm):
        cfg = NetworkConfig(2000, 20, 2)
        reg = AsymptoticRegime.from_config(cfg)
        lams = (0.3, 0.8, 1 - 1 / cfg.n)
        budget = 10 * max(reg.nu_bar(x) for x in lams) + 50
        rep = run_monte_carlo(SimConfig(cfg, algorithm, 200, 11, lams, budget, 1))
        assert rep.require_uncensored().censored == 0

    def test_summary_stamps(self):
        rep = run_monte_carlo(SimConfig(NetworkConfig(30, 3, 2), replications=10, levels=(0.5,)))
        summary = rep.summary()
        assert summary["replications"] == 10 and summary["levels"][0]["threshold"] == 15
        assert rep.mix_function == MIX_FUNCTION and rep.version


class TestStatistics:
    @pytest.mark.slow
    def test_small_case_probability(self):
        R = 10**6
        rep = run_monte_carlo(SimConfig(NetworkConfig(4, 2, 1), replications=R, seed=2024))
        p = 1 / 9
        assert abs(np.mean(rep.y == 0) - p) <= 4 * math.sqrt(p * (1 - p) / R)

    @pytest.mark.slow
    def test_empirical_pmf_total_variation(self):
        R = 10**6
        cfg = NetworkConfig(50, 20, 2)
        rep = run_monte_carlo(SimConfig(cfg, replications=R, seed=99))
        exact = y_distribution(cfg)
        assert rep.y_pmf.tv(exact) <= 5 * math.sqrt(len(exact) / R)

    def test_pull_matches_binomial(self):
        R = 20000
        cfg = NetworkConfig(300, 30, 2)
        rep = run_monte_carlo(SimConfig(cfg, "pull", R, seed=5))
        m = cfg.susceptible
        p = 1 - pull_failure_probability(cfg.n, cfg.k, cfg.c)
        mean, var = m * p, m * p * (1 - p)
        assert abs(rep.y_mean - mean) <= 4 * math.sqrt(var / R)
        # standard error of the sample variance: sqrt((mu4 - var^2) / R)
        law = pull_distribution(cfg)
        mu4 = float(sum(law(y) * (y - mean) ** 4 for y in law.support))
        assert abs(rep.y_var - var) <= 4 * math.sqrt((mu4 - var * var) / R)

    def test_tau_matches_exact_law(self):
        cfg = NetworkConfig(5000, 200, 5)
        reg = AsymptoticRegime.from_config(cfg)
        lam = reg.gamma(reg.round_time)
        R = 5000
        rep = run_monte_carlo(SimConfig(cfg, replications=R, seed=31, levels=(lam,)))
        tau = rep.tau[lam]
        surv = hitting_time_survival(cfg, resolve_level(lam, cfg.n))
        support = np.arange(tau.min(), tau.max() + 1)
        exact_cdf = 1 - surv[support]
        emp_cdf = np.searchsorted(np.sort(tau), support, side="right") / R
        assert np.max(np.abs(emp_cdf - exact_cdf)) < ks_critical_value(R, 0.01)

    def test_y_variance_near_normal_approx(self):
        cfg = NetworkConfig(5000, 200, 5)
        rep = run_monte_carlo(SimConfig(cfg, replications=10**4, seed=8))
        mean, var = normal_approx_y(cfg)
        d = normality_diagnostics(rep.y, mean, var)
        assert 0.9 <= d.variance_ratio <= 1.1

    def test_nu_inside_first_fluid_round(self):
        cfg = NetworkConfig(100_000, 1000, 3)
        rep = run_monte_carlo(SimConfig(cfg, replications=200, seed=4, levels=(0.02,)))
        assert np.mean(rep.nu[0.02] == 1) >= 0.99


class TestNormalityDiagnostics:
    def test_self_consistency(self):
        rng = np.random.default_rng(12)
        passes = 0
        trials = 300
        for _ in range(trials):
            d = normality_diagnostics(rng.normal(2.0, 3.0, 400), 2.0, 9.0)
            passes += d.ks_statistic < d.ks_critical(0.01)
        # expected 297; 3 SE below that
        assert passes >= trials * 0.99 - 3 * math.sqrt(trials * 0.01 * 0.99)

    def test_fields(self):
        x = np.concatenate([np.full(50, -1.0), np.full(50, 1.0)])
        d = normality_diagnostics(x, 0.0, 1.0)
        assert d.standardized_mean == pytest.approx(0.0) and d.variance_ratio == pytest.approx(100 / 99)
        assert d.size == 100 and d.ks_statistic == pytest.approx(0.5 - 0.1587, abs=1e-3)

    def test_needs_samples(self):
        with pytest.raises(DomainError):
            normality_diagnostics(np.zeros(99), 0.0, 1.0)
        with pytest.raises(DomainError):
            normality_diagnostics(np.zeros(200), 0.0, 0.0)
