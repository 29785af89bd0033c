import numpy as np
import pytest

from fpulyap.dynamics.integrator import IntegratorConfig
from fpulyap.lyapunov.benettin import BenettinConfig, BenettinRun, benettin_run, sampling_grid
from fpulyap.models.chain import TangentState
from fpulyap.models.presets import make_preset
from fpulyap.sampling.sampler import SamplerConfig, sample_state


def test_sampling_grid_is_geometric_and_ends_at_last_step():
    grid = sampling_grid(100_000, 50)
    assert grid[0] == 1 and grid[-1] == 100_000
    assert np.all(np.diff(grid) > 0)
    # ~50 points per decade once steps are no longer crowded by rounding
    assert 45 <= np.count_nonzero((grid > 10_000) & (grid <= 100_000)) <= 51
    np.testing.assert_array_equal(sampling_grid(1), [1])
    assert sampling_grid(0).size == 0


def test_linear_chain_exponent_decays_like_one_over_t():
    m = make_preset("linear", 8)
    x0 = sample_state(m, 8, SamplerConfig(eps=1e-2), index=0)
    series = benettin_run(m, x0, IntegratorConfig(dt=0.1), t_max=2e3, rng=np.random.default_rng(0))
    assert np.all(np.isfinite(series.chi_hat))
    # the harmonic tangent flow only rotates in mode space, so log|xi| stays bounded
    assert np.max(np.abs(series.times * series.chi_hat)) < 2.0
    assert abs(series.chi_hat[-1]) < 1e-3


def test_renormalization_period_does_not_change_values():
    m = make_preset("pure-beta", 8)
    x0 = sample_state(m, 8, SamplerConfig(eps=0.1), index=1)
    xi0 = TangentState.random_unit(m.n_particles, np.random.default_rng(2))
    runs = [
        benettin_run(m, x0, IntegratorConfig(dt=0.1), t_max=300.0, renorm_every=k, xi0=xi0, points_per_decade=10)
        for k in (10, 100, 1000)
    ]
    for other in runs[1:]:
        np.testing.assert_array_equal(other.times, runs[0].times)
        np.testing.assert_allclose(other.chi_hat, runs[0].chi_hat, rtol=1e-9, atol=1e-12)


def test_chi_hat_matches_log_norm_definition():
    m = make_preset("alpha-beta", 8)
    x0 = sample_state(m, 8, SamplerConfig(eps=0.05), index=0)
    xi0 = TangentState.random_unit(m.n_particles, np.random.default_rng(3))
    run = BenettinRun(m, x0, xi0, IntegratorConfig(dt=0.1), n_steps=250, config=BenettinConfig(renorm_every=100))
    run.advance()
    expected = (run.log_accum + np.log(run.prop.tangent_norm())) / run.t
    assert run.series().chi_hat[-1] == pytest.approx(expected, rel=1e-14)
    assert run.series().times[-1] == pytest.approx(25.0)


def test_snapshot_restore_continues_bitwise():
    m = make_preset("var-alpha-a", 8, seed=1)
    x0 = sample_state(m, 8, SamplerConfig(eps=0.05), index=0)
    xi0 = TangentState.random_unit(m.n_particles, np.random.default_rng(4))
    cfg = BenettinConfig(renorm_every=7, points_per_decade=20)
    whole = BenettinRun(m, x0, xi0, IntegratorConfig(dt=0.1), 1000, cfg)
    whole.advance()

    part = BenettinRun(m, x0, xi0, IntegratorConfig(dt=0.1), 1000, cfg)
    part.advance(333)
    resumed = BenettinRun.restore(m, IntegratorConfig(dt=0.1), 1000, cfg, part.snapshot())
    resumed.advance()
    assert resumed.series().chi_hat.tobytes() == whole.series().chi_hat.tobytes()


def test_initial_direction_needs_seed_or_vector():
    m = make_preset("pure-beta", 8)
    x0 = sample_state(m, 8, SamplerConfig(eps=0.05), index=0)
    with pytest.raises(ValueError):
        benettin_run(m, x0, IntegratorConfig(), t_max=10.0)
    with pytest.raises(ValueError):
        BenettinRun(m, x0, TangentState(np.zeros(7), np.zeros(7)), IntegratorConfig(), 10)


@pytest.mark.slow
def test_exponent_forgets_initial_direction():
    m = make_preset("pure-beta", 16)
    x0 = sample_state(m, 16, SamplerConfig(eps=1.0), index=0)
    a = benettin_run(m, x0, IntegratorConfig(dt=0.1), 1e4, rng=np.random.default_rng(10), points_per_decade=10)
    b = benettin_run(m, x0, IntegratorConfig(dt=0.1), 1e4, rng=np.random.default_rng(11), points_per_decade=10)
    assert a.chi_hat[-1] > 0
    assert b.chi_hat[-1] == pytest.approx(a.chi_hat[-1], rel=0.01)
