import numpy as np
import pandas as pd
import pytest

from fpulyap.harness import runner
from fpulyap.harness.checkpoint import checkpoint_read
from fpulyap.harness.config import ExperimentConfig
from fpulyap.harness.storage import point_dir, read_csv, write_json
from fpulyap.lyapunov.benettin import sampling_grid
from fpulyap.lyapunov.crossover import crossover_model
from fpulyap.lyapunov.ensemble import reduce_ensemble
from fpulyap.utils.errors import FitError
from tests.fixtures.results import make_summary


def _tiny(tmp_path, **kw):
    base = dict(
        model="pure-beta",
        N=[8],
        eps=[0.05],
        dt=0.1,
        t_max=100.0,
        ensemble=2,
        seed=9,
        renorm_every=10,
        points_per_decade=10,
        out=str(tmp_path),
        checkpoint_interval=0.0,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_t_max_rules(tmp_path):
    cfg = _tiny(tmp_path, t_max=None)
    model = cfg.build_model(8)
    assert runner.resolve_t_max(cfg.model_copy(update={"t_max": 5e4}), model, 0.05, 0.1) == (5e4, "explicit", None)
    assert runner.resolve_t_max(cfg.model_copy(update={"expected_chi": 1e-3}), model, 0.05, 0.1) == (1e6, "expected_chi", 1e-3)
    assert runner.resolve_t_max(cfg.model_copy(update={"expected_chi": 1e-7}), model, 0.05, 0.1)[0] == 1e8

    t_max, rule, chi = runner.resolve_t_max(cfg.model_copy(update={"t_max_floor": 1e3}), model, 0.01, 0.1)
    assert rule == "asymptotic"
    assert chi == pytest.approx(4.5e-4, rel=1e-12)
    assert t_max == pytest.approx(200 / 4.5e-4, rel=1e-12)


@pytest.mark.parametrize("name", ["toda", "linear"])
def test_t_max_falls_back_to_pilot(tmp_path, name):
    cfg = _tiny(tmp_path, model=name, t_max=None, pilot_t=20.0)
    t_max, rule, _ = runner.resolve_t_max(cfg, cfg.build_model(8), 0.05, 0.1)
    assert rule.startswith("pilot")
    assert 1e6 <= t_max <= 1e8


def test_error_floor_guard_and_lookup():
    assert runner.error_floor_guard(1e-5, 1e-6)
    assert not runner.error_floor_guard(4e-6, 1e-6)
    assert runner.error_floor_guard(4e-6, 1e-6, factor=2.0)
    table = pd.DataFrame({"N": [256, 256], "eps": [8e-4, 8e-4], "dt": [0.05, 0.1], "floor": [1e-8, 2e-7]})
    assert runner.lookup_floor(table, 256, 8e-4, 0.1) == 2e-7
    assert runner.lookup_floor(table, 256, 8e-4, 0.2) is None
    assert runner.lookup_floor(None, 256, 8e-4, 0.1) is None


def test_completed_point_is_not_recomputed(tmp_path, monkeypatch):
    cfg = _tiny(tmp_path)
    first = runner.run_point(cfg, 8, 0.05)
    assert first.n == 2 and first.t_max == pytest.approx(100.0)

    def boom(*args, **kwargs):
        raise AssertionError("recomputed a finished point")

    monkeypatch.setattr(runner, "new_trajectory", boom)
    assert runner.run_point(cfg, 8, 0.05) == first


def test_interrupted_point_resumes_byte_identically(tmp_path, monkeypatch):
    monkeypatch.setattr(runner, "CHUNK_STEPS", 100)
    original = runner._advance_chunk
    calls = {"n": 0}

    def flaky(run):
        calls["n"] += 1
        if calls["n"] == 4:
            raise RuntimeError("interrupted")
        original(run)

    cfg = _tiny(tmp_path / "resumed")
    monkeypatch.setattr(runner, "_advance_chunk", flaky)
    with pytest.raises(RuntimeError):
        runner.run_point(cfg, 8, 0.05)
    out = point_dir(cfg.out, cfg.model, 8, 0.05)
    _, meta = checkpoint_read(out / "checkpoints" / "traj_0000.npz")
    assert meta["done"] is False
    assert meta["steps"] == 300

    monkeypatch.setattr(runner, "_advance_chunk", original)
    runner.run_point(cfg.model_copy(update={"resume": True}), 8, 0.05)
    ref_cfg = _tiny(tmp_path / "reference")
    runner.run_point(ref_cfg, 8, 0.05)
    ref = point_dir(ref_cfg.out, ref_cfg.model, 8, 0.05)
    for name in ("series.csv", "ensemble.csv", "summary.json"):
        assert (out / name).read_bytes() == (ref / name).read_bytes()


def test_sweep_covers_the_grid_in_order(tmp_path):
    cfg = _tiny(tmp_path, eps=[0.05, 0.02], t_max=20.0)
    summaries = runner.sweep(cfg)
    assert [(s.N, s.eps) for s in summaries] == [(8, 0.05), (8, 0.02)]
    assert isinstance(runner.any_flagged(summaries), bool)


def test_sweep_resolves_the_step_per_eps(tmp_path):
    cfg = _tiny(tmp_path, model="gamma-T", eps=[5e-4, 0.05], dt=None, t_max=20.0)
    summaries = runner.sweep(cfg)
    assert [s.dt for s in summaries] == [0.05, 0.1]


def test_fit_results_over_stored_summaries(tmp_path):
    for n in (64, 128):
        for eps in (1e-3, 1e-2, 1e-1):
            s = make_summary(n, eps, plateau=4.5 * eps**2)
            write_json(point_dir(tmp_path, "pure-beta", n, eps) / "summary.json", s.model_dump(mode="json"))
    df = runner.fit_results(tmp_path)
    assert df["N"].tolist() == [64, 128]
    assert df["a"].tolist() == pytest.approx([2.0, 2.0], rel=1e-10)
    assert df["C"].tolist() == pytest.approx([4.5, 4.5], rel=1e-10)
    assert read_csv(tmp_path / "fit.csv").shape[0] == 2
    assert not (tmp_path / "fit_logN.csv").exists()


def test_fit_results_needs_converged_points(tmp_path):
    with pytest.raises(FitError):
        runner.fit_results(tmp_path)


def test_theory_table_rows(tmp_path):
    cfg = _tiny(tmp_path, N=[16], eps=[1e-3, 1e-2])
    df = runner.theory_table(cfg)
    assert len(df) == 4
    assert set(df["regime"]) == {"full_van_kampen", "small_eps_asymptotic"}
    asym = df[df["regime"] == "small_eps_asymptotic"]
    assert asym["chi_theory"].tolist() == pytest.approx([4.5e-6, 4.5e-4], rel=1e-12)
    assert (tmp_path / "pure-beta" / "N16_theory.csv").exists()


def test_curve_diagnostics():
    t = sampling_grid(5_000_000) * 10.0
    curve = crossover_model(1e-2, 10.0, 2e-5, t)
    result = reduce_ensemble(t, np.vstack([curve * 0.99, curve * 1.01]))
    slope, chi = runner.curve_diagnostics(result)
    assert result.plateau_found
    assert abs(slope) < 0.05
    assert chi == pytest.approx(2e-5, rel=0.05)

    decay = np.log1p(1e-2 * t) / t
    slope, chi = runner.curve_diagnostics(reduce_ensemble(t, np.vstack([decay, decay])))
    assert slope == pytest.approx(-1.0, abs=0.2)
    assert chi is None
