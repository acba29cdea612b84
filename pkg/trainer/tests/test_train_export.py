import time

import numpy as np
import pytest

from conftest import DRAG_GAIN
from quadbem.residual import forward, load_bundle
from residual_train import (
    TrainingConfig,
    WindowDataset,
    export_bundle,
    make_examples,
    rotor_model_wrench,
    to_bundle,
    train,
    verify_parity,
)


@pytest.fixture(scope="module")
def drag_dataset(vehicle, geometry, coeffs, drag_logs):
    parts = []
    for log in drag_logs:
        f_model, tau_model = rotor_model_wrench(log, vehicle, geometry, model="fit", coeffs=coeffs)
        parts.append(make_examples(log, f_model, tau_model))
    return WindowDataset.concatenate(parts)


def small_config(**kw):
    base = dict(architecture="tcn-small", learning_rate=1e-3, batch_size=256, epochs=4, seed=0)
    base.update(kw)
    return TrainingConfig(**base)


class TestTraining:
    def test_zero_label_dataset_learns_zero(self, drag_dataset):
        ds = WindowDataset(drag_dataset.windows[:2000], np.zeros((2000, 6), dtype=np.float32))
        trained = train(ds, small_config(epochs=3))
        preds = trained.predict(ds.windows[:500])
        assert np.max(np.abs(preds)) <= 1e-3

    def test_divergence_aborts_with_diagnostics(self, drag_dataset):
        ds = WindowDataset(drag_dataset.windows[:512], drag_dataset.labels[:512])
        with pytest.raises(RuntimeError, match="diverged"):
            train(ds, small_config(learning_rate=1e12, epochs=2))

    def test_loss_non_increasing_median_over_seeds(self, drag_dataset):
        ds = WindowDataset(drag_dataset.windows[:3000], drag_dataset.labels[:3000])
        firsts, lasts = [], []
        for seed in range(5):
            trained = train(ds, small_config(seed=seed, epochs=4))
            firsts.append(trained.history[0]["train_loss"])
            lasts.append(trained.history[-1]["train_loss"])
        assert np.median(lasts) <= np.median(firsts)

    def test_curve_csv_written(self, drag_dataset, tmp_path):
        ds = WindowDataset(drag_dataset.windows[:1000], drag_dataset.labels[:1000])
        curve = tmp_path / "curve.csv"
        train(ds, small_config(epochs=2, curve_path=curve))
        lines = curve.read_text().strip().splitlines()
        assert lines[0] == "epoch,train_loss,val_loss"
        assert len(lines) == 3


class TestExport:
    def test_parameter_counts_match_plan(self, drag_dataset):
        from quadbem.residual import build_architecture

        ds = WindowDataset(drag_dataset.windows[:600], drag_dataset.labels[:600])
        for tag in ("tcn-small", "mlp"):
            trained = train(ds, small_config(architecture=tag, epochs=1))
            bundle = to_bundle(trained)
            assert bundle.parameter_count == build_architecture(tag).parameter_count

    def test_fixed_seed_identical_bundle_bytes(self, drag_dataset, tmp_path):
        ds = WindowDataset(drag_dataset.windows[:1500], drag_dataset.labels[:1500])
        paths = []
        for name in ("a", "b"):
            trained = train(ds, small_config(seed=7, epochs=2))
            path = tmp_path / f"{name}.json"
            export_bundle(trained, path, ds.windows)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_export_load_export_byte_identical(self, drag_dataset, tmp_path):
        from quadbem.residual import save_bundle

        ds = WindowDataset(drag_dataset.windows[:800], drag_dataset.labels[:800])
        trained = train(ds, small_config(epochs=1))
        p1, p2 = tmp_path / "one.json", tmp_path / "two.json"
        export_bundle(trained, p1, ds.windows)
        save_bundle(load_bundle(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_parity_zero_weight_exact(self, drag_dataset):
        ds = WindowDataset(drag_dataset.windows[:600], drag_dataset.labels[:600])
        trained = train(ds, small_config(epochs=1))
        with np.errstate(all="ignore"):
            for p in trained.net.parameters():
                p.data.zero_()
        bundle = to_bundle(trained)
        assert verify_parity(trained, bundle, ds.windows) == 0.0

    def test_parity_failure_rejects_export(self, drag_dataset, tmp_path, monkeypatch):
        import residual_train.export as export_mod

        ds = WindowDataset(drag_dataset.windows[:600], drag_dataset.labels[:600])
        trained = train(ds, small_config(epochs=1))
        bundle_path = tmp_path / "bad.json"
        monkeypatch.setattr(export_mod, "verify_parity", lambda *a, **k: 1.0)
        with pytest.raises(RuntimeError, match="parity"):
            export_mod.export_bundle(trained, bundle_path, ds.windows)
        assert not bundle_path.exists()

    def test_parity_trained_within_tolerance(self, drag_dataset):
        ds = WindowDataset(drag_dataset.windows[:2000], drag_dataset.labels[:2000])
        trained = train(ds, small_config(architecture="tcn-medium", epochs=2))
        gap = verify_parity(trained, to_bundle(trained), ds.windows)
        assert gap <= 1e-4


def test_secondary_acceptance_round_trip(drag_split, vehicle, geometry, coeffs, tmp_path):
    """Train tcn-medium on the injected linear-drag dataset; the held-out
    force RMSE must drop >= 80% vs the zero predictor and the exported
    bundle must pass cross-implementation parity at 1e-4."""
    t0 = time.perf_counter()
    train_logs, val_logs, test_logs = drag_split

    def windows_for(logs):
        parts = []
        for log in logs:
            f_model, tau_model = rotor_model_wrench(log, vehicle, geometry, model="fit", coeffs=coeffs)
            parts.append(make_examples(log, f_model, tau_model))
        return WindowDataset.concatenate(parts)

    train_set = windows_for(train_logs + val_logs)
    held_out = windows_for(test_logs)

    cfg = TrainingConfig(architecture="tcn-medium", learning_rate=1e-3, batch_size=256, epochs=30, seed=0)
    trained = train(train_set, cfg)

    preds = trained.predict(held_out.windows)
    force_rmse = float(np.sqrt(np.mean((preds[:, :3] - held_out.labels[:, :3]) ** 2)))
    zero_rmse = float(np.sqrt(np.mean(held_out.labels[:, :3] ** 2)))
    reduction = 1.0 - force_rmse / zero_rmse

    bundle_path = tmp_path / "tcn_medium_drag.json"
    gap = export_bundle(trained, bundle_path, held_out.windows)
    bundle = load_bundle(bundle_path)

    # Predictions through the primary inference engine track the injected
    # drag law on held-out states.
    engine_preds = np.stack([forward(bundle, w) for w in held_out.windows[:400]])
    v_newest = held_out.windows[:400, -1, :3]
    drag_err = float(np.max(np.abs(engine_preds[:, :3] - (-DRAG_GAIN) * v_newest)))

    elapsed = time.perf_counter() - t0
    ok = reduction >= 0.80 and gap <= 1e-4 and elapsed < 900.0 and drag_err < 0.05
    print(
        f"[{'PASS' if ok else 'FAIL'}] synthetic residual round-trip: force RMSE {force_rmse:.4f} N "
        f"vs zero-predictor {zero_rmse:.4f} N ({100 * reduction:.1f}% reduction, >= 80%); "
        f"parity max |delta| {gap:.2e} (<= 1e-4); drag-law error {drag_err:.3f} N (< 0.05); "
        f"time {elapsed:.0f}s (< 900s)"
    )
    assert ok
