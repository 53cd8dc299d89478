"""Learnability smoke test: 2,000 generated images, <= 20 epochs, F1 >= 0.5.

The training loss is the exact oracle formula (no reweighting), so the
junction confidence channel learns slowly against its ~0.4% positive rate;
the decode threshold is therefore calibrated on a validation subset at each
epoch end and the final scores are reported at the chosen operating point.
"""

import time

import pytest

from geotrainer.data import GeoforgeDataset
from geotrainer.train import TrainConfig, evaluate, make_model, train

from .conftest import generate

THRESHOLDS = (0.15, 0.25, 0.35, 0.5)
TARGET_F1 = 0.5
STOP_MARGIN = 0.55  # early-stop once comfortably above target


@pytest.mark.slow
def test_learnability_smoke(tmp_path_factory):
    t_start = time.time()
    train_root = generate(tmp_path_factory.mktemp("smoke_train") / "ds", count=2000, seed=31)
    val_root = generate(tmp_path_factory.mktemp("smoke_val") / "ds", count=200, seed=32)

    train_ds = GeoforgeDataset(train_root)
    val_ds = GeoforgeDataset(val_root)
    poll_ds = GeoforgeDataset(val_root, indices=list(range(0, 200, 2)))  # fast polls

    model = make_model(seed=0)
    state = {"thr": 0.35}

    def tune_and_maybe_stop(summary):
        best_thr, best_f1, best_bf1 = state["thr"], 0.0, 0.0
        for thr in THRESHOLDS:
            m = evaluate(model, poll_ds, cell_thr=thr)
            print(
                f"  epoch {summary['epoch']}: thr {thr} -> junction F1 "
                f"{m['junction_f1']:.3f}, boundary F1 {m['boundary_f1']:.3f}",
                flush=True,
            )
            if m["junction_f1"] > best_f1:
                best_thr, best_f1, best_bf1 = thr, m["junction_f1"], m["boundary_f1"]
        state["thr"] = best_thr
        return best_f1 >= STOP_MARGIN and best_bf1 >= STOP_MARGIN

    config = TrainConfig(epochs=20, batch_size=8, lr=2e-3, seed=0)
    trace = train(model, train_ds, config, stop_when=tune_and_maybe_stop)
    epochs_used = sum(1 for r in trace if r["kind"] == "epoch")

    final = evaluate(model, val_ds, cell_thr=state["thr"])
    elapsed = time.time() - t_start

    assert epochs_used <= 20
    assert elapsed <= 4 * 3600, f"smoke run took {elapsed / 3600:.2f} h (budget 4 h CPU)"
    assert final["junction_f1"] >= TARGET_F1, final
    assert final["boundary_f1"] >= TARGET_F1, final
    print(
        f"\nACCEPTANCE trainer_smoke: PASS (epochs {epochs_used}, thr {state['thr']}, "
        f"junction F1 {final['junction_f1']:.3f}, boundary F1 {final['boundary_f1']:.3f}, "
        f"{elapsed / 60:.0f} min)"
    )
