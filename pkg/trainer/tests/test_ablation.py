import json

import numpy as np
import torch

from geotrainer.ablate import (
    ALL_MODES,
    LEVEL_NAMES,
    FrozenGate,
    fuse_levels,
    mode_weights,
    run_ablation,
    write_report,
)
from geotrainer.data import GeoforgeDataset
from geotrainer.train import TrainConfig, make_model, train


def test_mode_weights():
    gate = FrozenGate(seed=0)
    pooled = torch.randn(4 * 256 + 1024)
    w_soft = mode_weights("soft", pooled, gate)
    assert abs(w_soft.sum().item() - 1.0) < 1e-6
    assert (mode_weights("constant", pooled, gate) == 0.25).all()
    for i, name in enumerate(LEVEL_NAMES):
        w = mode_weights(f"sparse:{name}", pooled, gate)
        assert w[i] == 1.0 and w.sum() == 1.0


def test_fuse_levels_sparse_selects_level():
    torch.manual_seed(0)
    levels = [torch.randn(1, 256, 64, 64), torch.randn(1, 256, 16, 16),
              torch.randn(1, 256, 8, 8), torch.randn(1, 256, 4, 4)]
    w = torch.tensor([1.0, 0.0, 0.0, 0.0])
    fused = fuse_levels(levels, w)
    assert torch.equal(fused, levels[0])


def test_ablation_report(tiny_dataset, tiny_val_dataset, tmp_path):
    model = make_model(seed=0)
    train(model, GeoforgeDataset(tiny_dataset), TrainConfig(epochs=1, batch_size=8, seed=0))
    report = run_ablation(model, GeoforgeDataset(tiny_val_dataset), seed=0)

    modes = [c["mode"] for c in report["configurations"]]
    assert modes == list(ALL_MODES)
    assert len(modes) == 6
    assert sum(m.startswith("sparse:") for m in modes) == 4

    # constant router must equal plain mean fusion exactly
    assert report["constant_equals_mean_fusion"] is True
    constant = next(c for c in report["configurations"] if c["mode"] == "constant")
    assert constant["junction_f1"] == report["mean_fusion"]["junction_f1"]
    assert constant["boundary_f1"] == report["mean_fusion"]["boundary_f1"]
    assert constant["mean_weights"] == [0.25, 0.25, 0.25, 0.25]

    # full-scale ordering appears as context only
    assert "not reproduce" in report["context"] or "non-reproduced" in report["context"]

    out = tmp_path / "report.json"
    write_report(report, out)
    assert json.loads(out.read_text())["configurations"][0]["mode"] == "soft"

    for c in report["configurations"]:
        assert 0.0 <= c["junction_f1"] <= 1.0
        assert 0.0 <= c["boundary_f1"] <= 1.0
