"""Loss parity against the primary toolkit's loss-oracle CLI.

The oracle is reached strictly through its command line (`geoforge
loss-oracle ...`); tensors travel as GJT1 / .npy files.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import torch

from .data import write_gjt
from .losses import boundary_loss, junction_loss


def oracle_command() -> list[str]:
    exe = shutil.which("geoforge")
    if exe:
        return [exe]
    return [sys.executable, "-m", "geoforge.cli"]


def run_loss_oracle(task: str, pred_path: str | Path, target_path: str | Path) -> dict:
    cmd = oracle_command() + [
        "loss-oracle", "--task", task,
        "--pred", str(pred_path), "--target", str(target_path), "--json",
    ]
    res = subprocess.run(cmd, capture_output=True, text=True)
    if res.returncode != 0:
        raise RuntimeError(f"loss-oracle failed: {res.stderr.strip()}")
    return json.loads(res.stdout)


def random_grid_pair(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    target = np.zeros((60, 60, 33), np.float32)
    for cell in rng.choice(3600, size=int(rng.integers(1, 25)), replace=False):
        gy, gx = divmod(int(cell), 60)
        target[gy, gx, 0] = 1.0
        target[gy, gx, 1:3] = rng.uniform(-0.5, 0.5, 2)
        for k in rng.choice(15, size=int(rng.integers(1, 4)), replace=False):
            target[gy, gx, 3 + k] = 1.0
            target[gy, gx, 18 + k] = rng.uniform(-0.5, 0.5)
    pred = np.empty_like(target)
    pred[:, :, 0] = rng.uniform(0, 1, (60, 60))
    pred[:, :, 1:3] = rng.uniform(-0.6, 0.6, (60, 60, 2))
    pred[:, :, 3:18] = rng.uniform(0, 1, (60, 60, 15))
    pred[:, :, 18:33] = rng.uniform(-0.6, 0.6, (60, 60, 15))
    return pred, target


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def parity_check(out_dir: str | Path, pairs: int = 50, seed: int = 0) -> dict:
    """Exchange ``pairs`` file pairs with the oracle; return worst relative errors."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    worst_junction = 0.0
    worst_boundary = 0.0

    for i in range(pairs):
        if i % 2 == 0:  # junction grids
            pred, target = random_grid_pair(rng)
            pp = out / f"pred_{i}.gjt"
            tp = out / f"target_{i}.gjt"
            write_gjt(pp, pred)
            write_gjt(tp, target)
            got = run_loss_oracle("junction", pp, tp)
            ours = junction_loss(
                torch.from_numpy(pred).double(), torch.from_numpy(target).double()
            )
            for key in ("l_c_conf", "l_b_conf", "l_c_loc", "l_b_loc", "l_junc"):
                worst_junction = max(
                    worst_junction, relative_error(float(ours[key]), got[key])
                )
        else:  # boundary maps
            pred = rng.random((96, 96))
            target = rng.random((96, 96))
            pp = out / f"pred_{i}.npy"
            tp = out / f"target_{i}.npy"
            np.save(pp, pred)
            np.save(tp, target)
            got = run_loss_oracle("boundary", pp, tp)
            ours = boundary_loss(torch.from_numpy(pred), torch.from_numpy(target))
            worst_boundary = max(worst_boundary, relative_error(float(ours), got["l_bodr"]))

    return {
        "pairs": pairs,
        "worst_junction_rel_err": worst_junction,
        "worst_boundary_rel_err": worst_boundary,
    }
