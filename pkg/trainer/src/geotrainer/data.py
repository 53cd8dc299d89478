"""Reader for the geoforge dataset layout.

Consumes the documented on-disk formats directly: manifest.json for the
image list, 8-bit grayscale PNG renders, GJT1 junction grid targets, and
boundary heatmap PNGs (value = round(255 * h)).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch.utils.data import Dataset

GJT_MAGIC = b"GJT1"


def read_gjt(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != GJT_MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    h, w, c = struct.unpack("<III", data[4:16])
    if len(data) != 16 + h * w * c * 4:
        raise ValueError(f"{path}: truncated GJT1 file")
    return np.frombuffer(data, dtype="<f4", offset=16).reshape(h, w, c).copy()


def write_gjt(path: str | Path, tensor: np.ndarray) -> None:
    t = np.ascontiguousarray(tensor, dtype="<f4")
    with open(path, "wb") as f:
        f.write(GJT_MAGIC)
        f.write(struct.pack("<III", *t.shape))
        f.write(t.tobytes())


def load_png01(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float32) / 255.0


def load_junction_json(path: str | Path) -> list[dict]:
    return json.loads(Path(path).read_text())


class GeoforgeDataset(Dataset):
    """(image, grid_target, boundary_target) triples from a dataset directory."""

    def __init__(self, root: str | Path, indices: list[int] | None = None):
        self.root = Path(root)
        manifest = json.loads((self.root / "manifest.json").read_text())
        records = manifest["images"]
        if indices is not None:
            by_index = {r["index"]: r for r in records}
            records = [by_index[i] for i in indices]
        self.records = records
        self.canvas = tuple(manifest["config"]["canvas_size"])

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i: int):
        rec = self.records[i]
        img = load_png01(self.root / rec["image"])[None]  # (1, H, W)
        grid = read_gjt(self.root / rec["target"])
        boundary = load_png01(self.root / rec["boundary"])
        return (
            torch.from_numpy(img),
            torch.from_numpy(grid),
            torch.from_numpy(boundary),
        )

    def junctions(self, i: int) -> list[dict]:
        return load_junction_json(self.root / self.records[i]["junctions"])
