"""Toy pyramid model: five 256-channel levels, cross-resolution attention,
junction and boundary decoder heads.

The backbone keeps its heavy 3x3 convolutions thin and lifts each level to
the 256-channel pyramid width with 1x1 projections, so the model trains in
reasonable time on a CPU while keeping the documented tensor contract:
level i has stride 2**(i+1) relative to the input, the junction head emits
(60, 60) grids, and the boundary head returns the input resolution.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

PYRAMID_CHANNELS = 256
GRID = 60
NUM_BINS = 15


def _conv_bn_relu(c_in: int, c_out: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, 3, stride=stride, padding=1, bias=False),
        nn.BatchNorm2d(c_out),
        nn.ReLU(inplace=True),
    )


class PyramidBackbone(nn.Module):
    """F1..F5 at strides 4, 8, 16, 32, 64, all with 256 channels."""

    def __init__(self, in_channels: int = 1, widths=(24, 32, 48, 64, 64)):
        super().__init__()
        self.stem = _conv_bn_relu(in_channels, 16, stride=2)
        self.stages = nn.ModuleList()
        c_prev = 16
        for w in widths:
            self.stages.append(_conv_bn_relu(c_prev, w, stride=2))
            c_prev = w
        self.projections = nn.ModuleList(
            nn.Conv2d(w, PYRAMID_CHANNELS, 1) for w in widths
        )

    def forward(self, x: torch.Tensor) -> list[torch.Tensor]:
        if x.shape[-1] % 64 or x.shape[-2] % 64:
            raise ValueError(f"input resolution {tuple(x.shape[-2:])} not divisible by 64")
        h = self.stem(x)
        levels = []
        for stage, proj in zip(self.stages, self.projections):
            h = stage(h)
            levels.append(proj(h))
        return levels


class CrossResolutionMix(nn.Module):
    """Attention of F2 (query) over F4 (key/value), upsampled x2, added to F1."""

    def __init__(self, channels: int = PYRAMID_CHANNELS, heads: int = 4):
        super().__init__()
        self.attn = nn.MultiheadAttention(channels, heads, batch_first=True)

    def attend(self, f2: torch.Tensor, f4: torch.Tensor) -> torch.Tensor:
        """Raw attention output at F2's resolution."""
        b, c, h2, w2 = f2.shape
        q = f2.flatten(2).transpose(1, 2)
        kv = f4.flatten(2).transpose(1, 2)
        out, _ = self.attn(q, kv, kv, need_weights=False)
        return out.transpose(1, 2).reshape(b, c, h2, w2)

    def forward(self, f1: torch.Tensor, f2: torch.Tensor, f4: torch.Tensor) -> torch.Tensor:
        mixed = self.attend(f2, f4)
        up = F.interpolate(mixed, scale_factor=2, mode="nearest")
        if up.shape[-2:] != f1.shape[-2:]:
            raise ValueError(
                f"upsampled mix {tuple(up.shape[-2:])} does not match F1 {tuple(f1.shape[-2:])}"
            )
        return f1 + up


class JunctionHead(nn.Module):
    """Perception block to the 60x60 grid, then four parallel conv heads.

    Outputs are channels-last grids packed in the GJT channel order
    [cell_conf, dx, dy, bin_conf x15, bin_residual x15]; confidences pass
    through a sigmoid, offsets and residuals stay linear.
    """

    def __init__(self, width: int = 48):
        super().__init__()
        self.block = nn.Sequential(
            _conv_bn_relu(PYRAMID_CHANNELS, width), _conv_bn_relu(width, width)
        )
        self.cell_conf = nn.Conv2d(width, 1, 3, padding=1)
        self.cell_loc = nn.Conv2d(width, 2, 3, padding=1)
        self.bin_conf = nn.Conv2d(width, NUM_BINS, 3, padding=1)
        self.bin_orient = nn.Conv2d(width, NUM_BINS, 3, padding=1)

    def forward(self, f1_star: torch.Tensor) -> dict[str, torch.Tensor]:
        h = F.interpolate(f1_star, size=(GRID, GRID), mode="nearest")
        h = self.block(h)
        return {
            "cell_conf": torch.sigmoid(self.cell_conf(h)).permute(0, 2, 3, 1),
            "cell_loc": self.cell_loc(h).permute(0, 2, 3, 1),
            "bin_conf": torch.sigmoid(self.bin_conf(h)).permute(0, 2, 3, 1),
            "bin_orient": self.bin_orient(h).permute(0, 2, 3, 1),
        }


class BoundaryHead(nn.Module):
    """Two perception blocks (nearest upsample, conv, BN, ReLU), then a
    bilinear resize to the input resolution and a sigmoid heatmap."""

    def __init__(self, widths=(16, 16)):
        super().__init__()
        self.block1 = _conv_bn_relu(PYRAMID_CHANNELS, widths[0])
        self.block2 = _conv_bn_relu(widths[0], widths[1])
        self.out = nn.Conv2d(widths[1], 1, 1)

    def forward(self, f1_star: torch.Tensor, out_hw: tuple[int, int]) -> torch.Tensor:
        h = F.interpolate(f1_star, scale_factor=2, mode="nearest")
        h = self.block1(h)
        h = F.interpolate(h, scale_factor=2, mode="nearest")
        h = self.block2(h)
        h = torch.sigmoid(self.out(h))
        if h.shape[-2:] != out_hw:
            h = F.interpolate(h, size=out_hw, mode="bilinear", align_corners=False)
        return h[:, 0]


class ToyGeoModel(nn.Module):
    """Backbone + mix + decoders; forward returns the assembled grid tensor
    (B, 60, 60, 33) and the boundary heatmap (B, H, W)."""

    def __init__(self):
        super().__init__()
        self.backbone = PyramidBackbone()
        self.mix = CrossResolutionMix()
        self.junction_head = JunctionHead()
        self.boundary_head = BoundaryHead()

    def pyramid(self, x: torch.Tensor) -> list[torch.Tensor]:
        return self.backbone(x)

    def f1_star(self, levels: list[torch.Tensor]) -> torch.Tensor:
        f1, f2, _, f4, _ = levels
        return self.mix(f1, f2, f4)

    def decode_heads(self, f1_star: torch.Tensor, out_hw: tuple[int, int]):
        junction = self.junction_head(f1_star)
        boundary = self.boundary_head(f1_star, out_hw)
        return junction, boundary

    @staticmethod
    def pack_grid(junction: dict[str, torch.Tensor]) -> torch.Tensor:
        return torch.cat(
            [
                junction["cell_conf"],
                junction["cell_loc"],
                junction["bin_conf"],
                junction["bin_orient"],
            ],
            dim=-1,
        )

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        levels = self.pyramid(x)
        star = self.f1_star(levels)
        junction, boundary = self.decode_heads(star, tuple(x.shape[-2:]))
        return self.pack_grid(junction), boundary
