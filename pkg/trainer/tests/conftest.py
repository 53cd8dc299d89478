"""Shared fixtures: tiny geoforge datasets generated through the real CLI."""

import shutil
import subprocess
import sys

import pytest


def geoforge_cmd() -> list[str]:
    exe = shutil.which("geoforge")
    return [exe] if exe else [sys.executable, "-m", "geoforge.cli"]


def generate(out_dir, count, seed, canvas=256):
    res = subprocess.run(
        geoforge_cmd()
        + ["gen", "--count", str(count), "--seed", str(seed),
           "--canvas", str(canvas), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    if res.returncode != 0:
        raise RuntimeError(f"geoforge gen failed: {res.stderr}")
    return out_dir


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """16 images at 256x256 for fast structural tests."""
    return generate(tmp_path_factory.mktemp("tiny") / "ds", count=16, seed=900)


@pytest.fixture(scope="session")
def tiny_val_dataset(tmp_path_factory):
    return generate(tmp_path_factory.mktemp("tinyval") / "ds", count=8, seed=901)
