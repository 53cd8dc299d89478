import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoforge.annotate import JunctionLabel
from geoforge.codec import (
    BIN_CONF0,
    BIN_RES0,
    CH_CONF,
    CH_DX,
    CH_DY,
    CHANNELS,
    GRID,
    DecodeThresholds,
    decode,
    encode,
    read_gjt,
    write_gjt,
)

CANVAS = (1000, 1000)


class TestEncode:
    def test_hand_grid_arithmetic_example(self):
        # cell size 1000/60; (505, 505) lands in cell (30, 30) at offset -0.2
        j = JunctionLabel(x=505.0, y=505.0, branches=(90.0,))
        t = encode([j], CANVAS)
        assert t.shape == (60, 60, 33)
        assert t[30, 30, CH_CONF] == 1.0
        assert t[30, 30, CH_DX] == pytest.approx(-0.2, abs=1e-6)
        assert t[30, 30, CH_DY] == pytest.approx(-0.2, abs=1e-6)
        # 90 degrees falls in bin 3 ([72, 96)), residual (90 - 84) / 24
        assert t[30, 30, BIN_CONF0 + 3] == 1.0
        assert t[30, 30, BIN_RES0 + 3] == pytest.approx(0.25, abs=1e-6)
        assert t[30, 30, BIN_CONF0 : BIN_CONF0 + 15].sum() == 1.0

    def test_empty_is_all_zero(self):
        assert (encode([], CANVAS) == 0).all()

    def test_cell_center_gives_zero_offsets(self):
        # canvas 600 -> cell size 10; (105, 105) is the center of cell (10, 10)
        j = JunctionLabel(x=105.0, y=105.0, branches=(0.0,))
        t = encode([j], (600, 600))
        assert t[10, 10, CH_DX] == 0.0
        assert t[10, 10, CH_DY] == 0.0

    def test_outside_canvas_raises(self):
        with pytest.raises(ValueError):
            encode([JunctionLabel(x=1000.0, y=5.0, branches=(0.0,))], CANVAS)
        with pytest.raises(ValueError):
            encode([JunctionLabel(x=-0.1, y=5.0, branches=(0.0,))], CANVAS)

    def test_collision_keeps_junction_nearest_cell_center(self):
        # cell (0, 0) spans [0, 16.67); center at 8.33
        near = JunctionLabel(x=9.0, y=8.0, branches=(50.0,))
        far = JunctionLabel(x=1.0, y=1.0, branches=(200.0,))
        t = encode([far, near], CANVAS)
        assert t[0, 0, CH_CONF] == 1.0
        assert int(t[:, :, CH_CONF].sum()) == 1
        assert t[0, 0, BIN_CONF0 + 2] == 1.0  # 50 deg -> bin 2, the survivor
        assert t[0, 0, BIN_CONF0 + 8] == 0.0  # 200 deg bin from the loser

    def test_positive_cells_match_junction_count_after_collisions(self):
        rng = np.random.default_rng(0)
        js = [
            JunctionLabel(
                x=float(rng.uniform(0, 999)),
                y=float(rng.uniform(0, 999)),
                branches=(float(rng.uniform(0, 360)),),
            )
            for _ in range(200)
        ]
        t = encode(js, CANVAS)
        cells = {(int(j.y / (1000 / 60)), int(j.x / (1000 / 60))) for j in js}
        assert int(t[:, :, CH_CONF].sum()) == len(cells)

    def test_bin_collision_keeps_nearest_bin_center(self):
        # both angles in bin 0 ([0, 24)); 13 deg is nearer the center (12) than 1 deg
        j = JunctionLabel(x=505.0, y=505.0, branches=(1.0, 13.0))
        t = encode([j], CANVAS)
        gy = gx = 30
        assert t[gy, gx, BIN_CONF0 + 0] == 1.0
        assert t[gy, gx, BIN_RES0 + 0] == pytest.approx((13.0 - 12.0) / 24.0, abs=1e-6)


class TestDecode:
    def test_all_zero_gives_empty(self):
        assert decode(np.zeros((60, 60, 33), np.float32), DecodeThresholds(), CANVAS) == []

    def test_cell_zero_hand_example(self):
        t = np.zeros((60, 60, 33), np.float32)
        t[0, 0, CH_CONF] = 1.0
        t[0, 0, BIN_CONF0 + 0] = 1.0
        js = decode(t, DecodeThresholds(), CANVAS)
        assert len(js) == 1
        assert (js[0].x, js[0].y) == pytest.approx((8.333333, 8.333333), abs=1e-4)
        assert js[0].branches == pytest.approx((12.0,), abs=1e-3)
        assert js[0].conf == 1.0

    def test_no_passing_bins_emits_branchless_junction(self):
        t = np.zeros((60, 60, 33), np.float32)
        t[4, 7, CH_CONF] = 0.9
        t[4, 7, BIN_CONF0 + 2] = 0.2  # below threshold
        js = decode(t, DecodeThresholds(), CANVAS)
        assert len(js) == 1
        assert js[0].branches == ()

    def test_wrong_shape_raises(self):
        with pytest.raises(ValueError):
            decode(np.zeros((60, 60, 32), np.float32), DecodeThresholds(), CANVAS)

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            DecodeThresholds(cell_conf_min=0.0)
        with pytest.raises(ValueError):
            DecodeThresholds(bin_conf_min=1.0)


def random_collision_free_junctions(rng, canvas=CANVAS, max_junctions=12):
    """Labels built straight from grid coordinates: unique cells, unique bins."""
    W, H = canvas
    cw, ch = W / GRID, H / GRID
    n = int(rng.integers(1, max_junctions + 1))
    cells = rng.choice(GRID * GRID, size=n, replace=False)
    js = []
    for cell in cells:
        gy, gx = divmod(int(cell), GRID)
        dx = rng.uniform(-0.45, 0.45)
        dy = rng.uniform(-0.45, 0.45)
        bins = rng.choice(15, size=int(rng.integers(1, 5)), replace=False)
        branches = sorted(
            (k * 24.0 + 12.0) + rng.uniform(-0.45, 0.45) * 24.0 for k in bins
        )
        js.append(
            JunctionLabel(
                x=(gx + 0.5 + dx) * cw,
                y=(gy + 0.5 + dy) * ch,
                branches=tuple(branches),
            )
        )
    return js


class TestRoundTrip:
    def test_round_trip_tolerances(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            js = random_collision_free_junctions(rng)
            out = decode(encode(js, CANVAS), DecodeThresholds(), CANVAS)
            assert len(out) == len(js)
            js_sorted = sorted(js, key=lambda j: (j.x, j.y))
            out_sorted = sorted(out, key=lambda j: (j.x, j.y))
            for a, b in zip(js_sorted, out_sorted):
                assert abs(a.x - b.x) < 1e-4 and abs(a.y - b.y) < 1e-4
                assert len(a.branches) == len(b.branches)
                for ta, tb in zip(a.branches, b.branches):
                    assert abs(ta - tb) < 1e-3

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, seed):
        rng = np.random.default_rng(seed)
        js = random_collision_free_junctions(rng)
        out = decode(encode(js, CANVAS), DecodeThresholds(), CANVAS)
        assert len(out) == len(js)
        for a, b in zip(
            sorted(js, key=lambda j: (j.x, j.y)), sorted(out, key=lambda j: (j.x, j.y))
        ):
            assert abs(a.x - b.x) < 1e-4 and abs(a.y - b.y) < 1e-4
            assert np.allclose(a.branches, b.branches, atol=1e-3)

    def test_reencode_idempotent(self):
        rng = np.random.default_rng(2)
        js = random_collision_free_junctions(rng)
        t1 = encode(js, CANVAS)
        t2 = encode(decode(t1, DecodeThresholds(), CANVAS), CANVAS)
        assert np.array_equal(t1[:, :, CH_CONF], t2[:, :, CH_CONF])
        assert np.allclose(t1, t2, atol=1e-5)


class TestGjtFile:
    def test_roundtrip_bitwise(self, tmp_path):
        rng = np.random.default_rng(3)
        t = rng.random((60, 60, 33)).astype(np.float32)
        path = tmp_path / "t.gjt"
        write_gjt(path, t)
        back = read_gjt(path)
        assert back.dtype == np.float32
        assert np.array_equal(back, t)
        assert path.read_bytes()[:4] == b"GJT1"
        assert path.stat().st_size == 16 + 60 * 60 * 33 * 4

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.gjt"
        p.write_bytes(b"NOPE" + b"\x00" * 100)
        with pytest.raises(ValueError):
            read_gjt(p)

    def test_truncated(self, tmp_path):
        rng = np.random.default_rng(4)
        p = tmp_path / "t.gjt"
        write_gjt(p, rng.random((60, 60, 33)).astype(np.float32))
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(ValueError):
            read_gjt(p)

    def test_wrong_shape_write(self, tmp_path):
        with pytest.raises(ValueError):
            write_gjt(tmp_path / "x.gjt", np.zeros((60, 60, 32), np.float32))
