import math

import numpy as np
import pytest

from gdpf.harness import ScenarioSpec, TargetSpec, bench_spec, generate_scenario, preset_spec
from gdpf.harness.scenario import validate_spec


def tiny_spec(**kw):
    base = dict(
        frames=20,
        dt=0.1,
        noise_std=0.0,
        clutter_rate=0.0,
        det_prob=1.0,
        fov=(-30.0, 30.0, -30.0, 30.0),
        mode="bbox",
        targets=(TargetSpec(-5.0, 0.0, 2.0, 1.0), TargetSpec(5.0, 3.0, -1.0, 0.0)),
    )
    base.update(kw)
    return ScenarioSpec(**base)


class TestGenerate:
    def test_noiseless_measurements_equal_truth(self):
        sc = generate_scenario(tiny_spec(), seed=0)
        for f in range(sc.frames):
            truth_pos = sorted((x, y) for _, x, y, _, _ in sc.truths[f])
            meas_pos = sorted((m.position[0], m.position[1]) for m in sc.measurements[f])
            assert len(truth_pos) == len(meas_pos)
            for (tx, ty), (mx, my) in zip(truth_pos, meas_pos):
                assert mx == pytest.approx(tx, abs=1e-12)
                assert my == pytest.approx(ty, abs=1e-12)

    def test_same_seed_identical(self):
        spec = tiny_spec(noise_std=0.3, clutter_rate=2.0, det_prob=0.9)
        a = generate_scenario(spec, seed=42)
        b = generate_scenario(spec, seed=42)
        assert a.truths == b.truths
        assert len(a.measurements) == len(b.measurements)
        for ma, mb in zip(a.measurements, b.measurements):
            assert len(ma) == len(mb)
            for x, y in zip(ma, mb):
                assert np.array_equal(x.position, y.position)
                assert x.extent == y.extent and x.cell_index == y.cell_index

    def test_different_seed_differs(self):
        spec = tiny_spec(noise_std=0.3)
        a = generate_scenario(spec, seed=1)
        b = generate_scenario(spec, seed=2)
        diff = any(
            len(ma) != len(mb)
            or any(not np.array_equal(x.position, y.position) for x, y in zip(ma, mb))
            for ma, mb in zip(a.measurements, b.measurements)
        )
        assert diff

    def test_clutter_count_within_three_sigma(self):
        # Poisson(5) over 100 frames: total within 3*sqrt(500) of 500
        spec = tiny_spec(frames=100, clutter_rate=5.0, det_prob=0.999999)
        sc = generate_scenario(spec, seed=123)
        n_truth_dets = sum(len(t) for t in sc.truths)
        total = sum(len(m) for m in sc.measurements)
        clutter = total - n_truth_dets
        assert abs(clutter - 500) <= 3 * math.sqrt(500)

    def test_measurements_range_sorted(self):
        spec = tiny_spec(noise_std=0.3, clutter_rate=3.0)
        sc = generate_scenario(spec, seed=5)
        for ms in sc.measurements:
            ranges = [math.hypot(m.position[0], m.position[1]) for m in ms]
            assert ranges == sorted(ranges)

    def test_target_leaving_fov_rejected(self):
        spec = tiny_spec(fov=(-3.0, 3.0, -3.0, 3.0))
        with pytest.raises(ValueError, match="leaves the field of view"):
            generate_scenario(spec, seed=0)

    def test_lifetimes_respected(self):
        spec = tiny_spec(targets=(TargetSpec(0.0, 0.0, 1.0, 0.0, born=5, died=12),))
        sc = generate_scenario(spec, seed=0)
        alive = [f for f in range(sc.frames) if sc.truths[f]]
        assert alive == list(range(5, 12))


class TestGridMode:
    def test_cells_cover_footprint(self):
        spec = tiny_spec(
            mode="grid", cell_size=0.5, targets=(TargetSpec(0.2, 0.1, 0.0, 0.0),),
            frames=1,
        )
        sc = generate_scenario(spec, seed=0)
        ms = sc.measurements[0]
        # a 4 m x 2 m footprint over 0.5 m cells covers dozens of cells
        assert len(ms) > 10
        assert all(m.cell_index is not None for m in ms)
        cells = {m.cell_index for m in ms}
        assert len(cells) == len(ms)  # deduplicated

    def test_cell_centers_consistent(self):
        spec = tiny_spec(mode="grid", cell_size=0.5, frames=1)
        sc = generate_scenario(spec, seed=0)
        x0, _, y0, _ = spec.fov
        for m in sc.measurements[0]:
            row, col = m.cell_index
            assert m.position[0] == pytest.approx(x0 + (col + 0.5) * 0.5)
            assert m.position[1] == pytest.approx(y0 + (row + 0.5) * 0.5)


class TestValidation:
    @pytest.mark.parametrize(
        "kw,fragment",
        [
            (dict(frames=0), "frames"),
            (dict(dt=0.0), "dt"),
            (dict(noise_std=-1.0), "noise_std"),
            (dict(det_prob=0.0), "det_prob"),
            (dict(det_prob=1.5), "det_prob"),
            (dict(clutter_rate=-2.0), "clutter_rate"),
            (dict(mode="lidar"), "mode"),
            (dict(fov=(1.0, -1.0, 0.0, 2.0)), "fov"),
            (dict(targets=()), "target"),
            (dict(gt_id=9), "gt_id"),
        ],
    )
    def test_rejects(self, kw, fragment):
        with pytest.raises(ValueError, match=fragment):
            validate_spec(tiny_spec(**kw))


class TestPresets:
    def test_crossing3_paths_cross_but_keep_distance(self):
        spec = preset_spec("crossing3")
        sc = generate_scenario(spec, seed=7)
        min_pair = math.inf
        for rows in sc.truths:
            for i in range(len(rows)):
                for j in range(i + 1, len(rows)):
                    d = math.hypot(rows[i][1] - rows[j][1], rows[i][2] - rows[j][2])
                    min_pair = min(min_pair, d)
        assert 1.0 < min_pair < 3.0  # close encounter, no collision

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            preset_spec("zigzag9")

    def test_single50_lifetime(self):
        sc = generate_scenario(preset_spec("single50"), seed=1)
        assert [f for f in range(sc.frames) if sc.truths[f]] == list(range(50))
        assert sc.frames == 170

    def test_override(self):
        spec = preset_spec("crossing3", clutter_rate=0.0)
        assert spec.clutter_rate == 0.0
        assert spec.frames == 100


class TestBenchSpec:
    def test_scales_with_objects(self):
        spec = bench_spec(50, 10)
        assert len(spec.targets) == 50
        sc = generate_scenario(spec, seed=1)
        mean_meas = sum(len(m) for m in sc.measurements) / sc.frames
        assert 50 <= mean_meas <= 75  # ~0.98*50 detections + ~12.5 clutter
