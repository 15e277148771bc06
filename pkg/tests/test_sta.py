import numpy as np
import pytest

from staflow.errors import BoxTooSmall, Empty, LengthMismatch, OutOfRange, WeightMismatch, ZeroVector
from staflow.flow import FlowField
from staflow.sta import (
    BoundingBox,
    Sta2Accumulator,
    StaParams,
    grid_vector,
    orientation_bin,
    sta1,
    sta2_extract,
    sta2_push,
)


def sta2_brute_force(grid_vectors, params):
    """Store every component vector, histogram each at the end (the offline
    definition the accumulator must match exactly)."""
    stacked = np.stack(grid_vectors)  # (t, m*n*k1)
    t = stacked.shape[0]
    pieces = []
    for i in range(stacked.shape[1]):
        hist = np.zeros(params.k2)
        for value in stacked[:, i]:
            idx = min(int(value * params.k2), params.k2 - 1)
            hist[idx] += 1
        pieces.append(hist / t)
    return np.concatenate(pieces)


def uniform_flow(u_val, v_val, width=8, height=8):
    return FlowField(u=np.full((height, width), float(u_val)), v=np.full((height, width), float(v_val)))


class TestOrientationBin:
    def test_east(self):
        assert orientation_bin(1.0, 0.0, 4) == 0

    def test_down_is_90_degrees(self):
        assert orientation_bin(0.0, 1.0, 4) == 1

    def test_west_k8(self):
        assert orientation_bin(-1.0, 0.0, 8) == 4

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            orientation_bin(0.0, 0.0, 4)
        with pytest.raises(ZeroVector):
            orientation_bin(1e-8, 0.0, 4)

    def test_full_circle_coverage(self):
        k1 = 8
        for b in range(k1):
            angle = np.radians(360.0 * (b + 0.5) / k1)
            assert orientation_bin(np.cos(angle), np.sin(angle), k1) == b


class TestGridVector:
    def test_single_patch_east(self):
        params = StaParams(m=1, n=1, k1=4, k2=2, weighted=False)
        g = grid_vector(uniform_flow(1, 0), BoundingBox(0, 0, 8, 8), params)
        assert g.tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_zero_flow_gives_zero_vector(self):
        params = StaParams(m=2, n=2, k1=4, k2=2)
        g = grid_vector(uniform_flow(0, 0), BoundingBox(0, 0, 8, 8), params)
        assert np.array_equal(g, np.zeros(16))

    def test_two_patches_left_right(self):
        params = StaParams(m=2, n=1, k1=4, k2=2, weighted=False)
        u = np.zeros((2, 4))
        v = np.zeros((2, 4))
        u[:, :2] = 1.0  # left half points east
        v[:, 2:] = 1.0  # right half points down
        g = grid_vector(FlowField(u=u, v=v), BoundingBox(0, 0, 4, 2), params)
        assert g.tolist() == [1, 0, 0, 0, 0, 1, 0, 0]

    def test_box_clamped_to_frame(self):
        params = StaParams(m=2, n=2, k1=4, k2=2)
        g = grid_vector(uniform_flow(1, 0), BoundingBox(-5, -5, 18, 18), params)
        assert g.shape == (16,)
        assert g[0] == 1.0

    def test_box_too_small(self):
        params = StaParams(m=4, n=4, k1=4, k2=2)
        with pytest.raises(BoxTooSmall):
            grid_vector(uniform_flow(1, 0), BoundingBox(0, 0, 3, 3), params)

    def test_patch_slices_sum_to_one_or_zero(self):
        rng = np.random.default_rng(4)
        flow = FlowField(u=rng.normal(size=(12, 16)), v=rng.normal(size=(12, 16)))
        params = StaParams(m=3, n=2, k1=5, k2=2)
        g = grid_vector(flow, BoundingBox(0, 0, 16, 12), params).reshape(6, 5)
        sums = g.sum(axis=1)
        assert np.all((np.abs(sums - 1.0) < 1e-12) | (sums == 0.0))

    def test_magnitude_scale_invariance_exact(self):
        rng = np.random.default_rng(5)
        u = rng.normal(size=(10, 10))
        v = rng.normal(size=(10, 10))
        params = StaParams(m=2, n=2, k1=4, k2=2, weighted=True)
        box = BoundingBox(0, 0, 10, 10)
        g1 = grid_vector(FlowField(u=u, v=v), box, params)
        for c in (0.25, 2.0, 64.0):  # powers of two keep the float quotients bit-identical
            g2 = grid_vector(FlowField(u=c * u, v=c * v), box, params)
            assert np.array_equal(g1, g2)

    def test_rotation_covariance_quarter_turn(self):
        rng = np.random.default_rng(6)
        u = rng.normal(size=(9, 9))
        v = rng.normal(size=(9, 9))
        params = StaParams(m=1, n=1, k1=4, k2=2, weighted=False)
        box = BoundingBox(0, 0, 9, 9)
        base = grid_vector(FlowField(u=u, v=v), box, params)
        turned = grid_vector(FlowField(u=-v, v=u), box, params)  # +90 deg, exact
        assert np.allclose(turned, np.roll(base, 1), atol=1e-15)


class TestSta1:
    def test_single_grid_vector_identity(self):
        g = np.asarray([0.2, 0.8])
        d = sta1([g])
        assert d.kind == "sta1"
        assert np.array_equal(d.values, g)

    def test_uniform_mean(self):
        d = sta1([np.asarray([0.0, 1.0]), np.asarray([1.0, 0.0])])
        assert d.values.tolist() == [0.5, 0.5]

    def test_explicit_weights(self):
        d = sta1([np.asarray([0.0, 1.0]), np.asarray([1.0, 0.0])], weights=[0.25, 0.75])
        assert d.values.tolist() == [0.75, 0.25]

    def test_empty_rejected(self):
        with pytest.raises(Empty):
            sta1([])

    def test_weight_mismatch(self):
        with pytest.raises(WeightMismatch):
            sta1([np.zeros(2)], weights=[0.5, 0.5])
        with pytest.raises(WeightMismatch):
            sta1([np.zeros(2), np.zeros(2)], weights=[0.9, 0.9])


class TestSta2:
    def test_single_push(self):
        params = StaParams(m=1, n=1, k1=2, k2=2)
        acc = Sta2Accumulator(params)
        acc.push(np.asarray([0.9, 0.1]))
        assert acc.t == 1
        assert acc.counts[0].tolist() == [0, 1]
        assert acc.counts[1].tolist() == [1, 0]

    def test_bin_edge_rule(self):
        # k2=2 bins are [0, 0.5) and [0.5, 1.0]; 0.5 goes right, 1.0 stays in the last bin
        params = StaParams(m=1, n=1, k1=1, k2=2)
        acc = Sta2Accumulator(params)
        for val in (0.0, 0.5, 1.0):
            acc.push(np.asarray([val]))
        assert acc.counts[0].tolist() == [1, 2]
        extracted = acc.extract()
        assert np.allclose(extracted.values, [1 / 3, 2 / 3])

    def test_order_invariance(self):
        params = StaParams(m=1, n=2, k1=2, k2=3)
        rng = np.random.default_rng(9)
        vectors = [rng.uniform(0, 1, size=params.grid_length) for _ in range(6)]
        a = Sta2Accumulator(params)
        b = Sta2Accumulator(params)
        for g in vectors:
            a.push(g)
        for g in reversed(vectors):
            b.push(g)
        assert np.array_equal(a.extract().values, b.extract().values)

    def test_t1_extracts_one_hot_slices(self):
        params = StaParams(m=2, n=1, k1=2, k2=4)
        acc = Sta2Accumulator(params)
        acc.push(np.asarray([0.0, 0.3, 0.6, 1.0]))
        values = acc.extract().values.reshape(params.grid_length, params.k2)
        assert np.array_equal(values.sum(axis=1), np.ones(params.grid_length))
        assert set(np.unique(values)) == {0.0, 1.0}

    def test_descriptor_length_paper_best(self):
        params = StaParams(m=8, n=6, k1=8, k2=5)
        acc = Sta2Accumulator(params)
        acc.push(np.zeros(params.grid_length))
        assert len(acc.extract()) == 1920

    def test_length_mismatch(self):
        acc = Sta2Accumulator(StaParams(m=1, n=1, k1=4, k2=2))
        with pytest.raises(LengthMismatch):
            acc.push(np.zeros(5))

    def test_out_of_range(self):
        acc = Sta2Accumulator(StaParams(m=1, n=1, k1=2, k2=2))
        with pytest.raises(OutOfRange):
            acc.push(np.asarray([0.5, 1.2]))
        with pytest.raises(OutOfRange):
            acc.push(np.asarray([-0.1, 0.5]))

    def test_empty_extract(self):
        with pytest.raises(Empty):
            Sta2Accumulator(StaParams()).extract()

    def test_incremental_equals_brute_force(self):
        rng = np.random.default_rng(1234)
        for _ in range(100):
            params = StaParams(
                m=int(rng.integers(1, 4)),
                n=int(rng.integers(1, 4)),
                k1=int(rng.integers(1, 5)),
                k2=int(rng.integers(1, 5)),
            )
            t = int(rng.integers(1, 11))
            vectors = [rng.uniform(0, 1, size=params.grid_length) for _ in range(t)]
            acc = Sta2Accumulator(params)
            for g in vectors:
                acc.push(g)
            assert np.array_equal(acc.extract().values, sta2_brute_force(vectors, params))

    def test_functional_wrappers(self):
        params = StaParams(m=1, n=1, k1=2, k2=2)
        acc = Sta2Accumulator(params)
        acc = sta2_push(acc, np.asarray([0.9, 0.1]))
        descriptor = sta2_extract(acc)
        assert descriptor.values.tolist() == [0.0, 1.0, 1.0, 0.0]

    def test_slice_normalization(self):
        params = StaParams(m=2, n=2, k1=3, k2=4)
        rng = np.random.default_rng(10)
        acc = Sta2Accumulator(params)
        for _ in range(7):
            acc.push(rng.uniform(0, 1, size=params.grid_length))
        slices = acc.extract().values.reshape(params.grid_length, params.k2)
        assert np.all(np.abs(slices.sum(axis=1) - 1.0) < 1e-12)
