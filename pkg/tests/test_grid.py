import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy import ndimage

from actinmachine import grid
from actinmachine.errors import (
    DimensionError,
    EmptyInputError,
    FormatError,
    GenerationError,
)


def rgb_slice(ny, nx, fill=(0, 0, 0)):
    s = np.zeros((ny, nx, 3), dtype=np.uint8)
    s[..., 0], s[..., 1], s[..., 2] = fill
    return s


class TestThreshold:
    def test_pixel_just_above_thresholds_conducts(self):
        s = rgb_slice(1, 1, (41, 20, 20))
        m = grid.threshold_image_stack([s], grid.RgbThreshold(40, 19, 19))
        assert m.occupancy[0, 0, 0]

    def test_equal_red_channel_does_not_conduct(self):
        s = rgb_slice(1, 1, (40, 20, 20))
        m = grid.threshold_image_stack([s], grid.RgbThreshold(40, 19, 19))
        assert not m.occupancy[0, 0, 0]

    def test_black_pixel_never_conducts(self):
        s = rgb_slice(2, 3)
        m = grid.threshold_image_stack([s], grid.RgbThreshold(0, 0, 0))
        assert not m.occupancy.any()

    def test_axis_order_is_x_y_z(self):
        s0 = rgb_slice(4, 5)
        s1 = rgb_slice(4, 5)
        s1[2, 3] = (255, 255, 255)  # row j=2, column i=3 of slice z=1
        m = grid.threshold_image_stack([s0, s1])
        assert m.dims == (5, 4, 2)
        assert m.occupancy[3, 2, 1]
        assert m.n_conductive == 1

    def test_mismatched_slices_rejected(self):
        with pytest.raises(DimensionError):
            grid.threshold_image_stack([rgb_slice(4, 5), rgb_slice(5, 4)])

    def test_empty_stack_rejected(self):
        with pytest.raises(EmptyInputError):
            grid.threshold_image_stack([])

    @given(
        rgb=st.tuples(*[st.integers(0, 255)] * 3),
        th=st.tuples(*[st.integers(0, 255)] * 3),
        bump=st.tuples(*[st.integers(0, 40)] * 3),
    )
    @settings(max_examples=100, deadline=None)
    def test_raising_thresholds_is_monotone(self, rgb, th, bump):
        s = rgb_slice(1, 1, rgb)
        low = grid.threshold_image_stack([s], grid.RgbThreshold(*th))
        raised = tuple(min(255, t + b) for t, b in zip(th, bump))
        high = grid.threshold_image_stack([s], grid.RgbThreshold(*raised))
        # a voxel can only be lost, never gained
        assert not (high.occupancy & ~low.occupancy).any()


class TestRawFormat:
    @pytest.mark.parametrize("encoding", ["byte", "packed"])
    def test_round_trip_identity(self, tmp_path, encoding):
        rng = np.random.default_rng(7)
        m = grid.ConductiveMatrix(rng.random((4, 4, 2)) < 0.4)
        path = tmp_path / "m.vox"
        grid.save_raw_matrix(m, path, encoding=encoding)
        assert grid.load_raw_matrix(path) == m

    def test_all_zero_round_trip(self, tmp_path):
        m = grid.ConductiveMatrix(np.zeros((8, 8, 8), dtype=bool))
        grid.save_raw_matrix(m, tmp_path / "z.vox")
        loaded = grid.load_raw_matrix(tmp_path / "z.vox")
        assert not loaded.occupancy.any()

    @given(
        dims=st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(1, 5)),
        seed=st.integers(0, 2**31),
        encoding=st.sampled_from(["byte", "packed"]),
    )
    @settings(
        max_examples=60,
        deadline=None,
        suppress_health_check=[HealthCheck.function_scoped_fixture],
    )
    def test_round_trip_random_matrices(self, tmp_path, dims, seed, encoding):
        # the file is fully rewritten per example, so sharing tmp_path is safe
        rng = np.random.default_rng(seed)
        m = grid.ConductiveMatrix(rng.random(dims) < 0.5)
        path = tmp_path / "roundtrip.vox"
        grid.save_raw_matrix(m, path, encoding=encoding)
        assert grid.load_raw_matrix(path) == m

    def test_truncated_payload_reports_offset(self, tmp_path):
        path = tmp_path / "t.vox"
        path.write_bytes(b"VOXELS 2 2 2 byte\n" + b"\x00" * 7)
        with pytest.raises(FormatError) as err:
            grid.load_raw_matrix(path)
        assert err.value.offset is not None

    def test_malformed_header_rejected(self, tmp_path):
        path = tmp_path / "h.vox"
        path.write_bytes(b"PIXELS 2 2 2 byte\n" + b"\x00" * 8)
        with pytest.raises(FormatError):
            grid.load_raw_matrix(path)

    def test_bad_voxel_byte_rejected(self, tmp_path):
        path = tmp_path / "b.vox"
        path.write_bytes(b"VOXELS 2 1 1 byte\n" + bytes([0, 2]))
        with pytest.raises(FormatError) as err:
            grid.load_raw_matrix(path)
        assert err.value.offset == len(b"VOXELS 2 1 1 byte\n") + 1

    def test_unknown_encoding_rejected(self, tmp_path):
        path = tmp_path / "e.vox"
        path.write_bytes(b"VOXELS 1 1 1 hex\n\x00")
        with pytest.raises(FormatError):
            grid.load_raw_matrix(path)

    def test_packed_padding_must_be_zero(self, tmp_path):
        path = tmp_path / "p.vox"
        # 3x1x1 slice -> one byte per slice, bits 3..7 are padding
        path.write_bytes(b"VOXELS 3 1 1 packed\n" + bytes([0b0001_0101]))
        with pytest.raises(FormatError):
            grid.load_raw_matrix(path)


class TestSynthetic:
    def test_same_spec_same_matrix(self):
        spec = grid.SyntheticNetworkSpec(dims=(24, 24, 8), segment_count=5, seed=3)
        assert grid.generate_synthetic(spec) == grid.generate_synthetic(spec)

    def test_different_seed_usually_differs(self):
        a = grid.generate_synthetic(
            grid.SyntheticNetworkSpec(dims=(24, 24, 8), segment_count=5, seed=3)
        )
        b = grid.generate_synthetic(
            grid.SyntheticNetworkSpec(dims=(24, 24, 8), segment_count=5, seed=4)
        )
        assert a != b

    def test_zero_segments_rejected(self):
        with pytest.raises(ValueError):
            grid.SyntheticNetworkSpec(dims=(8, 8, 8), segment_count=0)

    def test_degenerate_dims_rejected(self):
        with pytest.raises(GenerationError):
            grid.generate_synthetic(
                grid.SyntheticNetworkSpec(dims=(1, 1, 1), segment_count=1)
            )

    def test_spanning_tube_is_connected(self):
        m = grid.rasterize_segments((30, 7, 7), [((0, 3, 3), (29, 3, 3))], 1)
        assert m.occupancy[:, 3, 3].all()
        labels, n = ndimage.label(m.occupancy)
        assert n == 1

    def test_all_voxels_in_bounds_and_near_segments(self):
        spec = grid.SyntheticNetworkSpec(dims=(16, 12, 6), segment_count=4, seed=11)
        m = grid.generate_synthetic(spec)
        assert m.dims == (16, 12, 6)
        assert 0 < m.n_conductive <= 16 * 12 * 6

    def test_knn_placement_deterministic(self):
        spec = grid.SyntheticNetworkSpec(
            dims=(24, 24, 8),
            segment_count=8,
            seed=5,
            placement=grid.PLACEMENT_DELAUNAY,
        )
        assert grid.generate_synthetic(spec) == grid.generate_synthetic(spec)

    def test_tube_radius_is_exact(self):
        # A degenerate segment is a ball: voxels strictly farther than the
        # radius stay empty, voxels at exactly the radius are included.
        m = grid.rasterize_segments((9, 9, 9), [((4, 4, 4), (4, 4, 4))], 2)
        occ = m.occupancy
        assert occ[4, 4, 4] and occ[2, 4, 4] and occ[6, 4, 4]
        assert not occ[4 + 2, 4 + 2, 4]  # distance sqrt(8) > 2
        ii, jj, zz = np.nonzero(occ)
        d2 = (ii - 4) ** 2 + (jj - 4) ** 2 + (zz - 4) ** 2
        assert d2.max() <= 4


class TestConductiveMatrix:
    def test_out_of_bounds_is_nonconductive(self):
        m = grid.ConductiveMatrix(np.ones((2, 2, 2), dtype=bool))
        assert not m.is_conductive((-1, 0, 0))
        assert not m.is_conductive((0, 0, 2))
        assert m.is_conductive((1, 1, 1))

    def test_occupancy_is_frozen(self):
        m = grid.ConductiveMatrix(np.ones((2, 2, 2), dtype=bool))
        with pytest.raises(ValueError):
            m.occupancy[0, 0, 0] = False

    def test_non_3d_rejected(self):
        with pytest.raises(DimensionError):
            grid.ConductiveMatrix(np.ones((2, 2), dtype=bool))
