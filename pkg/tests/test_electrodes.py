import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actinmachine import electrodes as el
from actinmachine.automaton import AutomatonField, AutomatonParams
from actinmachine.electrodes import (
    Electrode,
    RecordingParams,
    bits_to_state,
    load_electrodes,
    potential,
    run_trial,
    save_electrodes,
    state_to_bits,
    stimulate,
)
from actinmachine.errors import CoordinateError, DimensionError, FormatError
from actinmachine.grid import ConductiveMatrix, rasterize_segments


def full_field(dims):
    return AutomatonField.resting(ConductiveMatrix(np.ones(dims, dtype=bool)))


class TestPotential:
    def test_all_resting_is_zero(self):
        f = full_field((9, 9, 9))
        assert potential(f, Electrode(0, (4, 4, 4))) == 0

    def test_single_excited_at_position_is_one(self):
        f = full_field((9, 9, 9))
        f.excited[4, 4, 4] = True
        assert potential(f, Electrode(0, (4, 4, 4))) == 1

    def test_distance_exactly_radius_excluded(self):
        f = full_field((11, 11, 11))
        f.excited[9, 5, 5] = True  # distance exactly 4 from (5,5,5)
        assert potential(f, Electrode(0, (5, 5, 5), r_e=4)) == 0
        f.excited[8, 5, 5] = True  # distance 3
        assert potential(f, Electrode(0, (5, 5, 5), r_e=4)) == 1

    def test_monotone_in_excited_set(self):
        rng = np.random.default_rng(0)
        f = full_field((9, 9, 9))
        e = Electrode(0, (4, 4, 4))
        mask = rng.random((9, 9, 9)) < 0.2
        f.excited[:] = mask
        before = potential(f, e)
        f.excited[rng.random((9, 9, 9)) < 0.2] = True
        assert potential(f, e) >= before

    def test_out_of_bounds_electrode_rejected(self):
        f = full_field((4, 4, 4))
        with pytest.raises(CoordinateError):
            potential(f, Electrode(0, (9, 0, 0)))


class TestStimulate:
    def test_all_zero_bits_leave_field_unchanged(self):
        f = full_field((9, 9, 9))
        stimulate(f, [Electrode(0, (2, 2, 2)), Electrode(1, (6, 6, 6))], "00")
        assert f.n_excited == 0

    def test_one_hot_excites_only_that_ball(self):
        f = full_field((20, 9, 9))
        e0 = Electrode(0, (3, 4, 4))
        e1 = Electrode(1, (16, 4, 4))
        stimulate(f, [e0, e1], "10")
        assert potential(f, e0) > 0
        assert potential(f, e1) == 0

    def test_all_ones_is_union_of_balls(self):
        e0 = Electrode(0, (3, 4, 4))
        e1 = Electrode(1, (16, 4, 4))
        both = full_field((20, 9, 9))
        stimulate(both, [e0, e1], "11")
        only0 = full_field((20, 9, 9))
        stimulate(only0, [e0, e1], "10")
        only1 = full_field((20, 9, 9))
        stimulate(only1, [e0, e1], "01")
        assert np.array_equal(both.excited, only0.excited | only1.excited)

    def test_length_mismatch_rejected(self):
        f = full_field((4, 4, 4))
        with pytest.raises(DimensionError):
            stimulate(f, [Electrode(0, (1, 1, 1))], "10")


class TestEncoding:
    def test_msb_first(self):
        assert bits_to_state("100000") == 32
        assert bits_to_state("000001") == 1
        assert state_to_bits(32, 6) == "100000"

    @given(st.integers(1, 12), st.data())
    @settings(max_examples=60, deadline=None)
    def test_round_trip(self, k, data):
        v = data.draw(st.integers(0, (1 << k) - 1))
        assert bits_to_state(state_to_bits(v, k)) == v


class TestRunTrial:
    def test_zero_input_gives_zero_raster_and_states(self, tube, quick_params, quick_rec):
        matrix, near, far = tube
        trial = run_trial(matrix, quick_params, quick_rec, [near, far], "00")
        assert not trial.spikes.any()
        assert not trial.potentials.any()
        assert not trial.states.any()

    def test_far_electrode_spikes_at_positive_time(self, tube, quick_params, quick_rec):
        matrix, near, far = tube
        trial = run_trial(matrix, quick_params, quick_rec, [near, far], "10")
        far_times = np.nonzero(trial.spikes[1])[0]
        assert far_times.size > 0
        # the wave needs many steps to cross the tube: distance 37, speed <= r
        assert far_times[0] + 1 >= (37 - near.r_e - far.r_e) / quick_params.r

    def test_disconnected_component_never_spikes(self, quick_params, quick_rec):
        matrix = rasterize_segments(
            (40, 9, 9), [((0, 4, 4), (15, 4, 4)), ((24, 4, 4), (39, 4, 4))], 2
        )
        a = Electrode(0, (2, 4, 4))
        mid_a = Electrode(1, (10, 4, 4))
        b = Electrode(2, (37, 4, 4))
        trial = run_trial(matrix, quick_params, quick_rec, [a, mid_a, b], "100")
        assert trial.spikes[1].any()  # wave crosses component A
        assert not trial.spikes[2].any()  # it cannot reach component B

    def test_spike_implies_potential_at_threshold(self, tube, quick_params):
        matrix, near, far = tube
        rec = RecordingParams(spike_threshold=3, T=50)
        trial = run_trial(matrix, quick_params, rec, [near, far], "11")
        fired = trial.spikes.astype(bool)
        assert (trial.potentials[fired] >= rec.spike_threshold).all()
        assert (trial.potentials[~fired] < rec.spike_threshold).all()

    def test_states_encode_spike_bits(self, tube, quick_params, quick_rec):
        matrix, near, far = tube
        trial = run_trial(matrix, quick_params, quick_rec, [near, far], "10")
        for t in range(trial.T):
            bits = f"{trial.spikes[0, t]}{trial.spikes[1, t]}"
            assert trial.states[t] == bits_to_state(bits)

    def test_deterministic(self, tube, quick_params, quick_rec):
        matrix, near, far = tube
        a = run_trial(matrix, quick_params, quick_rec, [near, far], "11")
        b = run_trial(matrix, quick_params, quick_rec, [near, far], "11")
        assert np.array_equal(a.spikes, b.spikes)
        assert np.array_equal(a.potentials, b.potentials)
        assert np.array_equal(a.states, b.states)

    def test_rising_edge_only_marks_crossings(self, tube, quick_params):
        matrix, near, far = tube
        level = run_trial(
            matrix, quick_params, RecordingParams(T=50), [near, far], "10"
        )
        edge = run_trial(
            matrix, quick_params, RecordingParams(T=50, rising_edge=True), [near, far], "10"
        )
        assert edge.spikes.sum() <= level.spikes.sum()
        # an edge spike is always also a level spike
        assert not (edge.spikes & ~level.spikes).any()


class TestConfigFiles:
    def test_round_trip(self, tmp_path):
        els = [Electrode(0, (3, 4, 5), r_e=4), Electrode(1, (10, 11, 12), r_e=4)]
        path = tmp_path / "e.txt"
        save_electrodes(els, path, comment="probes")
        assert load_electrodes(path) == els

    def test_bundled_families_load(self):
        from importlib import resources

        for name, count in (("electrodes_family1.txt", 10), ("electrodes_family2.txt", 8)):
            with resources.as_file(
                resources.files("actinmachine.data").joinpath(name)
            ) as path:
                els = load_electrodes(path)
            assert len(els) == count
            assert [e.id for e in els] == list(range(count))
            assert all(e.r_e == 4 for e in els)

    def test_missing_radius_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1 2 3\n")
        with pytest.raises(FormatError):
            load_electrodes(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("RADIUS 4\n0 1 2\n")
        with pytest.raises(FormatError):
            load_electrodes(path)


class TestCsvExports:
    def test_raster_csv_shape(self, tmp_path):
        raster = el.SpikeRaster(
            electrode_id=2,
            inputs=np.array([0, 1, 2, 3]),
            data=np.array([[0, 1], [1, 0], [1, 1], [0, 0]]),
        )
        path = tmp_path / "r.csv"
        el.write_raster_csv(raster, path, comment="h")
        lines = path.read_text().splitlines()
        assert lines[0] == "# h"
        assert lines[1] == "input,1,2"
        assert lines[2] == "0,0,1"
        assert len(lines) == 6

    def test_trial_csv(self, tmp_path):
        values = np.array([[5, 0, 2]])
        path = tmp_path / "p.csv"
        el.write_trial_csv(values, [Electrode(3, (0, 0, 0))], path)
        assert path.read_text() == "electrode,1,2,3\n3,5,0,2\n"
