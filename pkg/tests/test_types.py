import numpy as np
import pytest

from gdpf import (
    FilterError,
    Hyperparameters,
    Measurement,
    audit_filter_state,
    new_filter_state,
    validate_hyperparameters,
)
from dataclasses import replace

from conftest import make_cluster


class TestValidateHyperparameters:
    def test_defaults_accepted(self):
        h = Hyperparameters(alpha=1.0, gamma=0.1, a=1.0, b=1.0)
        assert validate_hyperparameters(h) is h

    def test_alpha_zero_rejected(self):
        with pytest.raises(ValueError, match="alpha must be > 0"):
            validate_hyperparameters(Hyperparameters(alpha=0.0))

    def test_gamma_above_one_rejected(self):
        with pytest.raises(ValueError, match=r"gamma must be in \(0,1\)"):
            validate_hyperparameters(Hyperparameters(gamma=1.5))

    @pytest.mark.parametrize(
        "field,value,fragment",
        [
            ("a", -1.0, "a must be > 0"),
            ("b", 0.0, "b must be > 0"),
            ("process_noise_scale", -0.1, "process_noise_scale must be >= 0"),
            ("survival_prob", 0.0, "survival_prob must be in (0,1]"),
            ("survival_prob", 1.2, "survival_prob must be in (0,1]"),
            ("assoc_gain", 0.0, "assoc_gain must be in (0,1]"),
            ("count_decay", -0.2, "count_decay must be in [0,1]"),
            ("count_decay", 1.1, "count_decay must be in [0,1]"),
            ("birth_existence", 0.0, "birth_existence must be in (0,1]"),
            ("new_cluster_likelihood", 0.0, "new_cluster_likelihood must be > 0"),
            ("dt", 0.0, "dt must be > 0"),
            ("link_scale", 0.0, "link_scale must be > 0"),
            ("link_floor", 0.0, "link_floor must be in (0,1]"),
            ("v_max", 0.0, "v_max must be > 0"),
        ],
    )
    def test_each_bound_named(self, field, value, fragment):
        with pytest.raises(ValueError) as err:
            validate_hyperparameters(replace(Hyperparameters(), **{field: value}))
        assert fragment in str(err.value)

    def test_meas_noise_must_be_spd(self):
        with pytest.raises(ValueError, match="positive definite"):
            validate_hyperparameters(
                Hyperparameters(meas_noise_cov=np.array([[1.0, 0.0], [0.0, -1.0]]))
            )
        with pytest.raises(ValueError, match="symmetric"):
            validate_hyperparameters(
                Hyperparameters(meas_noise_cov=np.array([[1.0, 0.5], [0.0, 1.0]]))
            )


class TestMeasurement:
    def test_rejects_extent_and_cell_together(self):
        with pytest.raises(ValueError, match="mutually exclusive"):
            Measurement(frame=0, position=(0, 0), extent=(1, 1, 0), cell_index=(0, 0))

    def test_rejects_nonfinite_position(self):
        with pytest.raises(ValueError, match="finite"):
            Measurement(frame=0, position=(np.nan, 0.0))

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError, match="weight"):
            Measurement(frame=0, position=(0, 0), weight=0.0)

    def test_plain_position_allowed(self):
        m = Measurement(frame=3, position=(1.0, 2.0))
        assert m.extent is None and m.cell_index is None
        assert m.position.shape == (2,)


class TestNewFilterState:
    def test_empty_initialization(self, hyper):
        s = new_filter_state(hyper)
        assert len(s.clusters) == 0
        assert s.frame == 0
        assert s.next_id == 0
        assert s.last_assignments == {}

    def test_invalid_hyper_propagates(self):
        with pytest.raises(ValueError, match="alpha"):
            new_filter_state(Hyperparameters(alpha=-1.0))

    def test_states_are_independent(self, hyper):
        s1 = new_filter_state(hyper)
        s2 = new_filter_state(hyper)
        s1.clusters[0] = make_cluster(0, 0.0, 0.0)
        s1.next_id = 1
        assert len(s2.clusters) == 0
        assert s2.next_id == 0


class TestAudit:
    def test_clean_state_passes(self, hyper):
        s = new_filter_state(hyper)
        s.clusters[0] = make_cluster(0, 1.0, 2.0)
        s.next_id = 1
        audit_filter_state(s)

    def test_detects_asymmetric_covariance(self, hyper):
        s = new_filter_state(hyper)
        c = make_cluster(0, 1.0, 2.0)
        c.state_cov = c.state_cov.copy()
        c.state_cov[0, 1] = 1e-3
        s.clusters[0] = c
        s.next_id = 1
        with pytest.raises(FilterError, match="asymmetric"):
            audit_filter_state(s)

    def test_detects_id_ahead_of_counter(self, hyper):
        s = new_filter_state(hyper)
        s.clusters[5] = make_cluster(5, 0.0, 0.0)
        s.next_id = 3
        with pytest.raises(FilterError, match="next_id"):
            audit_filter_state(s)

    def test_detects_existence_out_of_range(self, hyper):
        s = new_filter_state(hyper)
        c = make_cluster(0, 0.0, 0.0)
        c.existence = 1.5
        s.clusters[0] = c
        s.next_id = 1
        with pytest.raises(FilterError, match="existence"):
            audit_filter_state(s)
