import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from navsim.instruction import SegmentFeature
from navsim.matching import (
    ControllerState,
    CosineMatcher,
    DimensionMismatchError,
    NeutralMatcher,
    ObservationFeature,
    OracleMatcher,
    ScoreFeature,
    ThresholdController,
    controller_step,
    matcher_from_config,
    score_pair,
)

unit = st.floats(min_value=0.0, max_value=1.0)


def seg(vector=None, aimed_node_id=None):
    return SegmentFeature(vector if vector is not None else np.zeros(4),
                          aimed_node_id=aimed_node_id)


class TestScorePair:
    def test_cosine_identical_vectors(self):
        v = np.array([0.5, 0.5, 0.5, 0.5])
        assert score_pair(CosineMatcher(), ObservationFeature(v), seg(v)) == pytest.approx(1.0)

    def test_cosine_orthogonal(self):
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        assert score_pair(CosineMatcher(), ObservationFeature(a), seg(b)) == pytest.approx(0.5)

    def test_cosine_opposite(self):
        a = np.array([1.0, 0.0])
        assert score_pair(CosineMatcher(), ObservationFeature(a), seg(-a)) == pytest.approx(0.0)

    def test_cosine_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            score_pair(CosineMatcher(), ObservationFeature(np.zeros(3)), seg(np.zeros(5)))

    def test_oracle_fires_only_at_ground_truth(self):
        matcher = OracleMatcher()
        at_landmark = ObservationFeature(np.zeros(4), node_id=7)
        elsewhere = ObservationFeature(np.zeros(4), node_id=8)
        assert score_pair(matcher, at_landmark, seg(aimed_node_id=7)) == 1.0
        assert score_pair(matcher, elsewhere, seg(aimed_node_id=7)) == 0.0

    def test_oracle_without_metadata_scores_zero(self):
        assert OracleMatcher().score(ObservationFeature(np.zeros(4)), seg()) == 0.0

    def test_neutral(self):
        assert NeutralMatcher().score(ObservationFeature(np.zeros(4)), seg()) == 0.5

    def test_out_of_range_matcher_rejected(self):
        class Bad:
            def score(self, feature, segment):
                return 1.5

        with pytest.raises(ValueError):
            score_pair(Bad(), ObservationFeature(np.zeros(2)), seg(np.zeros(2)))

    @given(st.lists(st.floats(min_value=-5, max_value=5), min_size=4, max_size=4),
           st.lists(st.floats(min_value=-5, max_value=5), min_size=4, max_size=4))
    def test_cosine_always_in_unit_interval(self, a, b):
        s = CosineMatcher().score(ObservationFeature(np.array(a)), seg(np.array(b)))
        assert 0.0 <= s <= 1.0


class TestThresholdController:
    def test_fires_on_high_scores(self):
        ctrl = ThresholdController(theta=0.5)
        decision, _ = controller_step(ctrl, ScoreFeature(0.9, 0.9), ControllerState())
        assert decision == 1

    def test_one_low_score_blocks(self):
        ctrl = ThresholdController(theta=0.5)
        decision, _ = controller_step(ctrl, ScoreFeature(0.9, 0.1), ControllerState())
        assert decision == 0

    def test_debounce(self):
        # hand trace: fire, then an immediate perfect score must wait out m_min=2
        ctrl = ThresholdController(theta=0.5, min_steps_between_fires=2)
        hot = ScoreFeature(1.0, 1.0)
        decision, state = ctrl.step(hot, ControllerState())
        assert decision == 1
        decision, state = ctrl.step(hot, state)
        assert decision == 0  # 1 step since fire < 2
        decision, state = ctrl.step(hot, state)
        assert decision == 1  # 2 steps since fire

    def test_default_m_min_allows_next_step_fire(self):
        ctrl = ThresholdController()
        hot = ScoreFeature(1.0, 1.0)
        _, state = ctrl.step(hot, ControllerState())
        decision, _ = ctrl.step(hot, state)
        assert decision == 1

    @given(s1=unit, s2=unit, bump1=unit, bump2=unit,
           since=st.one_of(st.none(), st.integers(min_value=0, max_value=5)))
    def test_monotone_in_scores(self, s1, s2, bump1, bump2, since):
        ctrl = ThresholdController(theta=0.5, min_steps_between_fires=2)
        hidden = ControllerState(steps_since_fire=since)
        low, _ = ctrl.step(ScoreFeature(s1, s2), hidden)
        high, _ = ctrl.step(ScoreFeature(min(1.0, s1 + bump1), min(1.0, s2 + bump2)), hidden)
        assert high >= low


class TestConfig:
    def test_known_names(self):
        assert isinstance(matcher_from_config("oracle"), OracleMatcher)
        assert isinstance(matcher_from_config("cosine"), CosineMatcher)
        assert isinstance(matcher_from_config("neutral"), NeutralMatcher)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown matcher"):
            matcher_from_config("bert")

    def test_score_feature_range_enforced(self):
        with pytest.raises(ValueError):
            ScoreFeature(1.2, 0.0)
