"""Unit tests for the decision core, with independent oracles."""

import math

import pytest

from modalsim.model import (
    ALL_MODES,
    Agent,
    Criterion,
    Decision,
    Mode,
    ModeCriterionMatrix,
    PriorityVector,
    TripHistory,
    available_modes,
    choose_mode,
    effective_filter,
    habit_strength,
    perceive,
    score,
    usual_mode,
)

# ---------------------------------------------------------------- oracles


def oracle_score(priorities: PriorityVector, values) -> float:
    """Independent scoring: exact elementwise multiply-and-sum via fsum."""
    return math.fsum(v * p for v, p in zip(values, priorities.values))


def oracle_argmax(basis: ModeCriterionMatrix, priorities: PriorityVector,
                  candidates, current: Mode) -> Mode:
    """Exhaustive enumeration with the documented tie-break: prefer the
    current mode among ties, then canonical order."""
    scored = [(oracle_score(priorities, basis.row(m)), m) for m in candidates]
    top = max(s for s, _ in scored)
    tied = [m for s, m in scored if s == top]
    if current in tied:
        return current
    return min(tied)


# ------------------------------------------------------------ habit_strength


def test_habit_strength_single_mode_history():
    h = TripHistory([Mode.CAR] * 10)
    assert habit_strength(h, Mode.CAR) == 1.0


def test_habit_strength_exact_frequency():
    h = TripHistory([Mode.CAR] * 5 + [Mode.BIKE] * 5)
    assert habit_strength(h, Mode.CAR) == 0.5


def test_habit_strength_empty_history():
    assert habit_strength(TripHistory(), Mode.BUS) == 0.0


def test_habit_strength_eviction():
    h = TripHistory([Mode.CAR] * 20, capacity=20)
    h.append(Mode.BIKE)
    assert len(h) == 20
    assert habit_strength(h, Mode.CAR) == 19 / 20
    assert habit_strength(h, Mode.BIKE) == 1 / 20


# ---------------------------------------------------------------- usual_mode


def test_usual_mode_strict_majority():
    h = TripHistory([Mode.BUS, Mode.BUS, Mode.BIKE])
    assert usual_mode(h, Mode.WALK) is Mode.BUS


def test_usual_mode_empty_falls_back():
    assert usual_mode(TripHistory(), Mode.CAR) is Mode.CAR


def test_usual_mode_tie_breaks_by_recency():
    h = TripHistory([Mode.BIKE, Mode.BUS])
    assert usual_mode(h, Mode.WALK) is Mode.BUS
    h2 = TripHistory([Mode.BUS, Mode.BIKE])
    assert usual_mode(h2, Mode.WALK) is Mode.BIKE


# ----------------------------------------------------------- effective_filter


def test_effective_filter_neutral_endpoint():
    proto = ModeCriterionMatrix.filter_matrix([[1.4] * 6] * 4)
    assert effective_filter(proto, 0.0) == ModeCriterionMatrix.identity_filter()


def test_effective_filter_prototype_endpoint():
    proto = ModeCriterionMatrix.filter_matrix([[0.7, 1.1, 1.4, 2.0, 0.2, 1.0]] * 4)
    assert effective_filter(proto, 1.0) == proto


def test_effective_filter_midpoint():
    proto = ModeCriterionMatrix.filter_matrix([[1.4] * 6] * 4)
    blended = effective_filter(proto, 0.5)
    assert blended.value(Mode.BIKE, Criterion.ECOLOGY) == pytest.approx(1.2, abs=1e-12)


def test_effective_filter_rejects_bad_habit():
    proto = ModeCriterionMatrix.identity_filter()
    with pytest.raises(ValueError):
        effective_filter(proto, 1.5)
    with pytest.raises(ValueError):
        effective_filter(proto, -0.1)


# ------------------------------------------------------------------ perceive


def test_perceive_identity_filter():
    obj = ModeCriterionMatrix.value_matrix([[6.0] * 6] * 4)
    assert perceive(obj, ModeCriterionMatrix.identity_filter()) == obj


def test_perceive_arithmetic():
    obj = ModeCriterionMatrix.value_matrix([[8.0] * 6] * 4)
    filt = ModeCriterionMatrix.filter_matrix([[0.5] * 6] * 4)
    assert perceive(obj, filt).value(Mode.CAR, Criterion.PRICE) == 4.0


def test_perceive_clamps_at_ten():
    obj = ModeCriterionMatrix.value_matrix([[6.0] * 6] * 4)
    filt = ModeCriterionMatrix.filter_matrix([[2.0] * 6] * 4)
    assert perceive(obj, filt).value(Mode.WALK, Criterion.TIME) == 10.0


# --------------------------------------------------------------------- score


def test_score_uniform_case():
    prio = PriorityVector.of([1.0] * 6)
    assert score(prio, [10.0] * 6) == 60.0


def test_score_zero_weights():
    prio = PriorityVector.of([0.0] * 6)
    assert score(prio, [3.0, 9.9, 0.1, 7.2, 5.5, 8.8]) == 0.0


def test_score_matches_dot_product_oracle():
    prio = PriorityVector.of([7.3, 0.2, 9.9, 4.4, 6.1, 2.8])
    values = [1.7, 8.8, 3.2, 9.1, 0.4, 5.6]
    assert score(prio, values) == pytest.approx(oracle_score(prio, values), abs=1e-9)


# ----------------------------------------------------------- available_modes


def _agent(distance=5.0, car=True, bus=True, current=Mode.CAR, usual=Mode.CAR,
           history=(), priorities=None):
    return Agent(
        id=0,
        priorities=priorities or PriorityVector.of([5.0] * 6),
        history=TripHistory(history),
        distance_km=distance,
        has_car_access=car,
        has_bus_access=bus,
        current_mode=current,
        initial_usual_mode=usual,
    )


def test_available_all_thresholds_satisfied():
    assert available_modes(_agent(distance=5.0)) == {Mode.WALK, Mode.BIKE, Mode.CAR, Mode.BUS}


def test_available_long_distance_bus_only():
    assert available_modes(_agent(distance=20.0, car=False)) == {Mode.BUS}


def test_available_walk_boundary_strict():
    avail = available_modes(_agent(distance=7.0))
    assert Mode.WALK not in avail
    assert Mode.BIKE in avail


def test_available_bike_boundary_strict():
    avail = available_modes(_agent(distance=15.0))
    assert Mode.BIKE not in avail


# --------------------------------------------------------------- choose_mode


def _flat_prototypes():
    return {m: ModeCriterionMatrix.identity_filter() for m in Mode}


def test_choose_mode_certain_habit_is_routine(uniform_objective):
    agent = _agent(history=[Mode.CAR] * 10)
    decision = choose_mode(agent, uniform_objective, _flat_prototypes(),
                           biases_on=True, habits_on=True, draws=(0.5, 0.3))
    assert decision == Decision(chosen=Mode.CAR, routine=True, biased=False,
                                constrained=False)


def test_choose_mode_unbiased_equals_enumeration_oracle():
    # Fixture with distinct scores; expected value computed by the oracle.
    obj = ModeCriterionMatrix.value_matrix([
        [9.0, 5.0, 8.0, 6.0, 6.0, 4.0],   # bike
        [6.0, 5.0, 7.0, 4.0, 5.0, 7.0],   # bus
        [2.0, 9.0, 3.0, 9.0, 8.0, 7.0],   # car
        [9.5, 5.0, 9.5, 2.5, 5.0, 7.0],   # walk
    ])
    prio = PriorityVector.of([5.6, 8.0, 5.6, 8.2, 7.8, 6.6])
    agent = _agent(distance=5.0, priorities=prio, history=[Mode.BUS])
    decision = choose_mode(agent, obj, _flat_prototypes(),
                           biases_on=False, habits_on=False, draws=(0.9, 0.9))
    expected = oracle_argmax(obj, prio, available_modes(agent), agent.current_mode)
    assert expected is Mode.CAR  # frozen from the oracle
    assert decision.chosen is expected
    assert not decision.routine and not decision.biased and not decision.constrained


def test_choose_mode_constrained_when_best_unreachable():
    # Bike scores strictly highest but the agent lives 20 km out.
    obj = ModeCriterionMatrix.value_matrix([
        [9.0, 9.0, 9.0, 9.0, 9.0, 9.0],
        [5.0, 5.0, 5.0, 5.0, 5.0, 5.0],
        [6.0, 6.0, 6.0, 6.0, 6.0, 6.0],
        [4.0, 4.0, 4.0, 4.0, 4.0, 4.0],
    ])
    agent = _agent(distance=20.0, car=True, bus=True)
    decision = choose_mode(agent, obj, _flat_prototypes(),
                           biases_on=False, habits_on=False, draws=(0.9, 0.9))
    assert decision.constrained
    assert decision.chosen is Mode.CAR  # best of the remaining set


def test_choose_mode_disruption_removes_usual():
    agent = _agent(history=[Mode.CAR] * 10)
    # Disruption draw below 1%: the usual car is off the table this tick.
    decision = choose_mode(agent, ModeCriterionMatrix.value_matrix([[5.0] * 6] * 4),
                           _flat_prototypes(), biases_on=False, habits_on=True,
                           draws=(0.005, 0.0))
    assert not decision.routine
    assert decision.chosen is not Mode.CAR


def test_choose_mode_disruption_skipped_when_only_option():
    agent = _agent(distance=20.0, car=False, bus=True, current=Mode.BUS,
                   usual=Mode.BUS, history=[Mode.BUS] * 5)
    decision = choose_mode(agent, ModeCriterionMatrix.value_matrix([[5.0] * 6] * 4),
                           _flat_prototypes(), biases_on=False, habits_on=True,
                           draws=(0.0, 0.9))
    assert decision.chosen is Mode.BUS
    assert not decision.routine  # disrupted, so no habit reuse


def test_choose_mode_biased_flag_only_when_outcome_changes():
    obj = ModeCriterionMatrix.value_matrix([
        [5.0] * 6,
        [5.2] * 6,
        [5.4] * 6,
        [5.0] * 6,
    ])
    # Bus users' prototype inflates bus past car.
    proto = {m: ModeCriterionMatrix.identity_filter() for m in Mode}
    proto[Mode.BUS] = ModeCriterionMatrix.filter_matrix(
        [[1.0] * 6, [1.3] * 6, [1.0] * 6, [1.0] * 6])
    agent = _agent(current=Mode.BUS, usual=Mode.BUS, history=[Mode.BUS] * 20)
    decision = choose_mode(agent, obj, proto, biases_on=True, habits_on=False,
                           draws=(0.9, 0.9))
    assert decision.chosen is Mode.BUS
    assert decision.biased
    # Same setup, neutral prototype: same winner as objective, flag off.
    decision2 = choose_mode(agent, obj, _flat_prototypes(), biases_on=True,
                            habits_on=False, draws=(0.9, 0.9))
    assert decision2.chosen is Mode.CAR
    assert not decision2.biased


def test_choose_mode_tie_break_prefers_current_then_canonical(uniform_objective):
    agent = _agent(distance=5.0, current=Mode.WALK, history=[])
    decision = choose_mode(agent, uniform_objective, _flat_prototypes(),
                           biases_on=False, habits_on=False, draws=(0.9, 0.9))
    assert decision.chosen is Mode.WALK
    agent2 = _agent(distance=5.0, current=Mode.CAR, car=False, bus=True, history=[])
    decision2 = choose_mode(agent2, uniform_objective, _flat_prototypes(),
                            biases_on=False, habits_on=False, draws=(0.9, 0.9))
    # Current mode unavailable: canonical order wins the tie.
    assert decision2.chosen is Mode.BIKE


def test_choose_mode_rejects_out_of_range_draws(uniform_objective):
    agent = _agent()
    with pytest.raises(ValueError):
        choose_mode(agent, uniform_objective, _flat_prototypes(),
                    biases_on=False, habits_on=False, draws=(1.0, 0.5))


# -------------------------------------------------------------- type guards


def test_value_matrix_rejects_out_of_range():
    with pytest.raises(ValueError):
        ModeCriterionMatrix.value_matrix([[11.0] * 6] * 4)


def test_filter_matrix_rejects_nonpositive():
    with pytest.raises(ValueError):
        ModeCriterionMatrix.filter_matrix([[0.0] * 6] * 4)


def test_priority_vector_rejects_wrong_arity():
    with pytest.raises(ValueError):
        PriorityVector.of([5.0] * 5)


def test_decision_routine_cannot_be_biased():
    with pytest.raises(ValueError):
        Decision(chosen=Mode.CAR, routine=True, biased=True, constrained=False)


def test_agent_requires_positive_distance():
    with pytest.raises(ValueError):
        _agent(distance=0.0)
