"""Property tests for the decision-core invariants."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from modalsim.model import (
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

from conftest import (
    agents,
    filter_matrices,
    habits,
    likert,
    priority_vectors,
    trip_histories,
    unit_draws,
    value_matrices,
)


@given(trip_histories())
def test_habit_strengths_sum_to_one_or_zero(history):
    total = math.fsum(habit_strength(history, m) for m in Mode)
    if len(history) == 0:
        assert total == 0.0
    else:
        assert abs(total - 1.0) < 1e-12
    for m in Mode:
        assert 0.0 <= habit_strength(history, m) <= 1.0


@given(trip_histories(), st.sampled_from(list(Mode)))
def test_usual_mode_is_a_history_member_or_fallback(history, fallback):
    u = usual_mode(history, fallback)
    if len(history) == 0:
        assert u is fallback
    else:
        assert history.count(u) == max(history.count(m) for m in Mode)


@given(filter_matrices(), habits)
def test_effective_filter_stays_between_one_and_prototype(proto, h):
    blended = effective_filter(proto, h)
    for m in Mode:
        for c in range(6):
            p = proto.rows[m][c]
            v = blended.rows[m][c]
            assert min(1.0, p) - 1e-12 <= v <= max(1.0, p) + 1e-12


@given(filter_matrices())
def test_effective_filter_endpoints_exact(proto):
    assert effective_filter(proto, 0.0) == ModeCriterionMatrix.identity_filter()
    assert effective_filter(proto, 1.0) == proto


@given(value_matrices(), filter_matrices())
def test_perceive_output_in_range(objective, filt):
    out = perceive(objective, filt)
    for row in out.rows:
        for v in row:
            assert 0.0 <= v <= 10.0


@given(value_matrices())
def test_perceive_identity_is_exact(objective):
    assert perceive(objective, ModeCriterionMatrix.identity_filter()) == objective


@given(priority_vectors(), st.lists(likert, min_size=6, max_size=6),
       st.sampled_from([0.0, 0.25, 0.5, 1.0, 2.0, 4.0]))
def test_score_scales_exactly_with_power_of_two_priorities(prio, values, alpha):
    # Powers of two keep IEEE arithmetic exact, so linearity holds bitwise.
    base = PriorityVector.of([p * 0.25 for p in prio.values])
    scaled = PriorityVector.of([p * alpha for p in base.values])
    assert score(scaled, values) == alpha * score(base, values)


@given(value_matrices(), priority_vectors(),
       st.sampled_from([0.25, 0.5, 1.0, 2.0]), st.sampled_from(list(Mode)))
def test_argmax_invariant_under_uniform_priority_scaling(objective, prio, alpha, current):
    base = PriorityVector.of([p * 0.25 for p in prio.values])
    scaled = PriorityVector.of([p * alpha for p in base.values])

    def argmax(p):
        best, best_s = None, -math.inf
        for m in Mode:
            s = score(p, objective.row(m))
            if best is None or s > best_s or (s == best_s and m == current):
                best, best_s = m, s
        return best

    assert argmax(base) is argmax(scaled)


@given(agents(), value_matrices(), unit_draws, unit_draws)
def test_unflagged_choice_equals_objective_argmax(agent, objective, u1, u2):
    if u1 < 0.01:
        u1 = 0.5  # keep the draw clear of the disruption band
    decision = choose_mode(agent, objective,
                           {m: ModeCriterionMatrix.identity_filter() for m in Mode},
                           biases_on=False, habits_on=False, draws=(u1, u2))
    avail = available_modes(agent)
    best, best_s = None, -math.inf
    for m in Mode:
        if m not in avail:
            continue
        s = score(agent.priorities, objective.row(m))
        if best is None or s > best_s or (s == best_s and m == agent.current_mode):
            best, best_s = m, s
    assert decision.chosen is best
    assert not decision.routine and not decision.biased


@given(agents(), value_matrices(), filter_matrices(), st.booleans(), st.booleans(),
       unit_draws, unit_draws)
def test_choose_mode_is_pure(agent, objective, proto, biases_on, habits_on, u1, u2):
    prototypes = {m: proto for m in Mode}
    first = choose_mode(agent, objective, prototypes, biases_on, habits_on, (u1, u2))
    second = choose_mode(agent, objective, prototypes, biases_on, habits_on, (u1, u2))
    assert first == second


@given(agents(), value_matrices(), filter_matrices(), unit_draws, unit_draws)
def test_routine_choice_appears_in_history(agent, objective, proto, u1, u2):
    decision = choose_mode(agent, objective, {m: proto for m in Mode},
                           biases_on=True, habits_on=True, draws=(u1, u2))
    if decision.routine:
        assert agent.history.count(decision.chosen) > 0
