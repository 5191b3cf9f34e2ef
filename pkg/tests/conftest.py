"""Shared fixtures and hypothesis strategies."""

from __future__ import annotations

import math

import pytest
from hypothesis import strategies as st

from modalsim.model import (
    Agent,
    Criterion,
    Mode,
    ModeCriterionMatrix,
    PriorityVector,
    TripHistory,
)

likert = st.floats(min_value=0.0, max_value=10.0, allow_nan=False)
factors = st.floats(min_value=1e-3, max_value=5.0, allow_nan=False)
habits = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
unit_draws = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)
modes = st.sampled_from(list(Mode))
criteria = st.sampled_from(list(Criterion))


@st.composite
def value_matrices(draw):
    return ModeCriterionMatrix.value_matrix(
        [[draw(likert) for _ in Criterion] for _ in Mode])


@st.composite
def filter_matrices(draw):
    return ModeCriterionMatrix.filter_matrix(
        [[draw(factors) for _ in Criterion] for _ in Mode])


@st.composite
def priority_vectors(draw):
    return PriorityVector.of([draw(likert) for _ in Criterion])


@st.composite
def trip_histories(draw, capacity: int = 20):
    entries = draw(st.lists(modes, max_size=capacity))
    return TripHistory(entries, capacity=capacity)


@st.composite
def agents(draw):
    """A structurally valid agent; availability of current_mode not enforced
    (model operations must behave on any type-valid input)."""
    distance = draw(st.floats(min_value=0.31, max_value=200.0, allow_nan=False))
    has_car = draw(st.booleans())
    has_bus = draw(st.booleans())
    # Guarantee a nonempty availability set.
    if not (has_car or has_bus or distance < 15.0):
        has_bus = True
    return Agent(
        id=draw(st.integers(min_value=0, max_value=10_000)),
        priorities=draw(priority_vectors()),
        history=draw(trip_histories()),
        distance_km=distance,
        has_car_access=has_car,
        has_bus_access=has_bus,
        current_mode=draw(modes),
        initial_usual_mode=draw(modes),
    )


_BUNDLE_CACHE = {}


def acceptance_bundle():
    """Module-level bundle loader for hypothesis tests (no fixture access)."""
    if "default" not in _BUNDLE_CACHE:
        import json
        from importlib import resources

        from modalsim.calibration import CalibrationBundle

        with resources.files("modalsim").joinpath("data", "default_bundle.json").open(
                "r", encoding="utf-8") as fh:
            _BUNDLE_CACHE["default"] = CalibrationBundle.from_dict(json.load(fh))
    return _BUNDLE_CACHE["default"]


@pytest.fixture(scope="session")
def fixture_records():
    from importlib import resources

    from modalsim.calibration import clean_records, parse_survey

    with resources.files("modalsim").joinpath("data", "fixture_survey.csv").open(
            "r", encoding="utf-8") as fh:
        parsed = parse_survey(fh)
    assert not parsed.rejected
    return clean_records(parsed.records)


@pytest.fixture(scope="session")
def planted_bundle():
    from importlib import resources

    from modalsim.calibration import CalibrationBundle

    import json

    with resources.files("modalsim").joinpath("data", "fixture_bundle.json").open(
            "r", encoding="utf-8") as fh:
        return CalibrationBundle.from_dict(json.load(fh))


@pytest.fixture(scope="session")
def default_bundle():
    from importlib import resources

    from modalsim.calibration import CalibrationBundle

    import json

    with resources.files("modalsim").joinpath("data", "default_bundle.json").open(
            "r", encoding="utf-8") as fh:
        return CalibrationBundle.from_dict(json.load(fh))


@pytest.fixture
def uniform_objective():
    return ModeCriterionMatrix.value_matrix([[5.0] * 6] * 4)


@pytest.fixture
def neutral_prototypes():
    return {m: ModeCriterionMatrix.identity_filter() for m in Mode}
