"""modalsim: an agent-based simulator of commuter modal choice.

Agents score four mobility modes over six criteria through habit-weighted
perception filters; every parameter is derived from survey data. The
package ships the decision core, the calibration pipeline, a deterministic
tick engine with a compiled kernel, a scenario CLI, and an HTTP session
service for interactive dashboards.
"""

from .calibration import (
    AccessProbability,
    CalibrationBundle,
    CalibrationError,
    CleaningThresholds,
    DistanceStats,
    NATIONAL_SHARES,
    SurveyFormatError,
    SurveyRecord,
    build_bundle,
    clean_records,
    parse_survey,
)
from .engine import InitializationError, Simulation, SimulationConfig
from .kernels import BACKEND_NAME
from .metrics import DecisionCounts, MetricsFrame, frames_from_csv, frames_to_csv
from .model import (
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

__version__ = "0.1.0"
