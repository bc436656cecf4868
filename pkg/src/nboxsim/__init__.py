"""Measurement statistics for pre- and post-selected ensembles, and the N-box paradox."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .hilbert import (  # noqa: E402,F401
    Projector,
    apply,
    as_state,
    basis_state,
    commutator_norm,
    complement_projector,
    inner_product,
    normalize,
    projector_from_span,
    rank_one_projector,
    trace_product,
)
from .measurement import (  # noqa: E402,F401
    DensityMatrix,
    Mode,
    OutcomeDistribution,
    ProjectiveMeasurement,
    UpdateSemantics,
    are_compatible,
    born_distribution,
    is_refinement,
    lueders_update,
    mixture_update,
    validate_measurement,
)
from .pps import (  # noqa: E402,F401
    PrePostEnsemble,
    conditional_distribution,
    joint_probability,
    postselect_probability,
    raw_eq9_sum,
)
from .nbox import (  # noqa: E402,F401
    NBoxScenario,
    all_boxes_measurement,
    certainty_probability,
    ensemble,
    final_state,
    guessing_game,
    indistinguishable_measurement,
    initial_state,
    open_box_measurement,
    refinement_report,
    residual_mixture,
    residual_pure_state,
)
