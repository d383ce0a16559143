"""Shape-morphing and pneumatic model of form-flexible suction grippers."""
__version__ = "0.1.0"

# flake8: noqa

from .errors import ConvergenceError, DomainError, InfeasibleError, ParseError
from .geometry import LipGeometry, SegmentGrid, beam_length, make_grid, segment_area, segment_inertia
from .pneumatics import (AirEnvironment, BlowerConfig, BlowerState, LeakModel, apportion_flow,
                         bernoulli_dp, blower_curve, operating_point)
from .deflection import (BeamLoadCase, DeflectionResult, beam_oracle, closure_state,
                         deflection_profile, free_end_deflection, segment_force, tip_deflection)
from .grasp import (GraspModes, GraspOutcome, ObjectSpec, Stage, aperture_ratio, holding_force,
                    lifting_ratio, load_ratio, reference_objects, simulate_grasp)
from .calibration import (FitResult, Observation, design_search, fit_holding_margin,
                          fit_parameters, reference_observations, sensitivity, sweep_grid)
from .traces import TimeSeries, extract_mhf, extract_plateau, parse_trace, serialize_trace
