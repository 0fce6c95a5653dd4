"""Arrow-of-time statistics for quantum trajectories and a classical thermodynamics oracle."""
from .trajectory import (Prepare, Project, ReplayError, Rotate, Trajectory, Weak, forward_backward_probability,
                         log_ratio_q, replay, reverse_trajectory, single_step_q)
from .feedback import FeedbackEnsemble, NoAcceptedTrialsError, run_feedback_ensemble
from .fluctuation import (FTTable, IFTResult, InsufficientStatisticsError, detailed_ft_check,
                          exact_fixed_prior_ift, integral_ft_and_second_law, rapidity_flat_ensemble,
                          single_step_ensemble)
from .classical import (ClassicalChain, DetailedBalanceError, EnergySchedule, ThermoRecord, classical_entropy_production,
                        classical_simulate, enumerate_paths)
