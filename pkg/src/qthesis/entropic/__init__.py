"""Uncertainty quantifiers, entropic bounds, weak values and the EUR experiment simulator."""
from .measures import (DiscreteDistribution, NonNumericOutcomeError, renyi_entropy, robertson_bound,
                       shannon_entropy, uncertainty_product, variance)
from .bounds import (BoundReport, DegenerateConfigurationError, TaylorValidityError, bound_report,
                     conditional_probability, deutsch_bound, eur_bound, maassen_uffink_bound, povm_norm_bound,
                     taylor_weights, trivial_bound)
from .weakvalue import (SamplingFailureError, SingularSelectionError, conditional_record_mean, weak_value,
                        weak_value_sampled)
from .simulate import NoiseModel, exact_eur_entropies, simulate_eur
