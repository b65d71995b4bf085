"""Capacities, rate regions and zero-error codes for half-duplex relay cascades."""

from .capacity import (CapacityResult, ChainDistribution, chain_from_params, closed_form, cut_values,
                       infinite_cascade_chain, solve_cascade, solve_single_relay)
from .channel import CascadeTopology, RelayModel, Symbol, network_block, network_use, relay_output
from .coding import (CodebookSpec, SlotAllocation, TwoSourceSpec, decode_at_node, encode_relay,
                     encode_source, optimize_slot_counts, rank_allocation, two_source_decode,
                     two_source_encode, unrank_allocation)
from .cutset import (FullJointPmf, VerificationReport, materialize, two_source_bounds,
                     verify_ascending_minimality, verify_two_source_ascending)
from .errors import (ConstraintViolation, DomainError, IntegrityError, SolverError, ValidationError,
                     ZeroErrorViolation)
from .info import EdgeDistribution, binary_entropy, entropy
from .region import (RatePoint, RegionCurve, achievable_segment, finite_n_achievable,
                     general_region_bound, outer_boundary_single_relay, sum_capacity_threshold)
from .simulator import ExperimentConfig, TransmissionReport, run_pipeline, run_two_source, sweep_rates

__version__ = "0.1.0"
