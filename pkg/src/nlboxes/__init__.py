"""Exact simulation, verification and optimization of wiring protocols
over no-signalling correlation boxes."""

from .boxes import (ATOL, BoxParams, CorrelatorVector, DomainError, NoSignalingBox,
                    ValidationError, box_from_json, box_to_json, chsh_value,
                    correlated_nlb, correlators, is_quantum_boundary_inside,
                    make_general_nlb, make_symmetric_nlb, perfect_nlb)
from .protocols import (LocalStrategy, NonAdaptiveProtocol, Protocol,
                        adaptive_parity_protocol, allcock2_protocol,
                        allcock_generalized_protocol, allcock_permuted_protocol,
                        embed_nonadaptive, named_protocol, new_depth3_protocol,
                        pad_protocol, parity_protocol, protocol_from_json,
                        protocol_to_json)
from .evaluator import OutcomePath, distill, distilled_value, enumerate_paths
from .analysis import (FourierSpectrum, NonAdaptiveBound, SweepData, SweepRecord,
                       adaptive_parity_correlated_value, allcock2_value, allcock_map,
                       bs_map, bs_value, depth3_value, distillable_region,
                       fourier_transform, nonadaptive_bound, parity_value, q_AB,
                       q_AB_fourier, r_AB, sweep_symmetric, write_sweep_csv)
from .search import (SearchReport, best_builtin, search_adaptive_depth2,
                     search_nonadaptive, search_nonadaptive_sampled)

__version__ = "0.1.0"
