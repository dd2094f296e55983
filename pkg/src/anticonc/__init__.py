"""Concentration functions of weighted sums and their infinitely divisible comparison bounds."""
from .core import (AnticoncError, ContractError, DimensionError, DiscreteDist1D, DiscreteDistD,
                   DomainError, ResourceError, Scenario, WeightMatrix, load_scenario,
                   restrict_and_normalize, strict_floor, symmetrize, tail_mass)
from .charfn import (CfHandle, QuadratureSpec, cf_Fa, cf_H, cf_X, cube_integral, esseen_upper,
                     q_H, q_proxy_symmetric)
from .exact import (SampleBatch, q_exact, q_exact_1d, q_exact_2d, q_monte_carlo, sample_H,
                    weighted_sum_dist)
from .bounds import (BoundReport, build_report, corollary1_rhs, corollary2_lambda,
                     corollary2_rhs, regularity_check, theorem1_rhs)

__version__ = "0.1.0"

__all__ = [
    "AnticoncError",
    "ContractError",
    "DimensionError",
    "DiscreteDist1D",
    "DiscreteDistD",
    "DomainError",
    "ResourceError",
    "Scenario",
    "WeightMatrix",
    "load_scenario",
    "restrict_and_normalize",
    "strict_floor",
    "symmetrize",
    "tail_mass",
    "CfHandle",
    "QuadratureSpec",
    "cf_Fa",
    "cf_H",
    "cf_X",
    "cube_integral",
    "esseen_upper",
    "q_H",
    "q_proxy_symmetric",
    "SampleBatch",
    "q_exact",
    "q_exact_1d",
    "q_exact_2d",
    "q_monte_carlo",
    "sample_H",
    "weighted_sum_dist",
    "BoundReport",
    "build_report",
    "corollary1_rhs",
    "corollary2_lambda",
    "corollary2_rhs",
    "regularity_check",
    "theorem1_rhs",
]
