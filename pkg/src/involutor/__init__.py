"""Exact symbolic engine for linear systems of partial differential
equations with rational-function coefficients: involutive completion,
Spencer delta-cohomology, compatibility conditions, formal adjoints, and
the double-duality parametrizability test.
"""

__version__ = "0.1.0"

from .delta import (
    DeltaReport,
    SymbolFamily,
    SymbolSpace,
    acyclicity,
    cc_order_bound,
    cohomology,
    symbol_space,
)
from .duality import (
    ParamReport,
    TorsionGenerator,
    double_duality_test,
    minimal_parametrization,
    minimal_parametrizations,
    modules_equal,
    parametrization_check,
    rank,
    torsion_generators,
)
from .errors import (
    BudgetExceededError,
    DeltaRegularityError,
    InconsistentSystemError,
    InvariantViolationError,
    InvolutorError,
    MalformedInputError,
)
from .geometry import (
    ConstMetric,
    RiemannComponentSpace,
    make_conformal_killing,
    make_einstein,
    make_killing,
    ricci_contract,
    ricci_lift,
    sym_adjoint,
    sym_slots,
    weyl_project,
)
from .inverse_systems import (
    Section,
    generating_section,
    modular_equation,
    section_basis,
    spencer_apply,
)
from .involution import (
    CompletionResult,
    complete,
    delta_regular_change,
    formally_integrable,
    involution_check,
)
from .jets import JetSystem, LinForm, SolvedSystem
from .kernel import Poly, Rat, RatFunc, class_of, derive, normalize
from .ore import DiffOp, OpMatrix, adjoint, compose, generic_covector, op_mul
from .sequences import (
    ModuleBasis,
    SequenceReport,
    compatibility_conditions,
    euler_check,
    janet_sequence,
    resolution,
    spencer_bundle_dims,
)
