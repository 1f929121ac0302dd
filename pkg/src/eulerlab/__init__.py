"""Verification lab for an explicit self-similar axisymmetric flow
family: exact fields, symbolic ansatz replay, residual checks,
characteristics, grid transport, and blowup-rate diagnostics."""

from .errors import (CFLViolation, ConfigError, DegenerateFit, DomainError,
                     EulerLabError, MissingField, NoConvergence, ParamError,
                     StepError, UnsupportedForm, VariantError,
                     VariantMismatch)
from .params import (PRESET, CartPoint, CylPoint, SolutionParams, Variant,
                     VelocityCart, VelocityCyl, VorticityVector,
                     parse_variant)
from .solutions import (eval_cart, eval_cyl, gradient_paper, pressure,
                        stream_and_vorticity, stream_value,
                        velocity_components)
from .jets import CENTRAL_DIFFERENCE, EXACT, EXACT_JET, DiffConfig, Jet2
from .monomials import Affine, Monomial, MonomialSum, Poly, \
    parse_monomial_sum
from .derivation import (Branch, Constraint, ConstraintSystem,
                         DerivationReplay, RationalValue, SolveOutcome,
                         apply_operator, replay_derivation,
                         solve_exponent_constraints, swirl_exponent_value)
from .residuals import (EquationId, EquationResult, FieldBundle,
                        GradientDiscrepancy, MutationReport,
                        ResidualReport, SamplingSpec,
                        applicable_equations, energy_ball, mutation_scan,
                        paper_gradient_discrepancy, residual_at, verify)
from .characteristics import (Trajectory, conserved_swirl,
                              flow_closed_form, flow_numeric,
                              trajectory_closed_form)
from .simulator import (AdvectLog, AnnulusGrid, ConvergenceStudy,
                        GridField, SimConfig, advect_swirl,
                        convergence_study, error_report, solve_stream,
                        velocities_from_stream)
from .diagnostics import (FitResult, bkm_integral, energy_eps_study,
                          energy_scaling_ratio, fit_blowup_exponent,
                          sup_velocity_gradient, sup_vorticity)
from .config import RunConfig, build_run_config, load_config_file

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
