"""Numerical toolkit for conditional Lipschitz shadowing of ODEs.

Certifies shadowing constants (eps0, kappa) through two routes (exponential
dichotomy of the linear part, uniformly negative logarithmic norm of the
state Jacobian), constructs the shadowing solutions, and reproduces the
sharp positive/negative demonstrations on the bundled example systems.
"""

from .certify import (Certificate, GrowthSpec, MuSupEstimate, Route,
                      certify_ball, certify_gen_perturb, certify_lognorm,
                      certify_t1, certify_t2, estimate_lipschitz, estimate_m,
                      estimate_m_detail)
from .errors import (AdmissibilityError, ConfigError, ContainmentError,
                     DataError, DomainError, EvaluationError,
                     HypothesisViolatedError, NonconvergenceError,
                     NotApplicableError, RegistryError, ShadowlabError,
                     StiffnessError, StructureError)
from .linear_dynamics import (DichotomyData, DichotomyKind, DichotomyReport,
                              LinearSystem, constant_dichotomy, coppel_bound,
                              transition, verify_dichotomy)
from .lognorm import (MatrixPath, NormKind, as_norm, mat_norm,
                      mu_closed, mu_integral_check, mu_limit, vec_norm)
from .pseudo import (PseudoSolution, exm_pseudosolution, measure,
                     perturbed_orbit, si_equilibrium_pseudosolution,
                     wiggle_pseudosolution)
from .replicate import (ReplicationReport, replicate_exm_counterexample,
                        replicate_exm_positive, replicate_revisited,
                        replicate_si)
from .shadow import ShadowResult, relocate, shadow_dichotomy, shadow_lognorm
from .systems import (Ball, Box, CustomRegion, HalfLine, OdeSystem,
                      PolynomialMap, Region, SemilinearSplit, SimplexGamma,
                      Trajectory, exm_exact, integrate, jacobian_fd, registry)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
