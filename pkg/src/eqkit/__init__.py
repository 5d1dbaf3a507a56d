"""Local Maxwellians for free transport: boundary admissibility and domain symmetries."""

__version__ = "0.1.0"

from .classify import SymmetryClass, classify, family_to_maxwellians
from .constraints import AdmissibleFamily, ConstraintSystem, analyze, assemble, forward_check, nullspace
from .dsl import SurfaceExpr, eval_grad, parse
from .errors import EqkitError
from .flows import AffineField, FlowCurve, closed_form_flow, lie_bracket, rk4_flow, tangency_defect
from .geometry import (Annulus, Ball, CoaxialCylinders, Cylinder, Ellipsoid, GeneralizedCylinder,
                       HalfSpace, HelicalSurface, Implicit, Slab, Torus, bounce_back,
                       sample_boundary, specular_reflect)
from .maxwellian import EvalPoint, FactoredForm, MaxwellianParams, evaluate, factor
from .transport import advance, sample_initial, stationarity_test
