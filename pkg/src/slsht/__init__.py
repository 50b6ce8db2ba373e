"""Directional spatially localised spherical harmonic transform (SLSHT)."""

from ._backend import backend, backend_name, set_backend
from .errors import ConvergenceError, NumericalError, SlshtError, ValidationError, ZeroDCError
from .grids import (
    EulerAngles,
    QuadratureWeights,
    SphereGrid,
    So3Grid,
    beta_weights,
    ring_weights,
    so3_grid,
    so3_integrate,
    sphere_grid,
    sphere_integrate,
)
from .harmonics import SphCoeffs, SphereMap, eval_ylm, rotate_coeffs, sh_analysis, sh_synthesis
from .transform import (
    CTensor,
    InverseAccumulator,
    ModulatedCoeffs,
    SlshtDistribution,
    build_c_tensor,
    forward_direct,
    forward_fast,
    forward_reference,
    inverse,
    iter_forward_fast,
    iter_forward_reference,
    modulated_sht,
)
from .wigner import DeltaTables, So3Coeffs, delta_tables, triple_product, wigner_3j, wigner_d, wigner_D
from .window import (
    EllipticalRegion,
    Window,
    angular_distance,
    concentration_matrix,
    eigenfunction_window,
    region_contains,
)

__version__ = "0.1.0"
