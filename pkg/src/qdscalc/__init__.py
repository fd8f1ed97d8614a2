"""Exact computation of noncommutative differential forms on towers of quantum double suspensions.

Modules:

* :mod:`qdscalc.exact`: Gaussian rationals, sparse vectors and exact echelon forms.
* :mod:`qdscalc.oper`: truncated operator layers (point, circle, suspension, Pauli double).
* :mod:`qdscalc.triple`: spectral-triple descriptors and their spanning filtrations.
* :mod:`qdscalc.forms`: images of universal forms, junk and the quotients Omega_D^n.
* :mod:`qdscalc.conn`: projective modules, connections, curvature and their lift.
* :mod:`qdscalc.cli`: verification suites, computations and JSON reports.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .exact import ONE, ZERO, Scalar, Subspace, as_scalar  # noqa: E402
from .oper import BOUNDED, CALKIN, Operator  # noqa: E402
from .triple import check_conditions, circle_triple, doubled, make_triple, point_triple, qds_of  # noqa: E402
from .forms import FormExpr, FormSpace, form_space, omega_d  # noqa: E402
from .conn import bott_projection, corner_projection, grassmannian, lift_module  # noqa: E402

__all__ = [
    "__version__",
    "Scalar",
    "Subspace",
    "ONE",
    "ZERO",
    "as_scalar",
    "Operator",
    "BOUNDED",
    "CALKIN",
    "make_triple",
    "point_triple",
    "circle_triple",
    "qds_of",
    "doubled",
    "check_conditions",
    "FormExpr",
    "FormSpace",
    "form_space",
    "omega_d",
    "bott_projection",
    "corner_projection",
    "grassmannian",
    "lift_module",
]
