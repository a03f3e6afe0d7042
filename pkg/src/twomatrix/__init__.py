"""Genus-one hermitian two-matrix model on an elliptic curve.

The main entry points are :class:`twomatrix.modelmap.ModelSpec`,
:func:`twomatrix.modelmap.solve_inverse` and the correction functions in
:mod:`twomatrix.correction`.
"""

__version__ = "0.1.0"
