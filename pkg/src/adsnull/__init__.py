"""Null curves in anti-de Sitter 3-space and the KdV soliton machinery.

The package models anti-de Sitter 3-space as SL(2,R) inside the
split-signature space of real 2x2 matrices.  ``sl2`` supplies the metric
algebra, ``curves`` reconstructs null curves from their bending through the
spinor frame equations, ``ttransform`` implements the area-preserving
transforms driven by Riccati solutions together with their permutability,
``kdv`` realizes the Backlund transformation for the KdV equation through
extended frames and the induced curve flow, and ``pipeline`` provides the
CLI, exporters and the solid-torus visualization chart.
"""

from .curves import (BendingProfile, GeometryReport, NullCurve, SGrid,
                     central_affine_curvature, closure_period, cousins,
                     curve_from_frames, frenet_generator,
                     integrate_spinor_frames, kappa_mn, torus_knot_type,
                     verify_null_geometry)
from .kdv import (ExtendedFrameField, FlatnessError, KdvSolution, STGrid,
                  SolitonChain, WEField, backlund_transform,
                  connection_matrices, decay_window, dressed_frame,
                  extended_frame_constant, extended_frame_numeric,
                  frame_field_residual, kdv_residual, lien_curve, lien_frames,
                  lien_residual, profile_shift, soliton_chain,
                  t_transform_flow, transforming_function,
                  transforming_function_constant, we_time_coefficient)
from .sl2 import (Bivector, BivectorClass, BivectorKind, biv_inner,
                  classify_bivector, inner, qform, sl2_exp)
from .ttransform import (PermuteResult, PoleError, RiccatiSolution,
                         TTransformResult, chi_invariant,
                         constant_bending_transform, g_minus, g_plus, permute,
                         solve_riccati, t_transform, t_transform_segments)

__version__ = "0.1.0"
