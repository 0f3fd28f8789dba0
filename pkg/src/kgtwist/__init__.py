"""Computational workbench for twisted higher-rank graph algebras.

Finitely presented k-graphs, circle-valued 2-cocycles and their homotopies,
skew products, a finite-depth path groupoid, twisted convolution on finite
groupoids, and the AF / K_0 machinery for graphs whose degree map is a
coboundary.
"""

from __future__ import annotations

from .af import (
    AFSystem,
    BratteliDatum,
    FPAbelianGroup,
    KappaTable,
    LevelAlgebra,
    PhaseMatrixUnitMap,
    bratteli,
    homotopy_invariance_report,
    k0_truncated,
    kappa,
    non_equivariance_witness,
)
from .circle import CircleValue, Cyclo
from .cocycles import (
    Bicharacter,
    Coboundary,
    ExponentialHomotopy,
    GridHomotopy,
    Table,
    Trivial,
    coboundary,
    homotopy_eval,
    is_cohomologous,
    real_rotation_cocycle,
    rotation_cocycle,
    verify_cocycle,
)
from .convolution import (
    FiniteGroupoid,
    GridBundleFunction,
    GroupoidCocycle,
    convolve,
    i_norm,
    i_norm_scan,
    involution,
    klein_cocycle,
    module_action,
    q_t,
)
from .errors import KGraphError
from .kgraph import (
    KGraph,
    Morphism,
    Skeleton,
    cuntz_graph,
    flip_flop,
    nk_graph,
    omega_k,
    two_by_two,
    validate_presentation,
)
from .pathgroupoid import (
    CylinderPair,
    GroupoidElem,
    InfPath,
    canonical_pair,
    compose_elems,
    omega_homotopy,
    resolve_refinement,
    sigma_c,
)
from .skew import SkewProduct, pullback_cocycle, skew, solve_degree_coboundary

__version__ = "0.1.0"
