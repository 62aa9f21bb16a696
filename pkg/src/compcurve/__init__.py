"""Exact-arithmetic toolkit for computable rectifiable planar curves."""

__version__ = "0.1.0"

from .exact import (  # noqa: E402
    BudgetExceeded,
    ContractError,
    CurveError,
    DyadicInterval,
    Q,
    interval_arith,
    sqrt_interval,
)
from .geometry import (  # noqa: E402
    CompactCover,
    P,
    PathFunction,
    Point,
    Polygon,
    SquareBox,
    eval_normalized,
    hausdorff,
    injectivity_lower_bound,
    is_simple,
    normalized_path,
    polygon_length,
    sup_path_distance,
    within_hausdorff,
)
from .names import (  # noqa: E402
    CoverName,
    KName,
    LeftCEReal,
    ParamName,
    cover_to_kname,
    kname_to_cover,
    left_length,
    normalize,
    widen,
)
from .constructors import (  # noqa: E402
    DerivativeOracle,
    arclength_from_derivative,
    koch,
    koch_param,
    n_curve,
    pad_length,
    retrace_triple,
    sweep_sim,
    zigzag_double,
    zsweep,
)
from .diagonal import (  # noqa: E402
    OpponentProgram,
    Sweep,
    Witness,
    audit,
    detect_sweeps,
    diagonalize,
    find_disjoint_box,
)

__all__ = [name for name in dir() if not name.startswith("_")]
