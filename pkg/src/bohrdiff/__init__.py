"""Dense subsets of F_p-vector spaces whose difference sets avoid a Bohr-dense set,
with exact and sampled verification at small scale."""

__version__ = "0.1.0"

from .field import (
    BudgetExceeded,
    GroupElement,
    add,
    at_scale,
    blocks,
    constant,
    content_count,
    embed,
    enumerate_group,
    format_element,
    group_array,
    identity,
    neg,
    parse_element,
    restrict,
    scalar_mul,
    sub,
)
from .hamming import BallSpec, ball_size, enumerate_ball, in_S_union, in_U, in_V, sample_ball
from .partition import (
    Z,
    CellDensity,
    PartitionSpec,
    VacuousLevelWarning,
    cell_density,
    classify,
    classify_array,
    count_cell,
    sample_cell,
    subset_classes,
    z_bound,
)
from .shift import verify_shift_lemma
from .bohr import (
    Functional,
    FunctionalSystem,
    contains_coset,
    dense_upto,
    enumerate_systems,
    image_of,
    verify_hamming_generation,
)
from .construction import (
    PRESETS,
    ConstructionParams,
    delta,
    density_report,
    in_A,
    in_S,
    theorem2_brute,
    verify_disjointness,
    window_density,
)
from .report import CheckRecord
