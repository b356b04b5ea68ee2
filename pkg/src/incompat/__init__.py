"""Joint measurability of quantum measurements and the CHSH violations it rules out."""

from .chsh import (
    BellOperator,
    ChshWitness,
    ScanResult,
    bell_operator,
    bell_square_residual,
    extract_witness,
    lambda_star_scan,
    max_chsh,
    max_violation_fixed_B,
    max_violation_vn,
    mu_of_phi,
)
from .errors import (
    IncompatError,
    InconsistentSolutionError,
    InfeasibleSError,
    InvalidInputError,
    NotUnitSquareError,
    ObservablesCompatibleError,
    SignalingError,
    SizeLimitError,
    SolverError,
)
from .jm import JmReport, analyze_multi_dichotomic, analyze_pair, analyze_two_nvalued, robustness_mu
from .measurement import (
    DichotomicPOVM,
    Effect,
    JointObservable,
    NOutcomePOVM,
    SharpObservable,
    dichotomize_vn,
    effect_to_observable,
    joint_from_S,
    marginals_of_joint,
    mix_noise,
)
from .nosignal import QuadDistribution, TripleDistribution, chsh_value_classical, join_distributions
from .sdp import SdpProblem, SdpSolution, solve_sdp

__version__ = "0.1.0"
