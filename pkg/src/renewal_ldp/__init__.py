"""Free energies, rate functions and exact oracles for constrained pinning models."""

from .exact import dist_W, enumerate_marginal, kingman_check, reward_dp, zc_table
from .freeenergy import (
    ConvergenceError,
    criticality,
    free_energy,
    hessian,
    nu,
    subdifferential,
    z_value,
)
from .model import (
    BaseLaw,
    ModelError,
    PinningModel,
    RewardSpec,
    TailSpec,
    WeightModel,
    build_preset,
    dirac,
    eta_normalize,
    geometric,
    load_model,
    make_cluster_model,
    make_poland_scheraga,
    make_wsme,
    validate,
    zeta_model,
)
from .rate import RateSolver, domain, nt_suite, phase_diagram, rate_at, rate_curve
from .sampler import deviation_probability, sample_path, sample_rewards

__all__ = [
    "BaseLaw", "ConvergenceError", "ModelError", "PinningModel", "RateSolver", "RewardSpec",
    "TailSpec", "WeightModel", "build_preset", "criticality", "deviation_probability", "dirac",
    "dist_W", "domain", "enumerate_marginal", "eta_normalize", "free_energy", "geometric",
    "hessian", "kingman_check", "load_model", "make_cluster_model", "make_poland_scheraga",
    "make_wsme", "nt_suite", "nu", "phase_diagram", "rate_at", "rate_curve", "reward_dp",
    "sample_path", "sample_rewards", "subdifferential", "validate", "z_value", "zc_table",
    "zeta_model",
]
