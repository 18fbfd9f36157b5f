"""Stability bounds for a physics-informed network on the 1D Poisson problem."""

from .bounds import StabilityCertificate, admissible_delta, combined_bound, generalization_bound
from .experiments import TrainConfig, derive_seed, train_pinn
from .jets import Jet3, Mlp, init_net, mlp_forward

__version__ = "0.1.0"

__all__ = [
    "Jet3",
    "Mlp",
    "StabilityCertificate",
    "TrainConfig",
    "admissible_delta",
    "combined_bound",
    "derive_seed",
    "generalization_bound",
    "init_net",
    "mlp_forward",
    "train_pinn",
]
