"""Feed-forward networks with the SBAF activation, built from scratch on numpy."""

from .activation import (
    ActivationSpec,
    Kind,
    clamp_domain,
    kernel,
    sbaf,
    sbaf_derivative,
    sbaf_second_derivative,
)
from .approx import PiecewiseKernel, build_kernel, eval_approx, measure_error
from .dataio import Dataset, load_csv, normalize, split, synthesize
from .errors import DataError, DomainError, OracleError, SBAFError, TrainingError
from .gradcheck import GradCheckReport, check_network, fd_scalar
from .metrics import EvalReport, evaluate
from .network import (
    ForwardTrace,
    Gradients,
    Network,
    TrainConfig,
    backward,
    forward,
    init_network,
    load_network,
    loss,
    save_network,
    sgd_step,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationSpec",
    "DataError",
    "Dataset",
    "DomainError",
    "EvalReport",
    "ForwardTrace",
    "GradCheckReport",
    "Gradients",
    "Kind",
    "Network",
    "OracleError",
    "PiecewiseKernel",
    "SBAFError",
    "TrainConfig",
    "TrainingError",
    "backward",
    "build_kernel",
    "check_network",
    "clamp_domain",
    "eval_approx",
    "evaluate",
    "fd_scalar",
    "forward",
    "init_network",
    "kernel",
    "load_csv",
    "load_network",
    "loss",
    "measure_error",
    "normalize",
    "save_network",
    "sbaf",
    "sbaf_derivative",
    "sbaf_second_derivative",
    "sgd_step",
    "split",
    "synthesize",
    "train",
]
