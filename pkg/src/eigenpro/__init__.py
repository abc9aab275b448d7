"""Preconditioned SGD for kernel and random-feature least squares."""

from .data import Dataset, load_csv, load_libsvm, one_hot, rescale_unit, subsample, synth_spectrum, write_csv, zscore
from .eigensolver import EigenSystem, exact_eigensystem, kernel_eigensystem, nsvd, rsvd
from .errors import DataError, DegenerateInputError, DivergenceError, EigenProError, InvalidInputError
from .features import RbfMap, RffMap, rbf_apply, rff_apply
from .kernels import KernelSpec, kernel_eval, kernel_matrix
from .optimizer import (
    KernelModel,
    LinearModel,
    TrainConfig,
    TrainReport,
    c_error,
    eigenpro_kernel_sgd,
    eigenpro_linear_sgd,
    kernel_sgd,
    linear_sgd,
    mse,
    predict,
    richardson_gd,
    train,
)
from .preconditioner import (
    KernelPreconditioner,
    LinearPreconditioner,
    apply_linear,
    build_kernel,
    build_linear,
    eigenpro_kernel_eval,
    eigenpro_kernel_matrix,
    identity_preconditioner,
)
from .reach import heaviside_demo, heat_kernel_spectrum, min_iterations, reach_membership, spectrum_report
from .stepsize import StepSizeBoundInputs, auto_step_size, bernstein_bound, empirical_norm_check

__version__ = "0.1.0"
