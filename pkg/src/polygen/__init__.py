"""polygen: polynomial generators from coupled tensor factorizations.

The package has three layers:

* multilinear algebra and the polynomial generator models
  (:mod:`polygen.tensor_ops`, :mod:`polygen.models`), with executable
  identity checks in :mod:`polygen.identities`;
* a from-scratch reverse-mode engine and adversarial training harness
  (:mod:`polygen.autodiff`, :mod:`polygen.nets`, :mod:`polygen.train`)
  over analytic target manifolds (:mod:`polygen.manifolds`);
* a CLI (:mod:`polygen.cli`) that verifies the identities, trains,
  samples, and reports with rendered figures.
"""

__version__ = "0.1.0"

from .manifolds import ManifoldSpec, coverage, residual, residuals, sample
from .models import (
    ExplicitPolyParams,
    Model1Params,
    Model2Params,
    forward_explicit,
    forward_model1,
    forward_model1_sumform,
    forward_model2,
    materialize_model1,
    materialize_model2,
    param_count_explicit,
    param_count_model1,
    param_count_model2,
)
from .tensor_ops import (
    cp_mode1_matrix,
    cp_reconstruct,
    hadamard,
    khatri_rao,
    khatri_rao_list,
    mode_fold,
    mode_unfold,
    mode_vec_product,
)

__all__ = [
    "ManifoldSpec",
    "coverage",
    "residual",
    "residuals",
    "sample",
    "ExplicitPolyParams",
    "Model1Params",
    "Model2Params",
    "forward_explicit",
    "forward_model1",
    "forward_model1_sumform",
    "forward_model2",
    "materialize_model1",
    "materialize_model2",
    "param_count_explicit",
    "param_count_model1",
    "param_count_model2",
    "cp_mode1_matrix",
    "cp_reconstruct",
    "hadamard",
    "khatri_rao",
    "khatri_rao_list",
    "mode_fold",
    "mode_unfold",
    "mode_vec_product",
    "__version__",
]
