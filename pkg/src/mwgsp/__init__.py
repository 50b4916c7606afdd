"""Multi-way graph signal processing on Cartesian product graphs."""
from .errors import CapacityError, DataError, InvalidArgumentError, MWGSPError, NumericalFailure
from .filters import (
    FilterKind,
    FilterSpec,
    apply_filter,
    apply_joint_filter,
    apply_nonseparable_filter,
    apply_separable_filter,
    chebyshev_filter,
    heat,
    ideal_lowpass,
    joint_heat,
    parse_filter_spec,
    polynomial,
)
from .graph import AUTO, Graph, knn_gaussian_graph, laplacian, laplacian_quadratic_form, path_graph, ring_graph
from .product import (
    ProductSpectrum,
    ProductStructure,
    cartesian_product,
    imwgft,
    jft,
    kron_sum_matvec,
    kronecker_sum,
    mwgft,
    product_eigensystem,
)
from .recovery import (
    MaskedMatrix,
    RegularizationConfig,
    coclust_objective,
    comanifold_slice_distance,
    compression_error,
    graph_reg_completion,
    tv_tikhonov,
)
from .spectral import EigenSystem, apply_spectral_filter, dft_matrix, eigendecompose, gft, igft, laplacian_eigenmap
from .tensor import kron, kron_decremental, mat, multilinear_apply, ten, vec

__version__ = "0.1.0"
