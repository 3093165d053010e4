"""QPSK phase-quantized anti-jamming beamforming."""

from ._core import (
    ORACLE_MAX_ELEMENTS,
    ConvergenceError,
    DimensionError,
    Error,
    FormatError,
    GbdtModel,
    InvalidArgument,
    OracleTooLargeError,
    SingularMatrixError,
    __version__,
    beampattern_gain_db,
    capon_weights,
    coordinate_descent,
    extract_features,
    generate_dataset,
    greedy_sample,
    hermitian_eigenvalues,
    naive_quantize,
    objective,
    oracle_search,
    quadratic_form,
    random_scenario,
    run_benchmark,
    sample_covariance,
    steering_vector,
    to_complex,
    uca_positions,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
