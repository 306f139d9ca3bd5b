"""Variety-constrained spectral Gaussian process regression for linear PDEs."""

from ._epgp import (
    ConfigError,
    Dataset,
    Error,
    InvalidArgument,
    LoadError,
    ModelCheckpoint,
    ModelState,
    NumericalError,
    Posterior,
    TrainConfig,
    TrainReport,
    VarietySpec,
    assemble_A,
    build_phi,
    error_grid,
    generate_dataset,
    load_checkpoint,
    load_dataset,
    mae,
    make_checkpoint,
    nlml,
    nlml_oracle_dense,
    nlml_with_gradient,
    parametrize,
    parse_checkpoint,
    pde_residual_of_basis,
    posterior,
    predict,
    predict_points,
    rmse,
    run_benchmark,
    sample_free_frequencies,
    save_checkpoint,
    save_dataset,
    serialize_checkpoint,
    symbol_residual,
    train,
    true_a_sq,
    true_solution,
)

__all__ = [name for name in dir() if not name.startswith("_")]
