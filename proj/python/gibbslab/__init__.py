"""Sampling and certification laboratory for Gibbs measures exp(-beta*F)/Z.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from ._core import (  # noqa: F401
    BallSups,
    Certificate,
    GridMeasure,
    Moments,
    Potential,
    ProximalConfig,
    SamplerConfig,
    SpectralResult,
    Trajectory,
    bump_eval,
    bump_grad,
    bump_profile_deriv,
    catalogue,
    catalogue_names,
    cert_lsi_pl,
    cert_pi_kl,
    cert_pi_pl,
    certificate_to_json,
    condition_residual,
    divergence,
    estimate_ball_sups,
    finite_diff_grad,
    generator_spectral_gap,
    grid_measure,
    histogram,
    init_divergence_bound,
    local_poincare,
    moments,
    p_tilde,
    poly_h,
    poly_h3,
    proximal_oracle,
    quadratic_growth_constants,
    recompute_certificate,
    rgo_sample,
    run_experiment_json,
    run_gld,
    run_proximal,
    sweep_check,
    variance_decay_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
