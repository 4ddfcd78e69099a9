//! Photon statistics of a damped, parametrically driven cavity mode.
//!
//! The crate evolves the second moments of a single Gaussian mode under a
//! time-dependent frequency `omega0 (1 + chi(t))` and damping `gamma(t)`,
//! and turns the resulting covariance state into photon-number
//! distributions, moments and squeezing figures.
//!
//! Quadratures use vacuum variance 1/2, so `tau = sigma_xx + sigma_pp = 1 + 2N`
//! and `Delta = sigma_xx sigma_pp - sigma_xp^2 >= 1/4`.

pub mod dd;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod legendre;
pub mod ode;
pub mod oracle;
pub mod pdf;
pub mod pulse;
pub mod pulsetrain;
pub mod stats;
pub mod types;

pub use dynamics::{
    accumulate_quadratures, covariance_at, integrate_xi, mean_photons, simulate, IntegrationOptions, ModeTrajectory,
    PhotonNumbers, Quadratures,
};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use pulse::{PulseProfile, PulseShape, PulseTrain, SampledPulse};
pub use types::{
    derived_scalars, thermal_g, CovarianceState, DerivedScalars, Estimate, Method, PhotonDistribution,
    ReservoirParams, Warning,
};
pub use pulsetrain::{
    asymptotic_delta, asymptotic_n, covariance_from_summary, covariance_with_phase, evolve_summary,
    pulse_coefficients, rectangular_pulse_for, resonance_period, PulseCoefficients, PulseTrainSummary,
};
pub use legendre::{legendre_imaginary, legendre_real, LegendreEval};
pub use pdf::{
    asymptotic_for, asymptotic_oscillating, asymptotic_small_dissipation, asymptotic_smooth, classify_regime,
    exact_pdf, expanded_ratios, ideal_squeezed_distribution, ideal_squeezed_pdf, oscillating_distribution,
    small_dissipation_distribution, smooth_distribution, MMax, Regime,
};
pub use stats::{
    distribution_moments, euler_maclaurin_norm_check, invariant_squeezing, number_variance, squeezing_asymptote,
    superchaotic_moment, Moment, NormCheck, SqueezingReport,
};
pub use oracle::{
    converged_pdf, decompose, fock_pdf, oracle_pdf, recommended_dim, SqueezeOperator, SqueezedThermalDecomposition,
};
