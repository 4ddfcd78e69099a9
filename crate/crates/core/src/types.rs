//! Domain types shared by every pipeline.
//!
//! Quadratures are dimensionless with vacuum variance 1/2 (`hbar = 1`), so the
//! mean photon number is `N = (sigma_xx + sigma_pp - 1) / 2`. All formulas in
//! the crate use this normalization.

use std::fmt;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

/// Absolute tolerance on the uncertainty relation `Delta >= 1/4`.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// Thermal factors of the reservoir and of the initial mode state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    g: f64,
    g0: f64,
    omega0: f64,
}

impl ReservoirParams {
    pub fn new(g: f64, g0: f64, omega0: f64) -> Result<Self> {
        if !(g >= 1.0) || !g.is_finite() {
            return Err(Error::domain("core", "G (reservoir thermal factor, must be >= 1)", g));
        }
        if !(g0 >= 1.0) || !g0.is_finite() {
            return Err(Error::domain("core", "G0 (initial thermal factor, must be >= 1)", g0));
        }
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::domain("core", "omega0", omega0));
        }
        Ok(ReservoirParams { g, g0, omega0 })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
}

impl Default for ReservoirParams {
    fn default() -> Self {
        ReservoirParams {
            g: 1.0,
            g0: 1.0,
            omega0: 1.0,
        }
    }
}

/// `coth(omega / (2 theta))`, i.e. `1 + 2<n>_th` of a mode at temperature
/// `theta` (in units where `hbar omega / k_B` sets the scale).
pub fn thermal_g(omega: f64, theta: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain("core", "omega", omega));
    }
    if !(theta >= 0.0) {
        return Err(Error::domain("core", "theta", theta));
    }
    if theta == 0.0 {
        return Ok(1.0);
    }
    let x = omega / (2.0 * theta);
    Ok(1.0 / x.tanh())
}

/// Zero-mean single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    sigma_xx: f64,
    sigma_pp: f64,
    sigma_xp: f64,
    delta: f64,
}

impl CovarianceState {
    /// Validates positivity and the Schrodinger-Robertson relation.
    /// States violating it are rejected, never clamped.
    pub fn new(sigma_xx: f64, sigma_pp: f64, sigma_xp: f64) -> Result<Self> {
        if !(sigma_xx.is_finite() && sigma_pp.is_finite() && sigma_xp.is_finite()) {
            return Err(Error::InvalidState {
                reason: format!("non-finite entries ({sigma_xx}, {sigma_pp}, {sigma_xp})"),
            });
        }
        if !(sigma_xx > 0.0 && sigma_pp > 0.0) {
            return Err(Error::InvalidState {
                reason: format!("variances must be positive ({sigma_xx}, {sigma_pp})"),
            });
        }
        let delta = determinant(sigma_xx, sigma_pp, sigma_xp);
        if delta < 0.25 - UNCERTAINTY_TOL {
            return Err(Error::InvalidState {
                reason: format!("Delta = {delta} violates Delta >= 1/4"),
            });
        }
        Ok(CovarianceState {
            sigma_xx,
            sigma_pp,
            sigma_xp,
            delta,
        })
    }

    pub fn vacuum() -> Self {
        CovarianceState {
            sigma_xx: 0.5,
            sigma_pp: 0.5,
            sigma_xp: 0.0,
            delta: 0.25,
        }
    }

    /// Thermal state with mean occupation `n_mean`.
    pub fn thermal(n_mean: f64) -> Result<Self> {
        if !(n_mean >= 0.0) {
            return Err(Error::domain("core", "n_mean", n_mean));
        }
        let s = n_mean + 0.5;
        CovarianceState::new(s, s, 0.0)
    }

    /// Pure squeezed vacuum with x anti-squeezed by `e^{2r}`.
    pub fn squeezed_vacuum(r: f64) -> Result<Self> {
        let e = (2.0 * r).exp();
        CovarianceState::new(0.5 * e, 0.5 / e, 0.0)
    }

    /// Diagonal state (`sigma_xx >= sigma_pp`, `sigma_xp = 0`) with the given
    /// trace `tau` and determinant `delta`.
    pub fn from_invariants(tau: f64, delta: f64) -> Result<Self> {
        if !(tau > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidState {
                reason: format!("tau = {tau}, Delta = {delta} must be positive"),
            });
        }
        let disc = tau * tau - 4.0 * delta;
        if disc < -4.0 * UNCERTAINTY_TOL * tau {
            return Err(Error::InvalidState {
                reason: format!("tau = {tau} < 2 sqrt(Delta) for Delta = {delta}"),
            });
        }
        let root = disc.max(0.0).sqrt();
        let sxx = 0.5 * (tau + root);
        // smaller root without cancellation
        let spp = delta / sxx;
        CovarianceState::new(sxx, spp, 0.0)
    }

    pub fn sigma_xx(&self) -> f64 {
        self.sigma_xx
    }

    pub fn sigma_pp(&self) -> f64 {
        self.sigma_pp
    }

    pub fn sigma_xp(&self) -> f64 {
        self.sigma_xp
    }

    /// `sigma_xx + sigma_pp = 1 + 2N`.
    pub fn tau(&self) -> f64 {
        self.sigma_xx + self.sigma_pp
    }

    /// `sigma_xx sigma_pp - sigma_xp^2`, evaluated with exact products.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mean_photons(&self) -> f64 {
        0.5 * (self.tau() - 1.0)
    }

    /// State after free evolution (`omega0 = 1`) over a phase angle `t`.
    pub fn rotated(&self, t: f64) -> Self {
        let (s, c) = t.sin_cos();
        let (sxx, spp, sxp) = (self.sigma_xx, self.sigma_pp, self.sigma_xp);
        let new_xx = sxx * c * c + spp * s * s + 2.0 * sxp * s * c;
        let new_pp = sxx * s * s + spp * c * c - 2.0 * sxp * s * c;
        let new_xp = (spp - sxx) * s * c + sxp * (c * c - s * s);
        CovarianceState {
            sigma_xx: new_xx,
            sigma_pp: new_pp,
            sigma_xp: new_xp,
            delta: self.delta,
        }
    }

    pub fn derived(&self) -> DerivedScalars {
        derived_scalars(self)
    }
}

fn determinant(sxx: f64, spp: f64, sxp: f64) -> f64 {
    (DoubleDouble::product(sxx, spp) - DoubleDouble::product(sxp, sxp)).to_f64()
}

/// Scalars derived from a covariance state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScalars {
    pub tau: f64,
    pub delta: f64,
    pub n_mean: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub purity: f64,
}

pub fn derived_scalars(state: &CovarianceState) -> DerivedScalars {
    let tau_dd = DoubleDouble::sum(state.sigma_xx, state.sigma_pp);
    let delta_dd = DoubleDouble::from_f64(state.delta);
    let base = DoubleDouble::ONE + delta_dd.mul_f64(4.0);
    let two_tau = tau_dd.mul_f64(2.0);
    let tau = tau_dd.to_f64();
    let delta = delta_dd.to_f64();
    DerivedScalars {
        tau,
        delta,
        n_mean: ((tau_dd - DoubleDouble::ONE).mul_f64(0.5)).to_f64(),
        d_plus: (base + two_tau).to_f64(),
        d_minus: (base - two_tau).to_f64(),
        purity: 1.0 / (2.0 * delta.sqrt()),
    }
}

/// How a photon distribution was produced, with the parameters the
/// evaluator used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Exact,
    AsymptoticSmooth { n_mean: f64 },
    AsymptoticOscillating { tau: f64, delta: f64 },
    SmallDissipation { tau: f64, g0: f64 },
    IdealSqueezed { n_mean: f64 },
    Oracle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::AsymptoticSmooth { .. } => "asymptotic-smooth",
            Method::AsymptoticOscillating { .. } => "asymptotic-oscillating",
            Method::SmallDissipation { .. } => "asymptotic-small-dissipation",
            Method::IdealSqueezed { .. } => "ideal-squeezed",
            Method::Oracle => "oracle",
        }
    }
}

/// Probabilities `f(0..=m_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub values: Vec<f64>,
    pub method: Method,
    /// Upper bound on `1 - sum f(m)` from the truncated tail.
    pub tail_bound: f64,
    /// Asymptotic ratio `f(m+1)/f(m)` of the tail, when known.
    pub tail_ratio: Option<f64>,
    /// Set when small negative round-off values were clamped to zero.
    pub clamped: bool,
    pub warnings: Vec<Warning>,
}

impl PhotonDistribution {
    pub fn m_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn sum(&self) -> f64 {
        // pairwise-ish: sum smallest terms first
        self.values.iter().rev().sum()
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .rev()
            .map(|(m, f)| m as f64 * f)
            .sum()
    }
}

/// Non-fatal validity notices attached to results.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `max |chi|` or `int gamma dt` beyond the small-parameter regime.
    LargeModulation { quantity: &'static str, value: f64 },
    /// An asymptotic formula evaluated outside its stated validity range.
    OutsideValidity { formula: &'static str, detail: String },
    /// Photon numbers sampled while the frequency is still perturbed.
    FrequencyNotRelaxed { time: f64 },
    /// Quadrature error estimate above tolerance.
    Quadrature { estimate: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::LargeModulation { quantity, value } => {
                write!(f, "{quantity} = {value} is not small (>= 0.1)")
            }
            Warning::OutsideValidity { formula, detail } => {
                write!(f, "{formula} used outside its validity range: {detail}")
            }
            Warning::FrequencyNotRelaxed { time } => {
                write!(f, "frequency has not returned to omega0 at t = {time}")
            }
            Warning::Quadrature { estimate } => {
                write!(f, "quadrature error estimate {estimate:e} above tolerance")
            }
        }
    }
}

/// A scalar approximation together with any validity warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub warnings: Vec<Warning>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_g_limits() {
        assert_eq!(thermal_g(1.0, 0.0).unwrap(), 1.0);
        // coth(1) from its series-free definition (e^2 + 1)/(e^2 - 1)
        let e2 = (2.0f64).exp();
        assert_relative_eq!(thermal_g(1.0, 0.5).unwrap(), (e2 + 1.0) / (e2 - 1.0), epsilon = 1e-15);
        assert_relative_eq!(thermal_g(1.0, 0.5).unwrap(), 1.313035, epsilon = 1e-6);
        let theta = 1e6;
        assert_relative_eq!(thermal_g(1.0, theta).unwrap() / (2.0 * theta), 1.0, epsilon = 1e-10);
        assert!(thermal_g(0.0, 1.0).is_err());
        assert!(thermal_g(-1.0, 1.0).is_err());
    }

    #[test]
    fn reservoir_rejects_subthermal_factors() {
        assert!(ReservoirParams::new(1.0, 0.5, 1.0).is_err());
        assert!(ReservoirParams::new(0.9, 1.0, 1.0).is_err());
        assert!(ReservoirParams::new(1.0, 1.0, 0.0).is_err());
        assert!(ReservoirParams::new(3.0, 1.0, 2.0).is_ok());
    }

    #[test]
    fn vacuum_scalars() {
        let d = CovarianceState::new(0.5, 0.5, 0.0).unwrap().derived();
        assert_eq!((d.tau, d.delta, d.d_minus, d.d_plus, d.n_mean, d.purity), (1.0, 0.25, 0.0, 4.0, 0.0, 1.0));
    }

    #[test]
    fn thermal_scalars() {
        let d = CovarianceState::new(1.5, 1.5, 0.0).unwrap().derived();
        assert_eq!(d.tau, 3.0);
        assert_eq!(d.delta, 2.25);
        assert_eq!(d.d_minus, 4.0);
        assert_eq!(d.d_plus, 16.0);
        assert_relative_eq!(d.purity, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn squeezed_vacuum_sits_in_negative_d_minus_regime() {
        let e2 = (2.0f64).exp();
        let d = CovarianceState::new(e2 / 2.0, 0.5 / e2, 0.0).unwrap().derived();
        assert_relative_eq!(d.delta, 0.25, epsilon = 1e-15);
        assert_relative_eq!(d.tau, (2.0f64).cosh(), epsilon = 1e-15);
        assert_relative_eq!(d.d_minus, 2.0 - 2.0 * (2.0f64).cosh(), epsilon = 1e-14);
        assert!(d.d_minus < 0.0);
    }

    #[test]
    fn rejects_unphysical_states() {
        assert!(CovarianceState::new(0.4, 0.4, 0.0).is_err());
        assert!(CovarianceState::new(-1.0, 0.5, 0.0).is_err());
        assert!(CovarianceState::new(1.0, 1.0, 0.99).is_err());
        assert!(CovarianceState::new(f64::NAN, 1.0, 0.0).is_err());
        // inside the tolerance band
        assert!(CovarianceState::new(0.5, 0.5 - 1e-10, 0.0).is_ok());
    }

    #[test]
    fn determinant_survives_cancellation() {
        // large rotated pure state: sxx*spp ~ 1e8, Delta = 1/4
        let s = CovarianceState::squeezed_vacuum(5.0).unwrap().rotated(0.3);
        assert_relative_eq!(s.delta(), 0.25, epsilon = 1e-6);
        let naive = s.sigma_xx() * s.sigma_pp() - s.sigma_xp() * s.sigma_xp();
        assert!((s.delta() - 0.25).abs() <= (naive - 0.25).abs() + 1e-12);
    }

    #[test]
    fn from_invariants_round_trip() {
        let s = CovarianceState::from_invariants(2001.0, 1000.0).unwrap();
        assert_relative_eq!(s.tau(), 2001.0, epsilon = 1e-13);
        assert_relative_eq!(s.delta(), 1000.0, epsilon = 1e-12);
    }
}
