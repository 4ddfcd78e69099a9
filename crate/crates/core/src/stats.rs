//! Moments, number variance and invariant squeezing.

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::types::{CovarianceState, Estimate, Method, PhotonDistribution, Warning};

/// Highest moment order accepted by [`distribution_moments`].
pub const MAX_MOMENT: u32 = 8;
/// Largest relative tail contribution tolerated by [`distribution_moments`].
pub const MOMENT_TAIL_LIMIT: f64 = 1e-3;
/// Largest normalization defect accepted by [`distribution_moments`].
pub const NORM_LIMIT: f64 = 0.1;

/// `zeta(1/2, 1/2) = (sqrt 2 - 1) zeta(1/2)`.
const HURWITZ_HALF: f64 = -0.604_898_643_421_630_4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingReport {
    /// `4 Delta / (tau + sqrt(tau^2 - 4 Delta))`; below 1 means squeezed.
    pub s: f64,
    /// Rotation angle in `[0, pi)` minimizing `sigma_xx`.
    pub t_min: f64,
    pub sigma_min: f64,
    /// `G Lambda / (nu + Lambda)` when the state comes from a pulse train.
    pub asymptote: Option<f64>,
}

impl SqueezingReport {
    pub fn with_asymptote(mut self, nu: f64, lambda: f64, g: f64) -> Result<Self> {
        self.asymptote = Some(squeezing_asymptote(nu, lambda, g)?.value);
        Ok(self)
    }
}

pub fn invariant_squeezing(state: &CovarianceState) -> SqueezingReport {
    let tau = state.tau();
    let delta = state.delta();
    let r = (tau * tau - 4.0 * delta).max(0.0).sqrt();
    let s = 4.0 * delta / (tau + r);
    // sigma_xx(t) = tau/2 + h cos 2t + sigma_xp sin 2t
    let h = 0.5 * (state.sigma_xx() - state.sigma_pp());
    let mut t_min = 0.5 * (state.sigma_xp().atan2(h) + std::f64::consts::PI);
    if t_min >= std::f64::consts::PI {
        t_min -= std::f64::consts::PI;
    }
    SqueezingReport {
        s,
        t_min,
        sigma_min: 0.5 * s,
        asymptote: None,
    }
}

/// Long-train limit `G Lambda / (nu + Lambda)` of the squeezing coefficient.
pub fn squeezing_asymptote(nu: f64, lambda: f64, g: f64) -> Result<Estimate> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::domain("stats", "nu", nu));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain("stats", "Lambda", lambda));
    }
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::domain("stats", "G", g));
    }
    let mut warnings = Vec::new();
    if nu <= lambda {
        warnings.push(Warning::OutsideValidity {
            formula: "squeezing-asymptote",
            detail: format!("nu = {nu} <= Lambda = {lambda}: no photon growth"),
        });
    }
    Ok(Estimate {
        value: g * lambda / (nu + lambda),
        warnings,
    })
}

/// Photon-number variance `tau^2/2 - Delta - 1/4`.
pub fn number_variance(state: &CovarianceState) -> f64 {
    let tau = state.tau();
    (0.5 * tau * tau - state.delta() - 0.25).max(0.0)
}

/// `N^k (2k - 1)!!`, the large-`N` moments of the smooth distribution.
pub fn superchaotic_moment(n_mean: f64, k: u32) -> f64 {
    let k64 = u64::from(k);
    let kf = f64::from(k);
    (kf * n_mean.ln() + ln_factorial(2 * k64) - kf * std::f64::consts::LN_2 - ln_factorial(k64)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    /// Estimated contribution of `m > m_max`.
    pub tail: f64,
}

/// Raw moment `sum m^k f(m)`.
pub fn distribution_moments(dist: &PhotonDistribution, k: u32) -> Result<Moment> {
    if k > MAX_MOMENT {
        return Err(Error::domain("stats", "moment order (at most 8)", f64::from(k)));
    }
    let total = dist.sum();
    if (total - 1.0).abs() > NORM_LIMIT {
        return Err(Error::precondition(
            "stats",
            format!("distribution sums to {total}; moments need a normalized distribution"),
        ));
    }
    let value: f64 = dist
        .values
        .iter()
        .enumerate()
        .map(|(m, &f)| (m as f64).powi(k as i32) * f)
        .sum();
    let tail = tail_moment(dist, k);
    if !(tail <= MOMENT_TAIL_LIMIT * value.abs().max(f64::MIN_POSITIVE)) && tail > 0.0 {
        return Err(Error::Precision {
            module: "stats",
            reason: format!(
                "tail beyond m = {} contributes about {tail:e} to moment {k} (value {value:e}); \
                 extend the distribution",
                dist.m_max()
            ),
        });
    }
    Ok(Moment { value, tail })
}

/// `sum_{j >= 1} (M + j)^k f_M rho^j` with `f_M` the larger of the last two values.
fn tail_moment(dist: &PhotonDistribution, k: u32) -> f64 {
    let m = dist.m_max();
    let last = if m == 0 {
        dist.values[0]
    } else {
        dist.values[m].max(dist.values[m - 1])
    };
    if last == 0.0 {
        return 0.0;
    }
    let Some(rho) = dist.tail_ratio else {
        return dist.tail_bound * ((m + 1) as f64).powi(k as i32);
    };
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    let mut weight = last;
    let mut j = 1usize;
    loop {
        weight *= rho;
        let term = ((m + j) as f64).powi(k as i32) * weight;
        sum += term;
        // terms peak near j = k / (1 - rho) and then decay
        if term < 1e-17 * sum && j as f64 * (1.0 - rho) > f64::from(k) || weight == 0.0 {
            break;
        }
        j += 1;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormCheck {
    pub sum: f64,
    /// Expected `sum - 1` of the asymptotic form: `zeta(1/2,1/2) / sqrt(pi tau)`.
    /// Zero for exact distributions.
    pub correction_estimate: f64,
    /// For two-term distributions: the slowly varying part of the
    /// even/odd pair sums, `lambda sum_k (f(2k) - f(2k+1))/2` with `lambda`
    /// the decay rate of the parity amplitude.
    pub paired_correction: Option<f64>,
}

pub fn euler_maclaurin_norm_check(dist: &PhotonDistribution) -> NormCheck {
    let sum = dist.sum();
    let edge = |tau: f64| HURWITZ_HALF / (std::f64::consts::PI * tau).sqrt();
    let paired = |rate: f64| {
        let half: f64 = dist
            .values
            .chunks(2)
            .map(|p| 0.5 * (p[0] - p.get(1).copied().unwrap_or(0.0)))
            .sum();
        rate * half
    };
    match dist.method {
        Method::Exact | Method::Oracle | Method::IdealSqueezed { .. } => NormCheck {
            sum,
            correction_estimate: 0.0,
            paired_correction: None,
        },
        Method::AsymptoticSmooth { n_mean } => NormCheck {
            sum,
            correction_estimate: edge(2.0 * n_mean + 1.0),
            paired_correction: None,
        },
        Method::SmallDissipation { tau, g0 } => NormCheck {
            sum,
            correction_estimate: edge(tau),
            paired_correction: Some(paired(g0 * g0 / tau)),
        },
        Method::AsymptoticOscillating { tau, delta } => {
            let small = 4.0 * delta - 1.0;
            let r = (tau * tau - 4.0 * delta).sqrt();
            let kappa = (2.0 * tau - 1.0 - 4.0 * delta) / (2.0 * r + small);
            NormCheck {
                sum,
                correction_estimate: edge(tau),
                paired_correction: Some(paired(-kappa.ln())),
            }
        }
    }
}
