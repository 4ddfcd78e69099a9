//! Closed forms for `n` identical resonant pulses.
//!
//! With `a = 2 n nu` and `c = 2 n Lambda`,
//!
//! ```text
//! E_n = cosh a,   |E~_n| = sinh a,
//! A+ = G Lambda / (4 (Lambda + nu)) (e^a - e^-c),
//! A- = G Lambda / (4 (Lambda - nu)) (e^-a - e^-c),
//! J_n = A+ + A-,  |J~_n| = |A+ - A-|.
//! ```
//!
//! Everything is carried as logarithms of positive quantities. `A-` is
//! written as `(G Lambda / 4) 2n e^-c expm1(x)/x` with `x = 2n(Lambda - nu)`,
//! which is regular at `nu = Lambda`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{pulse_grid, simpson_pair, GridSpec, SegmentKind};
use crate::pulse::{PulseProfile, SMALL_PARAMETER};
use crate::types::{CovarianceState, Estimate, Warning};

const LN_MAX: f64 = 709.78;

/// Per-pulse gain `nu`, loss `Lambda` and phase shift `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseCoefficients {
    pub nu: f64,
    pub lambda: f64,
    pub phi: f64,
}

/// `nu = |int omega0 chi e^{-2 i omega0 t} dt|`, `Lambda = int gamma dt`,
/// `phi = -omega0 int chi dt`, by Simpson's rule on the dynamics grid.
pub fn pulse_coefficients(profile: &PulseProfile, omega0: f64) -> Result<PulseCoefficients> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::domain("pulsetrain", "omega0", omega0));
    }
    // Simpson on a fine grid, Richardson-extrapolated against the 2h sum
    let spec = GridSpec {
        per_period: 256,
        per_pulse: 256,
    };
    let grid = pulse_grid(profile, omega0, &spec);
    let d = profile.duration();
    let mut gain = Complex64::new(0.0, 0.0);
    let mut loss = 0.0;
    let mut area = 0.0;
    let extrapolate = |(fine, coarse): (f64, f64)| fine + (fine - coarse) / 15.0;
    for seg in &grid.segments {
        debug_assert!(matches!(seg.kind, SegmentKind::Pulse { .. }));
        let ts = &grid.times[seg.first..=seg.last];
        let h = (ts[ts.len() - 1] - ts[0]) / seg.intervals() as f64;
        let chi: Vec<f64> = ts.iter().map(|&t| profile.chi(t.clamp(0.0, d))).collect();
        let gam: Vec<f64> = ts.iter().map(|&t| profile.gamma(t.clamp(0.0, d))).collect();
        let (wr, wi): (Vec<f64>, Vec<f64>) = ts
            .iter()
            .zip(&chi)
            .map(|(&t, &c)| {
                let z = Complex64::from_polar(omega0 * c, -2.0 * omega0 * t);
                (z.re, z.im)
            })
            .unzip();
        gain += Complex64::new(extrapolate(simpson_pair(&wr, h)), extrapolate(simpson_pair(&wi, h)));
        loss += extrapolate(simpson_pair(&gam, h));
        area += extrapolate(simpson_pair(&chi, h));
    }
    Ok(PulseCoefficients {
        nu: gain.norm(),
        lambda: loss,
        phi: -omega0 * area,
    })
}

/// Repetition period `T = (T0/2)(m + phi/pi)` that keeps the train on the
/// parametric resonance. A pulse with `chi > 0` advances the oscillation
/// phase by `-phi`, so the free gap has to shrink by the same angle.
pub fn resonance_period(omega0: f64, phi: f64, m: i64) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("pulsetrain", "resonance order m (must be >= 1)", m as f64));
    }
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::domain("pulsetrain", "omega0", omega0));
    }
    let t = (std::f64::consts::PI * m as f64 + phi) / omega0;
    if !(t > 0.0) {
        return Err(Error::domain("pulsetrain", "phi (resonance period would be nonpositive)", phi));
    }
    Ok(t)
}

/// Rectangular pulse of the given duration with gain `nu` and loss `Lambda`.
pub fn rectangular_pulse_for(nu: f64, lambda: f64, duration: f64, omega0: f64) -> Result<PulseProfile> {
    let s = (omega0 * duration).sin().abs();
    if s < 1e-6 {
        return Err(Error::precondition(
            "pulsetrain",
            "pulse spans a whole number of half periods and has no parametric gain",
        ));
    }
    PulseProfile::rectangular(nu / s, lambda / duration, duration)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrainSummary {
    pub nu: f64,
    pub lambda: f64,
    pub phi: f64,
    pub n: u64,
    pub g: f64,
    pub g0: f64,
    pub ln_e: f64,
    pub ln_e_tilde: f64,
    pub ln_a_plus: f64,
    pub ln_a_minus: f64,
    /// `ln(tau)` of the assembled state.
    pub ln_tau: f64,
    pub ln_delta: f64,
    pub warnings: Vec<Warning>,
}

fn ln_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a > b`.
fn ln_diff(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp_m1()).ln()
}

fn check_small(nu: f64, lambda: f64) -> Vec<Warning> {
    let mut w = Vec::new();
    if nu >= SMALL_PARAMETER {
        w.push(Warning::LargeModulation { quantity: "nu", value: nu });
    }
    if lambda >= SMALL_PARAMETER {
        w.push(Warning::LargeModulation {
            quantity: "Lambda",
            value: lambda,
        });
    }
    w
}

fn check_factors(g: f64, g0: f64) -> Result<()> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::domain("pulsetrain", "G (must be >= 1)", g));
    }
    if !(g0 >= 1.0) || !g0.is_finite() {
        return Err(Error::domain("pulsetrain", "G0 (must be >= 1)", g0));
    }
    Ok(())
}

/// State after `n` resonant pulses.
pub fn evolve_summary(nu: f64, lambda: f64, g: f64, g0: f64, n: u64) -> Result<PulseTrainSummary> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::domain("pulsetrain", "nu", nu));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain("pulsetrain", "Lambda", lambda));
    }
    check_factors(g, g0)?;
    let nf = n as f64;
    let a = 2.0 * nf * nu;
    let c = 2.0 * nf * lambda;

    // ln cosh a, ln sinh a
    let ln_e = a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p();
    let ln_e_tilde = if a == 0.0 {
        f64::NEG_INFINITY
    } else {
        a - std::f64::consts::LN_2 + (-(-2.0 * a).exp_m1()).ln()
    };

    let (ln_a_plus, ln_a_minus) = if lambda == 0.0 || n == 0 {
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    } else {
        let pre = (g * lambda / 4.0).ln();
        let plus = pre - (lambda + nu).ln() + ln_diff(a, -c);
        let x = 2.0 * nf * (lambda - nu);
        let ratio = if x.abs() < 1e-12 { 1.0 + 0.5 * x } else { x.exp_m1() / x };
        let minus = pre + (2.0 * nf).ln() - c + ratio.ln();
        (plus, minus)
    };

    // tau = 2 (A+ e^-a + A- e^a + g cosh a), g = G0 e^-c / 2
    let ln_g = (0.5 * g0).ln() - c;
    let ln_tau = std::f64::consts::LN_2 + ln_sum(ln_sum(ln_a_plus - a, ln_a_minus + a), ln_g + ln_e);
    // Delta = (2A+ + g)(2A- + g)
    let two = std::f64::consts::LN_2;
    let ln_delta = ln_sum(two + ln_a_plus, ln_g) + ln_sum(two + ln_a_minus, ln_g);

    if ln_tau > LN_MAX {
        return Err(Error::Range {
            module: "pulsetrain",
            quantity: "N_n",
            ln_value: ln_tau,
        });
    }
    if ln_delta > LN_MAX {
        return Err(Error::Range {
            module: "pulsetrain",
            quantity: "Delta_n",
            ln_value: ln_delta,
        });
    }

    Ok(PulseTrainSummary {
        nu,
        lambda,
        phi: 0.0,
        n,
        g,
        g0,
        ln_e,
        ln_e_tilde,
        ln_a_plus,
        ln_a_minus,
        ln_tau,
        ln_delta,
        warnings: check_small(nu, lambda),
    })
}

impl PulseTrainSummary {
    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn e_n(&self) -> f64 {
        self.ln_e.exp()
    }

    pub fn e_tilde_abs(&self) -> f64 {
        self.ln_e_tilde.exp()
    }

    pub fn a_plus(&self) -> f64 {
        self.ln_a_plus.exp()
    }

    pub fn a_minus(&self) -> f64 {
        self.ln_a_minus.exp()
    }

    pub fn j_n(&self) -> f64 {
        ln_sum(self.ln_a_plus, self.ln_a_minus).exp()
    }

    /// `|A+ - A-|`.
    pub fn j_tilde_abs(&self) -> f64 {
        let (p, m) = (self.ln_a_plus, self.ln_a_minus);
        if p == m {
            return 0.0;
        }
        if p > m {
            ln_diff(p, m).exp()
        } else {
            ln_diff(m, p).exp()
        }
    }

    pub fn tau(&self) -> f64 {
        self.ln_tau.exp()
    }

    pub fn n_photons(&self) -> f64 {
        0.5 * (self.tau() - 1.0)
    }

    pub fn delta(&self) -> f64 {
        self.ln_delta.exp()
    }
}

/// Covariance state after the train, with the constant phase `beta = 0`.
pub fn covariance_from_summary(summary: &PulseTrainSummary) -> Result<CovarianceState> {
    covariance_with_phase(summary, 0.0)
}

/// Covariance state for an explicit constant phase `beta`. With
/// `xi = u + v`, `xi_dot = -i (u - v)`, `u = cosh(n nu)`, `v = sinh(n nu) e^{i beta}`
/// the `beta = 0` state is diagonal,
/// `sigma_xx = e^{2 n nu} (2 A- + g)`, `sigma_pp = e^{-2 n nu} (2 A+ + g)`,
/// `g = G0 e^{-2 n Lambda} / 2`, and a nonzero `beta` rotates it by `beta / 2`.
pub fn covariance_with_phase(summary: &PulseTrainSummary, beta: f64) -> Result<CovarianceState> {
    let a = 2.0 * summary.n as f64 * summary.nu;
    if a > LN_MAX {
        return Err(Error::Range {
            module: "pulsetrain",
            quantity: "E_n",
            ln_value: summary.ln_e,
        });
    }
    let ln_g = (0.5 * summary.g0).ln() - 2.0 * summary.n as f64 * summary.lambda;
    let ln2 = std::f64::consts::LN_2;
    let sxx = (a + ln_sum(ln2 + summary.ln_a_minus, ln_g)).exp();
    let spp = (-a + ln_sum(ln2 + summary.ln_a_plus, ln_g)).exp();
    Ok(CovarianceState::new(sxx, spp, 0.0)?.rotated(0.5 * beta))
}

/// Leading exponential term of `N_n` in the growth regime `nu > Lambda`.
pub fn asymptotic_n(nu: f64, lambda: f64, g: f64, g0: f64, n: u64) -> Result<Estimate> {
    check_factors(g, g0)?;
    if !(nu > lambda) || !(lambda >= 0.0) {
        return Err(Error::regime(
            "pulsetrain",
            format!("no exponential growth for nu = {nu} <= Lambda = {lambda}"),
        ));
    }
    let nf = n as f64;
    let ln_v = 2.0 * nf * (nu - lambda) + (0.25 * (g0 + g * lambda / (nu - lambda))).ln();
    if ln_v > LN_MAX {
        return Err(Error::Range {
            module: "pulsetrain",
            quantity: "N_n asymptote",
            ln_value: ln_v,
        });
    }
    let mut warnings = check_small(nu, lambda);
    if 2.0 * nf * nu < 3.0 {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic N_n",
            detail: format!("2 n nu = {} is not large", 2.0 * nf * nu),
        });
    }
    Ok(Estimate {
        value: ln_v.exp(),
        warnings,
    })
}

/// Leading term `Delta_n = N_n G Lambda / (nu + Lambda)`.
pub fn asymptotic_delta(nu: f64, lambda: f64, g: f64, n_n: f64) -> Result<Estimate> {
    if !(g >= 1.0) {
        return Err(Error::domain("pulsetrain", "G (must be >= 1)", g));
    }
    if !(nu + lambda > 0.0) || !(lambda >= 0.0) {
        return Err(Error::domain("pulsetrain", "nu + Lambda", nu + lambda));
    }
    let mut warnings = check_small(nu, lambda);
    if nu <= lambda {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic Delta_n",
            detail: format!("nu = {nu} <= Lambda = {lambda}"),
        });
    }
    Ok(Estimate {
        value: n_n * g * lambda / (nu + lambda),
        warnings,
    })
}
