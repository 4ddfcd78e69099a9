//! Photon-number distributions of zero-mean Gaussian states.
//!
//! The exact distribution is
//! `f(m) = 2 D-^{m/2} / D+^{(m+1)/2} P_m(delta / sqrt(D+ D-))` with
//! `delta = 4 Delta - 1`. Absorbing the prefactor into the polynomial,
//! `R_m = (D-/D+)^{m/2} P_m(...)` obeys the real recurrence
//!
//! ```text
//! (m+1) R_{m+1} = (2m+1) (delta/D+) R_m - m (D-/D+) R_{m-1},   R_0 = 1, R_1 = delta/D+
//! ```
//!
//! and `f(m) = 2 R_m / sqrt(D+)`. The branch of `sqrt(D-)` drops out, so the
//! same real sequence covers both signs of `D-`. For `D- < 0` every term is
//! nonnegative (the imaginary-argument form); for `D- > 0` the wanted
//! solution is the dominant one. At `D- = 0` the `0^0` prefactor is 1.

use statrs::function::factorial::ln_factorial;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::types::{CovarianceState, Estimate, Method, PhotonDistribution, Warning};

/// Target for the truncated tail in automatic mode.
pub const TAIL_TARGET: f64 = 1e-9;
/// Largest automatic truncation.
pub const M_CAP: usize = 1_000_000;
/// Dead-band around `D- = 0` for regime classification.
pub const BOUNDARY_BAND: f64 = 1e-9;
/// Values this far below zero are clamped; anything lower is an error.
pub const NEGATIVE_TOL: f64 = 1e-12;

const CANCEL_RETRY: f64 = 1e6;
const CANCEL_FAIL: f64 = 1e20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MMax {
    /// Smallest `M` with tail bound below [`TAIL_TARGET`], capped at [`M_CAP`].
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Smooth,
    Oscillating,
    ThermalBoundary,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Smooth => "smooth",
            Regime::Oscillating => "oscillating",
            Regime::ThermalBoundary => "thermal-boundary",
        }
    }
}

/// Sign of `D-`, with a dead-band of [`BOUNDARY_BAND`]. Thermal-form states
/// (`tau = 2 sqrt(Delta)`, Legendre argument 1, geometric distribution) are
/// tagged as the boundary as well.
pub fn classify_regime(state: &CovarianceState) -> Regime {
    let d = state.derived().d_minus;
    let thermal = state.tau() - 2.0 * state.delta().sqrt() <= BOUNDARY_BAND * state.tau();
    if d.abs() < BOUNDARY_BAND || thermal {
        Regime::ThermalBoundary
    } else if d > 0.0 {
        Regime::Smooth
    } else {
        Regime::Oscillating
    }
}

/// Asymptotic ratio `f(m+1)/f(m)`: `(2r + delta)/D+` with `r = sqrt(tau^2 - 4 Delta)`.
pub fn tail_ratio(tau: f64, delta: f64) -> f64 {
    let r = (tau * tau - 4.0 * delta).max(0.0).sqrt();
    (2.0 * r + 4.0 * delta - 1.0) / (1.0 + 4.0 * delta + 2.0 * tau)
}

/// Bound on `sum_{m > M} f(m)` from the last two values and the ratio.
fn geometric_tail(last: f64, before: f64, ratio: f64) -> f64 {
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    (last + before) * ratio / (1.0 - ratio)
}

trait Scalar: Copy {
    fn of(x: f64) -> Self;
    fn lin(a: Self, ca: f64, b: Self, cb: f64, scale: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn val(self) -> f64;
}

impl Scalar for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn lin(a: Self, ca: f64, b: Self, cb: f64, scale: f64) -> Self {
        (a * ca - b * cb) / scale
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn val(self) -> f64 {
        self
    }
}

impl Scalar for DoubleDouble {
    fn of(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn lin(a: Self, ca: f64, b: Self, cb: f64, scale: f64) -> Self {
        (a.mul_f64(ca) - b.mul_f64(cb)) / DoubleDouble::from_f64(scale)
    }
    fn scale(self, s: f64) -> Self {
        self.mul_f64(s)
    }
    fn val(self) -> f64 {
        self.to_f64()
    }
}

struct Coefficients<T> {
    alpha: T,
    beta: T,
}

struct Sequence {
    values: Vec<f64>,
    worst_cancellation: f64,
}

/// Scaled recurrence for `R_m`, converted to `f(m)` on the fly.
fn recurrence<T>(c: &Coefficients<T>, norm: f64, stop: &dyn Fn(&[f64]) -> bool) -> Sequence
where
    T: Scalar + std::ops::Mul<Output = T> + std::ops::Add<Output = T>,
{
    let mut values = vec![norm];
    let mut prev = T::of(1.0);
    let mut cur = c.alpha;
    // exponent of the common power-of-two scale
    let mut exponent = 0i32;
    let mut worst = 1.0f64;
    let emit = |v: T, e: i32| norm * v.val() * (e as f64).exp2();
    values.push(emit(cur, exponent));
    let mut m = 1usize;
    while !stop(&values) {
        let mf = m as f64;
        // terms (2m+1) alpha R_m and m beta R_{m-1}
        let t1 = (c.alpha * cur).scale(2.0 * mf + 1.0);
        let t2 = (c.beta * prev).scale(mf);
        let next = T::lin(t1, 1.0, t2, 1.0, mf + 1.0);
        let size = t1.val().abs() + t2.val().abs();
        if size > 0.0 {
            let ratio = size / ((mf + 1.0) * next.val().abs());
            worst = worst.max(if ratio.is_finite() { ratio } else { f64::INFINITY });
        }
        prev = cur;
        cur = next;
        let mag = cur.val().abs();
        if mag != 0.0 && !(1e-200..=1e200).contains(&mag) {
            let e = mag.log2().floor() as i32;
            let s = (-e as f64).exp2();
            prev = prev.scale(s);
            cur = cur.scale(s);
            exponent += e;
        }
        values.push(emit(cur, exponent));
        m += 1;
    }
    Sequence {
        values,
        worst_cancellation: worst,
    }
}

/// Exact distribution `f(0..=M)` of a zero-mean Gaussian state.
pub fn exact_pdf(state: &CovarianceState, m_max: MMax) -> Result<PhotonDistribution> {
    let (sxx, spp) = (state.sigma_xx(), state.sigma_pp());
    let tau = DoubleDouble::sum(sxx, spp);
    // the stored determinant survives rotations exactly
    let delta = DoubleDouble::from_f64(state.delta());
    let four_delta = delta.mul_f64(4.0);
    let d_plus = DoubleDouble::ONE + four_delta + tau.mul_f64(2.0);
    let d_minus = DoubleDouble::ONE + four_delta - tau.mul_f64(2.0);
    let small_delta = four_delta - DoubleDouble::ONE;
    let alpha = small_delta / d_plus;
    let beta = d_minus / d_plus;
    let norm = 2.0 / d_plus.to_f64().sqrt();

    let ratio = tail_ratio(tau.to_f64(), delta.to_f64());
    let mean = state.mean_photons();
    let stop: Box<dyn Fn(&[f64]) -> bool> = match m_max {
        MMax::Fixed(m) => Box::new(move |v: &[f64]| v.len() > m),
        MMax::Auto => Box::new(move |v: &[f64]| {
            let m = v.len() - 1;
            if m >= M_CAP {
                return true;
            }
            m as f64 >= mean && geometric_tail(v[m], v[m - 1], ratio) < TAIL_TARGET
        }),
    };

    let fast = recurrence(
        &Coefficients {
            alpha: alpha.to_f64(),
            beta: beta.to_f64(),
        },
        norm,
        &*stop,
    );
    let seq = if fast.worst_cancellation > CANCEL_RETRY {
        let slow = recurrence(&Coefficients { alpha, beta }, norm, &*stop);
        if slow.worst_cancellation > CANCEL_FAIL {
            return Err(Error::Precision {
                module: "pdf",
                reason: format!(
                    "Legendre recurrence lost all significant digits (cancellation factor {:e}) \
                     even in double-double; use higher precision arithmetic",
                    slow.worst_cancellation
                ),
            });
        }
        slow
    } else {
        fast
    };

    let mut values = seq.values;
    if m_max == MMax::Fixed(0) {
        values.truncate(1);
    }
    let mut clamped = false;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -NEGATIVE_TOL {
                return Err(Error::Precision {
                    module: "pdf",
                    reason: format!("negative probability {v:e}; use higher precision arithmetic"),
                });
            }
            *v = 0.0;
            clamped = true;
        }
    }
    let m = values.len() - 1;
    let tail_bound = if m == 0 {
        (1.0 - values[0]).max(0.0)
    } else {
        geometric_tail(values[m], values[m - 1], ratio)
    };
    Ok(PhotonDistribution {
        values,
        method: Method::Exact,
        tail_bound,
        tail_ratio: Some(ratio),
        clamped,
        warnings: Vec::new(),
    })
}

/// Pure squeezed vacuum: `f(2k) = n^k (2k)! / ((1+n)^{k+1/2} (2^k k!)^2)`,
/// `f(2k+1) = 0`.
pub fn ideal_squeezed_pdf(n_mean: f64, m: u64) -> Result<f64> {
    if !(n_mean >= 0.0) || !n_mean.is_finite() {
        return Err(Error::domain("pdf", "n_mean", n_mean));
    }
    if m % 2 == 1 {
        return Ok(0.0);
    }
    let k = m / 2;
    if n_mean == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let kf = k as f64;
    let ln = kf * n_mean.ln() + ln_factorial(m) - (kf + 0.5) * n_mean.ln_1p()
        - 2.0 * (kf * std::f64::consts::LN_2 + ln_factorial(k));
    Ok(ln.exp())
}

pub fn ideal_squeezed_distribution(n_mean: f64, m_max: usize) -> Result<PhotonDistribution> {
    let values = (0..=m_max as u64)
        .map(|m| ideal_squeezed_pdf(n_mean, m))
        .collect::<Result<Vec<_>>>()?;
    let q = n_mean / (1.0 + n_mean);
    let last_even = values[m_max - m_max % 2];
    Ok(PhotonDistribution {
        values,
        method: Method::IdealSqueezed { n_mean },
        tail_bound: if q == 0.0 { 0.0 } else { last_even * q / (1.0 - q) },
        tail_ratio: Some(q.sqrt()),
        clamped: false,
        warnings: Vec::new(),
    })
}

/// Smooth large-`N` form `exp[-(m+1/2)/(2N)] / sqrt(2 pi N (m+1/2))`.
pub fn asymptotic_smooth(n_mean: f64, m: u64) -> Estimate {
    let x = m as f64 + 0.5;
    let value = (-x / (2.0 * n_mean)).exp() / (2.0 * std::f64::consts::PI * n_mean * x).sqrt();
    let mut warnings = Vec::new();
    if n_mean < 50.0 {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic-smooth",
            detail: format!("N = {n_mean} is not large"),
        });
    }
    if m < 5 {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic-smooth",
            detail: format!("m = {m} is not large"),
        });
    }
    Estimate { value, warnings }
}

/// `(1 - 1/tau, (1-b)/(1+b) [1 - (b^2 + 2c)/(tau (1 - b^2))])`: the leading
/// expansions of the two ratios of the oscillating form, with
/// `2 Delta = b tau + c`.
pub fn expanded_ratios(tau: f64, b: f64, c: f64) -> (f64, f64) {
    let smooth = 1.0 - 1.0 / tau;
    let osc = (1.0 - b) / (1.0 + b) * (1.0 - (b * b + 2.0 * c) / (tau * (1.0 - b * b)));
    (smooth, osc)
}

/// Two-term form for `D- < 0`:
/// `[pi (m+1/2) r]^{-1/2} [((2r+delta)/D+)^{m+1/2} + (-1)^m (|D-|/(2r+delta))^{m+1/2}]`.
pub fn asymptotic_oscillating(tau: f64, delta: f64, m: u64) -> Result<Estimate> {
    let d_minus = 1.0 + 4.0 * delta - 2.0 * tau;
    if !(d_minus < 0.0) {
        return Err(Error::regime(
            "pdf",
            format!("oscillating form needs D- < 0 (got {d_minus}); use asymptotic_smooth"),
        ));
    }
    let d_plus = 1.0 + 4.0 * delta + 2.0 * tau;
    let small = 4.0 * delta - 1.0;
    let r = (tau * tau - 4.0 * delta).sqrt();
    let x = m as f64 + 0.5;
    let big = (2.0 * r + small) / d_plus;
    let kappa = -d_minus / (2.0 * r + small);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let pre = -0.5 * (std::f64::consts::PI * x * r).ln();
    let value = (pre + x * big.ln()).exp() + sign * (pre + x * kappa.ln()).exp();
    let mut warnings = Vec::new();
    let b = 2.0 * delta / tau;
    if b > 0.9 {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic-oscillating",
            detail: format!("b = 2 Delta / tau = {b} is close to 1"),
        });
    }
    if m < 5 {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic-oscillating",
            detail: format!("m = {m} is not large"),
        });
    }
    Ok(Estimate { value, warnings })
}

/// Weak-dissipation limit
/// `[pi tau (m+1/2)]^{-1/2} {e^{-(m+1/2)/tau} + (-1)^m e^{-(m+1/2) G0^2/tau}}`.
pub fn asymptotic_small_dissipation(tau: f64, g0: f64, m: u64) -> Estimate {
    let x = m as f64 + 0.5;
    let pre = 1.0 / (std::f64::consts::PI * tau * x).sqrt();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let value = pre * ((-x / tau).exp() + sign * (-x * g0 * g0 / tau).exp());
    let mut warnings = Vec::new();
    if tau < 10.0 {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic-small-dissipation",
            detail: format!("tau = {tau} is not large"),
        });
    }
    if m < 5 || x > 0.01 * tau * tau {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic-small-dissipation",
            detail: format!("m = {m} outside 1 << m << tau^2"),
        });
    }
    Estimate { value, warnings }
}

fn per_m(w: &Warning) -> bool {
    matches!(w, Warning::OutsideValidity { detail, .. } if detail.starts_with("m ="))
}

/// Values of a table; warnings tied to a single `m` are dropped, the small-`m`
/// end of a table being expected to fall outside the asymptotic range.
fn collect(values: impl Iterator<Item = Result<Estimate>>) -> Result<(Vec<f64>, Vec<Warning>)> {
    let mut warnings: Vec<Warning> = Vec::new();
    let mut out = Vec::new();
    for e in values {
        let e = e?;
        for w in e.warnings {
            if !per_m(&w) && !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        out.push(e.value);
    }
    Ok((out, warnings))
}

fn asymptotic_distribution(values: Vec<f64>, warnings: Vec<Warning>, method: Method, ratio: f64) -> PhotonDistribution {
    let m = values.len() - 1;
    let tail_bound = if m == 0 {
        f64::INFINITY
    } else {
        geometric_tail(values[m].abs(), values[m - 1].abs(), ratio)
    };
    let clamped = values.iter().any(|&v| v < 0.0);
    PhotonDistribution {
        values: values.into_iter().map(|v| v.max(0.0)).collect(),
        method,
        tail_bound,
        tail_ratio: Some(ratio),
        clamped,
        warnings,
    }
}

pub fn smooth_distribution(n_mean: f64, m_max: usize) -> PhotonDistribution {
    let (values, warnings) = collect((0..=m_max as u64).map(|m| Ok(asymptotic_smooth(n_mean, m)))).unwrap();
    let ratio = (-1.0 / (2.0 * n_mean)).exp();
    asymptotic_distribution(values, warnings, Method::AsymptoticSmooth { n_mean }, ratio)
}

pub fn oscillating_distribution(tau: f64, delta: f64, m_max: usize) -> Result<PhotonDistribution> {
    let (values, warnings) = collect((0..=m_max as u64).map(|m| asymptotic_oscillating(tau, delta, m)))?;
    Ok(asymptotic_distribution(
        values,
        warnings,
        Method::AsymptoticOscillating { tau, delta },
        tail_ratio(tau, delta),
    ))
}

pub fn small_dissipation_distribution(tau: f64, g0: f64, m_max: usize) -> PhotonDistribution {
    let (values, mut warnings) =
        collect((0..=m_max as u64).map(|m| Ok(asymptotic_small_dissipation(tau, g0, m)))).unwrap();
    if m_max as f64 + 0.5 > 0.01 * tau * tau {
        warnings.push(Warning::OutsideValidity {
            formula: "asymptotic-small-dissipation",
            detail: format!("table reaches m = {m_max}, beyond 1 << m << tau^2"),
        });
    }
    asymptotic_distribution(values, warnings, Method::SmallDissipation { tau, g0 }, (-1.0 / tau).exp())
}

/// The asymptotic form matching the regime of `state`: smooth for
/// `D- >= 0`, two-term oscillating for `D- < 0`.
pub fn asymptotic_for(state: &CovarianceState, m_max: usize) -> Result<PhotonDistribution> {
    match classify_regime(state) {
        Regime::Oscillating => oscillating_distribution(state.tau(), state.delta(), m_max),
        _ => Ok(smooth_distribution(state.mean_photons(), m_max)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_state_is_geometric() {
        let d = exact_pdf(&CovarianceState::thermal(1.0).unwrap(), MMax::Fixed(60)).unwrap();
        for (m, &f) in d.values.iter().enumerate() {
            assert_relative_eq!(f, 0.5f64.powi(m as i32 + 1), max_relative = 1e-13);
        }
        assert_relative_eq!(d.tail_ratio.unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn vacuum_is_a_point_mass() {
        let d = exact_pdf(&CovarianceState::vacuum(), MMax::Auto).unwrap();
        assert_eq!(d.values[0], 1.0);
        assert!(d.values[1..].iter().all(|&f| f == 0.0));
        assert_eq!(d.tail_bound, 0.0);
    }

    #[test]
    fn squeezed_vacuum_with_one_photon() {
        let s = CovarianceState::from_invariants(3.0, 0.25).unwrap();
        let d = exact_pdf(&s, MMax::Fixed(10)).unwrap();
        assert_relative_eq!(d.values[0], 0.5f64.sqrt(), max_relative = 1e-14);
        assert!(d.values[1].abs() < 1e-15);
        assert_relative_eq!(d.values[2], 0.17678, epsilon = 1e-5);
        assert_relative_eq!(d.values[2], ideal_squeezed_pdf(1.0, 2).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn ideal_squeezed_values() {
        assert_eq!(ideal_squeezed_pdf(0.0, 0).unwrap(), 1.0);
        assert_eq!(ideal_squeezed_pdf(0.0, 4).unwrap(), 0.0);
        assert_relative_eq!(ideal_squeezed_pdf(1.0, 0).unwrap(), 0.70711, epsilon = 1e-5);
        assert_eq!(ideal_squeezed_pdf(3.0, 7).unwrap(), 0.0);
        assert!(ideal_squeezed_pdf(-1.0, 0).is_err());
    }

    #[test]
    fn automatic_truncation_meets_target() {
        let s = CovarianceState::new(2.0, 0.8, 0.5).unwrap();
        let d = exact_pdf(&s, MMax::Auto).unwrap();
        assert!(d.tail_bound < TAIL_TARGET);
        assert!((d.sum() - 1.0).abs() < 1e-8);
        assert_relative_eq!(d.mean(), s.mean_photons(), max_relative = 1e-6);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&CovarianceState::thermal(2.0).unwrap()), Regime::ThermalBoundary);
        assert_eq!(classify_regime(&CovarianceState::vacuum()), Regime::ThermalBoundary);
        assert_eq!(classify_regime(&CovarianceState::squeezed_vacuum(0.7).unwrap()), Regime::Oscillating);
        // b = Delta/N = 1.5 with N = 100
        let s = CovarianceState::from_invariants(201.0, 150.0).unwrap();
        assert_eq!(classify_regime(&s), Regime::Smooth);
    }

    #[test]
    fn smooth_reference_value() {
        let e = asymptotic_smooth(1000.0, 1000);
        assert!(e.is_clean());
        assert_relative_eq!(e.value, 2.418498e-4, max_relative = 1e-6);
        assert!(!asymptotic_smooth(10.0, 2).is_clean());
    }

    #[test]
    fn oscillating_needs_negative_d_minus() {
        assert!(matches!(asymptotic_oscillating(3.0, 2.25, 10), Err(Error::Regime { .. })));
        let f500 = asymptotic_oscillating(2001.0, 100.0, 500).unwrap().value;
        let f501 = asymptotic_oscillating(2001.0, 100.0, 501).unwrap().value;
        assert!(f500 > f501);
        let (_, k) = expanded_ratios(1e12, 1.0 / 3.0, 0.0);
        assert_relative_eq!(k, 0.5, epsilon = 1e-10);
        assert!(!asymptotic_oscillating(2001.0, 950.0, 100).unwrap().is_clean());
    }

    #[test]
    fn exact_parity_ordering() {
        let s = CovarianceState::from_invariants(2001.0, 100.0).unwrap();
        let d = exact_pdf(&s, MMax::Fixed(501)).unwrap();
        assert!(d.values[500] > d.values[501]);
    }

    #[test]
    fn small_dissipation_structure() {
        let odd = asymptotic_small_dissipation(2000.0, 1.0, 101);
        assert!(odd.value.abs() < 1e-18);
        let even = asymptotic_small_dissipation(2000.0, 1.0, 100).value;
        let smooth_part = (-100.5f64 / 2000.0).exp() / (std::f64::consts::PI * 2000.0 * 100.5).sqrt();
        assert_relative_eq!(even, 2.0 * smooth_part, max_relative = 1e-14);
        assert!(!asymptotic_small_dissipation(20.0, 1.0, 10).is_clean());
        // G0 = 3: relative oscillation amplitude e^{-(m+1/2)(9-1)/tau}
        let x: f64 = 100.5;
        let contrast = (-x * 9.0 / 2000.0).exp() / (-x / 2000.0).exp();
        assert_relative_eq!(contrast, (-0.402f64).exp(), max_relative = 1e-3);
    }
}
