//! Legendre polynomials of large degree off the interval `(-1, 1)`.
//!
//! Two argument families occur for Gaussian states: real `x >= 1` and purely
//! imaginary `x = i y`. In both the wanted `P_m` is the dominant solution of
//! the three-term recurrence, so the upward direction is stable.
//!
//! * real `x >= 1`: `(m+1) P_{m+1} = (2m+1) x P_m - m P_{m-1}`. The second
//!   solution `Q_m(x)` decays like `(x + sqrt(x^2-1))^{-m}` while `P_m` grows
//!   like the inverse, and every `P_m(x)` is positive.
//! * imaginary: with `Q_m = i^{-m} P_m(i y)` the recurrence becomes
//!   `(m+1) Q_{m+1} = (2m+1) y Q_m + m Q_{m-1}` with nonnegative terms only.
//!
//! Values are kept scaled in `[1, 2)` by powers of two, the exponent being
//! accumulated separately.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// `P_m(argument) = value * e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreEval {
    pub degree: usize,
    pub argument: Complex64,
    pub log_scale: f64,
    pub value: Complex64,
}

impl LegendreEval {
    /// Unscaled value; overflows to infinity for huge degrees.
    pub fn reconstruct(&self) -> Complex64 {
        self.value * self.log_scale.exp()
    }

    /// `ln |P_m|`.
    pub fn ln_abs(&self) -> f64 {
        self.value.norm().ln() + self.log_scale
    }
}

/// Scales `(a, b)` by a common power of two so that `b` lands in `[1, 2)`.
fn renormalize(a: &mut f64, b: &mut f64, exponent: &mut i64) {
    if *b == 0.0 || !b.is_finite() {
        return;
    }
    let e = b.abs().log2().floor() as i64;
    if e != 0 {
        let s = (-e as f64).exp2();
        *a *= s;
        *b *= s;
        *exponent += e;
    }
}

/// Runs `(m+1) u_{m+1} = (2m+1) s u_m + sign m u_{m-1}` from `u_0 = 1`,
/// `u_1 = s`, returning `u_m` as `(mantissa, binary exponent)`.
fn run(m: usize, s: f64, sign: f64) -> (f64, i64) {
    if m == 0 {
        return (1.0, 0);
    }
    let (mut prev, mut cur) = (1.0, s);
    let mut exponent = 0i64;
    renormalize(&mut prev, &mut cur, &mut exponent);
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * s * cur + sign * kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        renormalize(&mut prev, &mut cur, &mut exponent);
    }
    (cur, exponent)
}

/// `P_m(x)` for real `x >= 1`.
pub fn legendre_real(m: usize, x: f64) -> Result<LegendreEval> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::domain("pdf", "Legendre argument (real branch needs x >= 1)", x));
    }
    let (v, e) = run(m, x, -1.0);
    Ok(LegendreEval {
        degree: m,
        argument: Complex64::new(x, 0.0),
        log_scale: e as f64 * LN_2,
        value: Complex64::new(v, 0.0),
    })
}

/// `P_m(i y)` for real `y >= 0`.
pub fn legendre_imaginary(m: usize, y: f64) -> Result<LegendreEval> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain("pdf", "Legendre argument (imaginary branch needs y >= 0)", y));
    }
    let (v, e) = run(m, y, 1.0);
    // i^m
    let phase = match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    Ok(LegendreEval {
        degree: m,
        argument: Complex64::new(0.0, y),
        log_scale: e as f64 * LN_2,
        value: phase * v,
    })
}

/// `e^{-z} I_0(z)` for `z >= 0`.
#[cfg(test)]
pub(crate) fn bessel_i0_scaled(z: f64) -> f64 {
    if z < 15.0 {
        // power series sum (z/2)^{2k} / (k!)^2
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-z).exp()
    } else {
        // asymptotic series prod (2j-1)^2 / (8 z j)
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..30 {
            let jf = j as f64;
            let next = term * (2.0 * jf - 1.0).powi(2) / (8.0 * z * jf);
            if next > term || next < 1e-17 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * std::f64::consts::PI * z).sqrt()
    }
}

/// `ln P_m(cosh xi)` from `P_m(cosh xi) ~ (xi / sinh xi)^{1/2} I_0((m+1/2) xi)`.
#[cfg(test)]
pub(crate) fn olver_ln(m: usize, x: f64) -> f64 {
    let xi = x.acosh();
    if xi == 0.0 {
        return 0.0;
    }
    let z = (m as f64 + 0.5) * xi;
    0.5 * (xi / xi.sinh()).ln() + z + bessel_i0_scaled(z).ln()
}
