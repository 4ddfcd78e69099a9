//! Pulse shapes `chi(t)`, `gamma(t)` and periodic pulse schedules.
//!
//! Times inside a [`PulseProfile`] are local: the pulse occupies
//! `[0, duration]`. A [`PulseTrain`] places copies of the profile at
//! `start + k * period`; between pulses `chi = gamma = 0`.

use crate::error::{Error, Result};
use crate::types::Warning;

/// Threshold above which modulation or loss is flagged as not small.
pub const SMALL_PARAMETER: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// Constant `chi` and `gamma` over the whole pulse.
    Rectangular { chi: f64, gamma: f64, duration: f64 },
    /// Linear rise to the peak at `rise`, then exponential decay with time
    /// constant `decay` until `duration`. `chi` and `gamma` share the envelope.
    RiseDecay {
        chi_peak: f64,
        gamma_peak: f64,
        rise: f64,
        decay: f64,
        duration: f64,
    },
    /// Piecewise-linear interpolation of user samples.
    Sampled(SampledPulse),
}

/// Samples `(t, chi, gamma)` with strictly increasing `t`, shifted so the
/// first sample sits at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulse {
    t: Vec<f64>,
    chi: Vec<f64>,
    gamma: Vec<f64>,
}

impl SampledPulse {
    pub fn new(t: Vec<f64>, chi: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || chi.len() != t.len() || gamma.len() != t.len() {
            return Err(Error::precondition(
                "pulse",
                "sampled pulse needs at least two samples with matching column lengths",
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::precondition("pulse", "sample times must be strictly increasing"));
        }
        if chi.iter().chain(&gamma).chain(&t).any(|v| !v.is_finite()) {
            return Err(Error::precondition("pulse", "non-finite sample"));
        }
        let t0 = t[0];
        let t = t.into_iter().map(|x| x - t0).collect();
        Ok(SampledPulse { t, chi, gamma })
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    fn interp(&self, values: &[f64], t: f64) -> f64 {
        let last = self.t.len() - 1;
        if t <= 0.0 {
            return values[0];
        }
        if t >= self.t[last] {
            return values[last];
        }
        let i = self.t.partition_point(|&x| x <= t) - 1;
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        values[i] + w * (values[i + 1] - values[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseProfile {
    shape: PulseShape,
}

impl PulseProfile {
    pub fn new(shape: PulseShape) -> Result<Self> {
        match &shape {
            PulseShape::Rectangular { chi, gamma, duration } => {
                check_positive("duration", *duration)?;
                check_finite("chi", *chi)?;
                check_nonneg("gamma", *gamma)?;
            }
            PulseShape::RiseDecay {
                chi_peak,
                gamma_peak,
                rise,
                decay,
                duration,
            } => {
                check_finite("chi_peak", *chi_peak)?;
                check_nonneg("gamma_peak", *gamma_peak)?;
                check_positive("rise", *rise)?;
                check_positive("decay", *decay)?;
                check_positive("duration", *duration)?;
                if !(duration > rise) {
                    return Err(Error::precondition("pulse", "rise-decay pulse needs duration > rise"));
                }
            }
            PulseShape::Sampled(s) => {
                if s.gamma.iter().any(|&g| g < 0.0) {
                    return Err(Error::domain("pulse", "gamma sample (must be >= 0)", -1.0));
                }
            }
        }
        Ok(PulseProfile { shape })
    }

    pub fn rectangular(chi: f64, gamma: f64, duration: f64) -> Result<Self> {
        PulseProfile::new(PulseShape::Rectangular { chi, gamma, duration })
    }

    pub fn rise_decay(chi_peak: f64, gamma_peak: f64, rise: f64, decay: f64, duration: f64) -> Result<Self> {
        PulseProfile::new(PulseShape::RiseDecay {
            chi_peak,
            gamma_peak,
            rise,
            decay,
            duration,
        })
    }

    pub fn sampled(samples: SampledPulse) -> Result<Self> {
        PulseProfile::new(PulseShape::Sampled(samples))
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn duration(&self) -> f64 {
        match &self.shape {
            PulseShape::Rectangular { duration, .. } | PulseShape::RiseDecay { duration, .. } => *duration,
            PulseShape::Sampled(s) => *s.t.last().unwrap(),
        }
    }

    fn envelope(rise: f64, decay: f64, t: f64) -> f64 {
        if t < rise {
            t / rise
        } else {
            (-(t - rise) / decay).exp()
        }
    }

    /// Frequency detuning at local time `t` (zero outside the pulse).
    pub fn chi(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration() {
            return 0.0;
        }
        match &self.shape {
            PulseShape::Rectangular { chi, .. } => *chi,
            PulseShape::RiseDecay {
                chi_peak, rise, decay, ..
            } => chi_peak * Self::envelope(*rise, *decay, t),
            PulseShape::Sampled(s) => s.interp(&s.chi, t),
        }
    }

    /// Damping rate at local time `t` (zero outside the pulse).
    pub fn gamma(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration() {
            return 0.0;
        }
        match &self.shape {
            PulseShape::Rectangular { gamma, .. } => *gamma,
            PulseShape::RiseDecay {
                gamma_peak, rise, decay, ..
            } => gamma_peak * Self::envelope(*rise, *decay, t),
            PulseShape::Sampled(s) => s.interp(&s.gamma, t).max(0.0),
        }
    }

    /// Interior local times where `chi` or `gamma` has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            PulseShape::Rectangular { .. } => Vec::new(),
            PulseShape::RiseDecay { rise, .. } => vec![*rise],
            PulseShape::Sampled(s) => s.t[1..s.t.len() - 1].to_vec(),
        }
    }

    /// `max |chi|` over the pulse.
    pub fn max_abs_chi(&self) -> f64 {
        match &self.shape {
            PulseShape::Rectangular { chi, .. } => chi.abs(),
            PulseShape::RiseDecay { chi_peak, .. } => chi_peak.abs(),
            PulseShape::Sampled(s) => s.chi.iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }

    /// Smallest `chi` over the pulse, counting the zero level outside it.
    pub fn min_chi(&self) -> f64 {
        match &self.shape {
            PulseShape::Rectangular { chi, .. } => chi.min(0.0),
            PulseShape::RiseDecay { chi_peak, .. } => chi_peak.min(0.0),
            PulseShape::Sampled(s) => s.chi.iter().fold(0.0f64, |m, &c| m.min(c)),
        }
    }

    /// Closed-form `int gamma dt` over the pulse.
    pub fn gamma_integral(&self) -> f64 {
        match &self.shape {
            PulseShape::Rectangular { gamma, duration, .. } => gamma * duration,
            PulseShape::RiseDecay {
                gamma_peak,
                rise,
                decay,
                duration,
                ..
            } => gamma_peak * envelope_integral(*rise, *decay, *duration),
            PulseShape::Sampled(s) => trapezoid(&s.t, &s.gamma),
        }
    }

    /// Closed-form `int chi dt` over the pulse.
    pub fn chi_integral(&self) -> f64 {
        match &self.shape {
            PulseShape::Rectangular { chi, duration, .. } => chi * duration,
            PulseShape::RiseDecay {
                chi_peak,
                rise,
                decay,
                duration,
                ..
            } => chi_peak * envelope_integral(*rise, *decay, *duration),
            PulseShape::Sampled(s) => trapezoid(&s.t, &s.chi),
        }
    }

    /// Small-parameter checks (`|chi| << 1`, `int gamma << 1`).
    pub fn warnings(&self) -> Vec<Warning> {
        let mut out = Vec::new();
        let chi = self.max_abs_chi();
        if chi >= SMALL_PARAMETER {
            out.push(Warning::LargeModulation {
                quantity: "max|chi|",
                value: chi,
            });
        }
        let loss = self.gamma_integral();
        if loss >= SMALL_PARAMETER {
            out.push(Warning::LargeModulation {
                quantity: "int gamma dt",
                value: loss,
            });
        }
        out
    }
}

fn envelope_integral(rise: f64, decay: f64, duration: f64) -> f64 {
    0.5 * rise - decay * (-(duration - rise) / decay).exp_m1()
}

fn trapezoid(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2)
        .zip(v.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

fn check_finite(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("pulse", what, v))
    }
}

fn check_nonneg(what: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("pulse", what, v))
    }
}

fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("pulse", what, v))
    }
}

/// `count` copies of a pulse starting at `start + k * period`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pulse: PulseProfile,
    period: f64,
    count: usize,
    start: f64,
}

impl PulseTrain {
    pub fn new(pulse: PulseProfile, period: f64, count: usize) -> Result<Self> {
        PulseTrain::with_start(pulse, period, count, 0.0)
    }

    pub fn with_start(pulse: PulseProfile, period: f64, count: usize, start: f64) -> Result<Self> {
        check_positive("period", period)?;
        check_nonneg("start", start)?;
        if count > 1 && period < pulse.duration() {
            return Err(Error::precondition(
                "pulse",
                format!("period {period} shorter than pulse duration {}", pulse.duration()),
            ));
        }
        Ok(PulseTrain {
            pulse,
            period,
            count,
            start,
        })
    }

    /// A single pulse at `t = 0`.
    pub fn single(pulse: PulseProfile) -> Self {
        let period = pulse.duration();
        PulseTrain {
            pulse,
            period,
            count: 1,
            start: 0.0,
        }
    }

    pub fn pulse(&self) -> &PulseProfile {
        &self.pulse
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn pulse_start(&self, k: usize) -> f64 {
        self.start + k as f64 * self.period
    }

    /// End of the last full period (or of the last pulse, if later).
    pub fn end_time(&self) -> f64 {
        if self.count == 0 {
            return self.start;
        }
        let last = self.pulse_start(self.count - 1);
        (last + self.period).max(last + self.pulse.duration())
    }

    /// Index of the pulse active at global time `t`, if any.
    pub fn active_pulse(&self, t: f64) -> Option<usize> {
        if self.count == 0 || t < self.start {
            return None;
        }
        let k = (((t - self.start) / self.period).floor() as usize).min(self.count - 1);
        let local = t - self.pulse_start(k);
        (local >= 0.0 && local <= self.pulse.duration()).then_some(k)
    }

    pub fn chi_at(&self, t: f64) -> f64 {
        self.active_pulse(t)
            .map_or(0.0, |k| self.pulse.chi(t - self.pulse_start(k)))
    }

    pub fn gamma_at(&self, t: f64) -> f64 {
        self.active_pulse(t)
            .map_or(0.0, |k| self.pulse.gamma(t - self.pulse_start(k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rise_decay_integral_matches_closed_form() {
        let p = PulseProfile::rise_decay(0.02, 0.01, 0.2, 0.5, 1.5).unwrap();
        let n = 200_000;
        let h = 1.5 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            s += p.chi((i as f64 + 0.5) * h) * h;
        }
        assert_relative_eq!(s, p.chi_integral(), epsilon = 1e-9);
        assert_relative_eq!(p.gamma_integral() / p.chi_integral(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn sampled_pulse_interpolates_and_shifts() {
        let s = SampledPulse::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.02, 0.0], vec![0.0, 0.01, 0.0]).unwrap();
        let p = PulseProfile::sampled(s).unwrap();
        assert_eq!(p.duration(), 2.0);
        assert_relative_eq!(p.chi(0.5), 0.01, epsilon = 1e-15);
        assert_relative_eq!(p.gamma(1.5), 0.005, epsilon = 1e-15);
        assert_eq!(p.breakpoints(), vec![1.0]);
        assert!(SampledPulse::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn negative_gamma_rejected() {
        assert!(PulseProfile::rectangular(0.01, -0.1, 1.0).is_err());
        let s = SampledPulse::new(vec![0.0, 1.0], vec![0.0; 2], vec![0.0, -0.1]).unwrap();
        assert!(PulseProfile::sampled(s).is_err());
    }

    #[test]
    fn large_modulation_warns() {
        assert!(PulseProfile::rectangular(0.01, 0.001, 1.0).unwrap().warnings().is_empty());
        assert_eq!(PulseProfile::rectangular(0.2, 0.2, 1.0).unwrap().warnings().len(), 2);
    }

    #[test]
    fn train_geometry() {
        let p = PulseProfile::rectangular(0.01, 0.0, 1.0).unwrap();
        let train = PulseTrain::new(p.clone(), 3.0, 4).unwrap();
        assert_eq!(train.end_time(), 12.0);
        assert_eq!(train.active_pulse(3.5), Some(1));
        assert_eq!(train.active_pulse(4.5), None);
        assert_eq!(train.chi_at(9.2), 0.01);
        assert!(PulseTrain::new(p, 0.5, 3).is_err());
    }
}
