//! Sampling grids aligned to pulse edges and kinks.
//!
//! The time axis is cut into segments: free gaps (`chi = gamma = 0`) and
//! pulse pieces between breakpoints. Each segment is sampled uniformly with a
//! multiple of four intervals so that quadrature never straddles a
//! discontinuity and a step-doubled Simpson estimate is always available.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pulse::{PulseProfile, PulseTrain};

/// Sampling density of the output grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Minimum samples per period `2 pi / omega0`.
    pub per_period: usize,
    /// Minimum samples across each pulse.
    pub per_pulse: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            per_period: 64,
            per_pulse: 64,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.per_period < 40 || self.per_pulse < 40 {
            return Err(Error::precondition(
                "dynamics",
                format!(
                    "grid density {}/{} below 40 samples per period and per pulse",
                    self.per_period, self.per_pulse
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    Free,
    /// Part of pulse `index`; local pulse time is `t - origin`.
    Pulse { index: usize, origin: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub first: usize,
    pub last: usize,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn intervals(&self) -> usize {
        self.last - self.first
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub times: Vec<f64>,
    pub segments: Vec<Segment>,
}

fn round_up_to_four(n: usize) -> usize {
    n.max(4).div_ceil(4) * 4
}

struct Builder {
    times: Vec<f64>,
    segments: Vec<Segment>,
}

impl Builder {
    fn push(&mut self, t0: f64, t1: f64, intervals: usize, kind: SegmentKind) {
        let h = (t1 - t0) / intervals as f64;
        let first = self.times.len() - 1;
        for j in 1..intervals {
            self.times.push(t0 + j as f64 * h);
        }
        self.times.push(t1);
        self.segments.push(Segment {
            first,
            last: first + intervals,
            kind,
        });
    }
}

fn intervals_for(len: f64, period0: f64, spec: &GridSpec, pulse_len: Option<f64>) -> usize {
    let by_period = (spec.per_period as f64 * len / period0).ceil() as usize;
    let by_pulse = pulse_len.map_or(0, |d| (spec.per_pulse as f64 * len / d).ceil() as usize);
    round_up_to_four(by_period.max(by_pulse))
}

/// Local pulse pieces `[a, b]` between breakpoints.
pub(crate) fn pulse_pieces(pulse: &PulseProfile) -> Vec<(f64, f64)> {
    let d = pulse.duration();
    let mut cuts = vec![0.0];
    for b in pulse.breakpoints() {
        if b > 0.0 && b < d {
            cuts.push(b);
        }
    }
    cuts.push(d);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Grid over a single pulse in local time.
pub(crate) fn pulse_grid(pulse: &PulseProfile, omega0: f64, spec: &GridSpec) -> Grid {
    let period0 = 2.0 * PI / omega0;
    let d = pulse.duration();
    let mut b = Builder {
        times: vec![0.0],
        segments: Vec::new(),
    };
    for (a, e) in pulse_pieces(pulse) {
        let n = intervals_for(e - a, period0, spec, Some(d));
        b.push(a, e, n, SegmentKind::Pulse { index: 0, origin: 0.0 });
    }
    Grid {
        times: b.times,
        segments: b.segments,
    }
}

/// Grid over `[0, t_end]` for a train.
pub fn train_grid(train: &PulseTrain, omega0: f64, t_end: f64, spec: &GridSpec) -> Result<Grid> {
    spec.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::domain("dynamics", "t_end", t_end));
    }
    let period0 = 2.0 * PI / omega0;
    let scale = t_end.max(1.0);
    let tiny = 1e-12 * scale;
    let d = train.pulse().duration();
    let pieces = pulse_pieces(train.pulse());

    let mut b = Builder {
        times: vec![0.0],
        segments: Vec::new(),
    };
    let mut cursor = 0.0;
    let free_until = |b: &mut Builder, cursor: &mut f64, to: f64| {
        let to = to.min(t_end);
        if to - *cursor > tiny {
            let n = intervals_for(to - *cursor, period0, spec, None);
            b.push(*cursor, to, n, SegmentKind::Free);
            *cursor = to;
        }
    };

    for k in 0..train.count() {
        let origin = train.pulse_start(k);
        if origin >= t_end - tiny {
            break;
        }
        free_until(&mut b, &mut cursor, origin);
        for &(a, e) in &pieces {
            let (ga, ge) = (origin + a, (origin + e).min(t_end));
            if ge - ga <= tiny {
                continue;
            }
            let n = intervals_for(ge - ga, period0, spec, Some(d));
            b.push(cursor, ge, n, SegmentKind::Pulse { index: k, origin });
            cursor = ge;
        }
    }
    free_until(&mut b, &mut cursor, t_end);
    Ok(Grid {
        times: b.times,
        segments: b.segments,
    })
}

/// Integral over the interval `[t_k, t_{k+1}]` of the parabola through three
/// neighbouring samples of a uniformly sampled segment, expressed as
/// `(node indices, weights)`. Each pair of intervals shares one parabola, so
/// the pair sums to Simpson's rule.
pub(crate) fn interval_stencil(seg: &Segment, k: usize, h: f64) -> ([usize; 3], [f64; 3]) {
    let w = h / 12.0;
    if (k - seg.first) % 2 == 0 {
        ([k, k + 1, k + 2], [5.0 * w, 8.0 * w, -w])
    } else {
        ([k - 1, k, k + 1], [-w, 8.0 * w, 5.0 * w])
    }
}

/// Simpson sums with step `h` and `2h` over a segment whose interval count
/// is a multiple of four.
pub(crate) fn simpson_pair<T>(values: &[T], h: f64) -> (T, T)
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let n = values.len() - 1;
    debug_assert!(n % 4 == 0);
    let mut fine = T::default();
    for j in (0..n).step_by(2) {
        fine = fine + (values[j] + values[j + 1] * 4.0 + values[j + 2]) * (h / 3.0);
    }
    let mut coarse = T::default();
    for j in (0..n).step_by(4) {
        coarse = coarse + (values[j] + values[j + 2] * 4.0 + values[j + 4]) * (2.0 * h / 3.0);
    }
    (fine, coarse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_aligns_to_pulse_edges() {
        let p = PulseProfile::rise_decay(0.01, 0.0, 0.3, 0.4, 1.2).unwrap();
        let train = PulseTrain::new(p, 3.0, 3).unwrap();
        let g = train_grid(&train, 1.0, 9.0, &GridSpec::default()).unwrap();
        for k in 0..3 {
            let s = 3.0 * k as f64;
            for edge in [s, s + 0.3, s + 1.2] {
                assert!(g.times.iter().any(|&t| (t - edge).abs() < 1e-12), "missing edge {edge}");
            }
        }
        assert!(g.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*g.times.last().unwrap(), 9.0);
        for seg in &g.segments {
            assert_eq!(seg.intervals() % 4, 0);
        }
        // density: >= 40 samples across each pulse
        let per_pulse: usize = g
            .segments
            .iter()
            .filter(|s| matches!(s.kind, SegmentKind::Pulse { index: 0, .. }))
            .map(|s| s.intervals())
            .sum();
        assert!(per_pulse >= 64);
    }

    #[test]
    fn cumulative_stencil_matches_simpson_on_cubic() {
        let seg = Segment {
            first: 0,
            last: 8,
            kind: SegmentKind::Free,
        };
        let h = 0.25;
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let vals: Vec<f64> = (0..=8).map(|j| f(j as f64 * h)).collect();
        let mut acc = 0.0;
        for k in 0..8 {
            let (idx, w) = interval_stencil(&seg, k, h);
            acc += (0..3).map(|m| w[m] * vals[idx[m]]).sum::<f64>();
        }
        let exact = 2.0f64.powi(4) / 4.0 - 4.0 + 2.0;
        assert!((acc - exact).abs() < 1e-13);
        let (fine, coarse) = simpson_pair(&vals, h);
        assert!((fine - exact).abs() < 1e-13 && (coarse - exact).abs() < 1e-13);
    }

    #[test]
    fn sparse_grid_rejected() {
        let spec = GridSpec {
            per_period: 10,
            per_pulse: 40,
        };
        assert!(spec.validate().is_err());
    }
}
