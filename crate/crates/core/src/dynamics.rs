//! Mode amplitude `xi(t)` and dissipative quadratures for arbitrary pulses.
//!
//! Time is stored in the caller's units. Internally the oscillator is solved
//! in the phase variable `s = omega0 t`, and `xi_dot` is the derivative with
//! respect to `s`, so the free solution is `xi = e^{-i s}` with `xi_dot = -i xi`
//! and the Wronskian reads `Im(xi xi_dot^*) = 1` for every `omega0`.
//! The phase origin is `t = 0`, where the mode is still unperturbed.

use num_complex::Complex64;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::grid::{interval_stencil, simpson_pair, train_grid, Grid, GridSpec, Segment, SegmentKind};
use crate::ode::{free_rotation, Stepper, Transfer};
use crate::pulse::PulseTrain;
use crate::types::{CovarianceState, Warning};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub rel_tol: f64,
    pub grid: GridSpec,
    /// Wronskian drift that aborts the run.
    pub max_drift: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            rel_tol: 1e-10,
            grid: GridSpec::default(),
            max_drift: 1e-6,
        }
    }
}

/// Accumulated damping and reservoir integrals on the trajectory grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratures {
    /// `Gamma(t) = int_0^t gamma`.
    pub gamma_acc: Vec<f64>,
    pub j: Vec<f64>,
    pub j_tilde: Vec<Complex64>,
    pub g: f64,
    /// Richardson estimate of the absolute quadrature error in `J`, `J~`.
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub times: Vec<f64>,
    pub xi: Vec<Complex64>,
    pub xi_dot: Vec<Complex64>,
    pub segments: Vec<Segment>,
    pub omega0: f64,
    pub train: PulseTrain,
    pub quadratures: Option<Quadratures>,
    pub max_wronskian_drift: f64,
    pub warnings: Vec<Warning>,
}

/// Mean photon number split into initial-state and reservoir parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumbers {
    pub total: f64,
    pub signal: f64,
    pub reservoir: f64,
    pub warnings: Vec<Warning>,
}

fn local_time(kind: SegmentKind, t: f64, duration: f64) -> Option<f64> {
    match kind {
        SegmentKind::Free => None,
        SegmentKind::Pulse { origin, .. } => Some((t - origin).clamp(0.0, duration)),
    }
}

fn wronskian(xi: Complex64, xi_dot: Complex64) -> f64 {
    (xi * xi_dot.conj()).im
}

fn apply(m: &Transfer, y: Complex64, dy: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * y + m[0][1] * dy, m[1][0] * y + m[1][1] * dy)
}

/// Solves `xi'' + omega(t)^2 xi = 0` with `xi(0) = 1`, `xi_dot(0) = -i`
/// on a grid aligned to the pulse edges of `train`, over `[0, t_end]`.
pub fn integrate_xi(train: &PulseTrain, omega0: f64, t_end: f64, opts: &IntegrationOptions) -> Result<ModeTrajectory> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::domain("dynamics", "omega0", omega0));
    }
    let pulse = train.pulse();
    if pulse.min_chi() <= -1.0 {
        return Err(Error::precondition(
            "dynamics",
            format!("omega(t) = omega0 (1 + chi) must stay positive; min chi = {}", pulse.min_chi()),
        ));
    }
    let Grid { times, segments } = train_grid(train, omega0, t_end, &opts.grid)?;
    let duration = pulse.duration();

    let n = times.len();
    let mut xi = Vec::with_capacity(n);
    let mut xi_dot = Vec::with_capacity(n);
    xi.push(Complex64::new(1.0, 0.0));
    xi_dot.push(Complex64::new(0.0, -1.0));

    let mut stepper = Stepper::new(opts.rel_tol, 0.05);
    let mut max_drift = 0.0f64;
    for seg in &segments {
        for k in seg.first..seg.last {
            let (t0, t1) = (times[k], times[k + 1]);
            let m = match seg.kind {
                SegmentKind::Free => free_rotation(omega0 * (t1 - t0)),
                kind => {
                    let w2 = |s: f64| {
                        let local = local_time(kind, s / omega0, duration).unwrap();
                        let w = 1.0 + pulse.chi(local);
                        w * w
                    };
                    stepper
                        .propagate(&w2, omega0 * t0, omega0 * t1)
                        .map_err(|f| Error::Integration {
                            time: f.time / omega0,
                            reason: f.reason,
                        })?
                }
            };
            let (y, dy) = apply(&m, xi[k], xi_dot[k]);
            let drift = (wronskian(y, dy) - 1.0).abs();
            if drift > opts.max_drift {
                return Err(Error::Integration {
                    time: t1,
                    reason: format!("Wronskian drift {drift:e} exceeds {:e}", opts.max_drift),
                });
            }
            max_drift = max_drift.max(drift);
            xi.push(y);
            xi_dot.push(dy);
        }
    }

    Ok(ModeTrajectory {
        times,
        xi,
        xi_dot,
        segments,
        omega0,
        train: train.clone(),
        quadratures: None,
        max_wronskian_drift: max_drift,
        warnings: pulse.warnings(),
    })
}

/// Fills `Gamma`, `J` and `J~` by cumulative quadrature with the damping
/// weight folded as `e^{2(Gamma(tau) - Gamma(t))}`.
pub fn accumulate_quadratures(mut traj: ModeTrajectory, train: &PulseTrain, g: f64) -> Result<ModeTrajectory> {
    if *train != traj.train {
        return Err(Error::precondition(
            "dynamics",
            "pulse train differs from the one the trajectory was integrated with",
        ));
    }
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::domain("dynamics", "G (must be >= 1)", g));
    }
    let n = traj.times.len();
    let pulse = train.pulse();
    let duration = pulse.duration();
    let mut gamma_acc = vec![0.0; n];
    let mut j = vec![0.0; n];
    let mut jt = vec![Complex64::new(0.0, 0.0); n];
    let mut err = 0.0;

    for seg in &traj.segments {
        let (a, b) = (seg.first, seg.last);
        if seg.kind == SegmentKind::Free {
            for k in a..b {
                gamma_acc[k + 1] = gamma_acc[k];
                j[k + 1] = j[k];
                jt[k + 1] = jt[k];
            }
            continue;
        }
        let h = (traj.times[b] - traj.times[a]) / seg.intervals() as f64;
        let gam: Vec<f64> = (a..=b)
            .map(|k| pulse.gamma(local_time(seg.kind, traj.times[k], duration).unwrap()))
            .collect();
        for k in a..b {
            let (idx, w) = interval_stencil(seg, k, h);
            let inc: f64 = (0..3).map(|m| w[m] * gam[idx[m] - a]).sum();
            gamma_acc[k + 1] = gamma_acc[k] + inc.max(0.0);
        }
        let e2: Vec<f64> = (a..=b).map(|k| traj.xi[k].norm_sqr() + traj.xi_dot[k].norm_sqr()).collect();
        let c2: Vec<Complex64> = (a..=b).map(|k| traj.xi[k] * traj.xi[k] + traj.xi_dot[k] * traj.xi_dot[k]).collect();
        for k in a..b {
            let (idx, w) = interval_stencil(seg, k, h);
            let decay = (-2.0 * (gamma_acc[k + 1] - gamma_acc[k])).exp();
            let mut dj = 0.0;
            let mut djt = Complex64::new(0.0, 0.0);
            for m in 0..3 {
                let i = idx[m];
                let weight = w[m] * gam[i - a] * (-2.0 * (gamma_acc[k + 1] - gamma_acc[i])).exp();
                dj += weight * e2[i - a];
                djt += c2[i - a] * weight;
            }
            j[k + 1] = decay * j[k] + 0.5 * g * dj;
            jt[k + 1] = jt[k] * decay + djt * (0.5 * g);
        }
        // Richardson check on the segment contribution
        let fold = |i: usize| gam[i] * (-2.0 * (gamma_acc[b] - gamma_acc[a + i])).exp();
        let fe: Vec<f64> = (0..=seg.intervals()).map(|i| fold(i) * e2[i]).collect();
        let fc: Vec<Complex64> = (0..=seg.intervals()).map(|i| c2[i] * fold(i)).collect();
        let (fine, coarse) = simpson_pair(&fe, h);
        let (cfine, ccoarse) = simpson_pair(&fc, h);
        err += 0.5 * g * ((fine - coarse).abs() + (cfine - ccoarse).norm()) / 15.0;
    }

    let scale = j.iter().fold(1.0f64, |m, &v| m.max(v));
    if err > 1e-6 * scale {
        traj.warnings.push(Warning::Quadrature { estimate: err });
    }
    traj.quadratures = Some(Quadratures {
        gamma_acc,
        j,
        j_tilde: jt,
        g,
        error_estimate: err,
    });
    Ok(traj)
}

impl ModeTrajectory {
    /// Index of the grid node at time `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * self.times.last().copied().unwrap_or(1.0).max(1.0);
        let i = self.times.partition_point(|&x| x < t - tol);
        if i < self.times.len() && (self.times[i] - t).abs() <= tol {
            Ok(i)
        } else {
            Err(Error::precondition("dynamics", format!("t = {t} is not a grid sample")))
        }
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn quadratures(&self) -> Result<&Quadratures> {
        self.quadratures
            .as_ref()
            .ok_or_else(|| Error::precondition("dynamics", "quadratures not accumulated"))
    }

    /// `E(t) = (|xi|^2 + |xi_dot|^2)/2` at node `i`.
    pub fn energy(&self, i: usize) -> f64 {
        0.5 * (self.xi[i].norm_sqr() + self.xi_dot[i].norm_sqr())
    }

    /// Covariance state at grid node `i` for an initial thermal factor `g0`.
    pub fn covariance_at_index(&self, i: usize, g0: f64) -> Result<CovarianceState> {
        let q = self.quadratures()?;
        let j_eff = DoubleDouble::from_f64(q.j[i]) + DoubleDouble::from_f64(0.5 * g0 * (-2.0 * q.gamma_acc[i]).exp());
        let [sxx, spp, sxp] = assemble(self.xi[i], self.xi_dot[i], j_eff, q.j_tilde[i]);
        CovarianceState::new(sxx.to_f64(), spp.to_f64(), sxp.to_f64())
            .map_err(|e| Error::NumericalConsistency { reason: e.to_string() })
    }

    fn relaxed_warning(&self, t: f64) -> Option<Warning> {
        let train = &self.train;
        let d = train.pulse().duration();
        let tol = 1e-12 * t.abs().max(1.0);
        let k = train.active_pulse(t)?;
        let local = t - train.pulse_start(k);
        (local > tol && local < d - tol).then_some(Warning::FrequencyNotRelaxed { time: t })
    }

    /// Mean photon numbers at node `i`.
    pub fn photons_at_index(&self, i: usize, g0: f64) -> Result<PhotonNumbers> {
        let q = self.quadratures()?;
        let (x, dx) = (self.xi[i], self.xi_dot[i]);
        // N_r = E J - Re(E~^* J~) is half the trace assembled with J alone
        let [rxx, rpp, _] = assemble(x, dx, DoubleDouble::from_f64(q.j[i]), q.j_tilde[i]);
        let reservoir = (rxx + rpp).mul_f64(0.5);
        let e2 = norm_sqr(x) + norm_sqr(dx);
        let signal = (e2.mul_f64(0.5 * g0 * (-2.0 * q.gamma_acc[i]).exp()) - DoubleDouble::ONE).mul_f64(0.5);
        Ok(PhotonNumbers {
            total: (signal + reservoir).to_f64(),
            signal: signal.to_f64(),
            reservoir: reservoir.to_f64(),
            warnings: self.relaxed_warning(self.times[i]).into_iter().collect(),
        })
    }
}

fn norm_sqr(z: Complex64) -> DoubleDouble {
    DoubleDouble::product(z.re, z.re) + DoubleDouble::product(z.im, z.im)
}

/// `(sigma_xx, sigma_pp, sigma_xp)` from the amplitude and the integrals.
/// The terms cancel by many orders of magnitude after long trains, so the
/// products are formed exactly and summed in double-double.
fn assemble(x: Complex64, dx: Complex64, j: DoubleDouble, jt: Complex64) -> [DoubleDouble; 3] {
    let p = DoubleDouble::product;
    let quad = |z: Complex64| {
        let rr = p(z.re, z.re);
        let ii = p(z.im, z.im);
        // |z|^2 J - Re(z*^2 J~)
        (rr + ii) * j - ((rr - ii).mul_f64(jt.re) + p(z.re, z.im).mul_f64(2.0 * jt.im))
    };
    let xr_dr = p(x.re, dx.re);
    let xi_di = p(x.im, dx.im);
    let cross = (xr_dr + xi_di) * j
        - (xr_dr - xi_di).mul_f64(jt.re)
        - (p(x.re, dx.im) + p(x.im, dx.re)).mul_f64(jt.im);
    [quad(x), quad(dx), cross]
}

/// Covariance state at grid time `t`.
pub fn covariance_at(traj: &ModeTrajectory, t: f64, g0: f64) -> Result<CovarianceState> {
    if !(g0 >= 1.0) {
        return Err(Error::domain("dynamics", "G0 (must be >= 1)", g0));
    }
    traj.covariance_at_index(traj.index_of(t)?, g0)
}

/// `N = N_s + N_r` at grid time `t`; warns when `t` falls inside a pulse.
pub fn mean_photons(traj: &ModeTrajectory, t: f64, g0: f64) -> Result<PhotonNumbers> {
    if !(g0 >= 1.0) {
        return Err(Error::domain("dynamics", "G0 (must be >= 1)", g0));
    }
    traj.photons_at_index(traj.index_of(t)?, g0)
}

/// Integrates the amplitude and accumulates the quadratures in one call.
pub fn simulate(train: &PulseTrain, omega0: f64, g: f64, t_end: f64, opts: &IntegrationOptions) -> Result<ModeTrajectory> {
    let traj = integrate_xi(train, omega0, t_end, opts)?;
    accumulate_quadratures(traj, train, g)
}
