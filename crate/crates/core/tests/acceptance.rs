//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dce_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    let start = Instant::now();
    let out = match f() {
        Ok(o) => o,
        Err(e) => Outcome {
            pass: false,
            detail: format!("error: {e}"),
        },
    };
    let took = start.elapsed();
    Outcome {
        pass: out.pass && took < limit,
        detail: format!("{} [{:.2?}, limit {:?}]", out.detail, took, limit),
    }
}

fn thermal_closed_form() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in [0.5, 1.0, 5.0] {
        let d = exact_pdf(&CovarianceState::thermal(n)?, MMax::Fixed(200))?;
        for (m, &f) in d.values.iter().enumerate() {
            let want = (m as f64 * (n / (1.0 + n)).ln()).exp() / (1.0 + n);
            worst = worst.max((f - want).abs() / want);
        }
    }
    Ok(Outcome {
        pass: worst < 1e-10,
        detail: format!("max relative error {worst:.2e} for m <= 200"),
    })
}

fn squeezed_vacuum() -> Result<Outcome> {
    let (mut rel, mut odd) = (0.0f64, 0.0f64);
    for n in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0] {
        let d = exact_pdf(&CovarianceState::from_invariants(2.0 * n + 1.0, 0.25)?, MMax::Fixed(200))?;
        for (m, &f) in d.values.iter().enumerate() {
            if m % 2 == 0 {
                let want = ideal_squeezed_pdf(n, m as u64)?;
                rel = rel.max((f - want).abs() / want);
            } else {
                odd = odd.max(f.abs());
            }
        }
    }
    Ok(Outcome {
        pass: rel < 1e-8 && odd < 1e-10,
        detail: format!("even-m relative error {rel:.2e}, max |f(odd)| {odd:.2e}"),
    })
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(0.0..30.0);
        let tau = 2.0 * n + 1.0;
        let delta = 0.25 + rng.random_range(0.0..1.0) * (0.25 * tau * tau - 0.25);
        let s = CovarianceState::from_invariants(tau, delta)?.rotated(rng.random_range(0.0..6.3));
        let e = exact_pdf(&s, MMax::Auto)?;
        let cover = e.values.iter().rposition(|&f| f > 1e-12).unwrap_or(0);
        let o = converged_pdf(&s, cover, 1e-10, 1e-12)?;
        for m in 0..=cover {
            if e.values[m] > 1e-12 {
                worst = worst.max((o.values[m] - e.values[m]).abs() / e.values[m]);
            }
        }
    }
    Ok(Outcome {
        pass: worst < 1e-8,
        detail: format!("50 states with N < 30, max relative error {worst:.2e} where f > 1e-12"),
    })
}

fn smooth_asymptote() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for b in [1.2, 2.0] {
        let mut errs = Vec::new();
        for n in [100.0, 1000.0, 10_000.0] {
            let d = exact_pdf(&CovarianceState::from_invariants(2.0 * n + 1.0, b * n)?, MMax::Auto)?;
            let worst = ((n / 10.0) as usize..=(5.0 * n) as usize)
                .map(|m| (asymptotic_smooth(n, m as u64).value - d.values[m]).abs() / d.values[m])
                .fold(0.0, f64::max);
            errs.push(worst);
        }
        pass &= errs[1] < 0.03 && errs.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!("b={b}: {:.2e}/{:.2e}/{:.2e}", errs[0], errs[1], errs[2]));
    }
    Ok(Outcome {
        pass,
        detail: format!("sup relative error at N=1e2/1e3/1e4, {}", parts.join("; ")),
    })
}

fn contrast(f: &[f64], k: usize) -> f64 {
    (f[2 * k] - f[2 * k + 1]) / (f[2 * k] + f[2 * k + 1])
}

fn state_tbc(tau: f64, b: f64, g0: f64) -> Result<(CovarianceState, f64)> {
    // 2 Delta = b tau + c with c = G0^2 / 2
    let delta = 0.5 * (b * tau + 0.5 * g0 * g0);
    Ok((CovarianceState::from_invariants(tau, delta)?, delta))
}

fn oscillating_asymptote() -> Result<Outcome> {
    let tau = 2001.0;
    let ks = 50..=500usize;
    let pair = |f: &dyn Fn(u64) -> Result<f64>, k: usize| -> Result<f64> {
        let (a, b) = (f(2 * k as u64)?, f(2 * k as u64 + 1)?);
        Ok((a - b) / (a + b))
    };
    // two-term form against exact for b <= 0.1, G0 = 1
    let mut worst40 = 0.0f64;
    for b in [0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1] {
        let (s, delta) = state_tbc(tau, b, 1.0)?;
        let e = exact_pdf(&s, MMax::Fixed(1002))?.values;
        for k in ks.clone() {
            let c40 = pair(&|m| Ok(asymptotic_oscillating(tau, delta, m)?.value), k)?;
            worst40 = worst40.max((c40 - contrast(&e, k)).abs() / contrast(&e, k).abs());
        }
    }
    // small-dissipation form where it applies (b tau << 1)
    let mut worst43 = 0.0f64;
    for (b, g0) in [(0.0, 1.0), (1e-6, 1.0), (1e-5, 1.0), (0.0, 3.0), (1e-6, 3.0)] {
        let (s, _) = state_tbc(tau, b, g0)?;
        let e = exact_pdf(&s, MMax::Fixed(1002))?.values;
        for k in ks.clone() {
            let c43 = pair(&|m| Ok(asymptotic_small_dissipation(tau, g0, m).value), k)?;
            worst43 = worst43.max((c43 - contrast(&e, k)).abs() / contrast(&e, k));
        }
    }
    // G0 = 3 suppression: ln contrast falls with slope -(G0^2 - 1)/tau
    let e1 = exact_pdf(&state_tbc(tau, 0.0, 1.0)?.0, MMax::Fixed(1002))?.values;
    let e3 = exact_pdf(&state_tbc(tau, 0.0, 3.0)?.0, MMax::Fixed(1002))?.values;
    let suppressed = ks.clone().all(|k| contrast(&e3, k) < contrast(&e1, k));
    let slope = (contrast(&e3, 500).ln() - contrast(&e3, 50).ln()) / (1000.0 - 100.0);
    let predicted = -(9.0 - 1.0) / tau;
    let slope_ok = ((slope - predicted) / predicted).abs() < 0.1;
    // the small-dissipation form taken literally at b = 0.1
    let (s, _) = state_tbc(tau, 0.1, 1.0)?;
    let e = exact_pdf(&s, MMax::Fixed(1002))?.values;
    Ok(Outcome {
        pass: worst40 < 0.1 && worst43 < 0.1 && suppressed && slope_ok,
        detail: format!(
            "k in [50,500]: two-term form vs exact (b <= 0.1) max rel {worst40:.2e}; \
             small-dissipation form vs exact (b tau <= 2e-2) max rel {worst43:.2e}; \
             G0=3 contrast below G0=1 everywhere: {suppressed}, slope {slope:.4e} vs {predicted:.4e}; \
             exact contrast at b=0.1, k=50: {:.2e} (small-dissipation form gives 1)",
            contrast(&e, 50)
        ),
    })
}

fn moments_and_superchaos() -> Result<Outcome> {
    let n = 1000.0;
    let mut worst = 0.0f64;
    for b in [1.0 / 3.0, 1.2, 2.0] {
        let d = exact_pdf(&CovarianceState::from_invariants(2.0 * n + 1.0, b * n)?, MMax::Auto)?;
        for k in 1..=3 {
            let m = distribution_moments(&d, k)?.value;
            worst = worst.max((m - superchaotic_moment(n, k)).abs() / superchaotic_moment(n, k));
        }
    }
    let big = 10_000.0;
    let s = CovarianceState::from_invariants(2.0 * big + 1.0, big / 3.0)?;
    let ratio = number_variance(&s) / (big * big);
    Ok(Outcome {
        pass: worst < 0.05 && (ratio - 2.0).abs() / 2.0 < 0.02,
        detail: format!("<m^k> vs N^k (2k-1)!! for k <= 3 at N=1e3: max rel {worst:.2e}; sigma_N/N^2 at N=1e4: {ratio:.5}"),
    })
}

struct TrainRun {
    traj: ModeTrajectory,
    end: f64,
    period: f64,
}

fn acceptance_train() -> Result<TrainRun> {
    let pulse = rectangular_pulse_for(0.01, 0.005, 1.2, 1.0)?;
    let c = pulse_coefficients(&pulse, 1.0)?;
    let period = resonance_period(1.0, c.phi, 1)?;
    let train = PulseTrain::new(pulse, period, 500)?;
    let end = train.end_time();
    let traj = simulate(&train, 1.0, 1.0, end, &IntegrationOptions::default())?;
    Ok(TrainRun { traj, end, period })
}

fn dynamics_vs_closed_form(run: &TrainRun) -> Result<Outcome> {
    let s = covariance_at(&run.traj, run.end, 1.0)?;
    let n = s.mean_photons();
    let target = 0.5 * 5f64.exp();
    let ratio = s.delta() / n;
    let drift = run.traj.max_wronskian_drift;
    let exact = evolve_summary(0.01, 0.005, 1.0, 1.0, 500)?;
    Ok(Outcome {
        pass: (n - target).abs() / target < 0.05 && (ratio - 1.0 / 3.0).abs() * 3.0 < 0.05 && drift < 1e-9,
        detail: format!(
            "T = {:.6}, N = {n:.4} (e^5/2 = {target:.4}, closed form {:.4}), Delta/N = {ratio:.4}, Wronskian drift {drift:.1e}",
            run.period,
            exact.n_photons()
        ),
    })
}

fn squeezing_asymptote_check(run: &TrainRun) -> Result<Outcome> {
    let s1 = invariant_squeezing(&covariance_at(&run.traj, run.end, 1.0)?).s;
    let s10 = invariant_squeezing(&covariance_at(&run.traj, run.end, 10.0)?).s;
    let target = squeezing_asymptote(0.01, 0.005, 1.0)?.value;
    Ok(Outcome {
        pass: (s1 - target).abs() / target < 0.05 && (s10 - s1).abs() / s1 < 0.01,
        detail: format!("S(G0=1) = {s1:.5}, S(G0=10) = {s10:.5}, asymptote {target:.5}"),
    })
}

fn resonance_shift() -> Result<Outcome> {
    let (chi, rise, decay, d) = (0.03, 0.2, 0.4, 1.5);
    let pulse = PulseProfile::rise_decay(chi, 0.001, rise, decay, d)?;
    // phi = -omega0 int chi for the linear rise and exponential decay
    let phi = -chi * (0.5 * rise + decay * (1.0 - (-(d - rise) / decay).exp()));
    let computed = pulse_coefficients(&pulse, 1.0)?.phi;
    let predicted = resonance_period(1.0, phi, 1)?;
    let step = 0.002;
    let origin = std::f64::consts::PI - 0.06;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=60 {
        let t = origin + i as f64 * step;
        let train = PulseTrain::new(pulse.clone(), t, 200)?;
        let traj = simulate(&train, 1.0, 1.0, train.end_time(), &IntegrationOptions::default())?;
        let n = mean_photons(&traj, train.end_time(), 1.0)?.total;
        if n > best.1 {
            best = (t, n);
        }
    }
    let off = best.0 - predicted;
    let shift_resolved = (std::f64::consts::PI - predicted).abs() > 2.0 * step;
    Ok(Outcome {
        pass: off.abs() <= 0.5 * step && shift_resolved && (computed - phi).abs() < 1e-10,
        detail: format!(
            "phi = {phi:.6} (quadrature {computed:.6}), predicted T = {predicted:.5}, scan maximum at {:.5} (step {step}), offset {off:.1e}",
            best.0
        ),
    })
}

fn normalization() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(0.0..500.0);
        let tau = 2.0 * n + 1.0;
        let delta = 0.25 + rng.random_range(0.0..1.0) * (0.25 * tau * tau - 0.25);
        let d = exact_pdf(&CovarianceState::from_invariants(tau, delta)?, MMax::Auto)?;
        worst = worst.max((d.sum() - 1.0).abs());
    }
    let mut consts = Vec::new();
    for tau in [100.0, 1000.0, 10_000.0] {
        let n = 0.5 * (tau - 1.0);
        let d = smooth_distribution(n, (80.0 * tau) as usize);
        consts.push((d.sum() - 1.0).abs() * f64::sqrt(tau));
    }
    Ok(Outcome {
        pass: worst < 1e-8 && consts.iter().all(|&c| c <= 2.0),
        detail: format!(
            "exact |sum - 1| max {worst:.1e}; smooth |sum - 1| sqrt(tau) = {:.3}/{:.3}/{:.3} at tau=1e2/1e3/1e4",
            consts[0], consts[1], consts[2]
        ),
    })
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |i: usize, o: Outcome| {
        all &= o.pass;
        println!("criterion {i}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, timed(Duration::from_secs(1), thermal_closed_form));
    report(2, timed(Duration::from_secs(1), squeezed_vacuum));
    report(3, timed(Duration::from_secs(300), oracle_equivalence));
    report(4, timed(Duration::from_secs(60), smooth_asymptote));
    report(5, timed(Duration::from_secs(60), oscillating_asymptote));
    report(6, timed(Duration::from_secs(60), moments_and_superchaos));
    let mut run = None;
    report(7, timed(Duration::from_secs(120), || {
        let r = acceptance_train()?;
        let out = dynamics_vs_closed_form(&r);
        run = Some(r);
        out
    }));
    match &run {
        Some(r) => report(8, timed(Duration::from_secs(60), || squeezing_asymptote_check(r))),
        None => report(8, Outcome { pass: false, detail: "no trajectory".into() }),
    }
    report(9, timed(Duration::from_secs(120), resonance_shift));
    report(10, timed(Duration::from_secs(60), normalization));
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
