use dce_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Second moments from `d sigma/ds = M sigma + sigma M^T + (gamma/omega0) G I`
/// with `M = [[-g, 1], [-(1+chi)^2, -g]]`, `g = gamma/omega0`, by classical RK4.
fn lyapunov(train: &PulseTrain, omega0: f64, g: f64, g0: f64, t_end: f64, h: f64) -> [f64; 3] {
    let rhs = |t: f64, s: [f64; 3]| {
        let w2 = (1.0 + train.chi_at(t)).powi(2);
        let d = train.gamma_at(t) / omega0;
        let [xx, pp, xp] = s;
        [
            2.0 * xp - 2.0 * d * xx + d * g,
            -2.0 * w2 * xp - 2.0 * d * pp + d * g,
            pp - w2 * xx - 2.0 * d * xp,
        ]
    };
    // breakpoints in scaled time
    let mut edges = vec![0.0];
    for k in 0..train.count() {
        let a = train.pulse_start(k);
        let mut local = train.pulse().breakpoints();
        local.extend([0.0, train.pulse().duration()]);
        for b in local {
            edges.push((a + b) * omega0);
        }
    }
    edges.push(t_end * omega0);
    edges.retain(|&e| e <= t_end * omega0);
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut s = [0.5 * g0, 0.5 * g0, 0.0];
    for w in edges.windows(2) {
        let n = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        let step = (w[1] - w[0]) / n as f64;
        for i in 0..n {
            let t0 = w[0] + i as f64 * step;
            // evaluate strictly inside the piece so that edges do not leak
            let tm = |x: f64| (x.clamp(w[0] + 1e-12 * step, w[1] - 1e-12 * step)) / omega0;
            let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
            let k1 = rhs(tm(t0), s);
            let k2 = rhs(tm(t0 + 0.5 * step), add(s, k1, 0.5 * step));
            let k3 = rhs(tm(t0 + 0.5 * step), add(s, k2, 0.5 * step));
            let k4 = rhs(tm(t0 + step), add(s, k3, step));
            for j in 0..3 {
                s[j] += step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
    }
    s
}

fn random_profile(rng: &mut StdRng) -> PulseProfile {
    match rng.random_range(0..3) {
        0 => PulseProfile::rectangular(rng.random_range(-0.05..0.05), rng.random_range(0.0..0.05), rng.random_range(0.3..3.0))
            .unwrap(),
        1 => {
            let d = rng.random_range(0.5..3.0);
            PulseProfile::rise_decay(
                rng.random_range(-0.05..0.05),
                rng.random_range(0.0..0.05),
                rng.random_range(0.05..0.4) * d,
                rng.random_range(0.1..1.0) * d,
                d,
            )
            .unwrap()
        }
        _ => {
            let n = rng.random_range(3..12);
            let d = rng.random_range(0.5..3.0);
            let t: Vec<f64> = (0..n).map(|i| d * i as f64 / (n - 1) as f64).collect();
            let chi = (0..n).map(|_| rng.random_range(-0.05..0.05)).collect();
            let gamma = (0..n).map(|_| rng.random_range(0.0..0.05)).collect();
            PulseProfile::sampled(SampledPulse::new(t, chi, gamma).unwrap()).unwrap()
        }
    }
}

#[test]
fn moments_match_lyapunov_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..8 {
        let pulse = random_profile(&mut rng);
        let omega0 = rng.random_range(0.5..2.0);
        let period = pulse.duration() + rng.random_range(0.5..3.0);
        let count = rng.random_range(1..6);
        let train = PulseTrain::new(pulse, period, count).unwrap();
        let (g, g0) = (rng.random_range(1.0..3.0), rng.random_range(1.0..3.0));
        let t_end = train.end_time() + 1.3;
        let traj = simulate(&train, omega0, g, t_end, &IntegrationOptions::default()).unwrap();
        let s = covariance_at(&traj, t_end, g0).unwrap();
        let o = lyapunov(&train, omega0, g, g0, t_end, 2e-3);
        for (a, b) in [(s.sigma_xx(), o[0]), (s.sigma_pp(), o[1]), (s.sigma_xp(), o[2])] {
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
        assert!(traj.max_wronskian_drift < 1e-9);
    }
}

#[test]
fn mean_photons_consistent_over_random_profiles() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let pulse = random_profile(&mut rng);
        let period = pulse.duration() + rng.random_range(0.2..2.0);
        let train = PulseTrain::new(pulse, period, rng.random_range(1..4)).unwrap();
        let (g, g0) = (rng.random_range(1.0..4.0), rng.random_range(1.0..4.0));
        let t_end = train.end_time() + 0.7;
        let traj = simulate(&train, 1.0, g, t_end, &IntegrationOptions::default()).unwrap();
        let s = covariance_at(&traj, t_end, g0).unwrap();
        let n = mean_photons(&traj, t_end, g0).unwrap();
        assert!(((s.tau() - 1.0) / 2.0 - n.total).abs() <= 1e-9 * n.total.abs().max(1.0));
        assert!((n.signal + n.reservoir - n.total).abs() < 1e-12 * n.total.abs().max(1.0));
    }
}

#[test]
fn lossless_evolution_preserves_purity() {
    let pulse = PulseProfile::rise_decay(0.04, 0.0, 0.3, 0.5, 2.0).unwrap();
    let train = PulseTrain::new(pulse, std::f64::consts::PI, 30).unwrap();
    let g0: f64 = 2.5;
    let traj = simulate(&train, 1.0, 1.0, train.end_time() + 0.5, &IntegrationOptions::default()).unwrap();
    for i in (0..traj.times.len()).step_by(97) {
        let s = traj.covariance_at_index(i, g0).unwrap();
        assert!((s.delta() - 0.25 * g0 * g0).abs() < 1e-8 * s.tau().powi(2));
    }
}

#[test]
fn damping_relaxes_to_equilibrium() {
    let pulse = PulseProfile::rise_decay(0.0, 0.3, 0.5, 1.0, 3.0).unwrap();
    let train = PulseTrain::new(pulse, 3.5, 12).unwrap();
    let (g, g0) = (2.0, 7.0);
    let traj = simulate(&train, 1.0, g, train.end_time(), &IntegrationOptions::default()).unwrap();
    let mut last = f64::INFINITY;
    for k in 0..=train.count() {
        let t = if k == train.count() { train.end_time() } else { train.pulse_start(k) };
        let s = covariance_at(&traj, t, g0).unwrap();
        let dev = (s.sigma_xx() - 0.5 * g).abs().max((s.sigma_pp() - 0.5 * g).abs()).max(s.sigma_xp().abs());
        assert!(dev <= last + 1e-12);
        last = dev;
    }
    assert!(last < 1e-3);
}

