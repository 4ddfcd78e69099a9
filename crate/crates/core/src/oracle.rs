//! Brute-force photon statistics in a truncated number basis.
//!
//! A zero-mean Gaussian state is a squeezed thermal state
//! `S(r) rho_th(n_bar) S(r)^dagger` up to a phase rotation, and the photon
//! distribution does not depend on the rotation. With the real generator
//! `K = r (a^dagger^2 - a^2) / 2`, `U = exp(K)` is real orthogonal and splits
//! into even and odd number blocks, so
//!
//! ```text
//! f(m) = sum_k p_k U_{mk}^2,   p_k = n_bar^k / (1 + n_bar)^{k+1}.
//! ```
//!
//! `U` is dense: the working set is about `dim^2 / 2` doubles per block pair,
//! so the oracle is meant for `N` up to a few tens.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{CovarianceState, Method, PhotonDistribution};

/// Largest tolerated probability outside the reported range.
pub const DEFICIT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedThermalDecomposition {
    pub n_bar: f64,
    pub r: f64,
    /// Orientation of the stretched quadrature.
    pub theta: f64,
}

impl SqueezedThermalDecomposition {
    pub fn reconstruct(&self) -> Result<CovarianceState> {
        let nu = self.n_bar + 0.5;
        let (big, small) = (nu * (2.0 * self.r).exp(), nu * (-2.0 * self.r).exp());
        let (s, c) = self.theta.sin_cos();
        CovarianceState::new(
            big * c * c + small * s * s,
            big * s * s + small * c * c,
            (big - small) * s * c,
        )
    }
}

pub fn decompose(state: &CovarianceState) -> SqueezedThermalDecomposition {
    let tau = state.tau();
    let delta = state.delta();
    let split = (tau * tau - 4.0 * delta).max(0.0).sqrt();
    let big = 0.5 * (tau + split);
    let small = 2.0 * delta / (tau + split);
    let theta = if split == 0.0 {
        0.0
    } else {
        0.5 * (2.0 * state.sigma_xp()).atan2(state.sigma_xx() - state.sigma_pp())
    };
    SqueezedThermalDecomposition {
        n_bar: (delta.sqrt() - 0.5).max(0.0),
        r: 0.25 * (big / small).ln(),
        theta,
    }
}

/// `8 (n_bar + 1) e^{2r} + 20`, rounded up to an even number.
pub fn recommended_dim(d: &SqueezedThermalDecomposition) -> usize {
    let dim = (8.0 * (d.n_bar + 1.0) * (2.0 * d.r).exp() + 20.0).ceil() as usize;
    dim + dim % 2
}

/// Rows near the truncation edge are unreliable; this many are dropped.
fn edge_margin(r: f64) -> usize {
    (4.0 * (2.0 * r).exp()).ceil() as usize
}

/// `exp(K)` on the even (`0, 2, 4, ...`) and odd (`1, 3, ...`) basis states.
#[derive(Debug, Clone)]
pub struct SqueezeOperator {
    pub dim: usize,
    pub even: DMatrix<f64>,
    pub odd: DMatrix<f64>,
}

impl SqueezeOperator {
    pub fn new(r: f64, dim: usize) -> Self {
        let block = |parity: usize| {
            let size = (dim + 1 - parity) / 2;
            let mut k = DMatrix::zeros(size, size);
            for i in 0..size.saturating_sub(1) {
                let n = (2 * i + parity) as f64;
                let w = 0.5 * r * ((n + 1.0) * (n + 2.0)).sqrt();
                k[(i + 1, i)] = w;
                k[(i, i + 1)] = -w;
            }
            expm(&k)
        };
        SqueezeOperator {
            dim,
            even: block(0),
            odd: block(1),
        }
    }

    /// `U_{mk}` in the full basis.
    pub fn get(&self, m: usize, k: usize) -> f64 {
        if m % 2 != k % 2 {
            return 0.0;
        }
        let b = if m % 2 == 0 { &self.even } else { &self.odd };
        b[(m / 2, k / 2)]
    }

    /// `max |U^T U - I|` over basis states below `interior`.
    pub fn unitarity_defect(&self, interior: usize) -> f64 {
        let mut worst = 0.0f64;
        for (parity, b) in [(0, &self.even), (1, &self.odd)] {
            let n = (interior + 1 - parity.min(interior)) / 2;
            let n = n.min(b.ncols());
            let gram = b.columns(0, n).transpose() * b.columns(0, n);
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((gram[(i, j)] - target).abs());
                }
            }
        }
        worst
    }
}

/// Diagonal-Pade [6/6] approximant with scaling and squaring.
fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n).map(|j| a.column(j).abs().sum()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);
    // c_j = (12 - j)! 6! / (12! j! (6 - j)!)
    let mut c = [1.0f64; 7];
    for j in 1..7 {
        c[j] = c[j - 1] * (7 - j) as f64 / ((13 - j) * j) as f64;
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut power = id.clone();
    let mut num = id.clone() * c[0];
    let mut den = id.clone() * c[0];
    for (j, &cj) in c.iter().enumerate().skip(1) {
        power = &power * &scaled;
        num += &power * cj;
        den += &power * if j % 2 == 0 { cj } else { -cj };
    }
    let mut x = den.lu().solve(&num).expect("Pade denominator is well conditioned after scaling");
    for _ in 0..squarings {
        x = &x * &x;
    }
    x
}

/// Photon distribution of the decomposed state in a `dim`-state basis.
pub fn fock_pdf(d: &SqueezedThermalDecomposition, dim: usize) -> Result<PhotonDistribution> {
    if dim < 2 {
        return Err(Error::domain("oracle", "dimension", dim as f64));
    }
    let op = SqueezeOperator::new(d.r, dim);
    let interior = dim.saturating_sub(edge_margin(d.r)).max(1);
    let q = d.n_bar / (1.0 + d.n_bar);
    let p: Vec<f64> = (0..dim).map(|k| q.powi(k as i32) / (1.0 + d.n_bar)).collect();
    let values: Vec<f64> = (0..interior)
        .map(|m| {
            (m % 2..dim)
                .step_by(2)
                .map(|k| {
                    let u = op.get(m, k);
                    p[k] * u * u
                })
                .sum()
        })
        .collect();
    let deficit = (1.0 - values.iter().sum::<f64>()).max(0.0);
    if deficit > DEFICIT_LIMIT {
        return Err(Error::Truncation { dim, deficit });
    }
    Ok(PhotonDistribution {
        values,
        method: Method::Oracle,
        tail_bound: deficit,
        tail_ratio: None,
        clamped: false,
        warnings: Vec::new(),
    })
}

/// [`fock_pdf`] at the recommended dimension.
pub fn oracle_pdf(state: &CovarianceState) -> Result<PhotonDistribution> {
    let d = decompose(state);
    fock_pdf(&d, recommended_dim(&d))
}

/// Largest basis tried by [`converged_pdf`].
pub const MAX_DIM: usize = 8000;

/// Grows the basis by 25% until `f(0..=m_cover)` agrees between successive
/// dimensions to `rel_tol` wherever `f > floor`.
pub fn converged_pdf(state: &CovarianceState, m_cover: usize, rel_tol: f64, floor: f64) -> Result<PhotonDistribution> {
    let d = decompose(state);
    let start = recommended_dim(&d).max(m_cover + 7 * m_cover / 10 + edge_margin(d.r));
    let mut dim = start + start % 2;
    let mut prev: Option<PhotonDistribution> = None;
    loop {
        let next = match fock_pdf(&d, dim) {
            Ok(p) if p.values.len() > m_cover => Some(p),
            Ok(_) | Err(Error::Truncation { .. }) => None,
            Err(e) => return Err(e),
        };
        if let (Some(a), Some(b)) = (&prev, &next) {
            let agree = (0..=m_cover).all(|m| {
                let (x, y) = (a.values[m], b.values[m]);
                y <= floor || ((x - y) / y).abs() <= rel_tol
            });
            if agree {
                return Ok(next.unwrap());
            }
        }
        if next.is_some() {
            prev = next;
        }
        if dim >= MAX_DIM {
            return Err(Error::Truncation {
                dim,
                deficit: prev.map_or(1.0, |p| p.tail_bound),
            });
        }
        dim = (dim + dim / 4).min(MAX_DIM);
        dim += dim % 2;
    }
}
