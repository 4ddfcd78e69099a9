//! Adaptive integrator for the linear oscillator `y'' + w(s)^2 y = 0`.
//!
//! The first-order system `(y, y')' = A(s) (y, y')` is advanced with the
//! three-stage Gauss-Legendre collocation method (order 6). Because the
//! method is symplectic, every step matrix has unit determinant in exact
//! arithmetic, so the Wronskian of any pair of solutions is conserved up to
//! round-off. Step size is controlled by step doubling.

/// Real 2x2 transfer matrix acting on `(y, y')`.
pub type Transfer = [[f64; 2]; 2];

pub const IDENTITY: Transfer = [[1.0, 0.0], [0.0, 1.0]];

const SQRT15: f64 = 3.872_983_346_207_417;

const C: [f64; 3] = [0.5 - SQRT15 / 10.0, 0.5, 0.5 + SQRT15 / 10.0];
const B: [f64; 3] = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
const A: [[f64; 3]; 3] = [
    [5.0 / 36.0, 2.0 / 9.0 - SQRT15 / 15.0, 5.0 / 36.0 - SQRT15 / 30.0],
    [5.0 / 36.0 + SQRT15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - SQRT15 / 24.0],
    [5.0 / 36.0 + SQRT15 / 30.0, 2.0 / 9.0 + SQRT15 / 15.0, 5.0 / 36.0],
];

pub fn mat_mul(a: &Transfer, b: &Transfer) -> Transfer {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn max_abs(m: &Transfer) -> f64 {
    m.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Exact transfer over `h` for constant unit frequency.
pub fn free_rotation(h: f64) -> Transfer {
    let (s, c) = h.sin_cos();
    [[c, s], [-s, c]]
}

/// One Gauss-Legendre step of size `h` from `s`.
fn gauss_step<W: Fn(f64) -> f64>(w2: &W, s: f64, h: f64) -> Transfer {
    // Stage states Y_i satisfy Y_i - h sum_j a_ij A_j Y_j = y, with
    // A_j = [[0, 1], [-w2_j, 0]]. Unknown vector is (Y_1, Y_2, Y_3).
    let w2s = [w2(s + C[0] * h), w2(s + C[1] * h), w2(s + C[2] * h)];
    let mut m = [[0.0f64; 8]; 6];
    for i in 0..3 {
        for j in 0..3 {
            let ha = h * A[i][j];
            let (r0, r1, c0, c1) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            // -h a_ij A_j
            m[r0][c1] -= ha;
            m[r1][c0] += ha * w2s[j];
        }
        m[2 * i][2 * i] += 1.0;
        m[2 * i + 1][2 * i + 1] += 1.0;
        // right-hand sides: y = e1 (column 6) and y = e2 (column 7)
        m[2 * i][6] = 1.0;
        m[2 * i + 1][7] = 1.0;
    }
    solve_in_place(&mut m);
    let mut out = IDENTITY;
    for col in 0..2 {
        let mut dy0 = 0.0;
        let mut dy1 = 0.0;
        for i in 0..3 {
            let y0 = m[2 * i][6 + col];
            let y1 = m[2 * i + 1][6 + col];
            dy0 += B[i] * y1;
            dy1 -= B[i] * w2s[i] * y0;
        }
        out[0][col] += h * dy0;
        out[1][col] += h * dy1;
    }
    out
}

/// Gaussian elimination with partial pivoting on a 6x6 system carrying two
/// right-hand sides in columns 6 and 7. Solutions overwrite those columns.
fn solve_in_place(m: &mut [[f64; 8]; 6]) {
    for col in 0..6 {
        let pivot = (col..6)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let inv = 1.0 / m[col][col];
        for row in col + 1..6 {
            let f = m[row][col] * inv;
            if f != 0.0 {
                for k in col..8 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    for col in (0..6).rev() {
        for rhs in 6..8 {
            let mut v = m[col][rhs];
            for k in col + 1..6 {
                v -= m[col][k] * m[k][rhs];
            }
            m[col][rhs] = v / m[col][col];
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    pub rel_tol: f64,
    /// Last accepted step, reused as the next trial.
    pub h: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepFailure {
    pub time: f64,
    pub reason: String,
}

impl Stepper {
    pub fn new(rel_tol: f64, h0: f64) -> Self {
        Stepper {
            rel_tol,
            h: h0,
            steps: 0,
        }
    }

    /// Transfer matrix from `s0` to `s1` for squared frequency `w2(s)`.
    pub fn propagate<W: Fn(f64) -> f64>(&mut self, w2: &W, s0: f64, s1: f64) -> Result<Transfer, StepFailure> {
        let span = s1 - s0;
        if span <= 0.0 {
            return Ok(IDENTITY);
        }
        let min_step = 1e-13 * s1.abs().max(1.0);
        let mut total = IDENTITY;
        let mut s = s0;
        let mut h = self.h.min(span);
        while s < s1 {
            let remaining = s1 - s;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let full = gauss_step(w2, s, step);
            let half1 = gauss_step(w2, s, 0.5 * step);
            let half2 = gauss_step(w2, s + 0.5 * step, 0.5 * step);
            let fine = mat_mul(&half2, &half1);
            let mut diff = 0.0f64;
            for r in 0..2 {
                for c in 0..2 {
                    diff = diff.max((fine[r][c] - full[r][c]).abs());
                }
            }
            let err = diff / 63.0;
            let scale = max_abs(&fine).max(1.0);
            let tol = self.rel_tol * scale;
            if !err.is_finite() {
                return Err(StepFailure {
                    time: s,
                    reason: "non-finite step".into(),
                });
            }
            if err <= tol {
                total = mat_mul(&fine, &total);
                s = if last { s1 } else { s + step };
                self.steps += 1;
                if !last {
                    self.h = step;
                }
            }
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * (tol / err).powf(1.0 / 7.0)).clamp(0.2, 4.0)
            };
            h = step * factor;
            if err > tol && h < min_step {
                return Err(StepFailure {
                    time: s,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            if last && err <= tol {
                break;
            }
        }
        Ok(total)
    }
}
