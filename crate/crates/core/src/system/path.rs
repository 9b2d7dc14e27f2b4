//! Evaluation contracts for the curvature path `R(t)` and the timelike solution `Y(t)` on `[0, 1]`.

use std::f64::consts::TAU;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::linalg::RMat;

/// Scalar profile `a(t) = rate*t + a0 + sum_k cos_k cos(2 pi k t) + sin_k sin(2 pi k t)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoostProfile {
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl BoostProfile {
    /// Returns `(a, a', a'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let mut a = self.a0 + self.rate * t;
        let mut da = self.rate;
        let mut dda = 0.0;
        for (k, &c) in self.cos.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            let (s, co) = (w * t).sin_cos();
            a += c * co;
            da -= c * w * s;
            dda -= c * w * w * co;
        }
        for (k, &c) in self.sin.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            let (s, co) = (w * t).sin_cos();
            a += c * s;
            da += c * w * co;
            dda -= c * w * w * s;
        }
        (a, da, dda)
    }

    /// True when `a' = 0` identically.
    pub fn is_static(&self) -> bool {
        self.rate == 0.0 && self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }
}

fn boost(a: f64) -> [[f64; 2]; 2] {
    let (ch, sh) = (a.cosh(), a.sinh());
    [[ch, sh], [sh, ch]]
}

fn check_len(what: &str, v: &[f64], len: usize) -> Result<(), String> {
    if v.len() != len {
        return Err(format!("{what}: expected {len} entries, found {}", v.len()));
    }
    Ok(())
}

/// Curvature path `R(t)`, with matrices stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CurvaturePath {
    Constant {
        matrix: Vec<f64>,
    },
    Trig {
        c0: Vec<f64>,
        #[serde(default)]
        cos: Vec<Vec<f64>>,
        #[serde(default)]
        sin: Vec<Vec<f64>>,
    },
    /// Uniform samples at `t_i = i/s`, `i = 0..=s`, local cubic interpolation.
    Samples { values: Vec<Vec<f64>> },
    /// Minimal g-symmetric `R` with `R Y = Y''` for `Y = (cosh a, sinh a, 0, ...)` and
    /// `g = diag(-1, 1, ..., 1)`, plus `diag(-extra)` on the remaining directions.
    Rank2 {
        profile: BoostProfile,
        #[serde(default)]
        extra: Vec<f64>,
    },
}

impl CurvaturePath {
    pub fn check_shape(&self, n: usize) -> Result<(), String> {
        match self {
            Self::Constant { matrix } => check_len("R.matrix", matrix, n * n),
            Self::Trig { c0, cos, sin } => {
                check_len("R.c0", c0, n * n)?;
                for m in cos.iter().chain(sin) {
                    check_len("R trig coefficient", m, n * n)?;
                }
                Ok(())
            }
            Self::Samples { values } => {
                if values.len() < 4 {
                    return Err("R.samples: need at least 4 samples".into());
                }
                values.iter().try_for_each(|m| check_len("R sample", m, n * n))
            }
            Self::Rank2 { extra, .. } => {
                if n != extra.len() + 2 {
                    return Err(format!("R.rank2: n = {n} but 2 + extra.len() = {}", extra.len() + 2));
                }
                Ok(())
            }
        }
    }

    /// True when the representation carries only interpolated data.
    pub fn is_interpolated(&self) -> bool {
        matches!(self, Self::Samples { .. })
    }

    pub fn eval(&self, n: usize, t: f64) -> RMat {
        match self {
            Self::Constant { matrix } => Mat::from_fn(n, n, |i, j| matrix[i * n + j]),
            Self::Trig { c0, cos, sin } => {
                let mut out = Mat::from_fn(n, n, |i, j| c0[i * n + j]);
                for (k, m) in cos.iter().enumerate() {
                    let c = (TAU * (k + 1) as f64 * t).cos();
                    out += Mat::from_fn(n, n, |i, j| c * m[i * n + j]);
                }
                for (k, m) in sin.iter().enumerate() {
                    let s = (TAU * (k + 1) as f64 * t).sin();
                    out += Mat::from_fn(n, n, |i, j| s * m[i * n + j]);
                }
                out
            }
            Self::Samples { values } => {
                let w = lagrange4(values.len() - 1, t);
                Mat::from_fn(n, n, |i, j| w.iter().map(|&(idx, c)| c * values[idx][i * n + j]).sum())
            }
            Self::Rank2 { profile, extra } => {
                let (a, da, dda) = profile.eval(t);
                let f = boost(a);
                let finv = boost(-a);
                let rf = [[da * da, -dda], [dda, 0.0]];
                let mut out = Mat::<f64>::zeros(n, n);
                for i in 0..2 {
                    for j in 0..2 {
                        let mut s = 0.0;
                        for p in 0..2 {
                            for q in 0..2 {
                                s += f[i][p] * rf[p][q] * finv[q][j];
                            }
                        }
                        out[(i, j)] = s;
                    }
                }
                for (k, &kk) in extra.iter().enumerate() {
                    out[(k + 2, k + 2)] = -kk;
                }
                out
            }
        }
    }
}

/// Weights of the 4-point Lagrange interpolant on the uniform grid `i/s`.
fn lagrange4(s: usize, t: f64) -> [(usize, f64); 4] {
    let x = t.clamp(0.0, 1.0) * s as f64;
    let i = (x.floor() as isize).clamp(0, s as isize - 1);
    let start = (i - 1).clamp(0, s as isize - 3) as usize;
    let mut out = [(0, 0.0); 4];
    for (a, slot) in out.iter_mut().enumerate() {
        let xa = (start + a) as f64;
        let mut w = 1.0;
        for b in 0..4 {
            if b != a {
                let xb = (start + b) as f64;
                w *= (x - xb) / (xa - xb);
            }
        }
        *slot = (start + a, w);
    }
    out
}

/// Timelike solution `Y(t)` together with `Y'(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TimelikeSolution {
    Constant {
        vector: Vec<f64>,
    },
    Trig {
        c0: Vec<f64>,
        #[serde(default)]
        cos: Vec<Vec<f64>>,
        #[serde(default)]
        sin: Vec<Vec<f64>>,
    },
    /// Values and derivatives at `t_i = i/s`, `i = 0..=s`, cubic Hermite interpolation.
    Samples { y: Vec<Vec<f64>>, dy: Vec<Vec<f64>> },
    /// `Y = (cosh a, sinh a, 0, ...)`.
    Boost { profile: BoostProfile },
}

impl TimelikeSolution {
    pub fn check_shape(&self, n: usize) -> Result<(), String> {
        match self {
            Self::Constant { vector } => check_len("Y.vector", vector, n),
            Self::Trig { c0, cos, sin } => {
                check_len("Y.c0", c0, n)?;
                cos.iter().chain(sin).try_for_each(|v| check_len("Y trig coefficient", v, n))
            }
            Self::Samples { y, dy } => {
                if y.len() < 2 || y.len() != dy.len() {
                    return Err("Y.samples: need matching y and dy with at least 2 nodes".into());
                }
                y.iter().chain(dy).try_for_each(|v| check_len("Y sample", v, n))
            }
            Self::Boost { .. } => {
                if n < 2 {
                    return Err("Y.boost needs n >= 2".into());
                }
                Ok(())
            }
        }
    }

    /// Returns `(Y(t), Y'(t))`.
    pub fn eval(&self, n: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Constant { vector } => (vector.clone(), vec![0.0; n]),
            Self::Trig { c0, cos, sin } => {
                let mut y = c0.clone();
                let mut dy = vec![0.0; n];
                for (k, v) in cos.iter().enumerate() {
                    let w = TAU * (k + 1) as f64;
                    let (s, c) = (w * t).sin_cos();
                    for i in 0..n {
                        y[i] += c * v[i];
                        dy[i] -= w * s * v[i];
                    }
                }
                for (k, v) in sin.iter().enumerate() {
                    let w = TAU * (k + 1) as f64;
                    let (s, c) = (w * t).sin_cos();
                    for i in 0..n {
                        y[i] += s * v[i];
                        dy[i] += w * c * v[i];
                    }
                }
                (y, dy)
            }
            Self::Samples { y, dy } => {
                let s = y.len() - 1;
                let h = 1.0 / s as f64;
                let x = t.clamp(0.0, 1.0) * s as f64;
                let i = (x.floor() as usize).min(s - 1);
                let u = x - i as f64;
                let (h00, h10, h01, h11) = (
                    2.0 * u.powi(3) - 3.0 * u * u + 1.0,
                    u.powi(3) - 2.0 * u * u + u,
                    -2.0 * u.powi(3) + 3.0 * u * u,
                    u.powi(3) - u * u,
                );
                let (d00, d10, d01, d11) = (6.0 * u * u - 6.0 * u, 3.0 * u * u - 4.0 * u + 1.0, -6.0 * u * u + 6.0 * u, 3.0 * u * u - 2.0 * u);
                let val = (0..n)
                    .map(|k| h00 * y[i][k] + h10 * h * dy[i][k] + h01 * y[i + 1][k] + h11 * h * dy[i + 1][k])
                    .collect();
                let der = (0..n)
                    .map(|k| (d00 * y[i][k] + d01 * y[i + 1][k]) / h + d10 * dy[i][k] + d11 * dy[i + 1][k])
                    .collect();
                (val, der)
            }
            Self::Boost { profile } => {
                let (a, da, _) = profile.eval(t);
                let mut y = vec![0.0; n];
                let mut dy = vec![0.0; n];
                y[0] = a.cosh();
                y[1] = a.sinh();
                dy[0] = da * a.sinh();
                dy[1] = da * a.cosh();
                (y, dy)
            }
        }
    }
}
