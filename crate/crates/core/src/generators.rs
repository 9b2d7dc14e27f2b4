//! Test systems with known or oracle-computable answers.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RMat};
use crate::system::{BoostProfile, CurvaturePath, MorseSturmSystem, TimelikeSolution};

fn lorentz_metric(n: usize) -> RMat {
    let mut d = vec![1.0; n];
    d[0] = -1.0;
    linalg::diag(&d)
}

fn e1(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    v
}

fn boost_block(n: usize, c: f64) -> RMat {
    let mut t = RMat::identity(n, n);
    t[(0, 0)] = c.cosh();
    t[(1, 1)] = c.cosh();
    t[(0, 1)] = c.sinh();
    t[(1, 0)] = c.sinh();
    t
}

/// `R = 0`, `Y = e1`, `T` = identity on `e1` and rotations by `angles` on the spatial planes
/// `(e2, e3)`, `(e4, e5)`, ...
pub fn flat(n: usize, angles: &[f64]) -> Result<MorseSturmSystem> {
    if n < 2 || 1 + 2 * angles.len() > n {
        return Err(Error::InvalidArgument(format!("flat: n = {n} cannot hold {} rotation planes", angles.len())));
    }
    let mut t = RMat::identity(n, n);
    for (p, &a) in angles.iter().enumerate() {
        let (i, j) = (1 + 2 * p, 2 + 2 * p);
        let (s, c) = a.sin_cos();
        t[(i, i)] = c;
        t[(j, j)] = c;
        t[(i, j)] = -s;
        t[(j, i)] = s;
    }
    MorseSturmSystem::new(
        lorentz_metric(n),
        t,
        CurvaturePath::Constant { matrix: vec![0.0; n * n] },
        TimelikeSolution::Constant { vector: e1(n) },
        format!("flat(n={n})"),
    )
}

/// `R = diag(0, -k_2, ..., -k_n)`, `Y = e1`, `T = I`.
pub fn oscillator(ks: &[f64]) -> Result<MorseSturmSystem> {
    let n = ks.len() + 1;
    let mut d = vec![0.0];
    d.extend(ks.iter().map(|k| -k));
    MorseSturmSystem::new(
        lorentz_metric(n),
        RMat::identity(n, n),
        CurvaturePath::Constant { matrix: linalg::to_row_major(linalg::diag(&d).as_ref()) },
        TimelikeSolution::Constant { vector: e1(n) },
        format!("oscillator(k={ks:?})"),
    )
}

/// Same system as [`oscillator`]: a geodesic inside a totally geodesic spacelike leaf of a
/// static spacetime, with the spatial Jacobi operator given by the spring constants.
pub fn static_product(ks: &[f64]) -> Result<MorseSturmSystem> {
    oscillator(ks)
}

/// `Y = (cosh a, sinh a, 0, ...)` with periodic `a`, `R` from the rank-2 recipe, `T = I`.
pub fn tilted(profile: BoostProfile, extra: &[f64]) -> Result<MorseSturmSystem> {
    if profile.rate != 0.0 {
        return Err(Error::InvalidArgument("tilted: the profile must be periodic (rate = 0)".into()));
    }
    let n = extra.len() + 2;
    MorseSturmSystem::new(
        lorentz_metric(n),
        RMat::identity(n, n),
        CurvaturePath::Rank2 { profile: profile.clone(), extra: extra.to_vec() },
        TimelikeSolution::Boost { profile },
        format!("tilted(n={n})"),
    )
}

/// Boost holonomy: `a(t) = rate*t + periodic part`, `T` the boost by `-rate`.
pub fn boosted(profile: BoostProfile, extra: &[f64]) -> Result<MorseSturmSystem> {
    let n = extra.len() + 2;
    let t = boost_block(n, -profile.rate);
    let label = format!("boosted(n={n}, rate={})", profile.rate);
    MorseSturmSystem::new(
        lorentz_metric(n),
        t,
        CurvaturePath::Rank2 { profile: profile.clone(), extra: extra.to_vec() },
        TimelikeSolution::Boost { profile },
        label,
    )
}

/// Seeded tilted system with a nonconstant profile of amplitude at most 0.4.
pub fn random_tilted(seed: u64, n: usize) -> Result<MorseSturmSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument("random_tilted: n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = BoostProfile {
        rate: 0.0,
        a0: rng.random_range(-0.3..0.3),
        cos: vec![rng.random_range(-0.3..0.3), rng.random_range(-0.1..0.1)],
        sin: vec![rng.random_range(-0.3..0.3), rng.random_range(-0.1..0.1)],
    };
    if profile.sin[0].abs() < 0.05 {
        profile.sin[0] = 0.1;
    }
    let extra: Vec<f64> = (2..n).map(|_| rng.random_range(-10.0..60.0)).collect();
    let mut sys = tilted(profile, &extra)?;
    sys.set_label(format!("tilted(n={n}, seed={seed})"));
    Ok(sys)
}

/// `#{m in Z : (2 pi)^2 (m + theta)^2 < k_j}` summed over `j`. Exact equalities are excluded
/// (they contribute to the nullity instead, see [`oracle_nullity_oscillator`]).
pub fn oracle_lambda_oscillator(ks: &[f64], theta: f64) -> usize {
    oracle_counts(ks, theta).0
}

/// Spatial nullity `#{m : (2 pi)^2 (m + theta)^2 = k_j}`, plus one for the timelike direction at `theta = 0`.
pub fn oracle_nullity_oscillator(ks: &[f64], theta: f64) -> usize {
    let th = theta.rem_euclid(1.0);
    let timelike = usize::from(th < 1e-12 || th > 1.0 - 1e-12);
    oracle_counts(ks, theta).1 + timelike
}

fn oracle_counts(ks: &[f64], theta: f64) -> (usize, usize) {
    let th = theta.rem_euclid(1.0);
    let mut below = 0;
    let mut equal = 0;
    for &k in ks {
        if k < 0.0 {
            continue;
        }
        let bound = k.sqrt() / TAU + 2.0;
        let lo = (-bound - th).floor() as i64;
        let hi = (bound - th).ceil() as i64;
        for m in lo..=hi {
            let w = TAU * (m as f64 + th);
            let d = w * w - k;
            if d.abs() <= 1e-9 * k.max(1.0) {
                equal += 1;
            } else if d < 0.0 {
                below += 1;
            }
        }
    }
    (below, equal)
}

/// Parsed `--generate` argument, written `kind` or `kind:key=value,key=value,...`.
///
/// Keys: `n`, `k` (repeatable spring constant), `angle` (repeatable), `rate`, `a0`, `cos`, `sin`
/// (repeatable profile coefficients), `seed`. Numbers accept a `pi2` suffix meaning a
/// multiple of `pi^2`, e.g. `k=9pi2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: String,
    pub params: Vec<(String, f64)>,
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse number '{s}'"));
    if let Some(head) = s.strip_suffix("pi2") {
        let c = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
        return Ok(c * PI * PI);
    }
    if let Some(head) = s.strip_suffix("pi") {
        let c = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
        return Ok(c * PI);
    }
    s.parse::<f64>().map_err(|_| bad())
}

impl GeneratorSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k, r),
            None => (text, ""),
        };
        let mut params = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("generator parameter '{item}' is not key=value")))?;
            params.push((key.trim().to_string(), parse_number(value)?));
        }
        Ok(Self { kind: kind.trim().to_string(), params })
    }

    fn all(&self, key: &str) -> Vec<f64> {
        self.params.iter().filter(|(k, _)| k == key).map(|(_, v)| *v).collect()
    }

    fn one(&self, key: &str, default: f64) -> f64 {
        self.all(key).last().copied().unwrap_or(default)
    }

    fn profile(&self) -> BoostProfile {
        BoostProfile { rate: self.one("rate", 0.0), a0: self.one("a0", 0.0), cos: self.all("cos"), sin: self.all("sin") }
    }

    pub fn build(&self) -> Result<MorseSturmSystem> {
        let ks = self.all("k");
        match self.kind.as_str() {
            "flat" => flat(self.one("n", 2.0) as usize, &self.all("angle")),
            "oscillator" => oscillator(if ks.is_empty() { &[9.0 * PI * PI] } else { &ks }),
            "static" | "static_product" => static_product(if ks.is_empty() { &[9.0 * PI * PI] } else { &ks }),
            "tilted" => {
                if self.params.iter().any(|(k, _)| k == "seed") {
                    random_tilted(self.one("seed", 0.0) as u64, self.one("n", 2.0) as usize)
                } else {
                    let mut p = self.profile();
                    if p.is_static() && p.a0 == 0.0 {
                        p.sin = vec![0.3];
                    }
                    tilted(p, &ks)
                }
            }
            "boosted" => {
                let mut p = self.profile();
                if p.rate == 0.0 {
                    p.rate = 0.5;
                }
                boosted(p, &ks)
            }
            other => Err(Error::InvalidArgument(format!("unknown generator kind '{other}'"))),
        }
    }
}
