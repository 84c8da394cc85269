//! Stationary Gaussian increments with fractional Gaussian noise covariance,
//! the dependent walk they drive, and fine-grid fractional Brownian paths.
//!
//! Generation uses circulant embedding. The embedding of the fGn covariance
//! has nonnegative spectrum in exact arithmetic; if rounding ever produces a
//! materially negative eigenvalue the generator falls back to the exact
//! Durbin–Levinson recursion for short paths and reports a numerical failure
//! otherwise.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Longest path for which the O(n²) sequential fallback is allowed.
pub const SEQUENTIAL_FALLBACK_MAX: usize = 2048;

const NEGATIVE_EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstParams(f64);

impl HurstParams {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(invalid(format!("Hurst index H = {h} not in (0, 1)")));
        }
        Ok(HurstParams(h))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// `r(k) = ½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn fgn_covariance(k: i64, h: HurstParams) -> f64 {
    let two_h = 2.0 * h.0;
    let k = k.unsigned_abs() as f64;
    if k == 0.0 {
        return 1.0;
    }
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
}

/// Increments `X_1..X_n` and partial sums `S_0..S_n` of the walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    increments: Vec<f64>,
    sums: Vec<f64>,
}

impl WalkPath {
    pub fn from_increments(increments: Vec<f64>) -> Self {
        let mut sums = Vec::with_capacity(increments.len() + 1);
        let mut s = 0.0;
        sums.push(s);
        for x in &increments {
            s += x;
            sums.push(s);
        }
        WalkPath { increments, sums }
    }

    /// Build a path from positions `S_0..S_n`; `S_0` must be zero.
    pub fn from_positions(sums: Vec<f64>) -> Result<Self> {
        match sums.first() {
            Some(&s0) if s0 == 0.0 => {}
            _ => return Err(invalid("walk positions must start at S_0 = 0")),
        }
        let increments = sums.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(WalkPath { increments, sums })
    }

    pub fn n(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }
}

#[derive(Clone)]
enum Method {
    Circulant {
        weights: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    /// Row `k` holds the Durbin–Levinson prediction coefficients for step `k`.
    Sequential { coeffs: Vec<Vec<f64>>, variances: Vec<f64> },
}

/// Reusable generator for `n` fGn increments with a fixed Hurst index.
///
/// Holds the spectral weights (or the recursion coefficients) so they are
/// computed once and shared by every replicate.
#[derive(Clone)]
pub struct FgnGenerator {
    n: usize,
    hurst: HurstParams,
    method: Method,
}

impl std::fmt::Debug for FgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnGenerator")
            .field("n", &self.n)
            .field("hurst", &self.hurst)
            .field("circulant", &self.is_circulant())
            .finish()
    }
}

impl FgnGenerator {
    pub fn new(n: usize, hurst: HurstParams) -> Result<Self> {
        if n == 0 {
            return Err(invalid("walk length must be at least 1"));
        }
        match Self::circulant(n, hurst) {
            Ok(g) => Ok(g),
            Err(Error::Numerical(_)) if n <= SEQUENTIAL_FALLBACK_MAX => Self::sequential(n, hurst),
            Err(e) => Err(e),
        }
    }

    /// Circulant embedding of size `2·m`, `m = n.next_power_of_two()`.
    pub fn circulant(n: usize, hurst: HurstParams) -> Result<Self> {
        if n == 0 {
            return Err(invalid("walk length must be at least 1"));
        }
        let half = n.next_power_of_two();
        let size = 2 * half;
        let mut row: Vec<Complex<f64>> = (0..size)
            .map(|j| {
                let lag = if j <= half { j } else { size - j };
                Complex::new(fgn_covariance(lag as i64, hurst), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);
        let max = row.iter().fold(0.0f64, |m, c| m.max(c.re));
        let mut weights = Vec::with_capacity(size);
        for (k, c) in row.iter().enumerate() {
            if c.re < -NEGATIVE_EIGEN_TOL * max {
                return Err(Error::Numerical(format!(
                    "negative circulant eigenvalue {} at frequency {k} (n = {n}, H = {})",
                    c.re, hurst.0
                )));
            }
            weights.push((c.re.max(0.0) / size as f64).sqrt());
        }
        Ok(FgnGenerator {
            n,
            hurst,
            method: Method::Circulant { weights, fft },
        })
    }

    /// Exact sequential generator (Durbin–Levinson), O(n²) per path.
    pub fn sequential(n: usize, hurst: HurstParams) -> Result<Self> {
        if n == 0 {
            return Err(invalid("walk length must be at least 1"));
        }
        let r: Vec<f64> = (0..=n).map(|k| fgn_covariance(k as i64, hurst)).collect();
        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut variances = Vec::with_capacity(n);
        coeffs.push(Vec::new());
        variances.push(r[0]);
        for k in 1..n {
            let prev = &coeffs[k - 1];
            let v_prev = variances[k - 1];
            let acc: f64 = (0..k - 1).map(|j| prev[j] * r[k - 1 - j]).sum();
            let phi_kk = (r[k] - acc) / v_prev;
            let mut row = Vec::with_capacity(k);
            for j in 0..k - 1 {
                row.push(prev[j] - phi_kk * prev[k - 2 - j]);
            }
            row.push(phi_kk);
            let v = v_prev * (1.0 - phi_kk * phi_kk);
            if !(v > 0.0) {
                return Err(Error::Numerical(format!(
                    "nonpositive innovation variance {v} at step {k}"
                )));
            }
            coeffs.push(row);
            variances.push(v);
        }
        Ok(FgnGenerator {
            n,
            hurst,
            method: Method::Sequential { coeffs, variances },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hurst(&self) -> HurstParams {
        self.hurst
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    pub fn sample_increments<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.method {
            Method::Circulant { weights, fft } => {
                let mut buf: Vec<Complex<f64>> = weights
                    .iter()
                    .map(|&w| {
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        Complex::new(w * a, w * b)
                    })
                    .collect();
                fft.process(&mut buf);
                buf.truncate(self.n);
                buf.into_iter().map(|c| c.re).collect()
            }
            Method::Sequential { coeffs, variances } => {
                let mut x = Vec::with_capacity(self.n);
                for k in 0..self.n {
                    // predicted mean from the k previous values, most recent first
                    let mean: f64 = coeffs[k]
                        .iter()
                        .enumerate()
                        .map(|(j, phi)| phi * x[k - 1 - j])
                        .sum();
                    let z: f64 = rng.sample(StandardNormal);
                    x.push(mean + variances[k].sqrt() * z);
                }
                x
            }
        }
    }

    pub fn sample_walk<R: Rng + ?Sized>(&self, rng: &mut R) -> WalkPath {
        WalkPath::from_increments(self.sample_increments(rng))
    }
}

/// One walk of `n` steps. Builds a fresh generator; reuse [`FgnGenerator`]
/// when drawing many paths of the same length.
pub fn sample_walk<R: Rng + ?Sized>(n: usize, h: HurstParams, rng: &mut R) -> Result<WalkPath> {
    Ok(FgnGenerator::new(n, h)?.sample_walk(rng))
}

/// Fractional Brownian motion sampled at `i/m`, `i = 0..=⌊mT⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmGrid {
    m: usize,
    horizon: f64,
    values: Vec<f64>,
}

impl FbmGrid {
    /// Wrap precomputed grid values; `values[0]` must be zero.
    pub fn from_values(m: usize, horizon: f64, values: Vec<f64>) -> Result<Self> {
        if m < 1 || !(horizon > 0.0) {
            return Err(invalid("fbm grid needs m >= 1 and T > 0"));
        }
        if values.len() != grid_steps(m, horizon) + 1 {
            return Err(invalid(format!(
                "fbm grid with m = {m}, T = {horizon} needs {} values, got {}",
                grid_steps(m, horizon) + 1,
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(invalid("fbm grid must start at B(0) = 0"));
        }
        Ok(FbmGrid { m, horizon, values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the last grid point with `i/m ≤ t`.
    pub fn last_index(&self, t: f64) -> usize {
        grid_steps(self.m, t).min(self.values.len() - 1)
    }
}

/// `⌊m t⌋`, tolerant of representation error (`0.3 · 10` counts as 3).
pub fn grid_steps(m: usize, t: f64) -> usize {
    let x = m as f64 * t;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Reusable fBm sampler on a fixed grid.
#[derive(Debug, Clone)]
pub struct FbmGenerator {
    m: usize,
    horizon: f64,
    scale: f64,
    walk: FgnGenerator,
}

impl FbmGenerator {
    pub fn new(m: usize, horizon: f64, h: HurstParams) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("grid density m = {m} must be at least 2")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon T = {horizon} must be positive")));
        }
        let steps = grid_steps(m, horizon).max(1);
        Ok(FbmGenerator {
            m,
            horizon,
            scale: (m as f64).powf(-h.value()),
            walk: FgnGenerator::new(steps, h)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FbmGrid {
        let walk = self.walk.sample_walk(rng);
        let mut values: Vec<f64> = walk.sums().iter().map(|s| s * self.scale).collect();
        values.truncate(grid_steps(self.m, self.horizon) + 1);
        FbmGrid {
            m: self.m,
            horizon: self.horizon,
            values,
        }
    }
}

pub fn sample_fbm<R: Rng + ?Sized>(m: usize, horizon: f64, h: HurstParams, rng: &mut R) -> Result<FbmGrid> {
    Ok(FbmGenerator::new(m, horizon, h)?.sample(rng))
}
