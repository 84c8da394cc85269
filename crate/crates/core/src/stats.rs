//! Verification kernel: running moments, empirical characteristic functions,
//! log-log slope fits, two-sample KS distances and z-score comparisons.
//!
//! Moment accumulators carry `(count, mean, M2)` and merge associatively, so
//! partial results from workers combine without depending on scheduling.

use crate::error::{invalid, Error, Result};

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        RunningStats {
            count,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * w,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn se(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sd() / (self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
}

pub fn mean_se(samples: &[f64]) -> MeanEstimate {
    let s: RunningStats = samples.iter().copied().collect();
    MeanEstimate {
        mean: s.mean(),
        se: s.se(),
    }
}

/// Empirical characteristic function on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EcfEstimate {
    pub u_grid: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Standard error of the real part.
    pub se: Vec<f64>,
    /// Standard error of the imaginary part.
    pub se_im: Vec<f64>,
    pub count: usize,
}

pub fn ecf(samples: &[f64], u_grid: &[f64]) -> Result<EcfEstimate> {
    if samples.len() < 2 {
        return Err(invalid(format!(
            "ecf needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut out = EcfEstimate {
        u_grid: u_grid.to_vec(),
        re: Vec::with_capacity(u_grid.len()),
        im: Vec::with_capacity(u_grid.len()),
        se: Vec::with_capacity(u_grid.len()),
        se_im: Vec::with_capacity(u_grid.len()),
        count: samples.len(),
    };
    for &u in u_grid {
        let c: RunningStats = samples.iter().map(|&x| (u * x).cos()).collect();
        let s: RunningStats = samples.iter().map(|&x| (u * x).sin()).collect();
        let (c_mean, s_mean) = if u == 0.0 {
            (1.0, 0.0)
        } else {
            (c.mean().clamp(-1.0, 1.0), s.mean().clamp(-1.0, 1.0))
        };
        out.re.push(c_mean);
        out.im.push(s_mean);
        out.se.push(c.se());
        out.se_im.push(s.se());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r2: f64,
}

/// Least-squares fit of `ln y` against `ln x`.
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(invalid("slope_fit: x and y lengths differ"));
    }
    if xs.len() < 3 {
        return Err(invalid("slope_fit needs at least 3 points"));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(invalid(format!(
            "slope_fit needs positive finite values, got {bad}"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = compensated_sum(lx.iter().copied()) / k;
    let my = compensated_sum(ly.iter().copied()) / k;
    let sxx = compensated_sum(lx.iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return Err(invalid("slope_fit: all x values coincide"));
    }
    let sxy = compensated_sum(lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)));
    let syy = compensated_sum(ly.iter().map(|y| (y - my) * (y - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = compensated_sum(
        lx.iter()
            .zip(&ly)
            .map(|(x, y)| (y - intercept - slope * x).powi(2)),
    )
    .max(0.0);
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        r2,
    })
}

/// Sup-norm distance between two empirical CDFs.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("ks_distance needs two nonempty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(invalid("ks_distance: NaN in sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Result of comparing an ECF real part with target values.
#[derive(Debug, Clone, PartialEq)]
pub struct CfComparison {
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    /// Indices into the frequency grid where `|z| > 3`.
    pub flagged: Vec<usize>,
}

impl CfComparison {
    pub fn passes(&self) -> bool {
        self.flagged.is_empty()
    }
}

pub const Z_THRESHOLD: f64 = 3.0;

pub fn cf_compare(e: &EcfEstimate, target: &[f64]) -> Result<CfComparison> {
    let zeros = vec![0.0; target.len()];
    cf_compare_with_target_se(e, target, &zeros)
}

/// Like [`cf_compare`], with the target's own standard error folded into the
/// denominator as `sqrt(se_ecf² + se_target²)`.
pub fn cf_compare_with_target_se(
    e: &EcfEstimate,
    target: &[f64],
    target_se: &[f64],
) -> Result<CfComparison> {
    if target.len() != e.u_grid.len() || target_se.len() != e.u_grid.len() {
        return Err(invalid("cf_compare: target grid does not match the ECF grid"));
    }
    let mut z = Vec::with_capacity(target.len());
    for i in 0..target.len() {
        let dev = e.re[i] - target[i];
        let se = (e.se[i].powi(2) + target_se[i].powi(2)).sqrt();
        let zi = if se > 0.0 {
            dev / se
        } else if dev == 0.0 {
            0.0
        } else {
            return Err(Error::Numerical(format!(
                "zero standard error with deviation {dev} at u = {}",
                e.u_grid[i]
            )));
        };
        z.push(zi);
    }
    let max_abs_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let flagged = z
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > Z_THRESHOLD)
        .map(|(i, _)| i)
        .collect();
    Ok(CfComparison {
        z,
        max_abs_z,
        flagged,
    })
}

/// Linear-interpolation (type 7) sample quantile.
pub fn quantile(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("quantile of empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("quantile level {p} outside [0, 1]")));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(samples: &[f64]) -> Result<f64> {
    quantile(samples, 0.5)
}

pub fn iqr(samples: &[f64]) -> Result<f64> {
    Ok(quantile(samples, 0.75)? - quantile(samples, 0.25)?)
}
