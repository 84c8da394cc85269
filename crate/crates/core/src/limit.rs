//! Monte Carlo access to the limit objects: box-counting estimates of fBm
//! local time `L_t(x)`, the functional `X = ∫ |Σ θ_j L_{t_j}(x)|^β dx`,
//! the process `Δ(t) = ∫ L_t(x) dW(x)` and normalized sums `Γ_n` of
//! independent copies of `Δ`.

use crate::error::{invalid, Result};
use crate::fgn::{FbmGenerator, FbmGrid};
use crate::parallel::try_map_replicates;
use crate::schema::ModelParams;
use crate::stable::{sample_standard_stable, StableParams};
use crate::stats::{MeanEstimate, NeumaierSum, RunningStats};
use crate::streams::{Role, StreamKey};

/// Bin width used when the path never moves.
pub const DEGENERATE_BIN_WIDTH: f64 = 1.0;

/// Grid density and spatial bin count of the local-time estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitConfig {
    pub m: usize,
    pub bins: usize,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { m: 4096, bins: 512 }
    }
}

/// Occupation densities `L_{t_j}(x_b)` on a common grid of `K` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmLocalTimeGrid {
    times: Vec<f64>,
    origin: f64,
    width: f64,
    densities: Vec<Vec<f64>>,
    degenerate: bool,
}

impl FbmLocalTimeGrid {
    /// Build a grid from explicit densities (one row per time, `bins` columns).
    pub fn from_densities(times: Vec<f64>, origin: f64, width: f64, densities: Vec<Vec<f64>>) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("bin width must be positive"));
        }
        if times.len() != densities.len() {
            return Err(invalid("one density row per time required"));
        }
        let k = densities.first().map_or(0, Vec::len);
        if densities.iter().any(|d| d.len() != k) {
            return Err(invalid("density rows differ in length"));
        }
        if densities.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(invalid("densities must be nonnegative"));
        }
        Ok(FbmLocalTimeGrid {
            times,
            origin,
            width,
            densities,
            degenerate: false,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn bins(&self) -> usize {
        self.densities.first().map_or(0, Vec::len)
    }

    pub fn densities(&self, j: usize) -> &[f64] {
        &self.densities[j]
    }

    /// True when the path was constant and the bin width fell back to
    /// [`DEGENERATE_BIN_WIDTH`].
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `Σ_b L_{t_j}(x_b) · h`.
    pub fn mass(&self, j: usize) -> f64 {
        self.densities[j].iter().sum::<f64>() * self.width
    }
}

/// Box-counting occupation density of an fBm path.
///
/// Bins span `[min B − h, max B + h]` over the whole path, so
/// `h = (max B − min B)/(K − 2)`, and
/// `L_{t_j}(x_b) = #{i : i/m ≤ t_j, B(i/m) ∈ [x_b, x_b + h)} / (m h)`.
pub fn fbm_local_time(path: &FbmGrid, times: &[f64], bins: usize) -> Result<FbmLocalTimeGrid> {
    if bins < 3 {
        return Err(invalid(format!("need at least 3 bins, got {bins}")));
    }
    if times.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && **t <= path.horizon() + 1e-12)) {
        return Err(invalid(format!(
            "time {t} outside the path horizon [0, {}]",
            path.horizon()
        )));
    }
    let values = path.values();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let degenerate = !(hi > lo);
    let width = if degenerate {
        DEGENERATE_BIN_WIDTH
    } else {
        (hi - lo) / (bins - 2) as f64
    };
    let origin = lo - width;

    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let last: Vec<usize> = times.iter().map(|&t| path.last_index(t)).collect();

    let mut counts = vec![0u64; bins];
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); times.len()];
    let norm = 1.0 / (path.m() as f64 * width);
    let mut next = 0;
    for (i, &v) in values.iter().enumerate() {
        if next == order.len() {
            break;
        }
        let b = (((v - origin) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[b] += 1;
        while next < order.len() && last[order[next]] == i {
            rows[order[next]] = counts.iter().map(|&c| c as f64 * norm).collect();
            next += 1;
        }
    }
    Ok(FbmLocalTimeGrid {
        times: times.to_vec(),
        origin,
        width,
        densities: rows,
        degenerate,
    })
}

/// Riemann sum `Σ_b |Σ_j θ_j L_{t_j}(x_b)|^β · h`.
pub fn x_functional(grid: &FbmLocalTimeGrid, thetas: &[f64], beta: f64) -> Result<f64> {
    if thetas.len() != grid.times.len() {
        return Err(invalid(format!(
            "{} thetas for {} times",
            thetas.len(),
            grid.times.len()
        )));
    }
    if thetas.iter().all(|&t| t == 0.0) {
        return Ok(0.0);
    }
    let mut acc = NeumaierSum::new();
    for b in 0..grid.bins() {
        let combo: f64 = grid
            .densities
            .iter()
            .zip(thetas)
            .map(|(row, &th)| th * row[b])
            .sum();
        if combo != 0.0 {
            acc.add(combo.abs().powf(beta));
        }
    }
    Ok(acc.value() * grid.width)
}

/// One realization of `Δ` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// `Δ(t_j) = Σ_b L_{t_j}(x_b) ΔW_b` for given bin increments of `W`.
///
/// `Δ(0)` is zero: the local time at time zero vanishes, whatever the
/// estimator puts on the starting bin.
pub fn delta_from_increments(grid: &FbmLocalTimeGrid, increments: &[f64]) -> Result<DeltaSample> {
    if increments.len() != grid.bins() {
        return Err(invalid(format!(
            "{} noise increments for {} bins",
            increments.len(),
            grid.bins()
        )));
    }
    let values = grid
        .times
        .iter()
        .zip(&grid.densities)
        .map(|(&t, row)| {
            if t == 0.0 {
                return 0.0;
            }
            row.iter()
                .zip(increments)
                .map(|(l, w)| l * w)
                .collect::<NeumaierSum>()
                .value()
        })
        .collect();
    Ok(DeltaSample {
        times: grid.times.clone(),
        values,
    })
}

/// Stable increments of `W` over the bins: `h^(1/β)` times i.i.d. stable(β, σ).
pub fn stable_bin_increments<R: rand::Rng + ?Sized>(
    bins: usize,
    width: f64,
    p: &StableParams,
    rng: &mut R,
) -> Vec<f64> {
    let scale = p.sigma() * width.powf(1.0 / p.beta());
    (0..bins)
        .map(|_| scale * sample_standard_stable(p.beta(), rng))
        .collect()
}

pub fn sample_delta<R: rand::Rng + ?Sized>(
    path: &FbmGrid,
    times: &[f64],
    bins: usize,
    p: &StableParams,
    rng: &mut R,
) -> Result<DeltaSample> {
    let grid = fbm_local_time(path, times, bins)?;
    let w = stable_bin_increments(grid.bins(), grid.width(), p, rng);
    delta_from_increments(&grid, &w)
}

/// Replicate sampler for the limit objects with a shared fBm generator.
///
/// Replicate/copy key `k` draws its fBm path from `k.role(Fbm)` and its
/// stable noise from `k.role(Noise)`.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    params: ModelParams,
    cfg: LimitConfig,
    times: Vec<f64>,
    fbm: FbmGenerator,
}

impl LimitSampler {
    pub fn new(params: ModelParams, times: &[f64], cfg: LimitConfig) -> Result<Self> {
        if times.is_empty() {
            return Err(invalid("time grid is empty"));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(invalid(format!("time {t} must be nonnegative")));
        }
        if cfg.bins < 3 {
            return Err(invalid(format!("need at least 3 bins, got {}", cfg.bins)));
        }
        let horizon = times.iter().copied().fold(0.0, f64::max).max(1.0 / cfg.m.max(1) as f64);
        Ok(LimitSampler {
            params,
            cfg,
            times: times.to_vec(),
            fbm: FbmGenerator::new(cfg.m, horizon, params.hurst_params())?,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn local_time(&self, key: StreamKey) -> Result<FbmLocalTimeGrid> {
        let path = self.fbm.sample(&mut key.role(Role::Fbm).rng());
        fbm_local_time(&path, &self.times, self.cfg.bins)
    }

    pub fn x_sample(&self, thetas: &[f64], key: StreamKey) -> Result<f64> {
        x_functional(&self.local_time(key)?, thetas, self.params.beta())
    }

    pub fn x_samples(&self, thetas: &[f64], replicates: usize, key: StreamKey) -> Result<Vec<f64>> {
        if thetas.len() != self.times.len() {
            return Err(invalid(format!("{} thetas for {} times", thetas.len(), self.times.len())));
        }
        try_map_replicates(replicates, |r| self.x_sample(thetas, key.replicate(r as u64)))
    }

    pub fn delta(&self, key: StreamKey) -> Result<DeltaSample> {
        let grid = self.local_time(key)?;
        let w = stable_bin_increments(grid.bins(), grid.width(), &self.params.stable(), &mut key.role(Role::Noise).rng());
        delta_from_increments(&grid, &w)
    }

    /// `Γ_n(t) = n^(−1/β) Σ_{i=1}^n Δ^(i)(t)`, copy `i` keyed by `key.copy(i)`.
    pub fn gamma_n(&self, copies: usize, key: StreamKey) -> Result<Vec<f64>> {
        if copies < 1 {
            return Err(invalid("number of copies must be at least 1"));
        }
        let mut sums = vec![NeumaierSum::new(); self.times.len()];
        for i in 0..copies {
            let d = self.delta(key.copy(i as u64))?;
            for (acc, v) in sums.iter_mut().zip(d.values) {
                acc.add(v);
            }
        }
        let norm = (copies as f64).powf(-1.0 / self.params.beta());
        Ok(sums.into_iter().map(|s| norm * s.value()).collect())
    }

    pub fn gamma_replicates(&self, copies: usize, replicates: usize, key: StreamKey) -> Result<Vec<Vec<f64>>> {
        try_map_replicates(replicates, |r| self.gamma_n(copies, key.replicate(r as u64)))
    }
}

/// Monte Carlo mean and standard error of `X` over independent fBm paths.
pub fn estimate_ex(
    params: &ModelParams,
    thetas: &[f64],
    times: &[f64],
    cfg: LimitConfig,
    replicates: usize,
    key: StreamKey,
) -> Result<MeanEstimate> {
    if replicates < 2 {
        return Err(invalid(format!("need at least 2 replicates, got {replicates}")));
    }
    if thetas.len() != times.len() {
        return Err(invalid(format!("{} thetas for {} times", thetas.len(), times.len())));
    }
    if thetas.iter().all(|&t| t == 0.0) {
        return Ok(MeanEstimate { mean: 0.0, se: 0.0 });
    }
    let xs = LimitSampler::new(*params, times, cfg)?.x_samples(thetas, replicates, key)?;
    let s: RunningStats = xs.into_iter().collect();
    Ok(MeanEstimate {
        mean: s.mean(),
        se: s.se(),
    })
}

/// `Γ_n` draws for the given copies, one vector of per-time values per call.
pub fn sample_gamma_n(
    copies: usize,
    times: &[f64],
    params: &ModelParams,
    cfg: LimitConfig,
    key: StreamKey,
) -> Result<Vec<f64>> {
    LimitSampler::new(*params, times, cfg)?.gamma_n(copies, key)
}
