//! Monte Carlo studies built from the simulation primitives.
//!
//! Each study takes a master [`StreamKey`] and fans replicates out with
//! [`crate::parallel`]; replicate `r` always uses `key.replicate(r)`.

use crate::error::{invalid, Result};
use crate::fgn::{FgnGenerator, HurstParams};
use crate::limit::{LimitConfig, LimitSampler};
use crate::parallel::{map_replicates, try_map_replicates};
use crate::rwrs::{ks_statistic, local_times_at, KsStatParams, SiteRule};
use crate::schema::{ModelParams, SchemaSampler};
use crate::stable::SceneryKind;
use crate::stats::{median, slope_fit, MeanEstimate, RunningStats, SlopeFit};
use crate::streams::{Role, StreamKey};

fn require_replicates(m: usize) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!("need at least 2 replicates, got {m}")));
    }
    Ok(())
}

/// Sample variance of `S_n / n^H` over independent walks.
pub fn walk_variance_ratio(hurst: f64, n: usize, replicates: usize, key: StreamKey) -> Result<MeanEstimate> {
    require_replicates(replicates)?;
    let gen = FgnGenerator::new(n, HurstParams::new(hurst)?)?;
    let scale = (n as f64).powf(-hurst);
    let finals = map_replicates(replicates, |r| {
        let path = gen.sample_walk(&mut key.replicate(r as u64).role(Role::Walk).rng());
        path.sums()[n] * scale
    });
    let s: RunningStats = finals.into_iter().collect();
    // standard error of a Gaussian sample variance
    let var = s.variance();
    Ok(MeanEstimate {
        mean: var,
        se: var * (2.0 / (replicates as f64 - 1.0)).sqrt(),
    })
}

/// Per-horizon summary of the walk's local-time statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub mean_v: f64,
    pub se_v: f64,
    pub mean_r: f64,
    pub se_r: f64,
    /// Median over replicates of `n^(−δ) L_n`.
    pub median_l_scaled: f64,
}

/// `V_n`, `R_n` and `L_n` statistics at each horizon in `ns`.
///
/// Each replicate draws one walk of length `max(ns)` and reads every horizon
/// off it in a single checkpointed pass.
pub fn scaling_study(
    params: &ModelParams,
    ns: &[usize],
    replicates: usize,
    key: StreamKey,
) -> Result<Vec<ScalingRow>> {
    require_replicates(replicates)?;
    let top = *ns.iter().max().ok_or_else(|| invalid("empty horizon grid"))?;
    if top == 0 {
        return Err(invalid("horizons must be positive"));
    }
    let gen = FgnGenerator::new(top, params.hurst_params())?;
    let per_rep: Vec<Vec<(u64, u64, u64)>> = try_map_replicates(replicates, |r| {
        let path = gen.sample_walk(&mut key.replicate(r as u64).role(Role::Walk).rng());
        let profiles = local_times_at(&path, ns, SiteRule::Ceiling)?;
        Ok(profiles
            .iter()
            .map(|p| (p.self_intersections(), p.range_count(), p.max_local_time()))
            .collect())
    })?;
    ns.iter()
        .enumerate()
        .map(|(j, &n)| {
            let v: RunningStats = per_rep.iter().map(|row| row[j].0 as f64).collect();
            let r: RunningStats = per_rep.iter().map(|row| row[j].1 as f64).collect();
            let scale = (n as f64).powf(-params.delta());
            let l: Vec<f64> = per_rep.iter().map(|row| row[j].2 as f64 * scale).collect();
            Ok(ScalingRow {
                n,
                mean_v: v.mean(),
                se_v: v.se(),
                mean_r: r.mean(),
                se_r: r.se(),
                median_l_scaled: median(&l)?,
            })
        })
        .collect()
}

/// Log-log fits of mean `V_n` and mean `R_n` restricted to `fit_ns`.
pub fn scaling_fits(rows: &[ScalingRow], fit_ns: &[usize]) -> Result<(SlopeFit, SlopeFit)> {
    let sel: Vec<&ScalingRow> = rows.iter().filter(|r| fit_ns.contains(&r.n)).collect();
    let xs: Vec<f64> = sel.iter().map(|r| r.n as f64).collect();
    let v: Vec<f64> = sel.iter().map(|r| r.mean_v).collect();
    let rr: Vec<f64> = sel.iter().map(|r| r.mean_r).collect();
    Ok((slope_fit(&xs, &v)?, slope_fit(&xs, &rr)?))
}

/// True when the scaled-max-local-time medians strictly decrease along `ns`.
pub fn medians_strictly_decreasing(rows: &[ScalingRow], ns: &[usize]) -> bool {
    let meds: Vec<f64> = ns
        .iter()
        .filter_map(|n| rows.iter().find(|r| r.n == *n).map(|r| r.median_l_scaled))
        .collect();
    meds.len() == ns.len() && meds.windows(2).all(|w| w[1] < w[0])
}

/// Independent draws of the walk statistic `X_n`.
pub fn xn_samples(
    params: &ModelParams,
    stat: &KsStatParams,
    n: usize,
    replicates: usize,
    key: StreamKey,
) -> Result<Vec<f64>> {
    let horizons = stat.horizons(n);
    let top = horizons.iter().copied().max().unwrap_or(0).max(1);
    let gen = FgnGenerator::new(top, params.hurst_params())?;
    try_map_replicates(replicates, |r| {
        let path = gen.sample_walk(&mut key.replicate(r as u64).role(Role::Walk).rng());
        let profiles = local_times_at(&path, &horizons, SiteRule::Ceiling)?;
        ks_statistic(&profiles, stat, n, params.hurst(), params.beta())
    })
}

/// Independent draws of the limit functional `X` from fBm local times.
pub fn x_limit_samples(
    params: &ModelParams,
    stat: &KsStatParams,
    cfg: LimitConfig,
    replicates: usize,
    key: StreamKey,
) -> Result<Vec<f64>> {
    LimitSampler::new(*params, stat.times(), cfg)?.x_samples(stat.thetas(), replicates, key)
}

/// Values of `G_n(t)` at a single time index for every replicate.
pub fn column(samples: &[Vec<f64>], j: usize) -> Vec<f64> {
    samples.iter().map(|row| row[j]).collect()
}

/// `G_n` replicates for the schema with independent walks and sceneries.
pub fn schema_samples(
    params: &ModelParams,
    kind: SceneryKind,
    n: usize,
    copies: usize,
    times: &[f64],
    replicates: usize,
    key: StreamKey,
) -> Result<Vec<Vec<f64>>> {
    SchemaSampler::new(n, times, *params, kind)?.gn_replicates(copies, replicates, key)
}

/// `Γ_n` replicates built from independent fBm paths and stable noises.
pub fn gamma_samples(
    params: &ModelParams,
    cfg: LimitConfig,
    copies: usize,
    times: &[f64],
    replicates: usize,
    key: StreamKey,
) -> Result<Vec<Vec<f64>>> {
    LimitSampler::new(*params, times, cfg)?.gamma_replicates(copies, replicates, key)
}

/// Target `exp(−σ^β |u|^β E[X])` and its delta-method standard error.
pub fn limit_cf_target(params: &ModelParams, ex: &MeanEstimate, u_grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    u_grid
        .iter()
        .map(|&u| {
            let rate = params.sigma().powf(params.beta()) * u.abs().powf(params.beta());
            let value = (-rate * ex.mean).exp();
            (value, value * rate * ex.se)
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_rows_are_ordered_and_positive() {
        let params = ModelParams::new(0.5, 2.0, 1.0).unwrap();
        let ns = [16, 32, 64, 128];
        let rows = scaling_study(&params, &ns, 20, StreamKey::new(1)).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), ns);
        for r in &rows {
            assert!(r.mean_v >= (r.n + 1) as f64);
            assert!(r.mean_r >= 1.0);
        }
        let (v, rr) = scaling_fits(&rows, &ns).unwrap();
        assert!(v.slope > 1.0 && v.slope < 2.0);
        assert!(rr.slope > 0.0 && rr.slope < 1.0);
    }

    #[test]
    fn decreasing_check() {
        let row = |n, m| ScalingRow {
            n,
            mean_v: 1.0,
            se_v: 0.0,
            mean_r: 1.0,
            se_r: 0.0,
            median_l_scaled: m,
        };
        let rows = vec![row(1, 3.0), row(2, 2.0), row(4, 2.0)];
        assert!(medians_strictly_decreasing(&rows, &[1, 2]));
        assert!(!medians_strictly_decreasing(&rows, &[1, 2, 4]));
        assert!(!medians_strictly_decreasing(&rows, &[1, 8]));
    }

    #[test]
    fn cf_target_at_zero_se() {
        let params = ModelParams::new(0.5, 2.0, 1.0).unwrap();
        let (t, se) = limit_cf_target(&params, &MeanEstimate { mean: 1.0, se: 0.1 }, &[0.0, 1.0]);
        assert_eq!(t[0], 1.0);
        assert_eq!(se[0], 0.0);
        assert!((t[1] - (-1f64).exp()).abs() < 1e-15);
        assert!((se[1] - 0.1 * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn too_few_replicates() {
        let params = ModelParams::new(0.5, 2.0, 1.0).unwrap();
        assert!(walk_variance_ratio(0.5, 10, 1, StreamKey::new(0)).is_err());
        assert!(scaling_study(&params, &[8], 1, StreamKey::new(0)).is_err());
    }
}
