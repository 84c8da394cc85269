//! The random rewards schema: rescaled walks in random scenery `D_n` and
//! their normalized sums over independent copies `G_n`.

use crate::error::{invalid, Result};
use crate::fgn::{FgnGenerator, HurstParams, WalkPath};
use crate::parallel::try_map_replicates;
use crate::rwrs::{rwrs_series_with, SceneryLookup, SceneryWindow, SiteRule};
use crate::stable::{LazyScenery, SceneryField, SceneryKind, StableParams};
use crate::stats::NeumaierSum;
use crate::streams::{Role, StreamKey};

/// `δ = 1 − H + H/β`.
pub fn delta_exponent(hurst: f64, beta: f64) -> Result<f64> {
    HurstParams::new(hurst)?;
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(invalid(format!("stability index beta = {beta} not in (0, 2]")));
    }
    Ok(1.0 - hurst + hurst / beta)
}

/// `(H, β, σ)` together with the derived exponent `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    hurst: HurstParams,
    stable: StableParams,
    delta: f64,
}

impl ModelParams {
    pub fn new(hurst: f64, beta: f64, sigma: f64) -> Result<Self> {
        let h = HurstParams::new(hurst)?;
        let stable = StableParams::new(beta, sigma)?;
        let delta = delta_exponent(hurst, beta)?;
        debug_assert!(1.0 / beta >= delta - (1.0 - hurst) - 1e-12);
        Ok(ModelParams {
            hurst: h,
            stable,
            delta,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst.value()
    }

    pub fn hurst_params(&self) -> HurstParams {
        self.hurst
    }

    pub fn beta(&self) -> f64 {
        self.stable.beta()
    }

    pub fn sigma(&self) -> f64 {
        self.stable.sigma()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn stable(&self) -> StableParams {
        self.stable
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(invalid(format!("time {t} must be nonnegative and finite")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("time grid must be sorted"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaConfig {
    pub n: usize,
    pub copies: usize,
    pub times: Vec<f64>,
}

impl SchemaConfig {
    pub fn new(n: usize, copies: usize, times: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(invalid("time scale n must be at least 1"));
        }
        if copies < 1 {
            return Err(invalid("number of copies c_n must be at least 1"));
        }
        check_times(&times)?;
        Ok(SchemaConfig { n, copies, times })
    }
}

/// `D_n(t) = n^(−δ) Z_{nt}` for one walk and one scenery.
pub fn dn_from_parts(
    path: &WalkPath,
    scenery: &impl SceneryLookup,
    n: usize,
    times: &[f64],
    delta: f64,
    rule: SiteRule,
) -> Result<Vec<f64>> {
    check_times(times)?;
    let tmax = *times.last().expect("nonempty");
    let s_max = n as f64 * tmax;
    let needed = s_max.ceil() as usize;
    if needed > path.n() {
        return Err(invalid(format!(
            "walk of {} steps cannot reach time n·t = {s_max}",
            path.n()
        )));
    }
    let z = rwrs_series_with(path, scenery, needed, rule)?;
    let norm = (n as f64).powf(-delta);
    times
        .iter()
        .map(|&t| Ok(norm * z.interpolate(n as f64 * t)?))
        .collect()
}

/// Draws `D_n` and `G_n` for fixed `(n, times, params)`.
///
/// Copy `i` under key `k` uses walk stream `k.copy(i).role(Walk)` and scenery
/// stream `k.copy(i).role(Scenery)`.
#[derive(Debug, Clone)]
pub struct SchemaSampler {
    params: ModelParams,
    kind: SceneryKind,
    rule: SiteRule,
    n: usize,
    times: Vec<f64>,
    walk: FgnGenerator,
}

impl SchemaSampler {
    pub fn new(n: usize, times: &[f64], params: ModelParams, kind: SceneryKind) -> Result<Self> {
        if n < 1 {
            return Err(invalid("time scale n must be at least 1"));
        }
        check_times(times)?;
        // validate the scenery kind against beta up front
        LazyScenery::new(kind, params.stable(), StreamKey::new(0))?;
        let steps = ((n as f64 * times.last().expect("nonempty")).ceil() as usize).max(1);
        Ok(SchemaSampler {
            params,
            kind,
            rule: SiteRule::Ceiling,
            n,
            times: times.to_vec(),
            walk: FgnGenerator::new(steps, params.hurst_params())?,
        })
    }

    pub fn with_site_rule(mut self, rule: SiteRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn walk_for(&self, key: StreamKey) -> WalkPath {
        self.walk.sample_walk(&mut key.role(Role::Walk).rng())
    }

    pub fn scenery_for(&self, key: StreamKey) -> LazyScenery {
        LazyScenery::new(self.kind, self.params.stable(), key.role(Role::Scenery))
            .expect("kind validated at construction")
    }

    /// `D_n` on the sampler's walk for `key` with an arbitrary scenery.
    pub fn dn_with_scenery(&self, key: StreamKey, field: &impl SceneryField) -> Result<Vec<f64>> {
        let path = self.walk_for(key);
        let window = SceneryWindow::for_walk(field, &path, self.walk.n(), self.rule)?;
        dn_from_parts(&path, &window, self.n, &self.times, self.params.delta(), self.rule)
    }

    pub fn sample_dn(&self, key: StreamKey) -> Result<Vec<f64>> {
        self.dn_with_scenery(key, &self.scenery_for(key))
    }

    pub fn sample_gn(&self, copies: usize, key: StreamKey) -> Result<Vec<f64>> {
        self.gn_with_scenery(copies, key, |copy_key| self.scenery_for(copy_key))
    }

    /// `G_n` with the scenery of each copy supplied by `scenery(copy_key)`.
    pub fn gn_with_scenery<S, F>(&self, copies: usize, key: StreamKey, scenery: F) -> Result<Vec<f64>>
    where
        S: SceneryField,
        F: Fn(StreamKey) -> S,
    {
        if copies < 1 {
            return Err(invalid("number of copies c_n must be at least 1"));
        }
        let mut sums = vec![NeumaierSum::new(); self.times.len()];
        for i in 0..copies {
            let ck = key.copy(i as u64);
            let d = self.dn_with_scenery(ck, &scenery(ck))?;
            for (acc, v) in sums.iter_mut().zip(d) {
                acc.add(v);
            }
        }
        let norm = (copies as f64).powf(-1.0 / self.params.beta());
        Ok(sums.into_iter().map(|s| norm * s.value()).collect())
    }

    /// `replicates` independent draws of `G_n`, replicate `r` keyed by `key.replicate(r)`.
    pub fn gn_replicates(&self, copies: usize, replicates: usize, key: StreamKey) -> Result<Vec<Vec<f64>>> {
        try_map_replicates(replicates, |r| self.sample_gn(copies, key.replicate(r as u64)))
    }
}

pub fn sample_dn(
    n: usize,
    times: &[f64],
    params: &ModelParams,
    kind: SceneryKind,
    key: StreamKey,
) -> Result<Vec<f64>> {
    SchemaSampler::new(n, times, *params, kind)?.sample_dn(key)
}

pub fn sample_gn(cfg: &SchemaConfig, params: &ModelParams, kind: SceneryKind, key: StreamKey) -> Result<Vec<f64>> {
    SchemaSampler::new(cfg.n, &cfg.times, *params, kind)?.sample_gn(cfg.copies, key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian() -> ModelParams {
        ModelParams::new(0.5, 2.0, 1.0).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_relative_eq!(delta_exponent(0.5, 2.0).unwrap(), 0.75);
        assert_relative_eq!(delta_exponent(0.7, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(delta_exponent(0.3, 2.0).unwrap(), 0.85, epsilon = 1e-15);
        assert!(delta_exponent(1.0, 2.0).is_err());
        assert!(delta_exponent(0.5, 0.0).is_err());
        assert!(delta_exponent(0.5, 2.5).is_err());
    }

    #[test]
    fn model_params() {
        let p = ModelParams::new(0.7, 1.5, 1.0).unwrap();
        assert_relative_eq!(p.delta(), 0.3 + 0.7 / 1.5, epsilon = 1e-15);
        assert!(ModelParams::new(0.7, 1.5, -1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SchemaConfig::new(0, 1, vec![1.0]).is_err());
        assert!(SchemaConfig::new(10, 0, vec![1.0]).is_err());
        assert!(SchemaConfig::new(10, 1, vec![1.0, 0.5]).is_err());
        assert!(SchemaConfig::new(10, 1, vec![]).is_err());
        assert!(SchemaConfig::new(10, 1, vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn zero_scenery_gives_zero() {
        let s = SchemaSampler::new(64, &[0.0, 0.5, 1.0], gaussian(), SceneryKind::ExactStable).unwrap();
        let d = s.dn_with_scenery(StreamKey::new(1), &|_x: i64| 0.0).unwrap();
        assert_eq!(d, vec![0.0; 3]);
        let g = s.gn_with_scenery(5, StreamKey::new(1), |_k| |_x: i64| 0.0).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn unit_scenery_counts_steps() {
        let n = 100;
        let s = SchemaSampler::new(n, &[0.0, 0.25, 1.0], gaussian(), SceneryKind::ExactStable).unwrap();
        let d = s.dn_with_scenery(StreamKey::new(2), &|_x: i64| 1.0).unwrap();
        let norm = (n as f64).powf(-0.75);
        for (v, nt) in d.iter().zip([0.0, 25.0, 100.0]) {
            assert_relative_eq!(*v, norm * (nt + 1.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn single_copy_is_dn() {
        let s = SchemaSampler::new(256, &[0.5, 1.0], ModelParams::new(0.7, 1.5, 1.0).unwrap(), SceneryKind::ExactStable)
            .unwrap();
        let key = StreamKey::new(3);
        assert_eq!(s.sample_gn(1, key).unwrap(), s.sample_dn(key.copy(0)).unwrap());
    }

    #[test]
    fn linear_in_scenery() {
        let s = SchemaSampler::new(128, &[0.3, 0.7, 1.0], gaussian(), SceneryKind::ExactStable).unwrap();
        let key = StreamKey::new(4);
        let a = s.scenery_for(key);
        let b = s.scenery_for(StreamKey::new(99));
        let sum = |x: i64| a.value(x) + b.value(x);
        let da = s.dn_with_scenery(key, &a).unwrap();
        let db = s.dn_with_scenery(key, &b).unwrap();
        let dsum = s.dn_with_scenery(key, &sum).unwrap();
        for i in 0..3 {
            assert_relative_eq!(dsum[i], da[i] + db[i], epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn t_zero_is_first_reward() {
        let s = SchemaSampler::new(50, &[0.0], gaussian(), SceneryKind::ExactStable).unwrap();
        let key = StreamKey::new(5);
        let field = s.scenery_for(key);
        let d = s.sample_dn(key).unwrap();
        assert_relative_eq!(d[0], 50f64.powf(-0.75) * field.value(0));
    }

    #[test]
    fn pareto_requires_heavy_tail() {
        assert!(SchemaSampler::new(10, &[1.0], gaussian(), SceneryKind::SymmetricPareto).is_err());
    }

    #[test]
    fn replicates_are_deterministic() {
        let s = SchemaSampler::new(64, &[1.0], gaussian(), SceneryKind::ExactStable).unwrap();
        let a = s.gn_replicates(3, 4, StreamKey::new(6)).unwrap();
        let b = s.gn_replicates(3, 4, StreamKey::new(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
