//! Integer-site local times of the walk, the random walk in random scenery
//! `Z`, and the local-time statistics built from them.

use std::collections::{BTreeMap, HashMap};

use crate::error::{invalid, Error, Result};
use crate::fgn::WalkPath;
use crate::stable::SceneryField;
use crate::stats::NeumaierSum;

/// How a real walk position is mapped to a lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SiteRule {
    /// `⌈s⌉`, the convention of the model.
    #[default]
    Ceiling,
    /// `⌊s⌋`, kept for sensitivity checks.
    Floor,
}

impl SiteRule {
    pub fn site(self, s: f64) -> i64 {
        match self {
            SiteRule::Ceiling => s.ceil() as i64,
            SiteRule::Floor => s.floor() as i64,
        }
    }
}

pub fn site_of(s: f64) -> i64 {
    SiteRule::Ceiling.site(s)
}

/// Occupation counts `N_n(x)` of the walk up to horizon `n`.
///
/// Stored densely over the visited span `[origin, origin + counts.len())`;
/// the walk moves by Gaussian steps so the span and the support have the same
/// order of magnitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTimeProfile {
    n: usize,
    origin: i64,
    counts: Vec<u64>,
}

impl LocalTimeProfile {
    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn get(&self, site: i64) -> u64 {
        let i = site - self.origin;
        if i < 0 {
            return 0;
        }
        self.counts.get(i as usize).copied().unwrap_or(0)
    }

    /// Occupied sites and their counts, in increasing site order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (self.origin + i as i64, c))
    }

    pub fn to_map(&self) -> BTreeMap<i64, u64> {
        self.iter().collect()
    }

    /// Smallest and largest occupied site.
    pub fn span(&self) -> (i64, i64) {
        let first = self.counts.iter().position(|&c| c > 0).unwrap_or(0);
        let last = self.counts.iter().rposition(|&c| c > 0).unwrap_or(0);
        (self.origin + first as i64, self.origin + last as i64)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `L_n = max_x N_n(x)`.
    pub fn max_local_time(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// `V_n = Σ_x N_n(x)²`.
    pub fn self_intersections(&self) -> u64 {
        self.counts.iter().map(|&c| c * c).sum()
    }

    /// `R_n = #{x : N_n(x) ≠ 0}`.
    pub fn range_count(&self) -> u64 {
        self.counts.iter().filter(|&&c| c > 0).count() as u64
    }

    /// `Σ_x N_n(x) ξ_x`.
    pub fn weighted_sum(&self, scenery: &impl SceneryLookup) -> Result<f64> {
        let mut acc = NeumaierSum::new();
        for (x, c) in self.iter() {
            let xi = scenery.get(x).ok_or(Error::MissingScenery(x))?;
            acc.add(c as f64 * xi);
        }
        Ok(acc.value())
    }
}

fn check_horizon(path: &WalkPath, n: usize) -> Result<()> {
    if n > path.n() {
        return Err(invalid(format!(
            "horizon {n} exceeds walk length {}",
            path.n()
        )));
    }
    Ok(())
}

pub fn local_times(path: &WalkPath, n: usize) -> Result<LocalTimeProfile> {
    local_times_with(path, n, SiteRule::Ceiling)
}

pub fn local_times_with(path: &WalkPath, n: usize, rule: SiteRule) -> Result<LocalTimeProfile> {
    Ok(local_times_at(path, &[n], rule)?.pop().expect("one horizon"))
}

/// Profiles at several horizons from a single pass over the path.
///
/// The result is in the order of `horizons`, which need not be sorted.
pub fn local_times_at(path: &WalkPath, horizons: &[usize], rule: SiteRule) -> Result<Vec<LocalTimeProfile>> {
    let Some(&top) = horizons.iter().max() else {
        return Ok(Vec::new());
    };
    check_horizon(path, top)?;
    let sites: Vec<i64> = path.sums()[..=top].iter().map(|&s| rule.site(s)).collect();
    let lo = *sites.iter().min().expect("nonempty");
    let hi = *sites.iter().max().expect("nonempty");
    let mut counts = vec![0u64; (hi - lo + 1) as usize];

    let mut order: Vec<usize> = (0..horizons.len()).collect();
    order.sort_by_key(|&i| horizons[i]);
    let mut out: Vec<Option<LocalTimeProfile>> = vec![None; horizons.len()];
    let mut next = 0;
    for (k, &x) in sites.iter().enumerate() {
        counts[(x - lo) as usize] += 1;
        while next < order.len() && horizons[order[next]] == k {
            out[order[next]] = Some(LocalTimeProfile {
                n: k,
                origin: lo,
                counts: counts.clone(),
            });
            next += 1;
        }
    }
    Ok(out.into_iter().map(|p| p.expect("every horizon visited")).collect())
}

/// Read access to scenery values by site.
pub trait SceneryLookup {
    fn get(&self, site: i64) -> Option<f64>;
}

impl SceneryLookup for BTreeMap<i64, f64> {
    fn get(&self, site: i64) -> Option<f64> {
        BTreeMap::get(self, &site).copied()
    }
}

impl SceneryLookup for HashMap<i64, f64> {
    fn get(&self, site: i64) -> Option<f64> {
        HashMap::get(self, &site).copied()
    }
}

/// Scenery values on a contiguous block of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneryWindow {
    origin: i64,
    values: Vec<f64>,
}

impl SceneryWindow {
    /// Materialize `field` on `lo..=hi`.
    pub fn fill(field: &impl SceneryField, lo: i64, hi: i64) -> Self {
        let values = if hi >= lo {
            (lo..=hi).map(|x| field.value(x)).collect()
        } else {
            Vec::new()
        };
        SceneryWindow { origin: lo, values }
    }

    /// Materialize `field` on every site the walk visits up to `n`.
    pub fn for_walk(field: &impl SceneryField, path: &WalkPath, n: usize, rule: SiteRule) -> Result<Self> {
        check_horizon(path, n)?;
        let (lo, hi) = path.sums()[..=n]
            .iter()
            .map(|&s| rule.site(s))
            .fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
        Ok(Self::fill(field, lo, hi))
    }
}

impl SceneryLookup for SceneryWindow {
    fn get(&self, site: i64) -> Option<f64> {
        let i = site - self.origin;
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }
}

/// `Z_0..Z_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RwrsSeries {
    values: Vec<f64>,
}

impl RwrsSeries {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("series needs at least Z_0"));
        }
        Ok(RwrsSeries { values })
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation `Z_s = Z_⌊s⌋ + (s − ⌊s⌋)(Z_⌊s⌋+1 − Z_⌊s⌋)`.
    pub fn interpolate(&self, s: f64) -> Result<f64> {
        let n = self.horizon();
        if !(s >= 0.0 && s <= n as f64) {
            return Err(invalid(format!("interpolation time {s} outside [0, {n}]")));
        }
        let k = s.floor() as usize;
        if k >= n {
            return Ok(self.values[n]);
        }
        let frac = s - k as f64;
        if frac == 0.0 {
            return Ok(self.values[k]);
        }
        Ok(self.values[k] + frac * (self.values[k + 1] - self.values[k]))
    }
}

/// `Z_j = Σ_{k=0}^{j} ξ_{site(S_k)}` for `j = 0..=n`.
pub fn rwrs_series(path: &WalkPath, scenery: &impl SceneryLookup, n: usize) -> Result<RwrsSeries> {
    rwrs_series_with(path, scenery, n, SiteRule::Ceiling)
}

pub fn rwrs_series_with(
    path: &WalkPath,
    scenery: &impl SceneryLookup,
    n: usize,
    rule: SiteRule,
) -> Result<RwrsSeries> {
    check_horizon(path, n)?;
    let mut acc = NeumaierSum::new();
    let mut values = Vec::with_capacity(n + 1);
    for &s in &path.sums()[..=n] {
        let x = rule.site(s);
        acc.add(scenery.get(x).ok_or(Error::MissingScenery(x))?);
        values.push(acc.value());
    }
    Ok(RwrsSeries { values })
}

/// Frequencies `θ_j` and times `t_j` of a local-time functional.
#[derive(Debug, Clone, PartialEq)]
pub struct KsStatParams {
    thetas: Vec<f64>,
    times: Vec<f64>,
}

impl KsStatParams {
    pub fn new(thetas: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != times.len() {
            return Err(invalid(format!(
                "need matching nonempty theta/time lists, got {} and {}",
                thetas.len(),
                times.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(invalid(format!("time {t} must be nonnegative")));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(invalid("thetas must be finite"));
        }
        Ok(KsStatParams { thetas, times })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Integer horizons `⌊n t_j⌋`.
    pub fn horizons(&self, n: usize) -> Vec<usize> {
        self.times.iter().map(|&t| crate::fgn::grid_steps(n, t)).collect()
    }
}

/// `n^(−δβ) Σ_x |Σ_j θ_j N_{⌊n t_j⌋}(x)|^β`, `δ = 1 − H + H/β`.
pub fn ks_statistic(
    profiles: &[LocalTimeProfile],
    p: &KsStatParams,
    n: usize,
    hurst: f64,
    beta: f64,
) -> Result<f64> {
    let delta = crate::schema::delta_exponent(hurst, beta)?;
    let horizons = p.horizons(n);
    if profiles.len() != horizons.len() {
        return Err(invalid(format!(
            "expected {} profiles, got {}",
            horizons.len(),
            profiles.len()
        )));
    }
    for (prof, &h) in profiles.iter().zip(&horizons) {
        if prof.horizon() != h {
            return Err(invalid(format!(
                "profile horizon {} does not match ⌊n t⌋ = {h}",
                prof.horizon()
            )));
        }
    }
    if p.thetas.iter().all(|&t| t == 0.0) {
        return Ok(0.0);
    }
    let lo = profiles.iter().map(|q| q.origin).min().expect("nonempty");
    let hi = profiles
        .iter()
        .map(|q| q.origin + q.counts.len() as i64)
        .max()
        .expect("nonempty");
    let mut acc = NeumaierSum::new();
    for x in lo..hi {
        let combo: f64 = profiles
            .iter()
            .zip(&p.thetas)
            .map(|(q, &th)| th * q.get(x) as f64)
            .sum();
        if combo != 0.0 {
            acc.add(combo.abs().powf(beta));
        }
    }
    Ok((n as f64).powf(-delta * beta) * acc.value())
}

/// [`ks_statistic`] evaluated directly on a walk.
pub fn ks_statistic_for_path(
    path: &WalkPath,
    p: &KsStatParams,
    n: usize,
    hurst: f64,
    beta: f64,
    rule: SiteRule,
) -> Result<f64> {
    let profiles = local_times_at(path, &p.horizons(n), rule)?;
    ks_statistic(&profiles, p, n, hurst, beta)
}
