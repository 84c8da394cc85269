//! Symmetric β-stable variates and i.i.d. random sceneries.
//!
//! The scale convention is the characteristic function `exp(-σ^β |u|^β)`;
//! for β = 2 that is a centered Gaussian with variance `2σ²`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Exp1, Open01};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::streams::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    beta: f64,
    sigma: f64,
}

impl StableParams {
    pub fn new(beta: f64, sigma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(invalid(format!("stability index beta = {beta} not in (0, 2]")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("scale sigma = {sigma} must be positive")));
        }
        Ok(StableParams { beta, sigma })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

pub fn theoretical_cf(u: f64, p: &StableParams) -> f64 {
    (-(p.sigma * u.abs()).powf(p.beta)).exp()
}

/// Standard symmetric stable draw (σ = 1) by the Chambers–Mallows–Stuck transform.
pub fn sample_standard_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.sample::<f64, _>(Open01) - 0.5);
    if beta == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    if beta == 2.0 {
        return 2.0 * v.sin() * w.sqrt();
    }
    let a = (beta * v).sin() / v.cos().powf(1.0 / beta);
    let b = (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta);
    a * b
}

pub fn sample_stable<R: Rng + ?Sized>(p: &StableParams, rng: &mut R) -> f64 {
    p.sigma * sample_standard_stable(p.beta, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SceneryKind {
    #[default]
    ExactStable,
    /// `sign · s · U^(-1/β)`: tail `P(|ξ| > x) = (s/x)^β` for `x ≥ s`.
    SymmetricPareto,
}

impl SceneryKind {
    pub fn name(&self) -> &'static str {
        match self {
            SceneryKind::ExactStable => "exact-stable",
            SceneryKind::SymmetricPareto => "symmetric-pareto",
        }
    }
}

impl std::str::FromStr for SceneryKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-stable" | "stable" => Ok(SceneryKind::ExactStable),
            "symmetric-pareto" | "pareto" => Ok(SceneryKind::SymmetricPareto),
            other => Err(invalid(format!("unknown scenery kind `{other}`"))),
        }
    }
}

/// Tail scale `s` of the symmetric Pareto scenery.
///
/// A symmetric law with `P(|ξ| > x) = c x^(-β)` has normalized sums converging
/// to the stable law with exponent `c · C_β |u|^β`, where
/// `C_β = Γ(1-β) cos(πβ/2)` (and `C_1 = π/2`). Choosing `c = s^β = σ^β / C_β`
/// reproduces `exp(-σ^β |u|^β)`. Defined for β < 2 only: at β = 2 the Pareto
/// tail has infinite variance and leaves the normal domain.
pub fn pareto_scale(p: &StableParams) -> Result<f64> {
    let beta = p.beta;
    if beta >= 2.0 {
        return Err(invalid(
            "symmetric-pareto scenery requires beta < 2 (use exact-stable for beta = 2)",
        ));
    }
    let c_beta = if beta == 1.0 {
        FRAC_PI_2
    } else {
        gamma(1.0 - beta) * (PI * beta / 2.0).cos()
    };
    Ok(p.sigma * c_beta.powf(-1.0 / beta))
}

/// Source of scenery values indexed by lattice site.
pub trait SceneryField {
    fn value(&self, site: i64) -> f64;
}

impl<F: Fn(i64) -> f64> SceneryField for F {
    fn value(&self, site: i64) -> f64 {
        self(site)
    }
}

/// Scenery generated on demand: the value at a site is drawn from the
/// substream `(key, site)`, so it is the same every time the site is queried.
#[derive(Debug, Clone, Copy)]
pub struct LazyScenery {
    kind: SceneryKind,
    params: StableParams,
    key: StreamKey,
    scale: f64,
}

impl LazyScenery {
    pub fn new(kind: SceneryKind, params: StableParams, key: StreamKey) -> Result<Self> {
        let scale = match kind {
            SceneryKind::ExactStable => params.sigma,
            SceneryKind::SymmetricPareto => pareto_scale(&params)?,
        };
        Ok(LazyScenery {
            kind,
            params,
            key,
            scale,
        })
    }

    pub fn kind(&self) -> SceneryKind {
        self.kind
    }
}

impl SceneryField for LazyScenery {
    fn value(&self, site: i64) -> f64 {
        let mut rng = self.key.site_rng(site);
        match self.kind {
            SceneryKind::ExactStable => self.scale * sample_standard_stable(self.params.beta, &mut rng),
            SceneryKind::SymmetricPareto => {
                let u: f64 = rng.sample(Open01);
                let mag = self.scale * u.powf(-1.0 / self.params.beta);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
        }
    }
}

/// Scenery values at the requested sites.
pub fn sample_scenery<I>(
    kind: SceneryKind,
    params: &StableParams,
    sites: I,
    key: StreamKey,
) -> Result<BTreeMap<i64, f64>>
where
    I: IntoIterator<Item = i64>,
{
    let field = LazyScenery::new(kind, *params, key)?;
    Ok(sites.into_iter().map(|x| (x, field.value(x))).collect())
}
