//! Monte Carlo checks of walk local times and of the fBm local-time oracle.

use std::f64::consts::PI;

use rwrs_core::experiments::{limit_cf_target, x_limit_samples, xn_samples};
use rwrs_core::limit::LimitSampler;
use rwrs_core::stats::{ecf, RunningStats};
use rwrs_core::*;

/// `E ∫ L_1(x)² dx = 2 ∫_0^1 ∫_0^u (2π(u − s))^(−1/2) ds du` for Brownian motion.
fn brownian_oracle() -> f64 {
    // inner integral is 2√u/√(2π); outer integral of √u is 2/3
    let inner_coefficient = 2.0 / (2.0 * PI).sqrt();
    2.0 * inner_coefficient * (2.0 / 3.0)
}

/// Midpoint quadrature of the same double integral, after the substitution
/// v = u − s, as an independent check of the closed form.
fn brownian_oracle_quadrature() -> f64 {
    let k = 4000;
    let h = 1.0 / k as f64;
    let mut total = 0.0;
    for i in 0..k {
        let u = (i as f64 + 0.5) * h;
        // ∫_0^u (2πv)^(-1/2) dv evaluated exactly on the singular cell
        total += 2.0 * (2.0 * u / PI).sqrt() * h;
    }
    total
}

#[test]
fn oracle_closed_form() {
    let c = brownian_oracle();
    assert!((c - 1.0638).abs() < 1e-4);
    assert!((c - 8.0 / (3.0 * (2.0 * PI).sqrt())).abs() < 1e-15);
    assert!((brownian_oracle_quadrature() - c).abs() < 1e-6);
}

#[test]
fn walk_functional_matches_brownian_oracle() {
    let params = ModelParams::new(0.5, 2.0, 1.0).unwrap();
    let stat = KsStatParams::new(vec![1.0], vec![1.0]).unwrap();
    let xs = xn_samples(&params, &stat, 4096, 500, StreamKey::new(1)).unwrap();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let rel = (mean - brownian_oracle()).abs() / brownian_oracle();
    assert!(rel < 0.15, "mean X_n = {mean}");
}

#[test]
fn limit_functional_matches_brownian_oracle() {
    let params = ModelParams::new(0.5, 2.0, 1.0).unwrap();
    let ex = estimate_ex(&params, &[1.0], &[1.0], LimitConfig::default(), 2000, StreamKey::new(2)).unwrap();
    let rel = (ex.mean - brownian_oracle()).abs() / brownian_oracle();
    assert!(rel < 0.10, "E[X] = {} ± {}", ex.mean, ex.se);
}

#[test]
fn standard_error_halves_when_replicates_quadruple() {
    let params = ModelParams::new(0.6, 1.5, 1.0).unwrap();
    let cfg = LimitConfig { m: 1024, bins: 128 };
    let a = estimate_ex(&params, &[1.0], &[1.0], cfg, 400, StreamKey::new(3)).unwrap();
    let b = estimate_ex(&params, &[1.0], &[1.0], cfg, 1600, StreamKey::new(4)).unwrap();
    let ratio = a.se / b.se;
    assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "se ratio {ratio}");
    let c = estimate_ex(&params, &[1.0], &[1.0], cfg, 800, StreamKey::new(5)).unwrap();
    let ratio = a.se / c.se;
    let sqrt2 = 2f64.sqrt();
    assert!(ratio > sqrt2 / 1.5 && ratio < sqrt2 * 1.5, "se ratio {ratio}");
}

/// For β = 2, `Δ(1)` given the path is N(0, 2σ² Σ L² h).
#[test]
fn gaussian_delta_has_conditional_variance() {
    let sigma = 1.3;
    let params = ModelParams::new(0.5, 2.0, sigma).unwrap();
    let sampler = LimitSampler::new(params, &[1.0], LimitConfig::default()).unwrap();
    let key = StreamKey::new(6);
    let z: Vec<f64> = rwrs_core::parallel::map_replicates(2000, |r| {
        let k = key.replicate(r as u64);
        let grid = sampler.local_time(k).unwrap();
        let l2 = x_functional(&grid, &[1.0], 2.0).unwrap();
        sampler.delta(k).unwrap().values[0] / (2.0 * sigma * sigma * l2).sqrt()
    });
    let s: RunningStats = z.into_iter().collect();
    assert!((s.variance() - 1.0).abs() < 0.1, "standardized variance {}", s.variance());
    assert!(s.mean().abs() < 3.0 * s.se());
}

/// ECF of `Σ θ_j Δ(t_j)` against `E exp(−σ^β X)` from independent paths.
fn cf_consistency(h: f64, beta: f64, thetas: &[f64], times: &[f64], seed: u64) {
    let params = ModelParams::new(h, beta, 1.0).unwrap();
    let cfg = LimitConfig::default();
    let sampler = LimitSampler::new(params, times, cfg).unwrap();
    let key = StreamKey::new(seed);
    let proj: Vec<f64> = rwrs_core::parallel::map_replicates(2000, |r| {
        let d = sampler.delta(key.replicate(r as u64)).unwrap();
        d.values.iter().zip(thetas).map(|(v, t)| v * t).sum()
    });
    let e = ecf(&proj, &[1.0]).unwrap();
    let stat = KsStatParams::new(thetas.to_vec(), times.to_vec()).unwrap();
    let xs = x_limit_samples(&params, &stat, cfg, 2000, key.child(99)).unwrap();
    let lemma: RunningStats = xs.iter().map(|x| (-x).exp()).collect();
    let se = (e.se[0].powi(2) + lemma.se().powi(2)).sqrt();
    assert!(
        (e.re[0] - lemma.mean()).abs() <= 3.0 * se,
        "H={h} beta={beta}: ecf {} vs E exp(-X) {} (se {se})",
        e.re[0],
        lemma.mean()
    );
    assert!(e.im[0].abs() <= 3.0 * e.se_im[0]);
}

#[test]
fn delta_cf_two_times_gaussian() {
    cf_consistency(0.5, 2.0, &[1.0, 1.0], &[0.5, 1.0], 7);
}

#[test]
fn delta_cf_single_time_across_beta() {
    cf_consistency(0.5, 1.5, &[1.0], &[1.0], 8);
    cf_consistency(0.7, 1.0, &[1.0], &[1.0], 9);
    cf_consistency(0.7, 2.0, &[1.0], &[1.0], 10);
}

#[test]
fn gamma_n_cf_matches_limit() {
    let params = ModelParams::new(0.5, 1.5, 1.0).unwrap();
    let cfg = LimitConfig::default();
    let ex = estimate_ex(&params, &[1.0], &[1.0], cfg, 2000, StreamKey::new(11)).unwrap();
    let g = rwrs_core::experiments::gamma_samples(&params, cfg, 32, &[1.0], 500, StreamKey::new(12)).unwrap();
    let col = rwrs_core::experiments::column(&g, 0);
    let e = ecf(&col, &[1.0]).unwrap();
    let (t, tse) = limit_cf_target(&params, &ex, &[1.0]);
    let c = rwrs_core::stats::cf_compare_with_target_se(&e, &t, &tse).unwrap();
    assert!(c.passes(), "z = {:?}", c.z);
}
