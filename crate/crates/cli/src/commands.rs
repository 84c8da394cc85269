//! One function per subcommand. Each returns the CSV body, a one-line
//! summary and whether the run's own checks passed.

use std::fmt::Write as _;

use rwrs_core::experiments::{
    column, gamma_samples, limit_cf_target, medians_strictly_decreasing, scaling_fits, scaling_study,
    schema_samples, x_limit_samples, xn_samples,
};
use rwrs_core::rwrs::{rwrs_series, SceneryWindow};
use rwrs_core::stats::{cf_compare_with_target_se, ecf, ks_distance, mean_se};
use rwrs_core::streams::Role;
use rwrs_core::{
    estimate_ex, local_times, site_of, FgnGenerator, KsStatParams, LazyScenery, LimitConfig, LimitSampler,
    ModelParams, SiteRule, StreamKey,
};

use crate::config::{Command, RunConfig};
use crate::CliError;

/// Horizons of the `scaling` command.
pub const SCALING_NS: [usize; 7] = [256, 512, 1024, 2048, 4096, 8192, 16384];
/// Horizons used for the log-log slope fits.
pub const SCALING_FIT_NS: [usize; 6] = [256, 512, 1024, 2048, 4096, 8192];
/// Horizons along which the scaled maximum local time must decrease.
pub const SCALING_MEDIAN_NS: [usize; 4] = [256, 1024, 4096, 16384];
/// Half-width of the accepted window around the predicted exponents.
pub const SLOPE_WINDOW: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub summary: String,
    pub passed: bool,
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(cfg: &RunConfig, columns: &str) -> Self {
        let mut text = format!("# rwrs-cli {}\n", env!("CARGO_PKG_VERSION"));
        for line in cfg.header_lines() {
            let _ = writeln!(text, "# {line}");
        }
        let _ = writeln!(text, "{columns}");
        Csv { text }
    }

    fn comment(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.text, "# {}", line.as_ref());
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }
}

macro_rules! fields {
    ($($e:expr),* $(,)?) => { vec![$($e.to_string()),*] };
}

/// Run the configured command on a thread pool of `cfg.jobs` workers.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {:?} workers: {e}", cfg.jobs)))?;
    pool.install(|| dispatch(cfg))
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = ModelParams::new(cfg.hurst, cfg.beta, cfg.sigma)?;
    let key = StreamKey::new(cfg.seed);
    let limit = LimitConfig {
        m: cfg.m,
        bins: cfg.bins,
    };
    match cfg.command {
        Command::Walk => walk(cfg, &params, key),
        Command::Rwrs => rwrs(cfg, &params, key),
        Command::Scaling => scaling(cfg, &params, key),
        Command::KsStat => ks_stat(cfg, &params, limit, key),
        Command::Delta => delta(cfg, &params, limit, key),
        Command::Gamma => gamma(cfg, &params, limit, key),
        Command::Schema => schema(cfg, &params, key),
        Command::EcfCheck => ecf_check(cfg, &params, limit, key),
    }
}

fn walk(cfg: &RunConfig, params: &ModelParams, key: StreamKey) -> Result<Outcome, CliError> {
    let gen = FgnGenerator::new(cfg.n, params.hurst_params())?;
    let path = gen.sample_walk(&mut key.role(Role::Walk).rng());
    let mut csv = Csv::new(cfg, "k,increment,position,site");
    for (k, &s) in path.sums().iter().enumerate() {
        let x = if k == 0 { 0.0 } else { path.increments()[k - 1] };
        csv.row(&fields![k, x, s, site_of(s)]);
    }
    let s_n = path.sums()[cfg.n];
    Ok(Outcome {
        csv: csv.text,
        summary: format!(
            "walk: n={} H={} S_n={s_n} S_n/n^H={}",
            cfg.n,
            cfg.hurst,
            s_n / (cfg.n as f64).powf(cfg.hurst)
        ),
        passed: true,
    })
}

fn rwrs(cfg: &RunConfig, params: &ModelParams, key: StreamKey) -> Result<Outcome, CliError> {
    let gen = FgnGenerator::new(cfg.n, params.hurst_params())?;
    let path = gen.sample_walk(&mut key.role(Role::Walk).rng());
    let field = LazyScenery::new(cfg.scenery, params.stable(), key.role(Role::Scenery))?;
    let window = SceneryWindow::for_walk(&field, &path, cfg.n, SiteRule::Ceiling)?;
    let z = rwrs_series(&path, &window, cfg.n)?;
    let mut csv = Csv::new(cfg, "k,position,site,scenery,z");
    for (k, (&s, &zk)) in path.sums().iter().zip(z.values()).enumerate() {
        let x = site_of(s);
        let xi = rwrs_core::SceneryLookup::get(&window, x).ok_or(rwrs_core::Error::MissingScenery(x))?;
        csv.row(&fields![k, s, x, xi, zk]);
    }
    let prof = local_times(&path, cfg.n)?;
    Ok(Outcome {
        csv: csv.text,
        summary: format!(
            "rwrs: n={} Z_n={} L_n={} V_n={} R_n={}",
            cfg.n,
            z.values()[cfg.n],
            prof.max_local_time(),
            prof.self_intersections(),
            prof.range_count()
        ),
        passed: true,
    })
}

fn scaling(cfg: &RunConfig, params: &ModelParams, key: StreamKey) -> Result<Outcome, CliError> {
    let rows = scaling_study(params, &SCALING_NS, cfg.replicates, key)?;
    let (fit_v, fit_r) = scaling_fits(&rows, &SCALING_FIT_NS)?;
    let decreasing = medians_strictly_decreasing(&rows, &SCALING_MEDIAN_NS);
    let v_target = 2.0 - cfg.hurst;
    let v_ok = (fit_v.slope - v_target).abs() <= SLOPE_WINDOW;
    let r_ok = (fit_r.slope - cfg.hurst).abs() <= SLOPE_WINDOW;
    let mut csv = Csv::new(cfg, "n,mean_Vn,se_Vn,mean_Rn,se_Rn,median_Ln_scaled,slope_Vn,slope_Rn");
    for r in &rows {
        csv.row(&fields![r.n, r.mean_v, r.se_v, r.mean_r, r.se_r, r.median_l_scaled, fit_v.slope, fit_r.slope]);
    }
    csv.comment(format!(
        "slope_Vn={} stderr={} target={v_target}±{SLOPE_WINDOW}; slope_Rn={} stderr={} target={}±{SLOPE_WINDOW}; median_decreasing={decreasing}",
        fit_v.slope, fit_v.stderr, fit_r.slope, fit_r.stderr, cfg.hurst
    ));
    let passed = v_ok && r_ok && decreasing;
    Ok(Outcome {
        csv: csv.text,
        summary: format!(
            "scaling: slope_Vn={:.4} (target {:.2}) slope_Rn={:.4} (target {:.2}) median n^-delta L_n decreasing={decreasing} -> {}",
            fit_v.slope,
            v_target,
            fit_r.slope,
            cfg.hurst,
            if passed { "PASS" } else { "FAIL" }
        ),
        passed,
    })
}

fn ks_stat(cfg: &RunConfig, params: &ModelParams, limit: LimitConfig, key: StreamKey) -> Result<Outcome, CliError> {
    let stat = KsStatParams::new(cfg.thetas(), cfg.times.clone())?;
    let xn = xn_samples(params, &stat, cfg.n, cfg.replicates, key)?;
    let xl = x_limit_samples(params, &stat, limit, cfg.replicates, key.role(Role::Oracle))?;
    let mut csv = Csv::new(cfg, "replicate,x_n,x_limit");
    for (r, (a, b)) in xn.iter().zip(&xl).enumerate() {
        csv.row(&fields![r, a, b]);
    }
    let d = ks_distance(&xn, &xl)?;
    let (mn, ml) = (mean_se(&xn), mean_se(&xl));
    csv.comment(format!("ks_distance={d} mean_x_n={} se={} mean_x_limit={} se={}", mn.mean, mn.se, ml.mean, ml.se));
    Ok(Outcome {
        csv: csv.text,
        summary: format!(
            "ks-stat: n={} KS={d:.4} mean X_n={:.4} mean X={:.4}",
            cfg.n, mn.mean, ml.mean
        ),
        passed: true,
    })
}

fn delta(cfg: &RunConfig, params: &ModelParams, limit: LimitConfig, key: StreamKey) -> Result<Outcome, CliError> {
    let sampler = LimitSampler::new(*params, &cfg.times, limit)?;
    let draws = rwrs_core::parallel::try_map_replicates(cfg.replicates, |r| sampler.delta(key.replicate(r as u64)))?;
    let mut csv = Csv::new(cfg, "replicate,t,delta");
    for (r, d) in draws.iter().enumerate() {
        for (t, v) in d.times.iter().zip(&d.values) {
            csv.row(&fields![r, t, v]);
        }
    }
    Ok(Outcome {
        csv: csv.text,
        summary: format!("delta: {} replicates at {} times", cfg.replicates, cfg.times.len()),
        passed: true,
    })
}

fn write_samples(cfg: &RunConfig, columns: &str, samples: &[Vec<f64>]) -> String {
    let mut csv = Csv::new(cfg, columns);
    for (r, row) in samples.iter().enumerate() {
        for (t, v) in cfg.times.iter().zip(row) {
            csv.row(&fields![r, t, v]);
        }
    }
    csv.text
}

fn gamma(cfg: &RunConfig, params: &ModelParams, limit: LimitConfig, key: StreamKey) -> Result<Outcome, CliError> {
    let samples = gamma_samples(params, limit, cfg.cn, &cfg.times, cfg.replicates, key)?;
    Ok(Outcome {
        csv: write_samples(cfg, "replicate,t,gamma", &samples),
        summary: format!("gamma: {} replicates of Gamma_n with {} copies", cfg.replicates, cfg.cn),
        passed: true,
    })
}

fn schema(cfg: &RunConfig, params: &ModelParams, key: StreamKey) -> Result<Outcome, CliError> {
    let samples = schema_samples(params, cfg.scenery, cfg.n, cfg.cn, &cfg.times, cfg.replicates, key)?;
    Ok(Outcome {
        csv: write_samples(cfg, "replicate,t,g", &samples),
        summary: format!(
            "schema: {} replicates of G_n with n={} c_n={} ({})",
            cfg.replicates,
            cfg.n,
            cfg.cn,
            cfg.scenery.name()
        ),
        passed: true,
    })
}

fn ecf_check(cfg: &RunConfig, params: &ModelParams, limit: LimitConfig, key: StreamKey) -> Result<Outcome, CliError> {
    let t = *cfg.times.last().expect("validated nonempty");
    if t == 0.0 {
        return Err(CliError::Usage("ecf-check needs a positive evaluation time".into()));
    }
    let ex = estimate_ex(params, &[1.0], &[t], limit, cfg.oracle_replicates, key.role(Role::Oracle))?;
    let samples = schema_samples(params, cfg.scenery, cfg.n, cfg.cn, &[t], cfg.replicates, key)?;
    let e = ecf(&column(&samples, 0), &cfg.u)?;
    let (target, target_se) = limit_cf_target(params, &ex, &cfg.u);
    let cmp = cf_compare_with_target_se(&e, &target, &target_se)?;
    let mut csv = Csv::new(cfg, "u,ecf_re,ecf_se,target,z");
    csv.comment(format!("t={t} oracle_mean_x={} oracle_se_x={}", ex.mean, ex.se));
    for i in 0..cfg.u.len() {
        csv.row(&fields![cfg.u[i], e.re[i], e.se[i], target[i], cmp.z[i]]);
    }
    let passed = cmp.passes();
    Ok(Outcome {
        csv: csv.text,
        summary: format!(
            "ecf-check: G_n({t}) n={} c_n={} M={} E[X]={:.4}±{:.4} max|z|={:.3} -> {}",
            cfg.n,
            cfg.cn,
            cfg.replicates,
            ex.mean,
            ex.se,
            cmp.max_abs_z,
            if passed { "PASS" } else { "FAIL" }
        ),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg(args: &[&str]) -> RunConfig {
        let mut argv = vec!["rwrs"];
        argv.extend_from_slice(args);
        parse_config(argv, None).unwrap()
    }

    #[test]
    fn walk_csv_shape() {
        let out = execute(&cfg(&["walk", "--n", "10"])).unwrap();
        let body: Vec<&str> = out.csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "k,increment,position,site");
        assert_eq!(body.len(), 12);
        assert!(body[1].starts_with("0,0,0,0"));
    }

    #[test]
    fn rwrs_last_z_matches_summary() {
        let out = execute(&cfg(&["rwrs", "--n", "50", "--beta", "1.5"])).unwrap();
        let last = out.csv.lines().last().unwrap();
        let z: f64 = last.split(',').nth(4).unwrap().parse().unwrap();
        assert!(out.summary.contains(&format!("Z_n={z}")));
    }

    #[test]
    fn small_schema_runs() {
        let out = execute(&cfg(&["schema", "--n", "64", "--cn", "2", "--replicates", "3"])).unwrap();
        let rows = out.csv.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, 1 + 3 * 2);
    }

    #[test]
    fn small_delta_and_gamma_run() {
        let d = execute(&cfg(&["delta", "--m", "128", "--bins", "32", "--replicates", "2", "--times", "0,1"])).unwrap();
        let zero_rows: Vec<&str> = d.csv.lines().filter(|l| l.contains(",0,")).collect();
        assert_eq!(zero_rows.len(), 2);
        assert!(zero_rows.iter().all(|l| l.ends_with(",0")));
        let g = execute(&cfg(&["gamma", "--m", "128", "--bins", "32", "--replicates", "2", "--cn", "3"])).unwrap();
        assert!(g.csv.contains("replicate,t,gamma"));
    }

    #[test]
    fn small_ks_and_ecf_runs() {
        let k = execute(&cfg(&["ks-stat", "--n", "128", "--m", "128", "--bins", "32", "--replicates", "20", "--times", "1"])).unwrap();
        assert!(k.summary.starts_with("ks-stat"));
        let e = execute(&cfg(&[
            "ecf-check", "--n", "64", "--cn", "2", "--m", "128", "--bins", "32", "--replicates", "20",
            "--oracle-replicates", "20", "--times", "1",
        ]))
        .unwrap();
        let rows: Vec<&str> = e.csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "u,ecf_re,ecf_se,target,z");
        assert_eq!(rows.len(), 4);
    }

    #[test]
    fn jobs_do_not_change_bytes() {
        let a = execute(&cfg(&["schema", "--n", "64", "--cn", "3", "--replicates", "16", "--jobs", "1"])).unwrap();
        let b = execute(&cfg(&["schema", "--n", "64", "--cn", "3", "--replicates", "16", "--jobs", "4"])).unwrap();
        assert_eq!(a.csv, b.csv);
    }
}
