//! Run configuration: command-line flags layered over an optional
//! `key = value` file, the `RWRS_SEED` environment variable and defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rwrs_core::SceneryKind;

use crate::CliError;

pub const SEED_ENV: &str = "RWRS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// One walk: increments, positions and sites.
    Walk,
    /// One walk in random scenery: sites, rewards and Z.
    Rwrs,
    /// V_n, R_n and scaled L_n across n = 2^8..2^14 with log-log slopes.
    Scaling,
    /// Draws of the walk statistic X_n next to draws of its limit X.
    KsStat,
    /// Draws of Δ(t) from fBm local time and stable noise.
    Delta,
    /// Draws of Γ_n(t), the normalized sum of cn copies of Δ.
    Gamma,
    /// Draws of G_n(t), the normalized sum of cn walks in random scenery.
    Schema,
    /// ECF of G_n(t) against the limit characteristic function.
    EcfCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Walk => "walk",
            Command::Rwrs => "rwrs",
            Command::Scaling => "scaling",
            Command::KsStat => "ks-stat",
            Command::Delta => "delta",
            Command::Gamma => "gamma",
            Command::Schema => "schema",
            Command::EcfCheck => "ecf-check",
        }
    }
}

const AFTER_HELP: &str = "\
CSV output (after `#` header lines with the resolved configuration):
  walk       k,increment,position,site
  rwrs       k,position,site,scenery,z
  scaling    n,mean_Vn,se_Vn,mean_Rn,se_Rn,median_Ln_scaled,slope_Vn,slope_Rn
  ks-stat    replicate,x_n,x_limit
  delta      replicate,t,delta
  gamma      replicate,t,gamma
  schema     replicate,t,g
  ecf-check  u,ecf_re,ecf_se,target,z

Config file: one `key = value` per line, `#` starts a comment. Keys are the
long flag names (hurst, beta, sigma, n, cn, m, bins, replicates,
oracle-replicates, times, u, thetas, seed, scenery, output, jobs, assert).
Flags override the file; RWRS_SEED overrides the default seed.

Exit codes: 0 success, 1 usage error, 2 numerical failure,
3 failed check (scaling / ecf-check with --assert).";

#[derive(Debug, Parser)]
#[command(name = "rwrs", version, about = "Dependent walks in heavy-tailed random scenery", after_help = AFTER_HELP)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Hurst index H in (0, 1) [default: 0.5]
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Stability index beta in (0, 2] [default: 2]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Scenery scale sigma > 0 [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Walk time scale n [default: 2048]
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of independent copies c_n [default: 32]
    #[arg(long)]
    pub cn: Option<usize>,
    /// fBm grid points per unit time [default: 4096]
    #[arg(long)]
    pub m: Option<usize>,
    /// Spatial bins of the local-time estimator [default: 512]
    #[arg(long)]
    pub bins: Option<usize>,
    /// Monte Carlo replicates M [default: 500]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// fBm paths used to estimate E[X] in ecf-check [default: 2000]
    #[arg(long)]
    pub oracle_replicates: Option<usize>,
    /// Comma-separated evaluation times [default: 0.5,1]
    #[arg(long)]
    pub times: Option<String>,
    /// Comma-separated ECF frequencies [default: 0.5,1,2]
    #[arg(long)]
    pub u: Option<String>,
    /// Comma-separated weights, one per time (ks-stat) [default: all 1]
    #[arg(long)]
    pub thetas: Option<String>,
    /// Master seed [default: 0, or RWRS_SEED]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scenery law: exact-stable or symmetric-pareto [default: exact-stable]
    #[arg(long)]
    pub scenery: Option<String>,
    /// Output CSV path [default: stdout]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads; results do not depend on it [default: all cores]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Exit with code 3 when the run's checks fail (scaling, ecf-check)
    #[arg(long)]
    pub assert: bool,
    /// Configuration file with `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub hurst: f64,
    pub beta: f64,
    pub sigma: f64,
    pub n: usize,
    pub cn: usize,
    pub m: usize,
    pub bins: usize,
    pub replicates: usize,
    pub oracle_replicates: usize,
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub thetas: Option<Vec<f64>>,
    pub seed: u64,
    pub scenery: SceneryKind,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub assert: bool,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            hurst: 0.5,
            beta: 2.0,
            sigma: 1.0,
            n: 2048,
            cn: 32,
            m: 4096,
            bins: 512,
            replicates: 500,
            oracle_replicates: 2000,
            times: vec![0.5, 1.0],
            u: vec![0.5, 1.0, 2.0],
            thetas: None,
            seed: 0,
            scenery: SceneryKind::ExactStable,
            output: None,
            jobs: None,
            assert: false,
        }
    }

    /// Weights per time, defaulting to all ones.
    pub fn thetas(&self) -> Vec<f64> {
        self.thetas.clone().unwrap_or_else(|| vec![1.0; self.times.len()])
    }

    /// `key=value` lines describing everything that determines the output.
    pub fn header_lines(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        vec![
            format!("command={}", self.command.name()),
            format!("hurst={}", self.hurst),
            format!("beta={}", self.beta),
            format!("sigma={}", self.sigma),
            format!("n={}", self.n),
            format!("cn={}", self.cn),
            format!("m={}", self.m),
            format!("bins={}", self.bins),
            format!("replicates={}", self.replicates),
            format!("oracle_replicates={}", self.oracle_replicates),
            format!("times={}", list(&self.times)),
            format!("u={}", list(&self.u)),
            format!("thetas={}", list(&self.thetas())),
            format!("seed={}", self.seed),
            format!("scenery={}", self.scenery.name()),
            format!("assert={}", self.assert),
        ]
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return usage(format!("--hurst {} must lie in (0, 1)", self.hurst));
        }
        if !(self.beta > 0.0 && self.beta <= 2.0) {
            return usage(format!("--beta {} must lie in (0, 2]", self.beta));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return usage(format!("--sigma {} must be positive", self.sigma));
        }
        if self.n < 1 {
            return usage("--n must be at least 1".into());
        }
        if self.cn < 1 {
            return usage("--cn must be at least 1".into());
        }
        if self.m < 2 {
            return usage("--m must be at least 2".into());
        }
        if self.bins < 3 {
            return usage("--bins must be at least 3".into());
        }
        if self.replicates < 1 {
            return usage("--replicates must be at least 1".into());
        }
        let needs_se = matches!(self.command, Command::EcfCheck | Command::Scaling | Command::KsStat);
        if needs_se && self.replicates < 2 {
            return usage(format!(
                "{} needs --replicates >= 2 (standard errors are undefined for one sample)",
                self.command.name()
            ));
        }
        if self.command == Command::EcfCheck && self.oracle_replicates < 2 {
            return usage("--oracle-replicates must be at least 2".into());
        }
        if self.times.is_empty() {
            return usage("--times must not be empty".into());
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return usage("--times must be nonnegative".into());
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return usage("--times must be sorted".into());
        }
        if matches!(self.command, Command::Delta | Command::Gamma | Command::KsStat)
            && self.times.iter().all(|&t| t == 0.0)
        {
            return usage("--times needs a positive time".into());
        }
        if self.u.is_empty() || self.u.iter().any(|u| !u.is_finite()) {
            return usage("--u must be a nonempty list of finite frequencies".into());
        }
        if let Some(th) = &self.thetas {
            if th.len() != self.times.len() {
                return usage(format!("--thetas has {} entries for {} times", th.len(), self.times.len()));
            }
        }
        if self.scenery == SceneryKind::SymmetricPareto && self.beta >= 2.0 {
            return usage("symmetric-pareto scenery needs --beta < 2".into());
        }
        if self.jobs == Some(0) {
            return usage("--jobs must be at least 1".into());
        }
        Ok(())
    }
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{key}: `{p}` is not a number")))
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse::<T>()
        .map_err(|_| CliError::Usage(format!("{key}: invalid value `{s}`")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::Usage(format!("{key}: invalid boolean `{other}`"))),
    }
}

fn parse_scenery(s: &str) -> Result<SceneryKind, CliError> {
    s.trim().parse().map_err(|e: rwrs_core::Error| CliError::Usage(e.to_string()))
}

/// Parse `key = value` lines; `#` starts a comment. Keys may use `-` or `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{}`", lineno + 1, k.trim())));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

const KNOWN_KEYS: &[&str] = &[
    "hurst",
    "beta",
    "sigma",
    "n",
    "cn",
    "m",
    "bins",
    "replicates",
    "oracle-replicates",
    "times",
    "u",
    "thetas",
    "seed",
    "scenery",
    "output",
    "jobs",
    "assert",
];

fn apply_file(cfg: &mut RunConfig, file: &BTreeMap<String, String>) -> Result<(), CliError> {
    for (k, v) in file {
        match k.as_str() {
            "hurst" => cfg.hurst = parse_value(k, v)?,
            "beta" => cfg.beta = parse_value(k, v)?,
            "sigma" => cfg.sigma = parse_value(k, v)?,
            "n" => cfg.n = parse_value(k, v)?,
            "cn" => cfg.cn = parse_value(k, v)?,
            "m" => cfg.m = parse_value(k, v)?,
            "bins" => cfg.bins = parse_value(k, v)?,
            "replicates" => cfg.replicates = parse_value(k, v)?,
            "oracle-replicates" => cfg.oracle_replicates = parse_value(k, v)?,
            "times" => cfg.times = parse_list(k, v)?,
            "u" => cfg.u = parse_list(k, v)?,
            "thetas" => cfg.thetas = Some(parse_list(k, v)?),
            "seed" => cfg.seed = parse_value(k, v)?,
            "scenery" => cfg.scenery = parse_scenery(v)?,
            "output" => cfg.output = Some(PathBuf::from(v)),
            "jobs" => cfg.jobs = Some(parse_value(k, v)?),
            "assert" => cfg.assert = parse_bool(k, v)?,
            _ => unreachable!("keys checked in parse_config_text"),
        }
    }
    Ok(())
}

fn apply_flags(cfg: &mut RunConfig, a: &Args) -> Result<(), CliError> {
    macro_rules! take {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    take!(hurst, beta, sigma, n, cn, m, bins, replicates, oracle_replicates, seed);
    if let Some(t) = &a.times {
        cfg.times = parse_list("--times", t)?;
    }
    if let Some(u) = &a.u {
        cfg.u = parse_list("--u", u)?;
    }
    if let Some(th) = &a.thetas {
        cfg.thetas = Some(parse_list("--thetas", th)?);
    }
    if let Some(s) = &a.scenery {
        cfg.scenery = parse_scenery(s)?;
    }
    if let Some(o) = &a.output {
        cfg.output = Some(o.clone());
    }
    if a.jobs.is_some() {
        cfg.jobs = a.jobs;
    }
    if a.assert {
        cfg.assert = true;
    }
    Ok(())
}

/// Resolve parsed flags, with `env_seed` standing in for `RWRS_SEED`.
pub fn resolve(args: &Args, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::defaults(args.command);
    if let Some(s) = env_seed {
        cfg.seed = parse_value(SEED_ENV, s)?;
    }
    if let Some(path) = &args.config {
        let file = read_config_file(path)?;
        apply_file(&mut cfg, &file)?;
    }
    apply_flags(&mut cfg, args)?;
    cfg.validate()?;
    Ok(cfg)
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Parse `argv` (including the program name) into a validated configuration.
pub fn parse_config<I, T>(argv: I, env_seed: Option<&str>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(CliError::from_clap)?;
    resolve(&args, env_seed)
}
