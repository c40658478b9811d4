//! Run configuration: command-line flags over an optional TOML file over
//! environment and built-in defaults, resolved into a fully explicit
//! [`Job`] before any computation starts.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize};

use crate::dynamics::log_time_grid;
use crate::error::{Error, Result};
use crate::geometry::{IndexConvention, ProfileKind, ProfileSpec};
use crate::spectral::{DEFAULT_LONG_LIVED_THRESHOLD, DEFAULT_T_REF};
use crate::sweep;

pub const OUT_DIR_ENV: &str = "WGLOC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";

/// A list of reals, written `a,b,c` or `start:stop:count`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealGrid(pub Vec<f64>);

/// A list of array sizes, written `a,b,c` or `start:stop:step`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SizeGrid(pub Vec<usize>);

fn grid_error(text: &str, why: impl fmt::Display) -> Error {
    Error::config("grid", format!("cannot read `{text}`: {why}"))
}

impl FromStr for RealGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| grid_error(s, e));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, count] => {
                let count: usize = count.trim().parse().map_err(|e| grid_error(s, e))?;
                Ok(RealGrid(sweep::linspace(
                    parse(start)?,
                    parse(stop)?,
                    count,
                )))
            }
            [_] => s.split(',').map(parse).collect::<Result<_>>().map(RealGrid),
            _ => Err(grid_error(s, "expected a comma list or start:stop:count")),
        }
    }
}

impl FromStr for SizeGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| grid_error(s, e));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => {
                let step = parse(step)?;
                if step == 0 {
                    return Err(grid_error(s, "step must be >= 1"));
                }
                Ok(SizeGrid(
                    (parse(start)?..=parse(stop)?).step_by(step).collect(),
                ))
            }
            [_] => s.split(',').map(parse).collect::<Result<_>>().map(SizeGrid),
            _ => Err(grid_error(s, "expected a comma list or start:stop:step")),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridText<T> {
    List(Vec<T>),
    Text(String),
}

impl<'de> Deserialize<'de> for RealGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match GridText::<f64>::deserialize(d)? {
            GridText::List(v) => Ok(RealGrid(v)),
            GridText::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl<'de> Deserialize<'de> for SizeGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match GridText::<usize>::deserialize(d)? {
            GridText::List(v) => Ok(SizeGrid(v)),
            GridText::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Every settable key. Used both for command-line flags and for the TOML
/// file, where keys are spelled the same way (`xi-pi`, `t-ref`, ...).
#[derive(Args, Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// linear, single-gaussian or double-gaussian [default: single-gaussian]
    #[arg(long)]
    pub profile: Option<ProfileKind>,
    /// Number of emitters [default: 101]
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    /// Spacing phase xi in units of pi [default: 0.15]
    #[arg(long, allow_negative_numbers = true)]
    pub xi_pi: Option<f64>,
    /// Profile amplitude [default: 0.05]
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Gaussian width [default: 0.2 single, 0.075 double]
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Site placement: endpoint, (mu-1)/(N-1); or fractional, mu/N [default: endpoint]
    #[arg(long)]
    pub index_convention: Option<IndexConvention>,
    /// Reference time for weights, profiles and P(t_ref) [default: 1e4]
    #[arg(long, allow_negative_numbers = true)]
    pub t_ref: Option<f64>,
    /// Weight above which a mode counts as long-lived [default: 1e-3]
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Disorder strength [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub wbar: Option<f64>,
    /// Disorder seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disorder realization index for single-point runs [default: 0]
    #[arg(long)]
    pub realization: Option<u64>,
    /// Disorder realizations per grid point [default: 100 scan-disorder, 1 scan-size]
    #[arg(long, allow_negative_numbers = true)]
    pub realizations: Option<i64>,
    /// First time of the logarithmic output grid [default: 0.1]
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    /// Last time of the logarithmic output grid [default: 1e4]
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Points in the output time grid [default: 400]
    #[arg(long, allow_negative_numbers = true)]
    pub points: Option<i64>,
    /// Spacings in units of pi [default: 0.1,0.15,0.2 single; 0.15,0.25,0.35 double]
    #[arg(long)]
    pub xi_list: Option<RealGrid>,
    /// Profile amplitudes [default: 0:0.1:25]
    #[arg(long)]
    pub eta_grid: Option<RealGrid>,
    /// Gaussian widths [default: 0.02:0.4:25]
    #[arg(long)]
    pub sigma_grid: Option<RealGrid>,
    /// Disorder strengths [default: 0:1:11 scan-disorder, 0 scan-size]
    #[arg(long)]
    pub wbar_list: Option<RealGrid>,
    /// Array sizes [default: 51:501:10]
    #[arg(long)]
    pub n_list: Option<SizeGrid>,
    /// Output directory [default: $WGLOC_OUT_DIR, else ./out]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    pub threads: Option<usize>,
}

macro_rules! keyed_fields {
    ($($field:ident),* $(,)?) => {
        impl Params {
            /// `self` wherever set, `base` elsewhere.
            pub fn over(self, base: Params) -> Params {
                Params { $($field: self.$field.or(base.$field)),* }
            }

            /// Keys with a value, in kebab-case.
            pub fn set_keys(&self) -> Vec<String> {
                let mut keys = Vec::new();
                $(if self.$field.is_some() {
                    keys.push(stringify!($field).replace('_', "-"));
                })*
                keys
            }
        }
    };
}

keyed_fields!(
    profile,
    n,
    xi_pi,
    eta,
    sigma,
    index_convention,
    t_ref,
    threshold,
    wbar,
    seed,
    realization,
    realizations,
    t_min,
    t_max,
    points,
    xi_list,
    eta_grid,
    sigma_grid,
    wbar_list,
    n_list,
    out_dir,
    threads,
);

#[derive(Parser, Debug)]
#[command(
    name = "wgloc",
    version,
    about = "Localization and trapping in waveguide-coupled emitter arrays"
)]
pub struct Cli {
    /// TOML file with default values for any key; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Evolve the symmetric state: P(t), the profile at t-ref and mode weights
    Evolve(Params),
    /// Eigenmodes of one array with their weights at t-ref
    Modes(Params),
    /// P(t), profiles and modes for a list of spacings
    ScanSpacing(Params),
    /// Dominant-mode decay over an eta by sigma grid
    ScanGeometry(Params),
    /// Disorder ensembles over a list of strengths
    ScanDisorder(Params),
    /// P(t-ref) and mode counts over array size and disorder strength
    ScanSize(Params),
    /// Repeat the run recorded in a manifest and compare checksums
    Rerun {
        manifest: PathBuf,
        /// Output directory [default: $WGLOC_OUT_DIR, else ./out]
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Modes,
    ScanSpacing,
    ScanGeometry,
    ScanDisorder,
    ScanSize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Modes => "modes",
            Command::ScanSpacing => "scan-spacing",
            Command::ScanGeometry => "scan-geometry",
            Command::ScanDisorder => "scan-disorder",
            Command::ScanSize => "scan-size",
        }
    }

    /// Keys accepted by the command, from flags or the file.
    pub fn keys(self) -> Vec<&'static str> {
        const COMMON: [&str; 5] = ["profile", "index-convention", "t-ref", "out-dir", "threads"];
        let own: &'static [&'static str] = match self {
            Command::Evolve => &[
                "n",
                "xi-pi",
                "eta",
                "sigma",
                "wbar",
                "seed",
                "realization",
                "threshold",
                "t-min",
                "t-max",
                "points",
            ],
            Command::Modes => &[
                "n",
                "xi-pi",
                "eta",
                "sigma",
                "wbar",
                "seed",
                "realization",
                "threshold",
            ],
            Command::ScanSpacing => &[
                "n",
                "xi-list",
                "eta",
                "sigma",
                "threshold",
                "t-min",
                "t-max",
                "points",
            ],
            Command::ScanGeometry => &["n", "xi-pi", "eta-grid", "sigma-grid"],
            Command::ScanDisorder => &[
                "n",
                "xi-pi",
                "eta",
                "sigma",
                "wbar-list",
                "realizations",
                "seed",
                "threshold",
                "t-min",
                "t-max",
                "points",
            ],
            Command::ScanSize => &[
                "xi-pi",
                "eta",
                "sigma",
                "n-list",
                "wbar-list",
                "realizations",
                "seed",
                "threshold",
            ],
        };
        [COMMON.as_slice(), own].concat()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        log_time_grid(self.t_min, self.t_max, self.points)
    }
}

/// One array, one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PointJob {
    pub profile: ProfileSpec,
    pub index_convention: IndexConvention,
    pub n: usize,
    pub xi_pi: f64,
    pub wbar: f64,
    pub seed: u64,
    pub realization: u64,
    pub t_ref: f64,
    pub threshold: f64,
    pub times: Option<TimeGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpacingJob {
    pub profile: ProfileSpec,
    pub index_convention: IndexConvention,
    pub n: usize,
    pub xi_list: Vec<f64>,
    pub t_ref: f64,
    pub threshold: f64,
    pub times: TimeGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GeometryJob {
    pub profile: ProfileKind,
    pub index_convention: IndexConvention,
    pub n: usize,
    pub xi_pi: f64,
    pub eta_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub t_ref: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DisorderJob {
    pub profile: ProfileSpec,
    pub index_convention: IndexConvention,
    pub n: usize,
    pub xi_pi: f64,
    pub wbar_list: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub t_ref: f64,
    pub threshold: f64,
    pub times: TimeGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SizeJob {
    pub profile: ProfileSpec,
    pub index_convention: IndexConvention,
    pub xi_pi: f64,
    pub n_list: Vec<usize>,
    pub wbar_list: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub t_ref: f64,
    pub threshold: f64,
}

/// A fully resolved run. This is what the manifest records and what
/// `rerun` executes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Evolve(PointJob),
    Modes(PointJob),
    ScanSpacing(SpacingJob),
    ScanGeometry(GeometryJob),
    ScanDisorder(DisorderJob),
    ScanSize(SizeJob),
}

impl Job {
    pub fn command(&self) -> Command {
        match self {
            Job::Evolve(_) => Command::Evolve,
            Job::Modes(_) => Command::Modes,
            Job::ScanSpacing(_) => Command::ScanSpacing,
            Job::ScanGeometry(_) => Command::ScanGeometry,
            Job::ScanDisorder(_) => Command::ScanDisorder,
            Job::ScanSize(_) => Command::ScanSize,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Evolve(j) | Job::Modes(j) => Some(j.seed),
            Job::ScanDisorder(j) => Some(j.seed),
            Job::ScanSize(j) => Some(j.seed),
            Job::ScanSpacing(_) | Job::ScanGeometry(_) => None,
        }
    }
}

/// Where and how to run; not part of the recorded job.
#[derive(Clone, Debug, PartialEq)]
pub struct Runtime {
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

pub fn read_config_file(path: &std::path::Path) -> Result<Params> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::config("config", e.message().to_string()))
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite, got {v}")))
    }
}

fn at_least(key: &str, v: f64, min: f64) -> Result<f64> {
    if finite(key, v)? < min {
        return Err(Error::config(key, format!("must be >= {min}, got {v}")));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if finite(key, v)? <= 0.0 {
        return Err(Error::config(key, format!("must be > 0, got {v}")));
    }
    Ok(v)
}

fn count(key: &str, v: i64, min: i64) -> Result<usize> {
    if v < min {
        return Err(Error::config(key, format!("must be >= {min}, got {v}")));
    }
    Ok(v as usize)
}

fn real_list(
    key: &str,
    grid: Option<RealGrid>,
    default: Vec<f64>,
    check: fn(&str, f64) -> Result<f64>,
) -> Result<Vec<f64>> {
    let v = grid.map_or(default, |g| g.0);
    if v.is_empty() {
        return Err(Error::config(key, "grid is empty"));
    }
    for &x in &v {
        check(key, x)?;
    }
    Ok(v)
}

fn nonneg(key: &str, v: f64) -> Result<f64> {
    at_least(key, v, 0.0)
}

/// Merges flags over the file, checks that every given key applies to the
/// command, fills defaults and validates every value.
pub fn resolve(
    command: Command,
    flags: Params,
    file: Option<Params>,
    env_out_dir: Option<PathBuf>,
) -> Result<(Job, Runtime)> {
    let p = flags.over(file.unwrap_or_default());
    let allowed = command.keys();
    for key in p.set_keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::config(
                &key,
                format!("does not apply to `{}`", command.name()),
            ));
        }
    }

    let kind = p.profile.unwrap_or(ProfileKind::SingleGaussian);
    if kind == ProfileKind::Linear {
        for key in ["eta", "sigma"] {
            if p.set_keys().iter().any(|k| k == key) {
                return Err(Error::config(key, "does not apply to the linear profile"));
            }
        }
    }
    let default_sigma = if kind == ProfileKind::DoubleGaussian {
        0.075
    } else {
        0.2
    };
    let profile = match kind {
        ProfileKind::Linear => ProfileSpec::linear(),
        _ => ProfileSpec {
            kind,
            eta: nonneg("eta", p.eta.unwrap_or(0.05))?,
            sigma: positive("sigma", p.sigma.unwrap_or(default_sigma))?,
        },
    };
    let convention = p.index_convention.unwrap_or_default();
    let n = count("n", p.n.unwrap_or(sweep::DEFAULT_N as i64), 1)?;
    let default_xi = match (command, kind) {
        (Command::ScanGeometry, ProfileKind::DoubleGaussian) => 0.25,
        _ => 0.15,
    };
    let xi_pi = finite("xi-pi", p.xi_pi.unwrap_or(default_xi))?;
    let t_ref = nonneg("t-ref", p.t_ref.unwrap_or(DEFAULT_T_REF))?;
    let threshold = nonneg(
        "threshold",
        p.threshold.unwrap_or(DEFAULT_LONG_LIVED_THRESHOLD),
    )?;
    let wbar = nonneg("wbar", p.wbar.unwrap_or(0.0))?;
    let seed = p.seed.unwrap_or(0);
    let realization = p.realization.unwrap_or(0);

    let times = TimeGrid {
        t_min: positive("t-min", p.t_min.unwrap_or(0.1))?,
        t_max: positive("t-max", p.t_max.unwrap_or(DEFAULT_T_REF))?,
        points: count("points", p.points.unwrap_or(400), 2)?,
    };
    if times.t_max <= times.t_min {
        return Err(Error::config(
            "t-max",
            format!("must exceed t-min ({})", times.t_min),
        ));
    }

    let job = match command {
        Command::Evolve | Command::Modes => {
            let point = PointJob {
                profile,
                index_convention: convention,
                n,
                xi_pi,
                wbar,
                seed,
                realization,
                t_ref,
                threshold,
                times: (command == Command::Evolve).then_some(times),
            };
            if command == Command::Evolve {
                Job::Evolve(point)
            } else {
                Job::Modes(point)
            }
        }
        Command::ScanSpacing => {
            let default = match kind {
                ProfileKind::DoubleGaussian => vec![0.15, 0.25, 0.35],
                _ => vec![0.1, 0.15, 0.2],
            };
            Job::ScanSpacing(SpacingJob {
                profile,
                index_convention: convention,
                n,
                xi_list: real_list("xi-list", p.xi_list, default, finite)?,
                t_ref,
                threshold,
                times,
            })
        }
        Command::ScanGeometry => {
            if kind == ProfileKind::Linear {
                return Err(Error::config(
                    "profile",
                    "a geometry map needs a Gaussian profile",
                ));
            }
            Job::ScanGeometry(GeometryJob {
                profile: kind,
                index_convention: convention,
                n,
                xi_pi,
                eta_grid: real_list("eta-grid", p.eta_grid, sweep::default_eta_grid(), nonneg)?,
                sigma_grid: real_list(
                    "sigma-grid",
                    p.sigma_grid,
                    sweep::default_sigma_grid(),
                    positive,
                )?,
                t_ref,
            })
        }
        Command::ScanDisorder => Job::ScanDisorder(DisorderJob {
            profile,
            index_convention: convention,
            n,
            xi_pi,
            wbar_list: real_list("wbar-list", p.wbar_list, sweep::default_wbar_grid(), nonneg)?,
            realizations: count("realizations", p.realizations.unwrap_or(100), 1)?,
            seed,
            t_ref,
            threshold,
            times,
        }),
        Command::ScanSize => {
            let n_list = p.n_list.map_or_else(sweep::default_n_grid, |g| g.0);
            if n_list.is_empty() {
                return Err(Error::config("n-list", "grid is empty"));
            }
            if n_list.contains(&0) {
                return Err(Error::config("n-list", "every size must be >= 1"));
            }
            if n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config("n-list", "sizes must be strictly increasing"));
            }
            Job::ScanSize(SizeJob {
                profile,
                index_convention: convention,
                xi_pi,
                n_list,
                wbar_list: real_list("wbar-list", p.wbar_list, vec![0.0], nonneg)?,
                realizations: count("realizations", p.realizations.unwrap_or(1), 1)?,
                seed,
                t_ref,
                threshold,
            })
        }
    };

    if p.threads == Some(0) {
        return Err(Error::config("threads", "must be >= 1"));
    }
    let runtime = Runtime {
        out_dir: p
            .out_dir
            .or(env_out_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        threads: p.threads,
    };
    Ok((job, runtime))
}
